"""Average LLL flop count versus start column for 4x4 and 8x8 channels.

Every k_start is run on the same channel ensemble, so the gain column is a
paired comparison against the classical start.
"""
# %%
from lrmimo.harness import SimConfig, run_gain_experiment

for n_t, ks, trials in ((4, (2, 3, 4, 5), 1000), (8, tuple(range(2, 10)), 300)):
    rows = run_gain_experiment(SimConfig(n_t=n_t, n_r=n_t, k_start_list=ks, trials_per_point=trials))
    print(f"\n{n_t}x{n_t} MIMO, {trials} channels")
    print(f"{'k_start':>7} {'mean flops':>11} {'gain %':>7} {'swaps':>6}")
    for row in rows:
        print(f"{row.k_start:>7} {row.mean_flops:>11.1f} {row.gain_percent:>7.1f} {row.mean_swaps:>6.2f}")

# %% the QR factorization is not part of these totals; a Householder QR of an
# m x m real matrix costs roughly 4/3 m^3 flops and is identical for every k_start.
for m in (8, 16):
    print(f"m={m}: ~{4 * m**3 // 3} flops for QR")
