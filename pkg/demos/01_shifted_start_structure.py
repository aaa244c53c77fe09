"""What a shifted start column does to the LLL output.

Reduce one 4x4 Rayleigh channel (real dimension 8) with the classical start
(k_start = 2) and with k_start = 5, then look at which columns of T and R~
were touched.
"""
# %%
import numpy as np

from lrmimo import ReductionParams, check_unimodular, draw_channel, is_reduced, lll_reduce, unimodular_inverse

np.set_printoptions(precision=3, suppress=True, linewidth=110)
rng = np.random.default_rng(3)
ch = draw_channel(4, 4, rng)
q, r = ch.qr
print("upper triangular R of the real-valued channel:")
print(r)

# %% classical LLL
full = lll_reduce(q, r, ReductionParams(k_start=2))
print(f"\nk_start=2: {full.swap_count} swaps, {full.iteration_count} iterations, {full.ledger.total} flops")
print(full.t.astype(int))

# %% shifted start: columns 1..3 are never touched
shifted = lll_reduce(q, r, ReductionParams(k_start=5))
print(f"\nk_start=5: {shifted.swap_count} swaps, {shifted.iteration_count} iterations, {shifted.ledger.total} flops")
print(shifted.t.astype(int))
print("first three columns of T are identity:", np.array_equal(shifted.t[:, :3], np.eye(8)[:, :3]))
print("first three columns of R~ equal R:   ", np.array_equal(shifted.r_tilde[:, :3], r[:, :3]))

# %% both describe the same lattice as H
for name, out in (("full", full), ("shifted", shifted)):
    rec = out.q_tilde @ out.r_tilde @ unimodular_inverse(out.t)
    err = np.linalg.norm(rec - ch.h_real) / np.linalg.norm(ch.h_real)
    print(f"{name:>8}: unimodular={check_unimodular(out.t)}, reduced from k_start={is_reduced(out.r_tilde, 0.75, out.params.k_start)}, "
          f"reconstruction error={err:.1e}")

# %% where the flops go
for name, out in (("full", full), ("shifted", shifted)):
    events = {e.value: n for e, n in out.ledger.event_counts.items()}
    print(name, events)
