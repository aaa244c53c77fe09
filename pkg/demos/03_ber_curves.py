"""BER of ZF and LR-aided ZF for 16-QAM 4x4, full and shifted LLL.

A lighter run than the desk-scale defaults (500 channels per point). Writes
a CSV, a matplotlib script that plots it and a run manifest to ./results.
"""
# %%
from pathlib import Path

from lrmimo.harness import (
    SNR_CONVENTION,
    SimConfig,
    emit_csv,
    emit_plot_script,
    run_ber_experiment,
    snr_at_ber,
    write_manifest,
)

config = SimConfig(n_t=4, n_r=4, k_start_list=(2, 3, 4), trials_per_point=500)
results = run_ber_experiment(config)

print(SNR_CONVENTION)
for variant in config.variants:
    curve = [p for p in results if p.variant == variant]
    print(f"{variant:>9}: " + "  ".join(f"{p.ber:.2e}" for p in curve))

# %% distance to the full LLL at BER = 1e-2
base = snr_at_ber(results, "LR-ZF-k2")
for k in config.k_start_list[1:]:
    print(f"k_start={k}: {snr_at_ber(results, f'LR-ZF-k{k}') - base:+.2f} dB at BER 1e-2")

# %% persist
out = Path("results")
csv_path = emit_csv(results, out / "demo_ber_4x4.csv")
emit_plot_script(results, out / "demo_ber_4x4_plot.py", csv_path)
write_manifest(out / "demo_ber_4x4_manifest.txt", config, {})
print(f"wrote {csv_path}; run `python {out / 'demo_ber_4x4_plot.py'}` for the figure")
