"""Run a downscaled iteration sweep and read off the calibration trends.

The committed configs under configs/ reproduce the full desk-scale
experiments (10 seeds each); this demo runs a 3-seed variant so it finishes
in a few seconds, then prints the per-cell means and the Spearman trend
hooks used by the acceptance suite.
"""

import numpy as np

from smoothcal import load_config, run_sweep, trend_correlation, write_sweep_csvs

config = load_config(
    {
        "learner": "gbt",
        "dataset": {"kind": "toy-gaussian"},
        "sweep": {"axis": "T", "grid": [1, 2, 4, 8, 16, 32, 64]},
        "hyperparams": {"w": 0.8, "depth": 3},
        "n_train": 200,
        "n_test": 200,
        "repeats": 3,
    }
)
result = run_sweep(config)
cells_path, summary_path = write_sweep_csvs(result, config, "sweep_demo_out")
print(f"wrote {cells_path} and {summary_path}")

print("\nT     train smCE   test smCE    train loss   test loss")
for T in sorted(set(r["value"] for r in result.rows)):
    row = {}
    for split in ("train", "test"):
        sel = [r for r in result.rows if r["value"] == T and r["split"] == split]
        row[split] = (np.mean([r["smooth_ce"] for r in sel]), np.mean([r["log_loss"] for r in sel]))
    print(f"{T:<5d} {row['train'][0]:.5f}      {row['test'][0]:.5f}      {row['train'][1]:.5f}      {row['test'][1]:.5f}")

print("\nSpearman rho(T, mean train smooth CE):", trend_correlation(result, "smooth_ce", "train"))
print("Spearman rho(T, mean test  smooth CE):", trend_correlation(result, "smooth_ce", "test"))
print("\nfull-scale runs: smoothcal sweep --config configs/gbt_toy_T.json --outdir out/")
