"""Export the scikit-learn breast-cancer data for the UCI sweep configs.

Writes data/breast_cancer.csv (30 feature columns plus a 0/1 label, with
label 1 = malignant) in the dataset CSV layout, which is what
configs/gbt_uci_T.json and configs/nn_uci_T.json expect.
"""

from pathlib import Path

import numpy as np
from sklearn.datasets import load_breast_cancer

from smoothcal import Dataset, save_csv

raw = load_breast_cancer()
# sklearn encodes malignant as 0; flip so the positive label marks malignancy
labels = 1 - raw.target
ds = Dataset(np.asarray(raw.data, dtype=float), labels.astype(int))

out = Path("data")
out.mkdir(exist_ok=True)
path = out / "breast_cancer.csv"
save_csv(ds, path)
print(f"wrote {path}: {ds.n} samples, {ds.dim} features, {int(labels.sum())} positives")
print("now e.g.: smoothcal sweep --config configs/gbt_uci_T_depth3.json --outdir out_uci/")
