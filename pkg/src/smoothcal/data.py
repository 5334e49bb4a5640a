"""Toy data generators, CSV loading, and seeded train/test splitting.

Two synthetic distributions are provided: a pair of overlapping
class-conditional Gaussians in the plane, and a "mirrored" dataset in which
class 1 reuses the negated base vectors of class 0 so the classes are nearly
point-symmetric.  Class counts are exactly n/2 each (the population classes
are equiprobable; fixing counts removes a nuisance source of variance).
"""

import csv
from dataclasses import dataclass

import numpy as np

from .rng import normals, uniform_stream

__all__ = [
    "Dataset",
    "SplitSpec",
    "CsvLoadError",
    "gen_gaussian_toy",
    "gen_mirrored_toy",
    "load_csv",
    "save_csv",
    "split",
    "standardize",
]

# Class-conditional parameters of the planar Gaussian toy problem.
GAUSSIAN_TOY_MEAN0 = (-1.3, -1.0)
GAUSSIAN_TOY_STD0 = (1.2 * 1.3, 1.2)
GAUSSIAN_TOY_MEAN1 = (1.0, 1.3)
GAUSSIAN_TOY_STD1 = (1.2, 1.2 * 1.3)

MIRRORED_TOY_SHIFT = 0.1


class CsvLoadError(ValueError):
    """Raised when a CSV file cannot be parsed into a Dataset."""


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix (n, d) with binary labels (n,)."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.ascontiguousarray(np.asarray(self.features, dtype=float))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {features.shape}")
        if labels.ndim != 1 or len(labels) != len(features):
            raise ValueError("labels must be 1-D and aligned with features")
        if len(features) == 0:
            raise ValueError("dataset must contain at least one sample")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must lie in {0, 1}")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class SplitSpec:
    """Sizes and seed of a disjoint train/test split."""

    n_train: int
    n_test: int
    seed: int

    def __post_init__(self):
        if self.n_train <= 0 or self.n_test <= 0:
            raise ValueError("n_train and n_test must be positive")


def _require_even(n: int) -> int:
    n = int(n)
    if n <= 0 or n % 2 != 0:
        raise ValueError(f"n must be a positive even integer, got {n}")
    return n


def gen_gaussian_toy(n: int, seed: int) -> Dataset:
    """Two overlapping planar Gaussians with exactly n/2 samples per class.

    Class 0 has mean (-1.3, -1) and per-axis std (1.56, 1.2); class 1 has
    mean (1, 1.3) and per-axis std (1.2, 1.56).  Samples are ordered class 0
    first, then class 1.
    """
    n = _require_even(n)
    half = n // 2
    z0 = normals(uniform_stream(seed, "gaussian-toy/class0"), 2 * half).reshape(half, 2)
    z1 = normals(uniform_stream(seed, "gaussian-toy/class1"), 2 * half).reshape(half, 2)
    x0 = z0 * np.array(GAUSSIAN_TOY_STD0) + np.array(GAUSSIAN_TOY_MEAN0)
    x1 = z1 * np.array(GAUSSIAN_TOY_STD1) + np.array(GAUSSIAN_TOY_MEAN1)
    features = np.vstack([x0, x1])
    labels = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(half, dtype=np.int64)])
    return Dataset(features, labels)


def gen_mirrored_toy(n: int, sigma: float = 0.05, tau: float = 0.01, seed: int = 0) -> Dataset:
    """Mirrored toy data: class 1 negates class 0's shared base vectors.

    Sample i of class 0 is Z_i + (0.1, 0.1) + noise and sample i of class 1
    is -Z_i + (-0.1, -0.1) + noise, with Z_i ~ N(0, sigma^2 I) shared between
    the classes and independent N(0, tau^2 I) jitter per sample.  sigma or
    tau may be zero (degenerate, noise-free); negative values are rejected.
    """
    n = _require_even(n)
    if sigma < 0 or tau < 0:
        raise ValueError("sigma and tau must be nonnegative")
    half = n // 2
    z = normals(uniform_stream(seed, "mirrored-toy/base"), 2 * half).reshape(half, 2) * sigma
    eps0 = normals(uniform_stream(seed, "mirrored-toy/noise0"), 2 * half).reshape(half, 2) * tau
    eps1 = normals(uniform_stream(seed, "mirrored-toy/noise1"), 2 * half).reshape(half, 2) * tau
    shift = np.array([MIRRORED_TOY_SHIFT, MIRRORED_TOY_SHIFT])
    x0 = z + shift + eps0
    x1 = -z - shift + eps1
    features = np.vstack([x0, x1])
    labels = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(half, dtype=np.int64)])
    return Dataset(features, labels)


def load_csv(path, label_column, positive_label: str) -> Dataset:
    """Load a headered CSV into a Dataset.

    ``label_column`` is a header name or a 0-based column index.  Cells equal
    to ``positive_label`` map to 1, everything else to 0.  All remaining
    columns are parsed as floats; row order is preserved.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [row for row in rows if row]  # ignore completely blank lines
    if not rows:
        raise CsvLoadError(f"{path}: file is empty")
    header = rows[0]
    if isinstance(label_column, int):
        if not 0 <= label_column < len(header):
            raise CsvLoadError(f"{path}: label column index {label_column} out of range")
        label_idx = label_column
    else:
        if label_column not in header:
            raise CsvLoadError(f"{path}: label column '{label_column}' not found in header {header}")
        label_idx = header.index(label_column)
    feature_idx = [j for j in range(len(header)) if j != label_idx]
    if not feature_idx:
        raise CsvLoadError(f"{path}: no feature columns besides the label column")
    if len(rows) == 1:
        raise CsvLoadError(f"{path}: no data rows after the header")

    features = np.empty((len(rows) - 1, len(feature_idx)))
    labels = np.empty(len(rows) - 1, dtype=np.int64)
    for i, row in enumerate(rows[1:], start=2):  # 1-based line numbers incl. header
        if len(row) != len(header):
            raise CsvLoadError(f"{path}: row {i} has {len(row)} cells, expected {len(header)}")
        for k, j in enumerate(feature_idx):
            try:
                features[i - 2, k] = float(row[j])
            except ValueError:
                raise CsvLoadError(
                    f"{path}: row {i}, column '{header[j]}': could not parse '{row[j]}' as a number"
                ) from None
        labels[i - 2] = 1 if row[label_idx] == positive_label else 0
    return Dataset(features, labels)


def save_csv(dataset: Dataset, path) -> None:
    """Write a Dataset as CSV with columns f0..f{d-1},label."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(dataset.dim)] + ["label"])
        for x, y in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


def split(dataset: Dataset, spec: SplitSpec):
    """Disjoint train/test subsets drawn by a seeded shuffle."""
    if spec.n_train + spec.n_test > dataset.n:
        raise ValueError(
            f"requested {spec.n_train}+{spec.n_test} samples from a dataset of {dataset.n}"
        )
    perm = uniform_stream(spec.seed, "split").permutation(dataset.n)
    train_idx = perm[: spec.n_train]
    test_idx = perm[spec.n_train : spec.n_train + spec.n_test]
    return dataset.subset(train_idx), dataset.subset(test_idx)


def standardize(train: Dataset, test: Dataset):
    """Center/scale both sets with statistics computed on the train set only.

    Features with zero variance on the train set are centered but not scaled.
    Returns (train, test, (mean, std)) where std is the raw per-feature
    population standard deviation (zeros kept as zeros).
    """
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    divisor = np.where(std > 0, std, 1.0)
    train_f = (train.features - mean) / divisor
    test_f = (test.features - mean) / divisor
    return Dataset(train_f, train.labels), Dataset(test_f, test.labels), (mean, std)
