from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError


@dataclass
class Dataset:
    """Labelled feature matrix. ``y`` holds indices into ``class_names``."""

    X: np.ndarray
    y: np.ndarray
    class_names: list = field(default_factory=list)
    attribute_names: list = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise ContractError(f"X must be 2D, got shape {self.X.shape}")
        if len(self.y) != len(self.X):
            raise ContractError(f"{len(self.X)} rows but {len(self.y)} labels")
        if not self.class_names:
            self.class_names = [str(c) for c in range(int(self.y.max()) + 1 if len(self.y) else 0)]
        if not self.attribute_names:
            self.attribute_names = [f"a{i}" for i in range(self.X.shape[1])]
        if len(self.attribute_names) != self.X.shape[1]:
            raise ContractError("attribute_names does not match the number of columns")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= len(self.class_names)):
            raise ContractError("labels must index class_names")

    def __len__(self):
        return len(self.y)

    @property
    def n_classes(self):
        return len(self.class_names)

    def rows(self, idx):
        return Dataset(self.X[idx], self.y[idx], list(self.class_names), list(self.attribute_names))

    def columns(self, idx):
        idx = list(idx)
        return Dataset(self.X[:, idx], self.y, list(self.class_names),
                       [self.attribute_names[i] for i in idx])

    def class_counts(self):
        return np.bincount(self.y, minlength=self.n_classes)


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray  # 1 where the training column was constant

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std


def fit_scaler(X) -> Scaler:
    """Per-column z-scoring; constant columns are passed through untouched."""
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        raise ContractError("cannot standardise an empty training set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    const = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return Scaler(mean=np.where(const, 0.0, mean), std=np.where(const, 1.0, std))


def standardize(train: Dataset):
    scaler = fit_scaler(train.X)
    return scaler, Dataset(scaler.transform(train.X), train.y, list(train.class_names),
                           list(train.attribute_names))
