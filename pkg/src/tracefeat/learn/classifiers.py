"""Gaussian naive Bayes and one-vs-rest linear SVM.

Both models canonicalise the row order of their training data before fitting,
so a model depends only on the multiset of training rows, never on how the
caller ordered them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError

VAR_FLOOR = 1e-9


def _canonical_order(X, y):
    keys = [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [y]) if keys else np.argsort(y, kind="stable")


def _check_xy(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ContractError(f"bad training shapes X={X.shape}, y={y.shape}")
    if len(y) == 0:
        raise ContractError("empty training set")
    order = _canonical_order(X, y)
    return X[order], y[order]


class GaussianNB:
    def __init__(self, var_floor=VAR_FLOOR):
        self.var_floor = var_floor

    def fit(self, X, y, n_classes=None):
        """``n_classes`` demands every label in ``range(n_classes)`` be present."""
        X, y = _check_xy(X, y)
        if n_classes is not None:
            missing = sorted(set(range(n_classes)) - set(y.tolist()))
            if missing:
                raise ContractError(f"classes without training instances: {missing}")
        self.classes_ = np.unique(y)
        self.theta_ = np.array([X[y == c].mean(axis=0) for c in self.classes_])
        self.var_ = np.array([X[y == c].var(axis=0) for c in self.classes_]) + self.var_floor
        self.log_prior_ = np.log(np.array([np.mean(y == c) for c in self.classes_]))
        return self

    def joint_log_likelihood(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        ll = -0.5 * (np.log(2 * np.pi * self.var_)[None] + (X[:, None, :] - self.theta_[None]) ** 2 / self.var_[None])
        return ll.sum(axis=2) + self.log_prior_

    def predict(self, X):
        # argmax returns the first maximum, i.e. the lowest class index on ties
        return self.classes_[np.argmax(self.joint_log_likelihood(X), axis=1)]


class LinearSVM:
    """One-vs-rest soft-margin linear classifiers.

    Each binary machine minimises ``lam/2 |w|^2 + mean(hinge)`` with
    ``lam = 1 / (C n)``, i.e. the usual ``1/2 |w|^2 + C sum(hinge)`` rescaled.
    Training is seeded mini-batch subgradient descent with step ``1/(lam t)``,
    projection onto the ball of radius ``1/sqrt(lam)`` and averaging of the
    second half of the iterates. The bias is an extra constant input.
    """

    def __init__(self, C=1.0, epochs=200, seed=0, batch_size=64):
        self.C = C
        self.epochs = epochs
        self.seed = seed
        self.batch_size = batch_size

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise ContractError("a linear SVM needs at least 2 classes")
        n = len(X)
        Xa = np.hstack([X, np.ones((n, 1))])
        Y = np.where(y[:, None] == self.classes_[None], 1.0, -1.0)
        lam = 1.0 / (self.C * n)
        radius = 1.0 / np.sqrt(lam)
        batch = min(n, self.batch_size)
        n_batches = -(-n // batch)
        total = self.epochs * n_batches
        avg_from = total // 2

        rng = np.random.default_rng(self.seed)
        W = np.zeros((len(self.classes_), Xa.shape[1]))
        W_sum = np.zeros_like(W)
        t = 0
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for b in range(n_batches):
                idx = perm[b * batch:(b + 1) * batch]
                t += 1
                Xb, Yb = Xa[idx], Y[idx]
                active = (Yb * (Xb @ W.T)) < 1.0
                grad = lam * W - ((active * Yb).T @ Xb) / len(idx)
                W -= grad / (lam * t)
                norms = np.linalg.norm(W, axis=1, keepdims=True)
                W *= np.minimum(1.0, radius / np.maximum(norms, 1e-300))
                if t > avg_from:
                    W_sum += W
        W = W_sum / (total - avg_from)
        self.coef_ = W[:, :-1]
        self.intercept_ = W[:, -1]
        return self

    def decision_function(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return X @ self.coef_.T + self.intercept_

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "svm"  # "svm" or "gnb"
    C: float = 1.0
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("svm", "gnb"):
            raise ContractError(f"unknown classifier {self.kind!r}")

    def build(self):
        if self.kind == "gnb":
            return GaussianNB()
        return LinearSVM(C=self.C, epochs=self.epochs, seed=self.seed)


def gnb_train(train, n_classes=None):
    return GaussianNB().fit(train.X, train.y, n_classes=n_classes)


def gnb_predict(model, vector):
    return int(model.predict(np.atleast_2d(vector))[0])


def svm_train(train, C=1.0, epochs=200, seed=0):
    return LinearSVM(C=C, epochs=epochs, seed=seed).fit(train.X, train.y)


def svm_predict(model, vector):
    return int(model.predict(np.atleast_2d(vector))[0])
