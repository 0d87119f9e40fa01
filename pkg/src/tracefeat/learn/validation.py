"""k-fold cross-validation, confusion matrices and their derived reports."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .classifiers import ClassifierSpec
from .data import Dataset, fit_scaler


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray  # fold index per instance
    seed: int

    def folds(self):
        for f in range(self.k):
            test = np.flatnonzero(self.assignment == f)
            train = np.flatnonzero(self.assignment != f)
            yield train, test


def kfold_plan(n, k=10, seed=0) -> FoldPlan:
    """Seeded shuffle, then deal instances round-robin into ``k`` folds."""
    if not 2 <= k <= n:
        raise ContractError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[perm] = np.arange(n) % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # rows = ground truth, columns = predicted
    class_names: list

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def accuracy(self):
        return float(np.trace(self.counts) / self.total) if self.total else 0.0


@dataclass(frozen=True)
class ClassMetrics:
    name: str
    precision: float
    recall: float
    f_measure: float
    support: int


def confusion_from_predictions(y_true, y_pred, class_names):
    n = len(class_names)
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(counts, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return ConfusionMatrix(counts, list(class_names))


def cross_validate(data: Dataset, plan: FoldPlan, spec: ClassifierSpec = ClassifierSpec(),
                   return_predictions=False):
    """Standardise on each training fold, fit, predict the held-out fold, pool the counts."""
    if len(plan.assignment) != len(data):
        raise ContractError(f"fold plan covers {len(plan.assignment)} instances, dataset has {len(data)}")
    pred = np.empty(len(data), dtype=np.int64)
    for train, test in plan.folds():
        if len(test) == 0:
            continue
        scaler = fit_scaler(data.X[train])
        model = spec.build().fit(scaler.transform(data.X[train]), data.y[train])
        pred[test] = model.predict(scaler.transform(data.X[test]))
    cm = confusion_from_predictions(data.y, pred, data.class_names)
    return (cm, pred) if return_predictions else cm


def metrics(cm: ConfusionMatrix):
    """Per-class precision/recall/F-measure and overall accuracy; 0 where undefined."""
    counts = np.asarray(cm.counts, dtype=np.float64)
    diag = np.diag(counts)
    col = counts.sum(axis=0)
    row = counts.sum(axis=1)
    precision = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    recall = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    denom = precision + recall
    f = np.divide(2 * precision * recall, denom, out=np.zeros_like(diag), where=denom > 0)
    per_class = [ClassMetrics(name, float(p), float(r), float(fm), int(s))
                 for name, p, r, fm, s in zip(cm.class_names, precision, recall, f, row)]
    return per_class, cm.accuracy


def misclassification_graph(cm: ConfusionMatrix):
    """Undirected edges ``(i, j, counts[i, j] + counts[j, i])`` for i < j, zero weights dropped."""
    c = np.asarray(cm.counts)
    edges = []
    for i in range(len(c)):
        for j in range(i + 1, len(c)):
            w = int(c[i, j] + c[j, i])
            if w:
                edges.append((i, j, w))
    return edges


# ---------------------------------------------------------------- exports


def write_confusion_csv(cm: ConfusionMatrix, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["truth\\predicted"] + list(cm.class_names))
        for name, row in zip(cm.class_names, cm.counts):
            w.writerow([name] + [int(v) for v in row])


def read_confusion_csv(path) -> ConfusionMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 2:
        raise ValueError(f"{path}: not a confusion-matrix CSV")
    names = rows[0][1:]
    body = rows[1:]
    if len(body) != len(names) or any(r[0] != n for r, n in zip(body, names)):
        raise ValueError(f"{path}: row labels do not match column labels")
    counts = np.array([[int(v) for v in r[1:]] for r in body], dtype=np.int64)
    return ConfusionMatrix(counts, names)


def write_metrics_csv(cm: ConfusionMatrix, path):
    per_class, acc = metrics(cm)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "precision", "recall", "f_measure", "support"])
        for m in per_class:
            w.writerow([m.name, f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f_measure:.6f}", m.support])
        n = len(per_class)
        w.writerow(["average",
                    f"{sum(m.precision for m in per_class) / n:.6f}",
                    f"{sum(m.recall for m in per_class) / n:.6f}",
                    f"{sum(m.f_measure for m in per_class) / n:.6f}",
                    cm.total])
        w.writerow(["accuracy", f"{acc:.6f}", "", "", cm.total])


def graph_to_dot(edges, class_names, name="misclassification"):
    lines = [f"graph {name} {{"]
    for i, label in enumerate(class_names):
        lines.append(f'  n{i} [label="{label}"];')
    for i, j, w in edges:
        lines.append(f"  n{i} -- n{j} [weight={w}, label={w}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_edge_list(edges, class_names, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "weight"])
        for i, j, wt in edges:
            w.writerow([class_names[i], class_names[j], wt])
