"""Greedy forward wrapper feature-subset selection."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .classifiers import ClassifierSpec
from .data import Dataset
from .validation import FoldPlan, cross_validate


@dataclass(frozen=True)
class FssStep:
    attribute: int
    accuracy: float
    accepted: bool  # strictly improved on the best accuracy so far


@dataclass
class FssTrace:
    steps: list = field(default_factory=list)
    attribute_names: list = field(default_factory=list)

    @property
    def selected(self):
        """Attributes up to and including the last accepted step."""
        last = max((i for i, s in enumerate(self.steps) if s.accepted), default=-1)
        return [s.attribute for s in self.steps[:last + 1]]

    @property
    def best_accuracy(self):
        acc = [s.accuracy for s in self.steps if s.accepted]
        return acc[-1] if acc else 0.0

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "attribute", "name", "accuracy", "accepted"])
            for i, s in enumerate(self.steps, 1):
                name = self.attribute_names[s.attribute] if self.attribute_names else str(s.attribute)
                w.writerow([i, s.attribute, name, f"{s.accuracy:.6f}", int(s.accepted)])


def greedy_fss(data: Dataset, spec: ClassifierSpec, plan: FoldPlan, patience=1,
               max_features=None, n_jobs=1, progress=None) -> FssTrace:
    """Add, at each step, the attribute whose inclusion gives the best cross-validated accuracy.

    A step is accepted when it strictly beats the best accuracy so far. The
    search keeps walking through non-improving steps and stops after
    ``patience`` of them in a row. Ties go to the lowest attribute index.
    """
    d = data.X.shape[1]
    limit = d if max_features is None else min(d, max_features)
    trace = FssTrace(attribute_names=list(data.attribute_names))
    chosen = []
    best = -1.0
    misses = 0

    def score(a):
        return cross_validate(data.columns(chosen + [a]), plan, spec).accuracy

    pool = ThreadPoolExecutor(n_jobs) if n_jobs and n_jobs > 1 else None
    try:
        while len(chosen) < limit and misses < patience:
            candidates = [a for a in range(d) if a not in chosen]
            scores = list(pool.map(score, candidates)) if pool else [score(a) for a in candidates]
            # sequential reduction: first maximum = lowest attribute index
            i = max(range(len(candidates)), key=lambda i: (scores[i], -candidates[i]))
            attr, acc = candidates[i], scores[i]
            accepted = acc > best
            trace.steps.append(FssStep(attr, acc, accepted))
            chosen.append(attr)
            if accepted:
                best = acc
                misses = 0
            else:
                misses += 1
            if progress:
                progress(len(trace.steps), attr, acc, accepted)
    finally:
        if pool:
            pool.shutdown()
    return trace
