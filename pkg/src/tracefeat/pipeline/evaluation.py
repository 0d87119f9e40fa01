from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import DataError
from ..learn import (ConfusionMatrix, FssTrace, cross_validate, graph_to_dot, greedy_fss, kfold_plan,
                     metrics, misclassification_graph, write_confusion_csv, write_edge_list,
                     write_metrics_csv)
from .config import PipelineConfig
from .features import cache_to_dataset


@dataclass
class EvaluationReport:
    confusion: ConfusionMatrix
    per_class: list
    accuracy: float
    edges: list
    fold_assignment: list
    attributes: list
    fss: Optional[FssTrace] = None
    files: dict = field(default_factory=dict)


def _check_classes(data, folds):
    if data.n_classes < 2:
        raise DataError(f"evaluation needs at least 2 classes, found {data.n_classes}")
    if folds > len(data):
        raise DataError(f"{folds} folds requested but only {len(data)} instances")
    counts = data.class_counts()
    singles = [data.class_names[i] for i, c in enumerate(counts) if c < 2]
    if singles:
        raise DataError(
            f"class(es) {singles} have a single instance; with {folds}-fold cross-validation such a "
            "class can never be both trained on and tested. Add images or drop the class.")


def run_evaluation(cache_path, config: PipelineConfig, out_dir, fss=False, n_jobs=1,
                   progress=None) -> EvaluationReport:
    """Cross-validate the cached features and write CSV/DOT reports into ``out_dir``.

    With ``fss`` the greedy wrapper search runs first and the reports describe
    the selected attribute subset.
    """
    data = cache_to_dataset(cache_path)
    _check_classes(data, config.folds)
    plan = kfold_plan(len(data), config.folds, config.seed)
    spec = config.classifier_spec()

    trace = None
    columns = list(range(data.X.shape[1]))
    if fss:
        trace = greedy_fss(data, spec, plan, patience=config.fss_patience, n_jobs=n_jobs,
                           progress=progress)
        columns = trace.selected or columns
    subset = data.columns(columns)
    cm = cross_validate(subset, plan, spec)
    per_class, acc = metrics(cm)
    edges = misclassification_graph(cm)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "confusion": out / "confusion.csv",
        "metrics": out / "metrics.csv",
        "graph_dot": out / "graph.dot",
        "graph_edges": out / "edges.csv",
        "folds": out / "folds.csv",
    }
    write_confusion_csv(cm, files["confusion"])
    write_metrics_csv(cm, files["metrics"])
    files["graph_dot"].write_text(graph_to_dot(edges, cm.class_names))
    write_edge_list(edges, cm.class_names, files["graph_edges"])
    with open(files["folds"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "fold"])
        w.writerows(enumerate(int(f) for f in plan.assignment))
    if trace is not None:
        files["fss"] = out / "fss.csv"
        trace.write_csv(files["fss"])
    return EvaluationReport(cm, per_class, acc, edges, plan.assignment.tolist(),
                            [data.attribute_names[i] for i in columns], trace, files)
