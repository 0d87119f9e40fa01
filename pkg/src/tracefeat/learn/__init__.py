from .classifiers import (ClassifierSpec, GaussianNB, LinearSVM, gnb_predict, gnb_train,
                          svm_predict, svm_train)
from .data import Dataset, Scaler, fit_scaler, standardize
from .selection import FssStep, FssTrace, greedy_fss
from .validation import (ClassMetrics, ConfusionMatrix, FoldPlan, confusion_from_predictions,
                         cross_validate, graph_to_dot, kfold_plan, metrics, misclassification_graph,
                         read_confusion_csv, write_confusion_csv, write_edge_list, write_metrics_csv)
