"""Two-regime evaluation: merge-and-split versus leave-one-run-out.

S-Acc is plain fraction correct; B-Acc is the mean per-class recall over the
classes actually present in the test labels (absent classes are excluded so
no recall is ever 0/0; the excluded classes are kept on the fold record).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .codec import ClassLabel, decode_label
from .dataset import Dataset, split_cross_run, split_merge_shuffle
from .predictor import PredictorModel, TrainConfig, predict_batch, train

MERGE_SPLIT = "merge_split"
CROSS_RUN = "cross_run"


@dataclass
class FoldResult:
    fold: str
    s_acc: float
    b_acc: float
    recalls: Dict[int, float]  # per class present in the test labels
    confusion: np.ndarray  # rows true class, columns predicted
    test_size: int
    absent_classes: Tuple[int, ...]


@dataclass
class EvalReport:
    regime: str
    num_classes: int
    per_fold: List[FoldResult]
    mean_s_acc: float
    mean_b_acc: float


def standard_accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Fraction of predictions matching labels."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have equal length")
    if predictions.size == 0:
        raise ValueError("cannot score an empty prediction set")
    return float(np.mean(predictions == labels))


def balanced_accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Mean per-class recall over the classes present in labels."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have equal length")
    if predictions.size == 0:
        raise ValueError("cannot score an empty prediction set")
    recalls = []
    for cls in np.unique(labels):
        mask = labels == cls
        recalls.append(float(np.mean(predictions[mask] == cls)))
    return float(np.mean(recalls))


def confusion_matrix(predictions: Sequence[int], labels: Sequence[int], num_classes: int) -> np.ndarray:
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    for pred, true in zip(predictions, labels):
        matrix[true, pred] += 1
    return matrix


def _score_fold(
    fold: str, model: PredictorModel, test: Dataset, num_classes: int
) -> FoldResult:
    features = test.feature_matrix()
    labels = test.label_array()
    predictions = np.argmax(predict_batch(model, features), axis=1)
    matrix = confusion_matrix(predictions, labels, num_classes)
    present = sorted(int(c) for c in np.unique(labels))
    recalls = {
        cls: float(matrix[cls, cls] / matrix[cls].sum()) for cls in present
    }
    absent = tuple(c for c in range(num_classes) if c not in recalls)
    return FoldResult(
        fold=fold,
        s_acc=standard_accuracy(predictions, labels),
        b_acc=balanced_accuracy(predictions, labels),
        recalls=recalls,
        confusion=matrix,
        test_size=len(test),
        absent_classes=absent,
    )


def run_merge_split(
    dataset: Dataset,
    train_cfg: TrainConfig = TrainConfig(),
    fraction: float = 0.8,
    seed: int = 0,
) -> EvalReport:
    """Pool all runs, shuffle, split, train once, evaluate the held-out part."""
    train_set, test_set = split_merge_shuffle(dataset, fraction=fraction, seed=seed)
    model, _ = train(train_set, train_cfg)
    result = _score_fold("80/20", model, test_set, model.num_classes)
    return EvalReport(
        regime=MERGE_SPLIT,
        num_classes=model.num_classes,
        per_fold=[result],
        mean_s_acc=result.s_acc,
        mean_b_acc=result.b_acc,
    )


def run_cross_run(dataset: Dataset, train_cfg: TrainConfig = TrainConfig()) -> EvalReport:
    """One fold per collection run, each holding that run out for test."""
    runs = dataset.runs()
    if len(runs) < 2:
        raise ValueError("cross-run evaluation needs at least 2 distinct runs")
    folds = []
    for held_out in runs:
        train_set, test_set = split_cross_run(dataset, held_out)
        model, _ = train(train_set, train_cfg)
        folds.append(_score_fold(f"run{held_out}", model, test_set, model.num_classes))
    return EvalReport(
        regime=CROSS_RUN,
        num_classes=folds[0].confusion.shape[0],
        per_fold=folds,
        mean_s_acc=float(np.mean([f.s_acc for f in folds])),
        mean_b_acc=float(np.mean([f.b_acc for f in folds])),
    )


def emit_report(report: EvalReport) -> str:
    """Aligned text table, accuracies to 3 decimals, one row per fold plus the mean."""
    title = "Merge & Split Runs" if report.regime == MERGE_SPLIT else "Cross Run"
    lines = [f"Regime: {title}"]
    lines.append(f"{'fold':<10}{'S-Acc':>8}{'B-Acc':>8}{'test':>7}")
    for fold in report.per_fold:
        lines.append(f"{fold.fold:<10}{fold.s_acc:>8.3f}{fold.b_acc:>8.3f}{fold.test_size:>7}")
    if report.per_fold:
        lines.append(f"{'mean':<10}{report.mean_s_acc:>8.3f}{report.mean_b_acc:>8.3f}{'':>7}")
    return "\n".join(lines)


def report_lines(report: EvalReport) -> List[str]:
    """Machine-readable variant: one JSON object per line, header first."""
    n = int(np.log2(report.num_classes))
    lines = [
        json.dumps(
            {
                "version": 1,
                "kind": "eval_report",
                "regime": report.regime,
                "num_classes": report.num_classes,
                "mean_s_acc": report.mean_s_acc,
                "mean_b_acc": report.mean_b_acc,
            }
        )
    ]
    for fold in report.per_fold:
        lines.append(
            json.dumps(
                {
                    "fold": fold.fold,
                    "s_acc": fold.s_acc,
                    "b_acc": fold.b_acc,
                    "test_size": fold.test_size,
                    "recalls": {
                        str(decode_label(ClassLabel(value=cls, n=n))): rec
                        for cls, rec in sorted(fold.recalls.items())
                    },
                    "absent_classes": list(fold.absent_classes),
                    "confusion": fold.confusion.tolist(),
                }
            )
        )
    return lines
