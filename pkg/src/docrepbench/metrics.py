"""Classification evaluation: accuracy, per-class P/R/F1, one-vs-rest AUROC.

AUROC comes from the midrank Mann-Whitney statistic (probability that a
random positive outscores a random negative, ties counted half), which is
identical to trapezoidal ROC integration but robust to heavy ties.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class ConfusionMatrix:
    labels: list[str]
    counts: np.ndarray  # row = true label, column = predicted label


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    auroc: float | None  # None when the class has no positives or no negatives


@dataclass
class EvaluationReport:
    model_name: str
    task_name: str
    accuracy: float
    per_class: dict[str, ClassMetrics]


def accuracy(y_true: list[str], y_pred: list[str]) -> float:
    if len(y_true) != len(y_pred):
        raise ValueError(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if not y_true:
        raise ValueError("empty label lists")
    return sum(t == p for t, p in zip(y_true, y_pred)) / len(y_true)


def confusion_matrix(y_true: list[str], y_pred: list[str], labels: list[str]) -> ConfusionMatrix:
    index = {lbl: i for i, lbl in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=int)
    for t, p in zip(y_true, y_pred):
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(labels=list(labels), counts=counts)


def per_class_prf(
    y_true: list[str], y_pred: list[str], labels: list[str]
) -> dict[str, tuple[float, float, float]]:
    """Per-class (precision, recall, F1), zero where a denominator is zero."""
    observed = set(y_true) | set(y_pred)
    missing = observed - set(labels)
    if missing:
        raise ValueError(f"labels {sorted(missing)} appear in data but not in label list")
    out = {}
    for label in labels:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == label and p == label)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != label and p == label)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[label] = (precision, recall, f1)
    return out


def auroc_ovr(scores: np.ndarray, positive: np.ndarray) -> float:
    """One-vs-rest AUROC of a score column via midranks.

    scores: per-row score of the class of interest; positive: boolean mask
    of rows truly in that class. Requires at least one positive and one
    negative row.
    """
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = int((~positive).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC undefined without both positives and negatives")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum = float(ranks[positive].sum())
    u_statistic = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u_statistic / (n_pos * n_neg)


def evaluate(
    model_name: str,
    task_name: str,
    y_true: list[str],
    y_pred: list[str],
    proba: np.ndarray,
    labels: list[str],
) -> EvaluationReport:
    """Full per-class report from predictions and vote distributions.

    proba columns align with labels. Classes absent from the test set get
    auroc None; their precision/recall/F1 fall back to the zero guards.
    """
    prf = per_class_prf(y_true, y_pred, labels)
    true_arr = np.array(y_true)
    per_class = {}
    for j, label in enumerate(labels):
        positive = true_arr == label
        if positive.any() and (~positive).any():
            auc = auroc_ovr(proba[:, j], positive)
        else:
            auc = None
        p, r, f1 = prf[label]
        per_class[label] = ClassMetrics(precision=p, recall=r, f1=f1, auroc=auc)
    return EvaluationReport(
        model_name=model_name,
        task_name=task_name,
        accuracy=accuracy(y_true, y_pred),
        per_class=per_class,
    )


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "model": report.model_name,
        "task": report.task_name,
        "accuracy": report.accuracy,
        "per_class": {
            label: {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "auroc": m.auroc,
            }
            for label, m in sorted(report.per_class.items())
        },
    }


def report_from_dict(payload: dict) -> EvaluationReport:
    per_class = {
        label: ClassMetrics(
            precision=m["precision"], recall=m["recall"], f1=m["f1"], auroc=m["auroc"]
        )
        for label, m in payload["per_class"].items()
    }
    return EvaluationReport(
        model_name=payload["model"],
        task_name=payload["task"],
        accuracy=payload["accuracy"],
        per_class=per_class,
    )


def write_report_json(report: EvaluationReport, path: str | Path, header: dict | None = None) -> None:
    payload = report_to_dict(report)
    payload.update(header or {})
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_report_csv(report: EvaluationReport, path: str | Path, header: dict | None = None) -> None:
    """Per-class rows: class, precision, recall, F1, AUROC, accuracy."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(["class", "precision", "recall", "f1", "auroc", "accuracy"])
        for label, m in sorted(report.per_class.items()):
            writer.writerow(
                [
                    label,
                    repr(m.precision),
                    repr(m.recall),
                    repr(m.f1),
                    "" if m.auroc is None else repr(m.auroc),
                    repr(report.accuracy),
                ]
            )
