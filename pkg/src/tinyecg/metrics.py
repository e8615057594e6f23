"""Confusion matrix and per-class precision / recall / F1 reporting.

Zero-denominator scores (a class never predicted, or absent from the
truth) are defined as 0 and flagged in the report rather than raised,
since rare classes legitimately occur in the evaluation sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .labels import CLASSES, LABEL_INDEX


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are ground truth, columns are predictions, both in N,S,V,F order."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        n = len(CLASSES)
        if counts.shape != (n, n):
            raise ValueError(f"expected {n}x{n} counts, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def _codes(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.dtype.kind in "iu":
        codes = labels.astype(np.int64)
    else:
        try:
            codes = np.array([LABEL_INDEX[str(l)] for l in labels], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"unknown class label {exc.args[0]!r}") from None
    if codes.size and (codes.min() < 0 or codes.max() >= len(CLASSES)):
        raise ValueError("class codes out of range")
    return codes


def confusion(truth, predicted) -> ConfusionMatrix:
    """Tally (truth, predicted) pairs; accepts label strings or class codes."""
    t, p = _codes(truth), _codes(predicted)
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape} vs {p.shape}")
    n = len(CLASSES)
    counts = np.bincount(t * n + p, minlength=n * n).reshape(n, n)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class EvalReport:
    precision: np.ndarray  # per class
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    flags: tuple[str, ...] = field(default_factory=tuple)


def scores(cm: ConfusionMatrix) -> EvalReport:
    """Precision TP/(TP+FP), recall TP/(TP+FN), F1 = harmonic mean.

    Macro averages weight classes equally; weighted averages use the
    truth support. For single-label evaluation the weighted recall is
    identical to accuracy.
    """
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    tp = np.diag(counts).astype(np.float64)
    pred_totals = counts.sum(axis=0).astype(np.float64)
    support = counts.sum(axis=1).astype(np.float64)

    flags = []

    def ratio(num, den, what):
        out = np.zeros_like(num)
        for i, cls in enumerate(CLASSES):
            if den[i] == 0:
                flags.append(f"{what}({cls}) undefined (0/0), reported as 0")
            else:
                out[i] = num[i] / den[i]
        return out

    precision = ratio(tp, pred_totals, "precision")
    recall = ratio(tp, support, "recall")
    pr = precision + recall
    f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)

    weights = support / total
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        support=support.astype(np.int64),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        weighted_precision=float(weights @ precision),
        weighted_recall=float(weights @ recall),
        weighted_f1=float(weights @ f1),
        accuracy=float(tp.sum() / total),
        flags=tuple(flags),
    )


def format_report(report: EvalReport) -> str:
    """Fixed-width table: one column per class plus the two averages."""
    cols = list(CLASSES) + ["Weighted avg", "Macro avg"]
    widths = [max(10, len(c) + 2) for c in cols]
    head = f"{'':<11}" + "".join(f"{c:>{w}}" for c, w in zip(cols, widths))
    rows = []
    for name, per_class, w_avg, m_avg in (
        ("Precision", report.precision, report.weighted_precision, report.macro_precision),
        ("Recall", report.recall, report.weighted_recall, report.macro_recall),
        ("F1-score", report.f1, report.weighted_f1, report.macro_f1),
    ):
        cells = list(per_class) + [w_avg, m_avg]
        rows.append(
            f"{name:<11}" + "".join(f"{v:>{w}.6f}" for v, w in zip(cells, widths))
        )
    support_cells = [int(s) for s in report.support] + [int(report.support.sum())]
    rows.append(
        f"{'Support':<11}"
        + "".join(f"{v:>{w}}" for v, w in zip(support_cells, widths))
    )
    rows.append(f"{'Accuracy':<11}{report.accuracy:>10.6f}")
    out = [head, *rows]
    if report.flags:
        out.append("notes: " + "; ".join(report.flags))
    return "\n".join(out)


def report_to_csv(report: EvalReport) -> str:
    lines = ["class,precision,recall,f1,support"]
    for i, cls in enumerate(CLASSES):
        lines.append(
            f"{cls},{float(report.precision[i])!r},{float(report.recall[i])!r},"
            f"{float(report.f1[i])!r},{int(report.support[i])}"
        )
    lines.append(
        f"macro,{report.macro_precision!r},{report.macro_recall!r},{report.macro_f1!r},"
    )
    lines.append(
        f"weighted,{report.weighted_precision!r},{report.weighted_recall!r},"
        f"{report.weighted_f1!r},{int(report.support.sum())}"
    )
    lines.append(f"accuracy,{report.accuracy!r},,,")
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvalReport) -> dict:
    return {
        "per_class": {
            cls: {
                "precision": float(report.precision[i]),
                "recall": float(report.recall[i]),
                "f1": float(report.f1[i]),
                "support": int(report.support[i]),
            }
            for i, cls in enumerate(CLASSES)
        },
        "macro": {
            "precision": report.macro_precision,
            "recall": report.macro_recall,
            "f1": report.macro_f1,
        },
        "weighted": {
            "precision": report.weighted_precision,
            "recall": report.weighted_recall,
            "f1": report.weighted_f1,
        },
        "accuracy": report.accuracy,
        "flags": list(report.flags),
    }
