"""Pixel-level evaluation: recall, false-alarm-weighted precision, F1, and
per-event / per-category / macro aggregation."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

DEFAULT_BETA = 0.1  # false alarms down-weighted 1:10 against true anomalies

METRIC_KEYS = ("R", "P_w", "F1")


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class EventScore:
    event_id: str
    category: str
    R: float
    P_w: float
    F1: float

    def as_dict(self) -> dict:
        return {"event_id": self.event_id, "category": self.category,
                "R": self.R, "P_w": self.P_w, "F1": self.F1}


@dataclass
class EvalReport:
    """Scores in points (0-100) per event, per category, and macro means."""

    per_event: list[EventScore]
    per_category: "OrderedDict[str, dict]"
    overall: dict              # mean of category means
    overall_event_mean: dict   # mean over events, category-agnostic
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "per_event": [e.as_dict() for e in self.per_event],
            "per_category": dict(self.per_category),
            "overall": self.overall,
            "overall_event_mean": self.overall_event_mean,
            "config": self.config,
        }


def confusion(pred: np.ndarray, gt: np.ndarray) -> Confusion:
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise ValueError(f"dimension mismatch: {pred.shape} vs {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = int(np.count_nonzero(~pred & ~gt))
    return Confusion(tp=tp, fp=fp, fn=fn, tn=tn)


def scores(c: Confusion, beta: float = DEFAULT_BETA) -> dict:
    """Recall, weighted precision (false alarms scaled by beta), and F1.

    Reported in points (x100). Zero denominators yield zero.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    r = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    p = c.tp / (c.tp + beta * c.fp) if c.tp + beta * c.fp else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return {"R": 100.0 * r, "P_w": 100.0 * p, "F1": 100.0 * f1}


def f1_from_points(r: float, p: float) -> float:
    """F1 in points from recall/precision already in points."""
    return 2 * p * r / (p + r) if p + r else 0.0


def aggregate(event_scores: list[EventScore], config: dict | None = None) -> EvalReport:
    """Macro aggregation: category = mean of its events, overall = mean of
    category means; each metric averaged independently."""
    if not event_scores:
        raise ValueError("need at least one event")
    categories: "OrderedDict[str, list[EventScore]]" = OrderedDict()
    for ev in event_scores:
        categories.setdefault(ev.category, []).append(ev)

    def mean_of(items: list[dict]) -> dict:
        return {k: float(np.mean([it[k] for it in items])) for k in METRIC_KEYS}

    per_category = OrderedDict(
        (cat, mean_of([ev.as_dict() for ev in evs]))
        for cat, evs in categories.items())
    overall = mean_of(list(per_category.values()))
    overall_event_mean = mean_of([ev.as_dict() for ev in event_scores])
    return EvalReport(per_event=list(event_scores), per_category=per_category,
                      overall=overall, overall_event_mean=overall_event_mean,
                      config=dict(config or {}))


def evaluate_event(pred: np.ndarray, gt: np.ndarray, *, event_id: str = "event",
                   category: str = "others", beta: float = DEFAULT_BETA) -> EventScore:
    s = scores(confusion(pred, gt), beta)
    return EventScore(event_id=event_id, category=category, **s)


def format_report(report: EvalReport) -> str:
    """Aligned-column text table: one row per category plus the macro row."""
    rows = [("category", "R", "P_w", "F1", "events")]
    counts: dict[str, int] = {}
    for ev in report.per_event:
        counts[ev.category] = counts.get(ev.category, 0) + 1
    for cat, vals in report.per_category.items():
        rows.append((cat, f"{vals['R']:.2f}", f"{vals['P_w']:.2f}",
                     f"{vals['F1']:.2f}", str(counts[cat])))
    o = report.overall
    rows.append(("average", f"{o['R']:.2f}", f"{o['P_w']:.2f}",
                 f"{o['F1']:.2f}", str(len(report.per_event))))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)
