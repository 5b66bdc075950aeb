"""Method performance evaluation on top of metric reports.

A method's logical performance is a single [0,1] value selected from its
report (the f1-style or IoU-style metric).  Methods are ranked by that
value.  A value only speaks for overall performance when it is small:
overall performance factors as logical * non-logical, so a small logical
factor caps the product, while a large one says nothing about the other
factor.  ``classify_confidence`` encodes that asymmetry with two
thresholds; the defaults (0.5 / 0.75) are this package's choice, not a
calibrated constant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .laf import LafError, LamReport

__all__ = [
    "SELECTABLE_METRICS",
    "MethodRecord",
    "Lmp",
    "Confidence",
    "ConfidenceClass",
    "RankedMethod",
    "select_lmp",
    "rank_values",
    "rank_methods",
    "classify_confidence",
    "overall_performance",
    "ranking_to_tsv",
    "ranking_to_json",
]

SELECTABLE_METRICS = ("lf1", "lfiou")

DEFAULT_TAU_SMALL = 0.5
DEFAULT_TAU_LARGE = 0.75


@dataclass(frozen=True)
class MethodRecord:
    name: str
    report: LamReport


@dataclass(frozen=True)
class Lmp:
    """Logical method performance: one metric value for one method."""

    value: float
    metric: str
    method: str


class Confidence(Enum):
    REASONABLY_REFLECTS_OVERALL = "reasonably_reflects_overall"
    INDETERMINATE = "indeterminate"
    LOGICAL_ONLY = "logical_only"


@dataclass(frozen=True)
class ConfidenceClass:
    label: Confidence
    tau_small: float
    tau_large: float


@dataclass(frozen=True)
class RankedMethod:
    name: str
    value: float
    rank: int


def select_lmp(record: MethodRecord, metric: str = "lf1") -> Lmp:
    """Select the method's performance value from its report."""
    if metric not in SELECTABLE_METRICS:
        raise LafError(
            f"metric must be one of {SELECTABLE_METRICS}, got {metric!r}"
        )
    return Lmp(record.report.metric(metric), metric, record.name)


def rank_values(pairs: Sequence[tuple[str, float]]) -> list[RankedMethod]:
    """Competition-rank (name, value) pairs, descending by value.

    Rank 1 is the largest value.  Ties share the smaller rank and are
    listed alphabetically so output order is deterministic.  Values only
    need ordering and equality, so exact rationals work too.
    """
    if not pairs:
        raise LafError("cannot rank an empty record list")
    names = [name for name, _ in pairs]
    if len(set(names)) != len(names):
        raise LafError("method names must be unique within a ranking run")
    ordered = sorted(pairs, key=lambda pair: (pair[0],))
    ordered.sort(key=lambda pair: pair[1], reverse=True)
    ranked: list[RankedMethod] = []
    for position, (name, value) in enumerate(ordered, start=1):
        if ranked and value == ranked[-1].value:
            rank = ranked[-1].rank
        else:
            rank = position
        ranked.append(RankedMethod(name, value, rank))
    return ranked


def rank_methods(
    records: Sequence[MethodRecord], metric: str = "lf1"
) -> list[RankedMethod]:
    """Rank records by the selected metric, descending (see rank_values)."""
    return rank_values(
        [(record.name, select_lmp(record, metric).value) for record in records]
    )


def classify_confidence(
    lmp: Lmp,
    tau_small: float = DEFAULT_TAU_SMALL,
    tau_large: float = DEFAULT_TAU_LARGE,
) -> ConfidenceClass:
    """Classify what the value can say about overall performance.

    value <= tau_small: small enough that the multiplicative model caps
    overall performance, so the value reasonably reflects it.
    value >= tau_large: only the logical side is known.
    """
    if not (0.0 <= tau_small < tau_large <= 1.0):
        raise LafError(
            f"thresholds must satisfy 0 <= tau_small < tau_large <= 1, "
            f"got {tau_small} and {tau_large}"
        )
    if lmp.value <= tau_small:
        label = Confidence.REASONABLY_REFLECTS_OVERALL
    elif lmp.value >= tau_large:
        label = Confidence.LOGICAL_ONLY
    else:
        label = Confidence.INDETERMINATE
    return ConfidenceClass(label, tau_small, tau_large)


def overall_performance(logical: float, non_logical: float) -> float:
    """Multiplicative overall model: logical value times non-logical value.

    The product never exceeds either factor, which is what makes small
    logical values informative.  The non-logical factor is always an
    explicit input; nothing here estimates it from data.
    """
    for name, value in (("logical", logical), ("non_logical", non_logical)):
        if not 0.0 <= value <= 1.0:
            raise LafError(f"{name} value must be in [0, 1], got {value}")
    return logical * non_logical


# -- serialization -------------------------------------------------------


def _ranking_rows(
    ranked: Sequence[RankedMethod],
    metric: str,
    tau_small: float,
    tau_large: float,
) -> list[dict]:
    rows = []
    for entry in ranked:
        confidence = classify_confidence(
            Lmp(entry.value, metric, entry.name), tau_small, tau_large
        )
        rows.append(
            {
                "method": entry.name,
                "metric": metric,
                "value": round(entry.value, 6),
                "rank": entry.rank,
                "confidence_class": confidence.label.value,
            }
        )
    return rows


def ranking_to_tsv(
    ranked: Sequence[RankedMethod],
    metric: str,
    tau_small: float = DEFAULT_TAU_SMALL,
    tau_large: float = DEFAULT_TAU_LARGE,
) -> str:
    lines = ["method\tmetric\tvalue\trank\tconfidence_class"]
    for row in _ranking_rows(ranked, metric, tau_small, tau_large):
        lines.append(
            f"{row['method']}\t{row['metric']}\t{row['value']:.6f}"
            f"\t{row['rank']}\t{row['confidence_class']}"
        )
    return "\n".join(lines) + "\n"


def ranking_to_json(
    ranked: Sequence[RankedMethod],
    metric: str,
    tau_small: float = DEFAULT_TAU_SMALL,
    tau_large: float = DEFAULT_TAU_LARGE,
) -> str:
    return json.dumps(_ranking_rows(ranked, metric, tau_small, tau_large), indent=2) + "\n"
