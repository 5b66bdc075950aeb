"""Logical assessment of a prediction against inaccurate targets.

The pipeline has three pure stages.  Facts are narrated from the targets
alone: a high-recall target vouches for its negatives, a high-precision
target vouches for its positives.  Consistencies count how the prediction
agrees with each fact.  Metrics condense those counts into
precision/recall-style fractions.  ``evaluate`` is exactly the
composition of the three stages, with no hidden state.

Each stage dispatches on a named rule-set carried by :class:`LafConfig`,
so new tasks can register their own narration or metric rules without
forking the pipeline.  The bundled ``tsfbc-v1`` rule-set implements the
two-target segmentation instantiation: one high-recall and one
high-precision target, three consistencies (logical false positives,
true positives, false negatives), and seven metrics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

from .masks import (
    BinaryMask,
    DimensionMismatchError,
    intersect_pos_neg_count,
    intersect_positive_count,
)

__all__ = [
    "TargetRole",
    "InaccurateTargetSet",
    "FactKind",
    "LogicalFact",
    "ConsistencyKind",
    "LogicalConsistency",
    "LamReport",
    "LafConfig",
    "LafError",
    "MissingRoleError",
    "narrate_facts",
    "estimate_consistencies",
    "build_metrics",
    "evaluate",
]


class LafError(ValueError):
    """Rule-set contract violation (bad roles, bad consistency mix, ...)."""


class MissingRoleError(LafError):
    """The selected narration rule-set needs a target role that is absent."""


class TargetRole(Enum):
    HIGH_RECALL = "high_recall"
    HIGH_PRECISION = "high_precision"


class FactKind(Enum):
    NEGATIVES_ARE_TRUE_NEGATIVES = "negatives_are_true_negatives"
    POSITIVES_ARE_TRUE_POSITIVES = "positives_are_true_positives"


class ConsistencyKind(Enum):
    LOGICALLY_FALSE_POSITIVE = "logically_false_positive"
    LOGICALLY_TRUE_POSITIVE = "logically_true_positive"
    LOGICALLY_FALSE_NEGATIVE = "logically_false_negative"


@dataclass(frozen=True)
class InaccurateTargetSet:
    """Ordered (mask, role) pairs sharing one set of dimensions."""

    targets: tuple[tuple[BinaryMask, TargetRole], ...]

    def __post_init__(self):
        if not self.targets:
            raise LafError("target set must contain at least one target")
        first = self.targets[0][0]
        for mask, _ in self.targets[1:]:
            if mask.width != first.width or mask.height != first.height:
                raise DimensionMismatchError(first, mask)

    @classmethod
    def of(cls, *targets: tuple[BinaryMask, TargetRole]) -> "InaccurateTargetSet":
        return cls(tuple(targets))

    @classmethod
    def high_recall_high_precision(
        cls, high_recall: BinaryMask, high_precision: BinaryMask
    ) -> "InaccurateTargetSet":
        """The common two-target case, in conventional order."""
        return cls(
            (
                (high_recall, TargetRole.HIGH_RECALL),
                (high_precision, TargetRole.HIGH_PRECISION),
            )
        )

    @property
    def m(self) -> int:
        return len(self.targets)

    @property
    def width(self) -> int:
        return self.targets[0][0].width

    @property
    def height(self) -> int:
        return self.targets[0][0].height

    def mask(self, index: int) -> BinaryMask:
        return self.targets[index][0]

    def roles(self) -> tuple[TargetRole, ...]:
        return tuple(role for _, role in self.targets)


@dataclass(frozen=True)
class LogicalFact:
    """A qualitative statement a target licenses about the true target."""

    kind: FactKind
    target_index: int
    narration: str


@dataclass(frozen=True)
class LogicalConsistency:
    """One counted agreement/disagreement between prediction and a fact."""

    kind: ConsistencyKind
    count: int
    source_fact: int
    narration: str


@dataclass(frozen=True)
class LamReport:
    """Logical confusion counts and the fractions derived from them.

    Any fraction whose denominator is zero is reported as 0.0 and flips
    ``degenerate`` on: a vacuous denominator never claims quality.
    """

    ltp: int
    lfp: int
    lfn: int
    lprecision: float
    lrecall: float
    lf1: float
    lfiou: float
    degenerate: bool

    @classmethod
    def from_counts(cls, ltp: int, lfp: int, lfn: int) -> "LamReport":
        if min(ltp, lfp, lfn) < 0:
            raise LafError("confusion counts must be non-negative")
        degenerate = False
        if ltp + lfp > 0:
            lprecision = ltp / (ltp + lfp)
        else:
            lprecision, degenerate = 0.0, True
        if ltp + lfn > 0:
            lrecall = ltp / (ltp + lfn)
        else:
            lrecall, degenerate = 0.0, True
        if lprecision + lrecall > 0:
            lf1 = 2 * lprecision * lrecall / (lprecision + lrecall)
        else:
            lf1, degenerate = 0.0, True
        if ltp + lfp + lfn > 0:
            lfiou = ltp / (ltp + lfp + lfn)
        else:
            lfiou, degenerate = 0.0, True
        return cls(ltp, lfp, lfn, lprecision, lrecall, lf1, lfiou, degenerate)

    def metric(self, name: str) -> float:
        try:
            return {
                "lprecision": self.lprecision,
                "lrecall": self.lrecall,
                "lf1": self.lf1,
                "lfiou": self.lfiou,
            }[name]
        except KeyError:
            raise LafError(f"unknown metric {name!r}") from None

    def to_json_dict(self) -> dict:
        return {
            "ltp": self.ltp,
            "lfp": self.lfp,
            "lfn": self.lfn,
            "lprecision": round(self.lprecision, 6),
            "lrecall": round(self.lrecall, 6),
            "lf1": round(self.lf1, 6),
            "lfiou": round(self.lfiou, 6),
            "degenerate": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


@dataclass(frozen=True)
class LafConfig:
    """Named rule-sets for the three stages, plus free-form parameters."""

    narration_rules: str = "tsfbc-v1"
    estimation_rules: str = "tsfbc-v1"
    metric_rules: str = "tsfbc-v1"
    params: Mapping[str, object] = field(default_factory=dict)


DEFAULT_CONFIG = LafConfig()


# -- stage 1: fact narration ------------------------------------------------


def _narrate_tsfbc(targets: InaccurateTargetSet, config: LafConfig) -> list[LogicalFact]:
    roles = targets.roles()
    if TargetRole.HIGH_RECALL not in roles:
        raise MissingRoleError("tsfbc-v1 narration requires a high-recall target")
    if TargetRole.HIGH_PRECISION not in roles:
        raise MissingRoleError("tsfbc-v1 narration requires a high-precision target")
    facts = []
    for index, (_, role) in enumerate(targets.targets):
        if role is TargetRole.HIGH_RECALL:
            facts.append(
                LogicalFact(
                    FactKind.NEGATIVES_ARE_TRUE_NEGATIVES,
                    index,
                    f"pixels in the negative areas of target {index + 1} "
                    "(high recall) are most probably true negatives",
                )
            )
        else:
            facts.append(
                LogicalFact(
                    FactKind.POSITIVES_ARE_TRUE_POSITIVES,
                    index,
                    f"pixels in the positive areas of target {index + 1} "
                    "(high precision) are most probably true positives",
                )
            )
    return facts


_NARRATION_RULES: dict[str, Callable[[InaccurateTargetSet, LafConfig], list[LogicalFact]]]
_NARRATION_RULES = {"tsfbc-v1": _narrate_tsfbc}


def narrate_facts(
    targets: InaccurateTargetSet, config: LafConfig = DEFAULT_CONFIG
) -> list[LogicalFact]:
    """Narrate one fact per target, in target order."""
    try:
        rule = _NARRATION_RULES[config.narration_rules]
    except KeyError:
        raise LafError(f"unknown narration rule-set {config.narration_rules!r}") from None
    return rule(targets, config)


# -- stage 2: consistency estimation -----------------------------------------


def _estimate_tsfbc(
    prediction: BinaryMask,
    facts: Sequence[LogicalFact],
    targets: InaccurateTargetSet,
    config: LafConfig,
) -> list[LogicalConsistency]:
    consistencies = []
    for fact_index, fact in enumerate(facts):
        if not 0 <= fact.target_index < targets.m:
            raise LafError(
                f"fact {fact_index} references target {fact.target_index}, "
                f"but the target set has {targets.m} targets"
            )
        target = targets.mask(fact.target_index)
        label = f"target {fact.target_index + 1}"
        if fact.kind is FactKind.NEGATIVES_ARE_TRUE_NEGATIVES:
            consistencies.append(
                LogicalConsistency(
                    ConsistencyKind.LOGICALLY_FALSE_POSITIVE,
                    intersect_pos_neg_count(prediction, target),
                    fact_index,
                    f"predicted positives inside the negative areas of {label} "
                    "are considered logically false positives",
                )
            )
        else:
            consistencies.append(
                LogicalConsistency(
                    ConsistencyKind.LOGICALLY_TRUE_POSITIVE,
                    intersect_positive_count(prediction, target),
                    fact_index,
                    f"predicted positives inside the positive areas of {label} "
                    "are considered logically true positives",
                )
            )
            consistencies.append(
                LogicalConsistency(
                    ConsistencyKind.LOGICALLY_FALSE_NEGATIVE,
                    intersect_pos_neg_count(target, prediction),
                    fact_index,
                    f"predicted negatives inside the positive areas of {label} "
                    "are considered logically false negatives",
                )
            )
    return consistencies


_ESTIMATION_RULES = {"tsfbc-v1": _estimate_tsfbc}


def estimate_consistencies(
    prediction: BinaryMask,
    facts: Sequence[LogicalFact],
    targets: InaccurateTargetSet,
    config: LafConfig = DEFAULT_CONFIG,
) -> list[LogicalConsistency]:
    """Count the prediction's agreement with each narrated fact."""
    if prediction.width != targets.width or prediction.height != targets.height:
        raise DimensionMismatchError(prediction, targets.mask(0))
    try:
        rule = _ESTIMATION_RULES[config.estimation_rules]
    except KeyError:
        raise LafError(f"unknown estimation rule-set {config.estimation_rules!r}") from None
    return rule(prediction, facts, targets, config)


# -- stage 3: metric build ----------------------------------------------------


def _build_tsfbc(
    consistencies: Iterable[LogicalConsistency], config: LafConfig
) -> LamReport:
    counts: dict[ConsistencyKind, int] = {}
    for consistency in consistencies:
        if consistency.kind in counts:
            raise LafError(f"duplicate consistency kind {consistency.kind.value}")
        counts[consistency.kind] = consistency.count
    missing = [k.value for k in ConsistencyKind if k not in counts]
    if missing:
        raise LafError(f"missing consistency kinds: {', '.join(missing)}")
    return LamReport.from_counts(
        counts[ConsistencyKind.LOGICALLY_TRUE_POSITIVE],
        counts[ConsistencyKind.LOGICALLY_FALSE_POSITIVE],
        counts[ConsistencyKind.LOGICALLY_FALSE_NEGATIVE],
    )


_METRIC_RULES = {"tsfbc-v1": _build_tsfbc}


def build_metrics(
    consistencies: Iterable[LogicalConsistency], config: LafConfig = DEFAULT_CONFIG
) -> LamReport:
    """Condense estimated consistencies into a metric report."""
    try:
        rule = _METRIC_RULES[config.metric_rules]
    except KeyError:
        raise LafError(f"unknown metric rule-set {config.metric_rules!r}") from None
    return rule(consistencies, config)


def evaluate(
    prediction: BinaryMask,
    targets: InaccurateTargetSet,
    config: LafConfig = DEFAULT_CONFIG,
) -> LamReport:
    """Run the full pipeline: narrate, estimate, build."""
    facts = narrate_facts(targets, config)
    consistencies = estimate_consistencies(prediction, facts, targets, config)
    return build_metrics(consistencies, config)
