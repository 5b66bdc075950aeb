"""Synthetic-mask laboratory.

Generates a known truth mask (a union of seeded random discs), derives an
inaccurate target pair from it by morphology (dilation keeps recall,
erosion keeps precision, both with a disc structuring element), corrupts
the truth into a prediction with independent per-pixel flip noise, and
compares logical evaluation against the exact confusion counts the known
truth allows.

Everything is driven by the splitmix64 streams of :mod:`lafeval.rng` with
a fixed splitting rule, so identical parameters and seed give
byte-identical masks, and sweep points can run in any order (each point
owns substream ``i`` of the sweep stream):

* truth mask:  substream(seed, 0), two draws per disc (x then y);
* prediction:  substream(seed, 1), one draw per pixel in row-major order;
* sweep point i: gen_prediction with seed substream(substream(seed, 2), i).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .laf import InaccurateTargetSet, LamReport, evaluate
from .masks import (
    BinaryMask,
    intersect_pos_neg_count,
    intersect_positive_count,
)
from .rng import SplitMix64, substream

__all__ = [
    "SynthError",
    "SynthParams",
    "TrueConfusion",
    "SweepPoint",
    "SweepReport",
    "disc_element",
    "gen_true_mask",
    "derive_targets",
    "gen_prediction",
    "true_confusion",
    "spearman_rank_correlation",
    "run_band_sweep",
]

_STREAM_TRUE_MASK = 0
_STREAM_PREDICTION = 1
_STREAM_SWEEP = 2


class SynthError(ValueError):
    """Invalid synthetic parameters."""


@dataclass(frozen=True)
class SynthParams:
    width: int
    height: int
    blob_count: int
    blob_radius: int
    seed: int
    dilate_radius: int = 0
    erode_radius: int = 0
    fp_rate: float = 0.0
    fn_rate: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise SynthError("canvas dimensions must be positive")
        if self.blob_count < 0 or self.blob_radius < 0:
            raise SynthError("blob count and radius must be non-negative")
        if self.dilate_radius < 0 or self.erode_radius < 0:
            raise SynthError("morphology radii must be non-negative")
        for name in ("fp_rate", "fn_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise SynthError(f"{name} must be in [0, 1], got {rate}")


@dataclass(frozen=True)
class TrueConfusion:
    """Pixel confusion counts against a known reference mask."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def disc_element(radius: int) -> np.ndarray:
    """Disc structuring element: offsets with dx^2 + dy^2 <= radius^2."""
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    return dx * dx + dy * dy <= radius * radius


def gen_true_mask(params: SynthParams) -> BinaryMask:
    """Union of seeded random discs; disc centers stay a radius from the
    border so every disc fits the canvas whole."""
    r = params.blob_radius
    if params.blob_count > 0 and (params.width < 2 * r + 1 or params.height < 2 * r + 1):
        raise SynthError(
            f"canvas too small: {params.width}x{params.height} cannot hold "
            f"a disc of radius {r}"
        )
    grid = np.zeros((params.height, params.width), dtype=bool)
    stream = SplitMix64(substream(params.seed, _STREAM_TRUE_MASK))
    ys, xs = np.ogrid[: params.height, : params.width]
    for _ in range(params.blob_count):
        cx = r + stream.next_below(params.width - 2 * r)
        cy = r + stream.next_below(params.height - 2 * r)
        grid |= (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    return BinaryMask.from_array(grid)


def derive_targets(truth: BinaryMask, r1: int, r2: int) -> InaccurateTargetSet:
    """Dilate truth by r1 for the high-recall target, erode by r2 for the
    high-precision one.  Outside the canvas counts as negative, so erosion
    also shrinks at the border."""
    if r1 < 0 or r2 < 0:
        raise SynthError("morphology radii must be non-negative")
    grid = truth.to_array()
    dilated = ndimage.binary_dilation(grid, structure=disc_element(r1))
    eroded = ndimage.binary_erosion(grid, structure=disc_element(r2), border_value=0)
    return InaccurateTargetSet.high_recall_high_precision(
        BinaryMask.from_array(dilated), BinaryMask.from_array(eroded)
    )


def gen_prediction(
    truth: BinaryMask, fp_rate: float, fn_rate: float, seed: int
) -> BinaryMask:
    """Flip each true negative with fp_rate and each true positive with
    fn_rate; one uniform per pixel in row-major order."""
    for name, rate in (("fp_rate", fp_rate), ("fn_rate", fn_rate)):
        if not 0.0 <= rate <= 1.0:
            raise SynthError(f"{name} must be in [0, 1], got {rate}")
    flat = truth.to_array().ravel()
    uniforms = SplitMix64(substream(seed, _STREAM_PREDICTION)).float_block(truth.area)
    flipped = np.where(flat, uniforms < fn_rate, uniforms < fp_rate)
    prediction = flat ^ flipped
    return BinaryMask.from_array(prediction.reshape(truth.height, truth.width))


def true_confusion(prediction: BinaryMask, truth: BinaryMask) -> TrueConfusion:
    tp = intersect_positive_count(prediction, truth)
    fp = intersect_pos_neg_count(prediction, truth)
    fn = intersect_pos_neg_count(truth, prediction)
    return TrueConfusion(tp, fp, fn, truth.area - tp - fp - fn)


# -- sweeps -------------------------------------------------------------------


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1  # 1-based average rank over the tie group
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def spearman_rank_correlation(a: Sequence[float], b: Sequence[float]) -> float | None:
    """Spearman rho with average ranks for ties.

    Returns None when either side is constant (correlation undefined).
    Identical rank vectors short-circuit to exactly 1.0.
    """
    if len(a) != len(b):
        raise ValueError("sequences must have equal length")
    if len(set(a)) <= 1 or len(set(b)) <= 1:
        return None
    ra, rb = _average_ranks(a), _average_ranks(b)
    if ra == rb:
        return 1.0
    n = len(ra)
    mean = (n + 1) / 2
    da = [x - mean for x in ra]
    db = [x - mean for x in rb]
    cov = sum(x * y for x, y in zip(da, db))
    var_a = sum(x * x for x in da)
    var_b = sum(y * y for y in db)
    return cov / math.sqrt(var_a * var_b)


@dataclass(frozen=True)
class SweepPoint:
    fp_rate: float
    fn_rate: float
    true_f1: float
    lf1: float
    lfiou: float
    report: LamReport
    confusion: TrueConfusion


@dataclass(frozen=True)
class SweepReport:
    metric: str
    points: tuple[SweepPoint, ...]
    spearman_lf1: float | None
    spearman_lfiou: float | None
    degenerate: bool

    @property
    def spearman(self) -> float | None:
        return self.spearman_lf1 if self.metric == "lf1" else self.spearman_lfiou

    def to_json_dict(self) -> dict:
        return {
            "points": [
                {
                    "fp_rate": p.fp_rate,
                    "fn_rate": p.fn_rate,
                    "true_f1": round(p.true_f1, 12),
                    "lf1": round(p.lf1, 12),
                    "lfiou": round(p.lfiou, 12),
                }
                for p in self.points
            ],
            "summary": {
                "metric": self.metric,
                "spearman": _round_opt(self.spearman),
                "spearman_lf1": _round_opt(self.spearman_lf1),
                "spearman_lfiou": _round_opt(self.spearman_lfiou),
                "degenerate": self.degenerate,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def _round_opt(value: float | None) -> float | None:
    return None if value is None else round(value, 12)


def run_band_sweep(
    base: SynthParams,
    noise_levels: Sequence[tuple[float, float]],
    metric: str = "lf1",
) -> SweepReport:
    """Evaluate one truth/target pair under several noise levels.

    Each level gets its own prediction stream, so points are independent
    and a parallel run would produce the same report.  A constant metric
    or truth column makes the correlation undefined; that is reported as
    degenerate rather than silently correlated.
    """
    if metric not in ("lf1", "lfiou"):
        raise SynthError(f"metric must be 'lf1' or 'lfiou', got {metric!r}")
    if len(noise_levels) < 2:
        raise SynthError("a sweep needs at least two noise levels")
    truth = gen_true_mask(base)
    targets = derive_targets(truth, base.dilate_radius, base.erode_radius)
    sweep_seed = substream(base.seed, _STREAM_SWEEP)
    points = []
    for i, (fp_rate, fn_rate) in enumerate(noise_levels):
        prediction = gen_prediction(truth, fp_rate, fn_rate, substream(sweep_seed, i))
        confusion = true_confusion(prediction, truth)
        report = evaluate(prediction, targets)
        points.append(
            SweepPoint(
                fp_rate, fn_rate, confusion.f1, report.lf1, report.lfiou,
                report, confusion,
            )
        )
    true_f1s = [p.true_f1 for p in points]
    spearman_lf1 = spearman_rank_correlation([p.lf1 for p in points], true_f1s)
    spearman_lfiou = spearman_rank_correlation([p.lfiou for p in points], true_f1s)
    selected = spearman_lf1 if metric == "lf1" else spearman_lfiou
    return SweepReport(
        metric, tuple(points), spearman_lf1, spearman_lfiou, selected is None
    )
