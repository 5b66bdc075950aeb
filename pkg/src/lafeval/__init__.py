"""Logical assessment of binary-segmentation predictions without
accurate ground truth, plus the proof corpus and synthetic laboratory
that back its guarantees."""

from .laf import (
    InaccurateTargetSet,
    LafConfig,
    LamReport,
    TargetRole,
    build_metrics,
    estimate_consistencies,
    evaluate,
    narrate_facts,
)
from .masks import (
    BinaryMask,
    decode_mask,
    encode_mask,
    intersect_pos_neg_count,
    intersect_positive_count,
)
from .mpe import (
    MethodRecord,
    classify_confidence,
    overall_performance,
    rank_methods,
    select_lmp,
)
from .proofs import check_proof, parse_proof_script, verify_bundled_proofs
from .synth import SynthParams, derive_targets, gen_prediction, gen_true_mask, run_band_sweep
from .tables import reproduce_tables

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "InaccurateTargetSet",
    "LafConfig",
    "LamReport",
    "MethodRecord",
    "SynthParams",
    "TargetRole",
    "build_metrics",
    "check_proof",
    "classify_confidence",
    "decode_mask",
    "derive_targets",
    "encode_mask",
    "estimate_consistencies",
    "evaluate",
    "gen_prediction",
    "gen_true_mask",
    "intersect_pos_neg_count",
    "intersect_positive_count",
    "narrate_facts",
    "overall_performance",
    "parse_proof_script",
    "rank_methods",
    "reproduce_tables",
    "run_band_sweep",
    "select_lmp",
    "verify_bundled_proofs",
]
