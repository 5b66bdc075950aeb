"""Command-line front end.

Subcommands: ``eval`` (score one prediction against a target pair),
``rank`` (rank methods from a counts file), ``verify-proofs`` (check the
proof corpus), ``synth sweep`` (noise sweep on synthetic masks), and
``reproduce`` (diff recomputed tables against the published ones).

Outputs are machine-readable JSON/TSV and contain no timestamps, so
identical invocations on identical inputs produce byte-identical
artifacts.  Exit codes: 0 success, 1 check failure, 2 usage or input
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .laf import InaccurateTargetSet, LafError, evaluate
from .masks import BinaryMask, MaskError, decode_mask
from .mpe import (
    DEFAULT_TAU_LARGE,
    DEFAULT_TAU_SMALL,
    MethodRecord,
    rank_methods,
    ranking_to_json,
    ranking_to_tsv,
)
from .laf import LamReport
from .proofs import ProofSyntaxError, verify_bundled_proofs
from .synth import SynthError, SynthParams, run_band_sweep
from .tables import read_counts_csv, reproduce_tables, TABLE_IDS

__all__ = ["main", "build_parser"]

_OK, _CHECK_FAILED, _INPUT_ERROR = 0, 1, 2


class _InputError(Exception):
    """One-line diagnostic naming the offending input; exits 2."""


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from exc


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from exc


def _load_mask(path: str, threshold: int) -> BinaryMask:
    try:
        return decode_mask(_read_bytes(path), threshold)
    except MaskError as exc:
        raise _InputError(f"{path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, "utf-8")


# -- subcommands ----------------------------------------------------------


def _cmd_eval(args: argparse.Namespace) -> int:
    prediction = _load_mask(args.pred, args.threshold)
    high_recall = _load_mask(args.target_hr, args.threshold)
    high_precision = _load_mask(args.target_hp, args.threshold)
    shapes = {
        args.pred: prediction,
        args.target_hr: high_recall,
        args.target_hp: high_precision,
    }
    reference = prediction
    for path, mask in shapes.items():
        if (mask.width, mask.height) != (reference.width, reference.height):
            raise _InputError(
                f"{path}: mask is {mask.width}x{mask.height} but {args.pred} "
                f"is {reference.width}x{reference.height}"
            )
    targets = InaccurateTargetSet.high_recall_high_precision(high_recall, high_precision)
    report = evaluate(prediction, targets)
    if args.format == "json":
        _emit(report.to_json(), args.out)
    else:
        _emit(_report_tsv(report), args.out)
    return _OK


def _report_tsv(report: LamReport) -> str:
    d = report.to_json_dict()
    columns = ["ltp", "lfp", "lfn", "lprecision", "lrecall", "lf1", "lfiou", "degenerate"]
    header = "\t".join(columns)
    values = "\t".join(
        f"{d[c]:.6f}" if isinstance(d[c], float) else str(d[c]).lower()
        for c in columns
    )
    return f"{header}\n{values}\n"


def _cmd_rank(args: argparse.Namespace) -> int:
    try:
        counts = read_counts_csv(_read_text(args.counts))
    except ValueError as exc:
        raise _InputError(f"{args.counts}: {exc}") from exc
    records = [
        MethodRecord(c.name, LamReport.from_counts(c.ltp, c.lfp, c.lfn))
        for c in counts
    ]
    ranked = rank_methods(records, args.metric)
    render = ranking_to_json if args.format == "json" else ranking_to_tsv
    _emit(render(ranked, args.metric, args.tau_small, args.tau_large), args.out)
    return _OK


def _cmd_verify_proofs(args: argparse.Namespace) -> int:
    try:
        reports = verify_bundled_proofs(args.corpus)
    except (ProofSyntaxError, FileNotFoundError, OSError) as exc:
        raise _InputError(f"proof corpus: {exc}") from exc
    lines = []
    accepted = 0
    for report in reports:
        lines.append(f"{report.name}: {report.verdict} ({report.step_count} steps)")
        accepted += report.verdict.accepted
    lines.append(f"{accepted}/{len(reports)} accepted")
    _emit("\n".join(lines) + "\n", args.out)
    return _OK if accepted == len(reports) else _CHECK_FAILED


def _cmd_synth_sweep(args: argparse.Namespace) -> int:
    try:
        config = json.loads(_read_text(args.config))
    except json.JSONDecodeError as exc:
        raise _InputError(f"{args.config}: invalid JSON: {exc}") from exc
    try:
        noise_levels = [tuple(level) for level in config.pop("noise_levels")]
        metric = config.pop("metric", "lf1")
        params = SynthParams(**config)
        report = run_band_sweep(params, noise_levels, metric)
    except (KeyError, TypeError, SynthError) as exc:
        raise _InputError(f"{args.config}: {exc}") from exc
    _emit(report.to_json(), args.out)
    return _OK


def _cmd_reproduce(args: argparse.Namespace) -> int:
    counts = None
    if args.counts is not None:
        try:
            counts = read_counts_csv(_read_text(args.counts))
        except ValueError as exc:
            raise _InputError(f"{args.counts}: {exc}") from exc
    try:
        report = reproduce_tables(counts, args.table)
    except ValueError as exc:
        raise _InputError(f"reproduce: {exc}") from exc
    _emit(report.to_tsv(), args.out)
    for name in report.count_mismatches:
        print(f"warning: counts for {name} differ from the bundled data", file=sys.stderr)
    return _OK if report.all_pass else _CHECK_FAILED


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laf",
        description="Logical assessment of segmentation predictions "
        "without accurate ground truth.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="score a prediction against a target pair")
    p_eval.add_argument("--pred", required=True, help="prediction mask (PNG or RLE)")
    p_eval.add_argument("--target-hr", required=True, help="high-recall target mask")
    p_eval.add_argument("--target-hp", required=True, help="high-precision target mask")
    p_eval.add_argument("--threshold", type=int, default=128,
                        help="image positivity threshold (default 128)")
    p_eval.add_argument("--format", choices=("json", "tsv"), default="json")
    p_eval.add_argument("--out", help="output file (default stdout)")
    p_eval.set_defaults(func=_cmd_eval)

    p_rank = sub.add_parser("rank", help="rank methods from a counts CSV")
    p_rank.add_argument("--counts", required=True, help="CSV with method,ltp,lfp,lfn")
    p_rank.add_argument("--metric", choices=("lf1", "lfiou"), default="lf1")
    p_rank.add_argument("--tau-small", type=float, default=DEFAULT_TAU_SMALL)
    p_rank.add_argument("--tau-large", type=float, default=DEFAULT_TAU_LARGE)
    p_rank.add_argument("--format", choices=("json", "tsv"), default="tsv")
    p_rank.add_argument("--out", help="output file (default stdout)")
    p_rank.set_defaults(func=_cmd_rank)

    p_verify = sub.add_parser("verify-proofs", help="check the proof-script corpus")
    p_verify.add_argument("--corpus",
                          help="directory of *.proof files "
                          "(default: $LAF_CORPUS_DIR, then the bundled corpus)")
    p_verify.add_argument("--out", help="output file (default stdout)")
    p_verify.set_defaults(func=_cmd_verify_proofs)

    p_synth = sub.add_parser("synth", help="synthetic-mask experiments")
    synth_sub = p_synth.add_subparsers(dest="synth_command", required=True)
    p_sweep = synth_sub.add_parser("sweep", help="noise sweep against the truth")
    p_sweep.add_argument("--config", required=True,
                         help="flat JSON config (SynthParams fields, noise_levels, metric)")
    p_sweep.add_argument("--out", help="output file (default stdout)")
    p_sweep.set_defaults(func=_cmd_synth_sweep)

    p_repro = sub.add_parser("reproduce", help="diff recomputed tables vs published")
    p_repro.add_argument("--table", choices=TABLE_IDS, required=True)
    p_repro.add_argument("--counts", help="override counts CSV (default: bundled)")
    p_repro.add_argument("--out", help="output file (default stdout)")
    p_repro.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _INPUT_ERROR
    except (MaskError, LafError, SynthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
