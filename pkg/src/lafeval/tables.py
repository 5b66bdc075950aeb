"""Reproduce the two published method-evaluation tables from raw counts.

The bundled data carries, per task, the eleven methods' logical confusion
counts and the published two-decimal percentage cells plus rank column.
Reproduction recomputes every derived cell from the counts with exact
rational arithmetic (round half up to two decimals), re-ranks by both the
f1-style and IoU-style metrics, and diffs against the published values:
percentages must agree within 0.01 percentage points, ranks exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .mpe import rank_values

__all__ = [
    "TABLE_IDS",
    "PERCENT_TOLERANCE",
    "MethodCounts",
    "PublishedRow",
    "ReproCell",
    "ReproductionReport",
    "read_counts_csv",
    "load_bundled_counts",
    "load_published_table",
    "percent_cells",
    "reproduce_tables",
]

TABLE_IDS = ("pre_treatment", "post_treatment")
PERCENT_TOLERANCE = Decimal("0.01")

_RANK_METRICS = ("lf1", "lfiou")
_PERCENT_COLUMNS = ("lprecision", "lrecall", "lf1", "lfiou")


@dataclass(frozen=True)
class MethodCounts:
    name: str
    ltp: int
    lfp: int
    lfn: int


@dataclass(frozen=True)
class PublishedRow:
    name: str
    percents: Mapping[str, Decimal]
    rank: int


@dataclass(frozen=True)
class ReproCell:
    cell: str
    paper_value: Decimal | int
    computed_value: Decimal | int
    delta: Decimal | int
    passed: bool


@dataclass(frozen=True)
class ReproductionReport:
    table_id: str
    rows: tuple[ReproCell, ...]
    count_mismatches: tuple[str, ...]

    @property
    def all_pass(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_tsv(self) -> str:
        lines = ["cell\tpaper_value\tcomputed_value\tdelta\tpass"]
        for row in self.rows:
            lines.append(
                f"{row.cell}\t{row.paper_value}\t{row.computed_value}"
                f"\t{row.delta}\t{'pass' if row.passed else 'fail'}"
            )
        return "\n".join(lines) + "\n"


def _csv_rows(text: str) -> list[dict[str, str]]:
    payload = "\n".join(
        line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")
    )
    return list(csv.DictReader(io.StringIO(payload)))


def read_counts_csv(text: str) -> list[MethodCounts]:
    """Parse a ``method,ltp,lfp,lfn`` counts file (# comments allowed)."""
    rows = _csv_rows(text)
    if not rows:
        raise ValueError("counts file has no data rows")
    counts = []
    for row in rows:
        try:
            counts.append(
                MethodCounts(
                    row["method"], int(row["ltp"]), int(row["lfp"]), int(row["lfn"])
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(
                f"counts file needs columns method,ltp,lfp,lfn: bad row {row!r}"
            ) from exc
    names = [c.name for c in counts]
    if len(set(names)) != len(names):
        raise ValueError("duplicate method name in counts file")
    return counts


def _data_text(filename: str) -> str:
    return resources.files("lafeval").joinpath(f"data/tables/{filename}").read_text("utf-8")


def _check_table_id(table_id: str) -> None:
    if table_id not in TABLE_IDS:
        raise ValueError(f"table must be one of {TABLE_IDS}, got {table_id!r}")


def load_bundled_counts(table_id: str) -> list[MethodCounts]:
    _check_table_id(table_id)
    return read_counts_csv(_data_text(f"{table_id}_counts.csv"))


def load_published_table(table_id: str) -> list[PublishedRow]:
    _check_table_id(table_id)
    rows = []
    for row in _csv_rows(_data_text(f"{table_id}_published.csv")):
        rows.append(
            PublishedRow(
                row["method"],
                {col: Decimal(row[col]) for col in _PERCENT_COLUMNS},
                int(row["rank"]),
            )
        )
    return rows


def _round_half_up_percent(value: Fraction) -> Decimal:
    """Exact round-half-up of ``value`` to a two-decimal percentage."""
    hundredths = value * 10000  # percent with two extra decimal digits
    whole, remainder = divmod(hundredths.numerator, hundredths.denominator)
    if 2 * remainder >= hundredths.denominator:
        whole += 1
    return Decimal(whole).scaleb(-2)


def _fraction_metrics(counts: MethodCounts) -> dict[str, Fraction]:
    ltp, lfp, lfn = counts.ltp, counts.lfp, counts.lfn

    def ratio(num: int, den: int) -> Fraction:
        return Fraction(num, den) if den > 0 else Fraction(0)

    return {
        "lprecision": ratio(ltp, ltp + lfp),
        "lrecall": ratio(ltp, ltp + lfn),
        "lf1": ratio(2 * ltp, 2 * ltp + lfp + lfn),
        "lfiou": ratio(ltp, ltp + lfp + lfn),
    }


def percent_cells(counts: MethodCounts) -> dict[str, Decimal]:
    """The four derived percentage cells for one method's counts."""
    return {
        name: _round_half_up_percent(value)
        for name, value in _fraction_metrics(counts).items()
    }


def reproduce_tables(
    counts: Sequence[MethodCounts] | None = None,
    table_id: str = "pre_treatment",
) -> ReproductionReport:
    """Recompute one table from counts and diff it against the published one.

    ``counts`` defaults to the bundled counts; externally supplied counts
    must cover exactly the published methods, and any row that differs
    from the bundled counts is flagged in ``count_mismatches``.
    """
    _check_table_id(table_id)
    bundled = {c.name: c for c in load_bundled_counts(table_id)}
    published = {row.name: row for row in load_published_table(table_id)}
    if counts is None:
        counts = list(bundled.values())

    by_name = {c.name: c for c in counts}
    missing = sorted(set(published) - set(by_name))
    if missing:
        raise ValueError(f"counts missing methods: {', '.join(missing)}")
    unknown = sorted(set(by_name) - set(published))
    if unknown:
        raise ValueError(f"counts name unknown methods: {', '.join(unknown)}")
    count_mismatches = tuple(
        name for name in bundled if by_name[name] != bundled[name]
    )

    order = [c.name for c in load_bundled_counts(table_id)]
    rows: list[ReproCell] = []
    for name in order:
        cells = percent_cells(by_name[name])
        for column in _PERCENT_COLUMNS:
            paper = published[name].percents[column]
            computed = cells[column]
            delta = computed - paper
            rows.append(
                ReproCell(
                    f"{name}/{column}", paper, computed, delta,
                    abs(delta) <= PERCENT_TOLERANCE,
                )
            )

    for metric in _RANK_METRICS:
        exact = [(name, _fraction_metrics(by_name[name])[metric]) for name in order]
        ranked = {entry.name: entry.rank for entry in rank_values(exact)}
        for name in order:
            paper_rank = published[name].rank
            computed_rank = ranked[name]
            rows.append(
                ReproCell(
                    f"{name}/rank_by_{metric}",
                    paper_rank,
                    computed_rank,
                    computed_rank - paper_rank,
                    computed_rank == paper_rank,
                )
            )

    return ReproductionReport(table_id, tuple(rows), count_mismatches)
