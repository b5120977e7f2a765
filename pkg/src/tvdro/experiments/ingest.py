"""CSV ingestion: numeric records to bracket codes on a grid support.

A record column is discretized by half-open brackets of equal width,

    code(v) = 1 + floor((v - lo) / width),

with the top edge v == hi folded into the last bracket so the domain
[lo, hi] is covered exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..distributions import SampleSet, Support, grid_support
from ..errors import EmptyDatasetError


@dataclass(frozen=True)
class DiscretizationRule:
    """Equal-width bracketing of one numeric column onto codes 1..n_codes."""

    column: str
    lo: float
    hi: float
    width: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"bracket range must be finite, got [{self.lo}, {self.hi}]")
        if self.hi <= self.lo:
            raise ValueError(f"bracket range must be increasing, got [{self.lo}, {self.hi}]")
        if not self.width > 0.0 or not math.isfinite(self.width):
            raise ValueError(f"bracket width must be positive, got {self.width}")
        span = (self.hi - self.lo) / self.width
        if abs(span - round(span)) > 1e-9:
            raise ValueError(
                f"width {self.width} does not evenly divide [{self.lo}, {self.hi}]"
            )

    @property
    def n_codes(self) -> int:
        return int(round((self.hi - self.lo) / self.width))

    def code(self, value: float) -> int:
        """Bracket code for value, raising ValueError outside [lo, hi]."""
        if math.isnan(value) or value < self.lo or value > self.hi:
            raise ValueError(
                f"{self.column} value {value} outside [{self.lo}, {self.hi}]"
            )
        if value == self.hi:
            return self.n_codes
        return min(self.n_codes, 1 + int(math.floor((value - self.lo) / self.width)))

    def bracket(self, code: int) -> tuple[float, float]:
        """The [lo, hi) interval represented by a code."""
        if not 1 <= code <= self.n_codes:
            raise ValueError(f"{self.column} code {code} outside 1..{self.n_codes}")
        return self.lo + (code - 1) * self.width, self.lo + code * self.width


def standard_lending_rules() -> list[DiscretizationRule]:
    """Credit score, loan amount, and interest rate brackets for loan records.

    Codes span 5 x 5 x 7, the same grid as the built-in lending scenario,
    so ingested records can be solved against lending_truth directly.
    """
    return [
        DiscretizationRule("credit_score", 600.0, 850.0, 50.0),
        DiscretizationRule("loan_amount", 0.0, 50000.0, 10000.0),
        DiscretizationRule("interest_rate", 0.0, 35.0, 5.0),
    ]


def rules_support(rules: list[DiscretizationRule]) -> Support:
    """Grid support spanned by the code ranges of the given rules."""
    if not rules:
        raise ValueError("at least one discretization rule is required")
    return grid_support([(1, rule.n_codes) for rule in rules])


@dataclass(frozen=True)
class IngestReport:
    """Outcome of a CSV ingestion pass."""

    n_rows: int
    n_kept: int
    bad_rows: tuple[tuple[int, str], ...]

    def summary(self) -> str:
        lines = [f"rows read: {self.n_rows}", f"rows kept: {self.n_kept}"]
        for line_no, reason in self.bad_rows:
            lines.append(f"line {line_no}: {reason}")
        return "\n".join(lines)


class IngestError(ValueError):
    """CSV rows failed to parse; carries the per-row report."""

    def __init__(self, report: IngestReport):
        self.report = report
        super().__init__(
            f"{len(report.bad_rows)} of {report.n_rows} rows failed to parse\n"
            + report.summary()
        )


def ingest_csv(
    path: str,
    rules: list[DiscretizationRule] | None = None,
    *,
    skip_bad_rows: bool = False,
) -> tuple[SampleSet, IngestReport]:
    """Read a CSV of numeric records into samples on the rules' grid support.

    Each row must provide every rule's column.  Bad rows (missing fields,
    non-numeric values, out-of-range values) are reported by file line
    number; they raise IngestError unless skip_bad_rows is set.  A file
    that yields no usable rows raises EmptyDatasetError.
    """
    if rules is None:
        rules = standard_lending_rules()
    support = rules_support(rules)
    sizes = [rule.n_codes for rule in rules]

    indices: list[int] = []
    bad: list[tuple[int, str]] = []
    n_rows = 0
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise EmptyDatasetError(f"{path} has no header row")
        missing = [r.column for r in rules if r.column not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path} is missing columns: {missing}")
        for row in reader:
            n_rows += 1
            line_no = reader.line_num
            try:
                codes = []
                for rule in rules:
                    raw = row[rule.column]
                    if raw is None or raw.strip() == "":
                        raise ValueError(f"{rule.column} is empty")
                    try:
                        value = float(raw)
                    except ValueError:
                        raise ValueError(
                            f"{rule.column} value {raw!r} is not numeric"
                        ) from None
                    codes.append(rule.code(value))
            except ValueError as exc:
                bad.append((line_no, str(exc)))
                continue
            flat = 0
            for code, size in zip(codes, sizes):
                flat = flat * size + (code - 1)
            indices.append(flat)

    report = IngestReport(n_rows, len(indices), tuple(bad))
    if bad and not skip_bad_rows:
        raise IngestError(report)
    if not indices:
        raise EmptyDatasetError(
            f"{path} contains no usable records ({n_rows} rows read)"
        )
    return SampleSet(support, np.array(indices, dtype=np.int64)), report
