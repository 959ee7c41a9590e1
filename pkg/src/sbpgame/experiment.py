"""Batch experiments over seeded random suites, written as versioned CSV."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable, Sequence

from .costs import CostRule, format_rule
from .enumeration import EquilibriumReport, measure
from .equilibrium import is_nash, is_strong_nash
from .errors import ParseError
from .instances import random_suite
from .model import Instance, format_rational, parse_rational
from .packers import bfd_pack, opt_solve

CSV_VERSION = "sbpgame-experiment v1"
CHECKS = ("pos", "poa_bound", "bfd_ne", "bfd_strong_ne", "bfd_ratio")
BFD_RATIO = Fraction(11, 9)


@dataclass
class ExperimentRecord:
    instance_id: str
    n: int | str
    rule: str
    check: str
    algorithm: str
    bins_used: int | str = ""
    opt_bins: int | str = ""
    is_ne: bool | str = ""
    is_strong_ne: bool | str = ""
    ratio: str = ""
    violation: int | str = 0
    wall_time_ms: str = ""

    def row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(str(v).lower() if isinstance(v, bool) else str(v))
        return out


COLUMNS = [f.name for f in fields(ExperimentRecord)]


@dataclass
class Suite:
    trials: int
    n: int
    grid: int = 12
    seed: int = 0
    rules: Sequence[CostRule] = ()
    checks: Sequence[str] = ("pos", "poa_bound")
    n_min: int | None = None


@dataclass
class ExperimentResult:
    records: list[ExperimentRecord]
    violations: int

    @property
    def aborted(self) -> bool:
        return self.violations > 0


def _ratio(a: int, b: int) -> str:
    return format_rational(Fraction(a, b))


def _check(instance: Instance, rule: CostRule, check: str, opt: int,
           cache: dict, bfd) -> ExperimentRecord:
    rec = ExperimentRecord(instance.name or "", len(instance), format_rule(rule), check, "")
    lam = rule.lam if rule.is_local else None
    if check in ("pos", "poa_bound"):
        report: EquilibriumReport = cache.get("report")
        if report is None:
            report = cache["report"] = measure(rule, instance)
        rec.opt_bins = report.opt_bins
        if check == "pos":
            rec.algorithm = "best_ne"
            if report.min_ne_bins is not None:
                rec.bins_used, rec.is_ne = report.min_ne_bins, True
                rec.ratio = format_rational(report.pos_ratio)
            rec.violation = int(lam is not None and lam <= Fraction(3, 4)
                                and report.pos_ratio != 1)
        else:
            rec.algorithm = "worst_ne"
            if report.max_ne_bins is not None:
                rec.bins_used, rec.is_ne = report.max_ne_bins, True
                rec.ratio = format_rational(report.poa_ratio)
            rec.violation = int(lam is not None and lam >= Fraction(3, 4) and not report.bound_ok)
        return rec
    packing = bfd.packing
    m = len(packing.bins)
    rec.algorithm = "bfd"
    rec.bins_used, rec.opt_bins, rec.ratio = m, opt, _ratio(m, opt)
    if check == "bfd_ratio":
        rec.violation = int(m > BFD_RATIO * opt + 1)
        return rec
    rec.is_ne = bool(is_nash(rule, instance, packing))
    if check == "bfd_ne":
        rec.violation = int(lam == Fraction(2, 3) and not rec.is_ne)
        return rec
    rec.is_strong_ne = bool(is_strong_nash(rule, instance, packing))
    rec.violation = int(lam == Fraction(2, 3) and not rec.is_strong_ne)
    return rec


def run_suite(suite: Suite) -> ExperimentResult:
    """One record per (instance, rule, check); stops at the first violating instance."""
    for c in suite.checks:
        if c not in CHECKS:
            raise ParseError(f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
    records: list[ExperimentRecord] = []
    violations = 0
    for instance in random_suite(suite.trials, suite.n, suite.grid, suite.seed, suite.n_min):
        opt = opt_solve(instance).bins_used
        bfd = bfd_pack(instance)
        for rule in suite.rules:
            cache: dict = {}
            for check in suite.checks:
                t0 = time.perf_counter()
                rec = _check(instance, rule, check, opt, cache, bfd)
                rec.wall_time_ms = f"{(time.perf_counter() - t0) * 1000:.3f}"
                records.append(rec)
                violations += int(rec.violation)
        if violations:
            break
    return ExperimentResult(records, violations)


def summary_record(records: Sequence[ExperimentRecord]) -> ExperimentRecord:
    ratios = [parse_rational(r.ratio) for r in records if r.ratio]
    span = f"{format_rational(min(ratios))}..{format_rational(max(ratios))}" if ratios else ""
    return ExperimentRecord("summary", len(records), "*", "*", "summary",
                            ratio=span, violation=sum(int(r.violation) for r in records))


def to_csv(records: Sequence[ExperimentRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    rows = sorted(records, key=lambda r: r.instance_id)
    if rows:
        rows = rows + [summary_record(rows)]
    for r in rows:
        row = r.row()
        if not timing:
            row[-1] = ""
        writer.writerow(row)
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[ExperimentRecord], ExperimentRecord | None]:
    lines = text.splitlines()
    if not lines or lines[0] != f"# {CSV_VERSION}":
        raise ParseError("missing or unsupported experiment CSV version line")
    reader = csv.DictReader(lines[1:])
    if reader.fieldnames != COLUMNS:
        raise ParseError(f"unexpected CSV columns {reader.fieldnames}")
    records: list[ExperimentRecord] = []
    summary = None
    for raw in reader:
        rec = ExperimentRecord(**raw)
        if rec.instance_id == "summary":
            summary = rec
        else:
            records.append(rec)
    return records, summary


def parse_checks(text: str | Iterable[str]) -> list[str]:
    items = text.split(",") if isinstance(text, str) else list(text)
    return [c.strip() for c in items if c.strip()]
