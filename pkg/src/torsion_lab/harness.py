"""Experiment orchestration and CSV output.

Finite-index values are reported next to the reference line
``vol(X) / 6 pi``; the asymptotic bound is never asserted at finite index.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .abelian import cyclic_branched_torsion, growth_report, mahler_measure
from .complexes import (
    branched_torsion,
    closed_diagnostics,
    connecting_map,
    cover_complex,
    homology,
    induce_matrix,
)
from .cosets import (
    CosetTable,
    ResourceLimitError,
    cycle_type,
    cyclic_cover_table,
    low_index_subgroups,
    normalized_trace,
)
from .presentation import (
    GroupPresentation,
    PresentationError,
    abelianized_alexander,
    generator,
    load_presentation,
    reduced_jacobian,
)
from .spectral import fk_report
from .zlinalg import det_prime_squared

log = logging.getLogger(__name__)

SIX_PI = 6 * math.pi
DATA_DIR = Path(__file__).parent / "data"


def fmt_float(x: float | None) -> str:
    """15 significant digits, ``.`` decimal point; empty for missing values."""
    if x is None:
        return ""
    return f"{x:.15g}"


def fmt_exact(x: int | Fraction | None) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


@dataclass
class ExperimentConfig:
    presentation: Path
    max_index: int = 4
    cyclic_max_n: int = 0
    out: Path | None = None
    jobs: int = 1
    volume: float | None = None
    conjugates: bool = False
    diagnostics: bool = False
    budget: int = 2_000_000

    def __post_init__(self):
        self.presentation = Path(self.presentation)
        if not str(self.presentation):
            raise ValueError("presentation path must be nonempty")
        if self.out is not None:
            self.out = Path(self.out)
            if not str(self.out):
                raise ValueError("output path must be nonempty")
        if self.max_index < 1:
            raise ValueError("max_index must be >= 1")
        if self.cyclic_max_n < 0:
            raise ValueError("cyclic_max_n must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass
class ResultRow:
    subgroup_id: str
    family: str  # "low-index" or "cyclic"
    index: int
    b1: int | None = None
    t1: int | None = None
    det_j_squared: int | None = None
    det_beta_squared: Fraction | None = None
    branched_torsion: int | None = None
    meridian_cycles: int | None = None
    meridian_trace: Fraction | None = None
    vol_reference: float | None = None
    closed_ratio: float | None = None  # tau_RS over the chain formula, closed shape only
    error: str = ""

    @property
    def log_t1_per_index(self) -> float | None:
        return None if self.t1 is None else math.log(self.t1) / self.index

    @property
    def log_det_j_per_index(self) -> float | None:
        if self.det_j_squared is None:
            return None
        return 0.5 * math.log(self.det_j_squared) / self.index

    @property
    def t1_bound_holds(self) -> bool | None:
        if self.t1 is None or self.det_beta_squared is None or self.det_j_squared is None:
            return None
        return self.t1**2 <= self.det_beta_squared * self.det_j_squared


CSV_COLUMNS = (
    "subgroup_id", "family", "index", "b1", "t1", "log_t1_per_index",
    "det_j_squared", "log_det_j_per_index", "det_beta_squared", "t1_bound_holds",
    "branched_torsion", "meridian_cycles", "meridian_trace", "vol_reference", "closed_ratio",
    "error",
)


def row_to_csv(r: ResultRow) -> list[str]:
    eq = r.t1_bound_holds
    return [
        r.subgroup_id, r.family, str(r.index), fmt_exact(r.b1), fmt_exact(r.t1),
        fmt_float(r.log_t1_per_index), fmt_exact(r.det_j_squared),
        fmt_float(r.log_det_j_per_index), fmt_exact(r.det_beta_squared),
        "" if eq is None else str(eq).lower(), fmt_exact(r.branched_torsion),
        fmt_exact(r.meridian_cycles), fmt_exact(r.meridian_trace),
        fmt_float(r.vol_reference), fmt_float(r.closed_ratio), r.error,
    ]


def _shape(p: GroupPresentation) -> str | None:
    try:
        return p.check_shape()
    except PresentationError:
        return None


def compute_row(p: GroupPresentation, t: CosetTable, subgroup_id: str, family: str,
                volume: float | None = None, diagnostics: bool = False) -> ResultRow:
    """All per-subgroup quantities; failures land in the ``error`` column."""
    row = ResultRow(subgroup_id, family, t.index)
    row.vol_reference = None if volume is None else volume / SIX_PI
    try:
        hom = homology(cover_complex(p, t))
        row.b1, row.t1 = hom[1]
        meridian = generator(p.ngens - 1)
        row.meridian_cycles = cycle_type(t, meridian).total
        row.meridian_trace = normalized_trace(t, meridian)
        shape = _shape(p)
        if shape == "knot":
            j, _ = reduced_jacobian(p)
            row.det_j_squared = det_prime_squared(induce_matrix(j, t))
            row.det_beta_squared = connecting_map(p, t).det_prime_squared()
            if p.meridian is not None:
                row.branched_torsion = branched_torsion(p, t)
        elif shape == "closed":
            diag = closed_diagnostics(p, t)
            row.det_j_squared = diag.det_j_squared
            if diagnostics:
                row.closed_ratio = diag.ratio
    except (ArithmeticError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _compute_row_args(args):
    return compute_row(*args)


@dataclass
class Summary:
    rows: int
    max_log_t1_per_index: float | None
    max_log_det_j_per_index: float | None
    vol_reference: float | None
    log_mahler: float | None
    errors: int
    notes: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [
            f"rows: {self.rows}",
            f"max ln t1/N: {fmt_float(self.max_log_t1_per_index)}",
            f"max ln det'(J)/N: {fmt_float(self.max_log_det_j_per_index)}",
            f"reference vol/6pi: {fmt_float(self.vol_reference) or 'n/a'}",
        ]
        if self.log_mahler is not None:
            out.append(f"cyclic reference ln Mahler(Delta): {fmt_float(self.log_mahler)}")
        if self.errors:
            out.append(f"rows with errors: {self.errors}")
        out.extend(f"note: {n}" for n in self.notes)
        return out


def _max(values: Iterable[float | None]) -> float | None:
    """Maximum at CSV precision, so it matches the emitted column."""
    vals = [float(fmt_float(v)) for v in values if v is not None]
    return max(vals) if vals else None


def collect_tables(p: GroupPresentation, cfg: ExperimentConfig) -> list[tuple[str, str, CosetTable]]:
    tables = []
    seen: dict[int, int] = {}
    for t in low_index_subgroups(p, cfg.max_index, conjugates=cfg.conjugates, budget=cfg.budget):
        seen[t.index] = seen.get(t.index, 0) + 1
        tables.append((f"L{t.index}.{seen[t.index]}", "low-index", t))
    for n in range(2, cfg.cyclic_max_n + 1):
        tables.append((f"C{n:03d}", "cyclic", cyclic_cover_table(p, n)))
    return tables


def run_experiment(cfg: ExperimentConfig) -> tuple[list[ResultRow], Summary]:
    p = load_presentation(cfg.presentation)
    volume = cfg.volume if cfg.volume is not None else p.volume
    notes = []
    try:
        tables = collect_tables(p, cfg)
    except ResourceLimitError as exc:
        notes.append(str(exc))
        tables = []
    work = [(p, t, sid, fam, volume, cfg.diagnostics) for sid, fam, t in tables]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_compute_row_args, work))
    else:
        rows = [compute_row(*w) for w in work]
    order = {sid: k for k, (sid, _, _) in enumerate(tables)}
    rows.sort(key=lambda r: order[r.subgroup_id])

    log_mahler = None
    if any(r.family == "cyclic" for r in rows):
        try:
            log_mahler = math.log(mahler_measure(abelianized_alexander(p)))
        except PresentationError:
            pass
        notes.append(
            "cyclic covers do not converge to the trivial subgroup in the trace sense; "
            "their reference is ln Mahler(Delta), not vol/6pi"
        )
    if volume is not None:
        notes.append(
            "vol/6pi bounds a limsup; values at finite index may exceed it"
        )
    summary = Summary(
        len(rows),
        _max(r.log_t1_per_index for r in rows),
        _max(r.log_det_j_per_index for r in rows),
        None if volume is None else volume / SIX_PI,
        log_mahler,
        sum(1 for r in rows if r.error),
        notes,
    )
    if cfg.out is not None:
        write_csv(cfg.out, CSV_COLUMNS, [row_to_csv(r) for r in rows])
    return rows, summary


def write_csv(path: Path | None, header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


# --- cyclic towers and density reports ---------------------------------------------


GROWTH_COLUMNS = ("n", "torsion", "log_torsion_per_n", "root_of_unity_hit", "log_mahler")


def growth_csv_rows(p: GroupPresentation, max_n: int) -> list[list[str]]:
    rep = growth_report(abelianized_alexander(p), max_n)
    return [
        [str(r.n), str(r.torsion), fmt_float(r.log_per_n), str(r.flagged).lower(),
         fmt_float(rep.log_mahler)]
        for r in rep.rows
    ]


DENSITY_COLUMNS = ("index", "rank", "det_prime_squared", "log_det_per_index", "null_fraction")


def density_report(p: GroupPresentation, max_n: int, tower: str = "cyclic",
                   max_index: int | None = None):
    j, _ = reduced_jacobian(p)
    if tower == "cyclic":
        tables = [cyclic_cover_table(p, n) for n in range(1, max_n + 1)]
    elif tower == "low-index":
        tables = low_index_subgroups(p, max_index or max_n)
    else:
        raise ValueError(f"unknown tower {tower!r}")
    rep = fk_report(j, tables)
    rows = [
        [str(r.index), str(r.rank), str(r.det_prime_squared), fmt_float(r.log_det_per_index),
         fmt_float(r.null_fraction)]
        for r in rep.rows
    ]
    return rep, rows


def bundled_presentation(name: str) -> Path:
    return DATA_DIR / f"{name}.pres"


def check_cyclic_equivalence(p: GroupPresentation, ns: Iterable[int]) -> list[tuple[int, int, int]]:
    """``(n, SNF torsion, resultant torsion)`` for n with nonzero resultant."""
    delta = abelianized_alexander(p)
    out = []
    for n in ns:
        r = cyclic_branched_torsion(delta, n)
        if r == 0:
            continue
        out.append((n, branched_torsion(p, cyclic_cover_table(p, n)), r))
    return out
