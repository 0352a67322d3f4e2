"""Floating-point spectral side: singular values, step densities, determinants.

Rank is never decided from floating point values. Callers pass the exact
rank (from :mod:`torsion_lab.zlinalg`), or it is computed exactly when the
matrix has integer entries.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cosets import CosetTable
from .presentation import GroupRingMatrix
from .zlinalg import IntMatrix, det_prime_squared, rank as exact_rank


def _as_array(m) -> np.ndarray:
    if isinstance(m, IntMatrix):
        return m.to_numpy()
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return a


def _exact_rank_if_integral(m) -> int:
    if isinstance(m, IntMatrix):
        return exact_rank(m)
    a = np.asarray(m)
    if np.issubdtype(a.dtype, np.integer) or (
        np.all(np.isfinite(a)) and np.all(a == np.round(a))
    ):
        return exact_rank(IntMatrix.from_numpy(np.round(a).astype(object)))
    raise ValueError("exact rank required for a non-integer matrix")


def singular_values(m) -> np.ndarray:
    """Singular values in nonincreasing order, ``min(rows, cols)`` of them."""
    a = _as_array(m)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if 0 in a.shape:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def det_prime_float(m, exact_rank: int | None = None) -> float:
    """Product of the ``exact_rank`` largest singular values (1 for rank 0)."""
    if exact_rank is None:
        exact_rank = _exact_rank_if_integral(m)
    if exact_rank == 0:
        return 1.0
    return float(np.prod(singular_values(m)[:exact_rank]))


def log_det_prime_float(m, exact_rank: int | None = None) -> float:
    if exact_rank is None:
        exact_rank = _exact_rank_if_integral(m)
    if exact_rank == 0:
        return 0.0
    return float(np.sum(np.log(singular_values(m)[:exact_rank])))


def operator_norm(m) -> float:
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


# --- step densities -------------------------------------------------------------


@dataclass(frozen=True)
class StepDensity:
    """Right-continuous nondecreasing step function on ``[0, inf)``.

    ``F(lambda) = value_at_zero + sum of masses at jump points <= lambda``,
    constant beyond ``cutoff``.
    """

    jumps: tuple[tuple[float, float], ...]  # (lambda > 0, mass > 0), sorted
    value_at_zero: float
    cutoff: float

    def __post_init__(self):
        if self.value_at_zero < 0:
            raise ValueError("density values must be nonnegative")
        last = 0.0
        for lam, mass in self.jumps:
            if not lam > last:
                raise ValueError("jump points must be positive and strictly increasing")
            if not mass > 0:
                raise ValueError("jump masses must be positive (density must increase)")
            last = lam
        if self.jumps and self.cutoff < self.jumps[-1][0]:
            raise ValueError("cutoff lies below the last jump")

    @classmethod
    def from_breakpoints(cls, points: Sequence[float], values: Sequence[float],
                         cutoff: float | None = None) -> "StepDensity":
        """Build from ``F(points[i]) = values[i]``; ``points[0]`` must be 0."""
        if not points or points[0] != 0:
            raise ValueError("first breakpoint must be 0")
        jumps = []
        for i in range(1, len(points)):
            if points[i] <= points[i - 1]:
                raise ValueError("breakpoints must be strictly increasing")
            delta = values[i] - values[i - 1]
            if delta < 0:
                raise ValueError("density values must be nondecreasing")
            if delta > 0:
                jumps.append((float(points[i]), float(delta)))
        c = cutoff if cutoff is not None else (jumps[-1][0] if jumps else 1.0)
        return cls(tuple(jumps), float(values[0]), float(c))

    @classmethod
    def from_eigenvalues(cls, eigenvalues: Sequence[float], zero_count: int,
                         normalizer: float = 1.0, cutoff: float | None = None) -> "StepDensity":
        masses: dict[float, float] = {}
        for lam in eigenvalues:
            masses[lam] = masses.get(lam, 0.0) + 1.0 / normalizer
        jumps = tuple(sorted(masses.items()))
        c = cutoff if cutoff is not None else (jumps[-1][0] if jumps else 1.0)
        return cls(jumps, zero_count / normalizer, float(c))

    def __call__(self, lam: float) -> float:
        if lam < 0:
            return 0.0
        k = bisect_right([j[0] for j in self.jumps], lam)
        return self.value_at_zero + sum(m for _, m in self.jumps[:k])

    @property
    def total(self) -> float:
        return self.value_at_zero + sum(m for _, m in self.jumps)

    def breakpoints(self) -> list[float]:
        return [0.0] + [lam for lam, _ in self.jumps]

    def scaled(self, factor: float) -> "StepDensity":
        return StepDensity(
            tuple((lam, m * factor) for lam, m in self.jumps),
            self.value_at_zero * factor,
            self.cutoff,
        )


def spectral_density(m, normalizer: int = 1, exact_rank: int | None = None) -> StepDensity:
    """Normalized eigenvalue counting function of ``D^* D`` for ``D: x -> x m``.

    With the row-vector convention the domain has dimension ``rows`` and
    ``D^* D`` is represented by ``m m^T``. Exactly ``rows - rank``
    eigenvalues are treated as zero.
    """
    a = _as_array(m)
    if exact_rank is None:
        exact_rank = _exact_rank_if_integral(m)
    rows = a.shape[0]
    if normalizer <= 0:
        raise ValueError("normalizer must be positive")
    if rows == 0:
        return StepDensity((), 0.0, 1.0)
    eig = np.sort(np.linalg.eigvalsh(a @ a.T))[::-1]
    positive = [float(abs(x)) for x in eig[:exact_rank]]
    if any(x == 0.0 for x in positive):
        raise ArithmeticError("a nonzero eigenvalue underflowed to zero")
    return StepDensity.from_eigenvalues(positive, rows - exact_rank, normalizer)


def density_log_det(f: StepDensity) -> float:
    """``ln det F``: the integral of ``ln(lambda) dF`` over ``(0, inf)``."""
    return math.fsum(m * math.log(lam) for lam, m in f.jumps)


def density_log_det_parts(f: StepDensity) -> float:
    """``ln det F`` by integration by parts.

    ``(F(C) - F(0)) ln C`` minus the integral of ``(F - F(0)) / lambda``
    over ``(0, C]``; on each interval of constancy the integrand integrates
    to a log ratio.
    """
    c = f.cutoff
    if not f.jumps:
        return 0.0
    terms = [(f.total - f.value_at_zero) * math.log(c)]
    acc = 0.0
    pts = [lam for lam, _ in f.jumps] + [c]
    for i, (lam, m) in enumerate(f.jumps):
        acc += m
        nxt = pts[i + 1]
        if nxt > lam:
            terms.append(-acc * math.log(nxt / lam))
    return math.fsum(terms)


def lower_envelope(densities: Sequence[StepDensity]) -> StepDensity:
    """Pointwise minimum of finitely many step densities."""
    if not densities:
        raise ValueError("need at least one density")
    pts = sorted({0.0} | {lam for f in densities for lam, _ in f.jumps})
    values = [min(f(x) for f in densities) for x in pts]
    # guard against summation noise producing tiny negative steps
    for i in range(1, len(values)):
        if values[i] < values[i - 1]:
            values[i] = values[i - 1]
    cutoff = max(f.cutoff for f in densities)
    return StepDensity.from_breakpoints(pts, values, cutoff)


def norm_bound(b: GroupRingMatrix) -> float:
    """Uniform bound ``n * m * max |B_ij|_1`` on the norms of all induced maps."""
    if b.rows == 0 or b.cols == 0:
        return 0.0
    return float(b.rows * b.cols * max(x.l1_norm() for row in b.entries for x in row))


# --- Fuglede-Kadison approximation report ------------------------------------


@dataclass(frozen=True)
class FKRow:
    index: int
    rank: int
    det_prime_squared: int
    log_det_per_index: float
    null_fraction: float  # F_k(0)
    density: StepDensity


@dataclass(frozen=True)
class FKReport:
    rows: tuple[FKRow, ...]
    envelope: StepDensity
    envelope_log_det: float  # ln det of the pointwise lower envelope
    norm_bound: float

    @property
    def half_envelope_log_det(self) -> float:
        """Envelope counterpart of ``ln det'(B_Gamma) / N`` (half of ``ln det F``)."""
        return self.envelope_log_det / 2


def fk_row(b: GroupRingMatrix, t: CosetTable) -> FKRow:
    from .complexes import induce_matrix

    m = induce_matrix(b, t)
    r = exact_rank(m)
    d2 = det_prime_squared(m)
    n = t.index
    dens = spectral_density(m, n, r)
    return FKRow(n, r, d2, 0.5 * math.log(d2) / n, dens.value_at_zero, dens)


def fk_report(b: GroupRingMatrix, tables: Sequence[CosetTable]) -> FKReport:
    """Per-table ``ln det'(B_Gamma)/N`` and normalized densities, plus their envelope.

    Finite data cannot certify a limit; everything here is reported only.
    """
    rows = tuple(fk_row(b, t) for t in tables)
    env = lower_envelope([r.density for r in rows])
    return FKReport(rows, env, density_log_det(env), norm_bound(b))
