"""Exact integer linear algebra.

Matrices act on row vectors: an ``r x c`` matrix ``M`` is the map
``Z^r -> Z^c, x -> x M``. Lattice volumes are kept squared (Gram
determinants) so every identity between them is checked in exact integer
or rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Iterable, Sequence

import numpy as np


class IntMatrix:
    """Immutable arbitrary-precision integer matrix with an explicit shape."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Iterable[Iterable[int]] = ()):
        data = tuple(tuple(int(x) for x in r) for r in data)
        if rows < 0 or cols < 0:
            raise ValueError("dimensions must be nonnegative")
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError(f"data does not match shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise ValueError("cols is required for a matrix with no rows")
            cols = len(rows[0])
        return cls(len(rows), cols, rows)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, [[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, [[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_numpy(cls, a) -> "IntMatrix":
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls(a.shape[0], a.shape[1], a.tolist())

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def T(self) -> "IntMatrix":
        if not self.rows:
            return IntMatrix(self.cols, 0, [() for _ in range(self.cols)])
        return IntMatrix(self.cols, self.rows, zip(*self.data))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        ocols = list(zip(*other.data)) if other.rows else [()] * other.cols
        return IntMatrix(
            self.rows,
            other.cols,
            [[sum(a * b for a, b in zip(r, c)) for c in ocols] for r in self.data],
        )

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix(
            self.rows, self.cols,
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)],
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + other.scale(-1)

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [[k * a for a in r] for r in self.data])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.shape, self.data))

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.data for a in r)

    def to_numpy(self, dtype=float) -> np.ndarray:
        return np.array(self.data, dtype=dtype).reshape(self.rows, self.cols)

    def row_slice(self, start: int, stop: int) -> "IntMatrix":
        return IntMatrix(stop - start, self.cols, self.data[start:stop])

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}x{self.cols})"

    def __str__(self) -> str:
        return "\n".join(" ".join(str(a) for a in r) for r in self.data)


def _as_intmatrix(m) -> IntMatrix:
    return m if isinstance(m, IntMatrix) else IntMatrix.from_rows(m)


# --- determinants -------------------------------------------------------------


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free Gaussian elimination."""
    n = len(rows)
    if n == 0:
        return 1
    a = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def gram_det(basis: IntMatrix) -> int:
    """Determinant of the Gram matrix of the rows (1 for an empty basis)."""
    b = basis.data
    g = [[sum(x * y for x, y in zip(u, v)) for v in b] for u in b]
    return bareiss_det(g)


# --- Hermite and Smith forms ------------------------------------------------


def hermite_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, int]:
    """Row-style Hermite normal form.

    Returns ``(H, U, r)`` with ``U`` unimodular, ``U M = H``, the first ``r``
    rows of ``H`` nonzero in echelon form with positive pivots and reduced
    entries above each pivot, and the remaining rows zero.
    """
    h = [list(r) for r in m.data]
    nr, nc = m.rows, m.cols
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    r = 0
    pivots = []
    for col in range(nc):
        if r == nr:
            break
        while True:
            nz = [i for i in range(r, nr) if h[i][col]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(h[i][col]))
            if p != r:
                h[r], h[p] = h[p], h[r]
                u[r], u[p] = u[p], u[r]
            done = True
            for i in range(r + 1, nr):
                if h[i][col]:
                    q = h[i][col] // h[r][col]
                    if q:
                        hi, hr = h[i], h[r]
                        for j in range(col, nc):
                            hi[j] -= q * hr[j]
                        ui, ur = u[i], u[r]
                        for j in range(nr):
                            ui[j] -= q * ur[j]
                    if h[i][col]:
                        done = False
            if done:
                break
        if r < nr and h[r][col]:
            if h[r][col] < 0:
                h[r] = [-x for x in h[r]]
                u[r] = [-x for x in u[r]]
            piv = h[r][col]
            for i in range(r):
                q = h[i][col] // piv
                if q:
                    h[i] = [a - q * b for a, b in zip(h[i], h[r])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[r])]
            pivots.append(col)
            r += 1
    return IntMatrix(nr, nc, h), IntMatrix(nr, nr, u), r


def rank(m: IntMatrix) -> int:
    return hermite_form(m)[2]


@dataclass(frozen=True)
class SmithForm:
    divisors: tuple[int, ...]  # d_1 | d_2 | ... | d_r, all positive
    rank: int

    @property
    def torsion(self) -> int:
        return prod(d for d in self.divisors if d > 1)


def smith_normal_form(m: IntMatrix) -> SmithForm:
    """Elementary divisors of ``m``.

    The Hermite form is computed first to tame entry growth; the nonzero
    block is then diagonalized with row and column operations.
    """
    m = _as_intmatrix(m)
    h, _, r = hermite_form(m)
    a = [list(row) for row in h.data[:r]]
    nc = m.cols
    for t in range(r):
        while True:
            # pivot: smallest nonzero entry in the remaining block
            best = None
            for i in range(t, r):
                for j in range(t, nc):
                    if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            i0, j0 = best
            a[t], a[i0] = a[i0], a[t]
            for row in a:
                row[t], row[j0] = row[j0], row[t]
            piv = a[t][t]
            clean = True
            for i in range(t + 1, r):
                q = a[i][t] // piv
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    clean = False
            for j in range(t + 1, nc):
                q = a[t][j] // piv
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                if a[t][j]:
                    clean = False
            if not clean:
                continue
            # divisibility: pivot must divide the whole remaining block
            bad = next(
                (i for i in range(t + 1, r) for j in range(t + 1, nc) if a[i][j] % piv),
                None,
            )
            if bad is None:
                break
            a[t] = [x + y for x, y in zip(a[t], a[bad])]
    divisors = tuple(abs(a[i][i]) for i in range(r))
    return SmithForm(divisors, r)


def cokernel_torsion_and_rank(m: IntMatrix, ambient: int | None = None) -> tuple[int, int]:
    """Torsion order and free rank of ``Z^ambient / (row lattice of m)``."""
    m = _as_intmatrix(m)
    ambient = m.cols if ambient is None else ambient
    if ambient != m.cols:
        raise ValueError("ambient dimension must equal the number of columns")
    snf = smith_normal_form(m)
    return snf.torsion, ambient - snf.rank


# --- lattices ---------------------------------------------------------------


@dataclass(frozen=True)
class LatticeBasis:
    basis: IntMatrix  # rows are the basis vectors
    volume_squared: int

    @classmethod
    def from_basis(cls, basis: IntMatrix) -> "LatticeBasis":
        v2 = gram_det(basis)
        if v2 <= 0:
            raise ValueError("basis vectors are linearly dependent")
        return cls(basis, v2)

    @property
    def rank(self) -> int:
        return self.basis.rows

    @property
    def ambient(self) -> int:
        return self.basis.cols


def kernel_lattice(m: IntMatrix) -> LatticeBasis:
    """Saturated basis of ``{x in Z^rows : x m = 0}``."""
    m = _as_intmatrix(m)
    _, u, r = hermite_form(m)
    return LatticeBasis.from_basis(u.row_slice(r, m.rows))


def image_lattice(m: IntMatrix) -> LatticeBasis:
    """Basis of the lattice spanned by the rows of ``m``."""
    m = _as_intmatrix(m)
    h, _, r = hermite_form(m)
    return LatticeBasis.from_basis(h.row_slice(0, r))


def saturation(lat: LatticeBasis | IntMatrix, ambient: int | None = None) -> LatticeBasis:
    """Basis of ``span_Q(L) intersected with Z^m``."""
    basis = lat.basis if isinstance(lat, LatticeBasis) else _as_intmatrix(lat)
    if ambient is not None and ambient != basis.cols:
        raise ValueError("ambient dimension mismatch")
    # Double orthogonal complement, each step returning a saturated basis.
    perp = kernel_lattice(basis.T).basis
    return kernel_lattice(perp.T)


def saturation_index(lat: LatticeBasis | IntMatrix) -> int:
    """Index of a lattice in its saturation (product of elementary divisors)."""
    basis = lat.basis if isinstance(lat, LatticeBasis) else _as_intmatrix(lat)
    return prod(smith_normal_form(basis).divisors)


def det_prime_squared(m: IntMatrix) -> int:
    """Squared geometric determinant on the standard orthonormal lattice.

    Product of ``vol^2(ker)`` and ``vol^2(im)``; 1 for the zero map.
    """
    m = _as_intmatrix(m)
    return kernel_lattice(m).volume_squared * image_lattice(m).volume_squared


def restricted_det_prime_squared(domain: IntMatrix, m: IntMatrix) -> Fraction:
    """Squared geometric determinant of ``x -> x m`` restricted to a sublattice.

    ``domain`` rows are a basis of the sublattice ``L``; the metric is the
    one induced from the ambient standard lattice. Uses
    ``vol(ker) vol(im) = det' vol(L)``.
    """
    if domain.rows == 0:
        return Fraction(1)
    images = domain @ m
    ker_coords = kernel_lattice(images).basis
    ker_vol2 = gram_det(ker_coords @ domain) if ker_coords.rows else 1
    im_vol2 = image_lattice(images).volume_squared
    return Fraction(ker_vol2 * im_vol2, gram_det(domain))


@dataclass(frozen=True)
class TorsionBound:
    torsion: int
    det_prime_squared: int
    kernel_volume_squared: int
    image_volume_squared: int

    @property
    def torsion_le_det(self) -> bool:
        return self.torsion**2 <= self.det_prime_squared

    @property
    def torsion_kernel_le_det(self) -> bool:
        return self.torsion**2 * self.kernel_volume_squared <= self.det_prime_squared

    @property
    def holds(self) -> bool:
        return self.torsion_le_det and self.torsion_kernel_le_det


def torsion_bound_check_raw(m: IntMatrix) -> TorsionBound:
    """Both cokernel-torsion bounds, in squared form, for ``m`` on the standard lattice."""
    m = _as_intmatrix(m)
    t, _ = cokernel_torsion_and_rank(m)
    k2 = kernel_lattice(m).volume_squared
    i2 = image_lattice(m).volume_squared
    return TorsionBound(t, k2 * i2, k2, i2)
