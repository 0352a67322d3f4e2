"""Infinite cyclic covers of knot complements.

Integer Laurent polynomials, exact cyclic-cover torsion through integer
resultants, Mahler measure, and the growth table comparing
``ln t(n) / n`` with ``ln M(Delta)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np


class LaurentPoly:
    """Integer Laurent polynomial in one variable ``t``.

    Stored as a sparse ``{exponent: coefficient}`` map without zero
    coefficients. Instances are immutable.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        self._coeffs = {int(e): int(c) for e, c in (coeffs or {}).items() if c != 0}

    @classmethod
    def from_list(cls, coeffs: Iterable[int], shift: int = 0) -> "LaurentPoly":
        """Coefficients listed from the lowest power ``t**shift`` upward."""
        return cls({shift + i: c for i, c in enumerate(coeffs)})

    @classmethod
    def monomial(cls, exponent: int, coeff: int = 1) -> "LaurentPoly":
        return cls({exponent: coeff})

    @property
    def coeffs(self) -> dict[int, int]:
        return dict(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def low(self) -> int:
        return min(self._coeffs)

    @property
    def high(self) -> int:
        return max(self._coeffs)

    @property
    def degree(self) -> int:
        """Span ``high - low``; the degree after normalization."""
        if not self._coeffs:
            raise ValueError("zero polynomial has no degree")
        return self.high - self.low

    def to_list(self) -> list[int]:
        """Dense coefficients from ``t**low`` to ``t**high``."""
        if not self._coeffs:
            return []
        lo = self.low
        out = [0] * (self.high - lo + 1)
        for e, c in self._coeffs.items():
            out[e - lo] = c
        return out

    def normalize(self) -> "LaurentPoly":
        """Shift to lowest exponent 0 and make the lowest coefficient positive."""
        if not self._coeffs:
            return self
        lo = self.low
        sign = -1 if self._coeffs[lo] < 0 else 1
        return LaurentPoly({e - lo: sign * c for e, c in self._coeffs.items()})

    def __add__(self, other: "LaurentPoly | int") -> "LaurentPoly":
        other = _as_poly(other)
        out = dict(self._coeffs)
        for e, c in other._coeffs.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self._coeffs.items()})

    def __sub__(self, other: "LaurentPoly | int") -> "LaurentPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other: "LaurentPoly | int") -> "LaurentPoly":
        return _as_poly(other) - self

    def __mul__(self, other: "LaurentPoly | int") -> "LaurentPoly":
        other = _as_poly(other)
        out: dict[int, int] = {}
        for e1, c1 in self._coeffs.items():
            for e2, c2 in other._coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = LaurentPoly({0: 1})
        for _ in range(k):
            out = out * self
        return out

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        """Quotient ``self / other``; raises ``ArithmeticError`` if not exact over Z."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return self
        num = self.to_list()
        den = other.to_list()
        shift = self.low - other.low
        lead = den[-1]
        q = [0] * max(len(num) - len(den) + 1, 0)
        rem = list(num)
        for i in range(len(q) - 1, -1, -1):
            top = rem[i + len(den) - 1]
            if top % lead:
                raise ArithmeticError("inexact Laurent polynomial division")
            qi = top // lead
            q[i] = qi
            if qi:
                for j, d in enumerate(den):
                    rem[i + j] -= qi * d
        if any(rem):
            raise ArithmeticError("inexact Laurent polynomial division")
        return LaurentPoly.from_list(q, shift)

    def __call__(self, x):
        return sum(c * x**e for e, c in self._coeffs.items())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self._coeffs.items()))

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for e in sorted(self._coeffs, reverse=True):
            c = self._coeffs[e]
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                power = "t" if e == 1 else f"t^{e}"
                body = power if mag == 1 else f"{mag}*{power}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _as_poly(x: "LaurentPoly | int") -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    return LaurentPoly({0: int(x)})


def laurent_det(matrix: list[list[LaurentPoly]]) -> LaurentPoly:
    """Determinant over Z[t, 1/t] by fraction-free (Bareiss) elimination."""
    n = len(matrix)
    if n == 0:
        return LaurentPoly({0: 1})
    a = [list(row) for row in matrix]
    sign = 1
    prev = LaurentPoly({0: 1})
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return LaurentPoly()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    return a[n - 1][n - 1] * sign


# --- resultants -----------------------------------------------------------


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(f: list[Fraction], g: list[Fraction]) -> list[Fraction]:
    r = list(f)
    dg = len(g) - 1
    lead = g[-1]
    while len(_trim(r)) - 1 >= dg and r:
        shift = len(r) - 1 - dg
        q = r[-1] / lead
        for j in range(dg + 1):
            r[shift + j] -= q * g[j]
        r.pop()
    return _trim(r)


def _poly_divmod(f: list[Fraction], g: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    r = list(f)
    dg = len(g) - 1
    q = [Fraction(0)] * max(len(f) - dg, 1)
    while r and len(r) - 1 >= dg:
        shift = len(r) - 1 - dg
        c = r[-1] / g[-1]
        q[shift] = c
        for j in range(dg + 1):
            r[shift + j] -= c * g[j]
        r.pop()
        _trim(r)
    return _trim(q), r


def _poly_gcd(f: list[Fraction], g: list[Fraction]) -> list[Fraction]:
    """Monic gcd over Q."""
    while g:
        f, g = g, _poly_rem(f, g)
    return [c / f[-1] for c in f]


def _derivative(f: list[Fraction]) -> list[Fraction]:
    return _trim([k * c for k, c in enumerate(f)][1:])


def squarefree_factors(coeffs: list[int]) -> list[tuple[list[Fraction], int]]:
    """Yun's algorithm over Q: ``[(factor, multiplicity), ...]``, factors squarefree."""
    f = _trim([Fraction(c) for c in coeffs])
    out = []
    if len(f) <= 1:
        return out
    a = _poly_gcd(f, _derivative(f))
    b = _poly_divmod(f, a)[0]
    c = _poly_divmod(_derivative(f), a)[0]
    d = _trim([x - y for x, y in zip(c + [0] * len(b), _derivative(b) + [0] * len(c))])
    k = 1
    while len(b) > 1:
        g = _poly_gcd(b, d) if d else [c / b[-1] for c in b]
        if len(g) > 1:
            out.append((g, k))
        b = _poly_divmod(b, g)[0]
        c = _poly_divmod(d, g)[0] if d else []
        db = _derivative(b)
        n = max(len(c), len(db))
        d = _trim([(c[i] if i < len(c) else 0) - (db[i] if i < len(db) else 0) for i in range(n)])
        k += 1
    return out


def resultant(f: list[int], g: list[int]) -> int:
    """Resultant of two integer polynomials given low-to-high coefficients.

    Uses the Euclidean recursion over Q; the result is an exact integer.
    Returns 0 when the polynomials share a root.
    """
    fq = _trim([Fraction(c) for c in f])
    gq = _trim([Fraction(c) for c in g])
    if not fq or not gq:
        return 0
    res = Fraction(1)
    # Res(f, g) with deg f = df, deg g = dg.
    while True:
        df, dg = len(fq) - 1, len(gq) - 1
        if dg == 0:
            res *= gq[0] ** df
            break
        if df == 0:
            res *= fq[0] ** dg
            break
        if df < dg:
            # Res(f, g) = (-1)^(df*dg) Res(g, f)
            if (df * dg) % 2:
                res = -res
            fq, gq = gq, fq
            continue
        # deg f >= deg g: Res(f, g) = (-1)^(df*dg) lc(g)^(df - dr) Res(g, r)
        r = _poly_rem(fq, gq)
        if not r:
            return 0
        dr = len(r) - 1
        if (df * dg) % 2:
            res = -res
        res *= gq[-1] ** (df - dr)
        fq, gq = gq, r
    if res.denominator != 1:
        raise ArithmeticError("non-integral resultant")
    return int(res)


def cyclic_branched_torsion(delta: LaurentPoly, n: int) -> int:
    """Torsion order of H1 of the n-fold cyclic branched cover.

    Computed as ``|Res(Delta, t^n - 1)| / |Delta(1)|``. A return value of 0
    flags that some n-th root of unity is a root of ``Delta`` (positive
    first Betti number in the cover), not a torsion order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = delta.normalize()
    at_one = d(1)
    if at_one == 0:
        raise ValueError("Delta(1) = 0; not a knot Alexander polynomial")
    coeffs = d.to_list()
    res = resultant(coeffs, [-1] + [0] * (n - 1) + [1])
    q, r = divmod(abs(res), abs(at_one))
    if r:
        raise ArithmeticError("resultant not divisible by |Delta(1)|")
    return q


def cyclic_torsion_float(delta: LaurentPoly, n: int) -> float:
    """Floating product of ``|Delta(zeta^j)|`` over nontrivial n-th roots of unity."""
    d = delta.normalize()
    prod = 1.0
    for j in range(1, n):
        prod *= abs(d(cmath.exp(2j * math.pi * j / n)))
    return prod


def mahler_measure(f: LaurentPoly) -> float:
    """Mahler measure ``|lead| * prod max(1, |root|)`` via companion eigenvalues.

    Repeated roots are split off first (squarefree decomposition over Q),
    since companion eigenvalues of a k-fold root are only accurate to
    about ``eps ** (1/k)``.
    """
    if f.is_zero():
        raise ValueError("Mahler measure of the zero polynomial is undefined")
    coeffs = f.normalize().to_list()
    lead = abs(coeffs[-1])
    log_m = math.log(lead)
    for factor, mult in squarefree_factors(coeffs):
        roots = np.roots([float(c) for c in reversed(factor)])
        log_m += mult * float(np.sum(np.log(np.maximum(1.0, np.abs(roots)))))
    return math.exp(log_m)


@dataclass(frozen=True)
class GrowthRow:
    n: int
    torsion: int
    log_per_n: float | None  # None when the resultant vanishes

    @property
    def flagged(self) -> bool:
        return self.torsion == 0


@dataclass(frozen=True)
class GrowthReport:
    delta: LaurentPoly
    mahler: float
    rows: tuple[GrowthRow, ...]

    @property
    def log_mahler(self) -> float:
        return math.log(self.mahler)


def growth_report(delta: LaurentPoly, nmax: int) -> GrowthReport:
    """Rows ``(n, t(n), ln t(n)/n)`` for ``n = 2..nmax`` plus the Mahler line."""
    if nmax < 2:
        raise ValueError("nmax must be >= 2")
    rows = []
    for n in range(2, nmax + 1):
        t = cyclic_branched_torsion(delta, n)
        rows.append(GrowthRow(n, t, math.log(t) / n if t else None))
    return GrowthReport(delta.normalize(), mahler_measure(delta), tuple(rows))
