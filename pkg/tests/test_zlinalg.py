from fractions import Fraction
from itertools import combinations
from math import gcd, isqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torsion_lab.zlinalg import (
    IntMatrix,
    LatticeBasis,
    bareiss_det,
    cokernel_torsion_and_rank,
    det_prime_squared,
    gram_det,
    hermite_form,
    image_lattice,
    kernel_lattice,
    rank,
    restricted_det_prime_squared,
    saturation,
    saturation_index,
    smith_normal_form,
    torsion_bound_check_raw,
)


@st.composite
def int_matrices(draw, max_dim=5, bound=6):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    rows = draw(st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c),
                         min_size=r, max_size=r))
    return IntMatrix(r, c, rows)


def fraction_det(rows):
    """Gaussian elimination over Q, an independent determinant oracle."""
    a = [[Fraction(x) for x in r] for r in rows]
    n, det = len(a), Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k]), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return det


def determinantal_divisors(m: IntMatrix):
    """Elementary divisors from gcds of k x k minors (the textbook definition)."""
    out, prev = [], 1
    for k in range(1, min(m.rows, m.cols) + 1):
        g = 0
        for rs in combinations(range(m.rows), k):
            for cs in combinations(range(m.cols), k):
                g = gcd(g, int(fraction_det([[m[i, j] for j in cs] for i in rs])))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return tuple(out)


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_bareiss_matches_rational_elimination(m):
    sq = [r[: m.rows] for r in m.data] if m.cols >= m.rows else None
    if sq:
        assert bareiss_det(sq) == fraction_det(sq)


@settings(max_examples=150, deadline=None)
@given(int_matrices(max_dim=4))
def test_smith_matches_determinantal_divisors(m):
    assert smith_normal_form(m).divisors == determinantal_divisors(m)


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_hermite_form_certificate(m):
    h, u, r = hermite_form(m)
    assert u @ m == h
    assert abs(bareiss_det(u.data)) == 1
    assert all(all(x == 0 for x in row) for row in h.data[r:])
    assert r == np.linalg.matrix_rank(m.to_numpy())


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_kernel_is_saturated_and_annihilates(m):
    k = kernel_lattice(m)
    assert k.rank == m.rows - rank(m)
    if k.rank:
        assert (k.basis @ m).is_zero()
        assert saturation_index(k.basis) == 1


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_det_prime_vs_volumes_and_svd(m):
    k, im = kernel_lattice(m), image_lattice(m)
    d2 = det_prime_squared(m)
    assert k.volume_squared * im.volume_squared == d2
    assert k.volume_squared >= 1 and im.volume_squared >= 1
    r = rank(m)
    s = np.linalg.svd(m.to_numpy(), compute_uv=False)[:r]
    assert np.isclose(float(np.prod(s)) ** 2, d2, rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(int_matrices(), st.integers(2, 5))
def test_scaled_lattice_index(m, k):
    im = image_lattice(m)
    if im.rank:
        inner = gram_det(im.basis.scale(k))
        assert Fraction(inner, im.volume_squared) == k ** (2 * im.rank)


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_torsion_bounds(m):
    tb = torsion_bound_check_raw(m)
    assert tb.holds
    assert tb.torsion == cokernel_torsion_and_rank(m)[0]


def test_saturation_example():
    lat = LatticeBasis.from_basis(IntMatrix.from_rows([[2, 2]]))
    sat = saturation(lat)
    assert lat.volume_squared == 8 and sat.volume_squared == 2
    assert sat.basis in (IntMatrix.from_rows([[1, 1]]), IntMatrix.from_rows([[-1, -1]]))
    assert saturation_index(lat) == 2 == isqrt(8 // 2)


def test_smith_examples():
    assert smith_normal_form(IntMatrix.from_rows([[2, 4], [6, 8]])).divisors == (2, 4)
    assert smith_normal_form(IntMatrix.diag([4, 6])).divisors == (2, 12)
    assert smith_normal_form(IntMatrix.zeros(2, 3)).divisors == ()
    assert cokernel_torsion_and_rank(IntMatrix.from_rows([[2, 0, 0], [0, 3, 0]])) == (6, 1)


def test_det_prime_examples():
    assert det_prime_squared(IntMatrix.from_rows([[1, -1], [-1, 1]])) == 4
    assert det_prime_squared(IntMatrix.zeros(3, 2)) == 1
    assert det_prime_squared(IntMatrix.diag([3, 5])) == 225


def test_restricted_det_prime():
    # identity on the sublattice spanned by (1, 1): det'^2 = 1
    dom = IntMatrix.from_rows([[1, 1]])
    assert restricted_det_prime_squared(dom, IntMatrix.identity(2)) == 1
    # x -> 2x on the same sublattice
    assert restricted_det_prime_squared(dom, IntMatrix.identity(2).scale(2)) == 4
    # map killing the domain
    assert restricted_det_prime_squared(dom, IntMatrix.from_rows([[1], [-1]])) == 1


def test_intmatrix_basics():
    a = IntMatrix.from_rows([[1, 2], [3, 4]])
    assert (a @ IntMatrix.identity(2)) == a
    assert a.T == IntMatrix.from_rows([[1, 3], [2, 4]])
    assert IntMatrix.zeros(0, 3).T.shape == (3, 0)
    with pytest.raises(ValueError):
        a @ IntMatrix.zeros(3, 1)


def test_big_integers_stay_exact():
    big = 10**40 + 7
    m = IntMatrix.from_rows([[big, 1], [1, big]])
    assert det_prime_squared(m) == (big * big - 1) ** 2
