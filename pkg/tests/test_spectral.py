import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from torsion_lab.complexes import induce_matrix
from torsion_lab.cosets import CosetTable, low_index_subgroups
from torsion_lab.presentation import GroupRingElement, GroupRingMatrix, generator, reduced_jacobian
from torsion_lab.spectral import (
    StepDensity,
    density_log_det,
    density_log_det_parts,
    det_prime_float,
    fk_report,
    log_det_prime_float,
    lower_envelope,
    norm_bound,
    operator_norm,
    singular_values,
    spectral_density,
)
from torsion_lab.zlinalg import IntMatrix, det_prime_squared, rank


def cycle(n):
    return CosetTable((tuple((s + 1) % n for s in range(n)),), ("a",))


def one_minus_a():
    return GroupRingMatrix(1, 1, [[1 - GroupRingElement.word(generator(0))]])


def test_singular_values_examples():
    assert np.allclose(singular_values(np.eye(3)), [1, 1, 1])
    assert np.allclose(singular_values(np.diag([2.0, 3.0])), [3, 2])
    assert np.allclose(singular_values(np.eye(4)[[2, 0, 3, 1]]), 1)
    with pytest.raises(ValueError):
        singular_values(np.array([[np.nan, 1.0]]))


def test_det_prime_float_examples():
    assert det_prime_float(np.diag([2.0, 3.0]), 2) == pytest.approx(6)
    assert det_prime_float(np.zeros((2, 2)), 0) == 1
    assert log_det_prime_float(np.zeros((2, 2)), 0) == 0


def test_density_examples():
    f = spectral_density(np.diag([2, 3]), 1)
    assert [lam for lam, _ in f.jumps] == pytest.approx([4, 9])
    assert [m for _, m in f.jumps] == [1, 1]
    assert density_log_det(f) == pytest.approx(math.log(36))
    z = spectral_density(np.zeros((1, 1)), 1)
    assert z.value_at_zero == 1 and z.jumps == ()
    half = spectral_density(np.diag([2, 3]), 2)
    assert [m for _, m in half.jumps] == [0.5, 0.5]
    assert density_log_det(StepDensity(((1.0, 1.0),), 0.0, 1.0)) == 0


def test_two_jump_interval_path():
    f = StepDensity(((4.0, 0.5), (9.0, 0.5)), 0.0, 12.0)
    expected = 0.5 * math.log(4) + 0.5 * math.log(9)
    assert density_log_det_parts(f) == pytest.approx(expected, abs=1e-12)


def test_step_density_rejects_decreasing_data():
    with pytest.raises(ValueError):
        StepDensity.from_breakpoints([0, 1, 2], [0.5, 0.7, 0.6])
    with pytest.raises(ValueError):
        StepDensity(((2.0, 1.0), (1.0, 1.0)), 0.0, 3.0)
    with pytest.raises(ValueError):
        StepDensity(((1.0, -1.0),), 0.0, 3.0)


def test_density_evaluation():
    f = StepDensity(((1.0, 0.25), (3.0, 0.5)), 0.25, 5.0)
    assert f(-1) == 0 and f(0) == 0.25 and f(1) == 0.5 and f(2.9) == 0.5 and f(10) == 1.0
    assert f.total == 1.0


@st.composite
def int_arrays(draw, max_dim=8, bound=5):
    r, c = draw(st.integers(1, max_dim)), draw(st.integers(1, max_dim))
    vals = draw(st.lists(st.integers(-bound, bound), min_size=r * c, max_size=r * c))
    return np.array(vals, dtype=np.int64).reshape(r, c)


@settings(max_examples=150, deadline=None)
@given(int_arrays())
def test_sqrt_det_density_is_det_prime(a):
    m = IntMatrix.from_numpy(a)
    r = rank(m)
    d = det_prime_float(a, r)
    got = math.sqrt(math.exp(density_log_det(spectral_density(a, 1, r))))
    assert got == pytest.approx(d, rel=1e-9)
    assert d * d == pytest.approx(det_prime_squared(m), rel=1e-9)
    assert d <= operator_norm(a) ** r * (1 + 1e-9)


@st.composite
def step_densities(draw):
    k = draw(st.integers(1, 10))
    gaps = draw(st.lists(st.floats(0.01, 5.0), min_size=k, max_size=k))
    masses = draw(st.lists(st.floats(0.001, 2.0), min_size=k, max_size=k))
    lam = np.cumsum(gaps).tolist()
    extra = draw(st.floats(0, 3))
    return StepDensity(tuple(zip(lam, masses)), draw(st.floats(0, 1)), lam[-1] + extra)


@settings(max_examples=200, deadline=None)
@given(step_densities())
def test_two_log_det_paths_agree(f):
    assert abs(density_log_det(f) - density_log_det_parts(f)) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(st.lists(step_densities(), min_size=1, max_size=4))
def test_envelope_is_a_lower_bound(fs):
    env = lower_envelope(fs)
    for x in env.breakpoints() + [env.cutoff + 1]:
        assert env(x) <= min(f(x) for f in fs) + 1e-12


@settings(max_examples=150, deadline=None)
@given(st.lists(step_densities(), min_size=2, max_size=4))
def test_envelope_determinant_dominates_members(fs):
    # For densities sharing F(0) and total mass, a pointwise smaller density has
    # larger determinant: ln det F = (F(C) - F(0)) ln C - int (F - F(0)) / lambda.
    fs = [StepDensity(f.jumps, 0.0, f.cutoff).scaled(1 / f.total) if f.jumps else f for f in fs]
    assume(all(f.total > 0 for f in fs))
    env = lower_envelope(fs)
    assume(abs(env.total - 1) < 1e-9)
    assert density_log_det(env) >= max(density_log_det(f) for f in fs) - 1e-9


def test_norm_bound_examples(trefoil):
    assert norm_bound(one_minus_a()) == 2
    assert norm_bound(GroupRingMatrix(1, 1, [[GroupRingElement()]])) == 0
    j, _ = reduced_jacobian(trefoil)
    assert norm_bound(j) == 3


def test_norm_bound_dominates_induced_norms(knots):
    for p in knots.values():
        j, c = reduced_jacobian(p)
        for t in low_index_subgroups(p, 5):
            assert operator_norm(induce_matrix(j, t)) <= norm_bound(j) + 1e-9
            assert operator_norm(induce_matrix(c, t)) <= norm_bound(c) + 1e-9


def test_fk_report_scalar():
    b = GroupRingMatrix(1, 1, [[GroupRingElement.scalar(2)]])
    rep = fk_report(b, [cycle(n) for n in (1, 2, 5)])
    assert all(r.log_det_per_index == pytest.approx(math.log(2)) for r in rep.rows)


def test_fk_report_cycle_formula():
    rep = fk_report(one_minus_a(), [cycle(n) for n in range(2, 20)])
    for r in rep.rows:
        assert r.det_prime_squared == r.index**2
        assert r.log_det_per_index == pytest.approx(math.log(r.index) / r.index, rel=1e-12)
        assert r.null_fraction == pytest.approx(1 / r.index)
        assert density_log_det(r.density) / 2 == pytest.approx(r.log_det_per_index, rel=1e-9)


def test_null_fraction_matches_exact_rank(figure8):
    j, _ = reduced_jacobian(figure8)
    tables = low_index_subgroups(figure8, 5)
    for t, row in zip(tables, fk_report(j, tables).rows):
        m = induce_matrix(j, t)
        assert row.null_fraction == pytest.approx((m.rows - rank(m)) / t.index)
