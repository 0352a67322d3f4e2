"""Seeded invariant suites run by ``torsion-lab selfcheck``.

Each suite returns a list of ``(check, ok, detail)``; a suite passes when
all its checks do. Random inputs come from ``numpy.random.default_rng(seed)``,
so reruns with the same seed are identical.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .abelian import (
    LaurentPoly,
    cyclic_branched_torsion,
    cyclic_torsion_float,
    mahler_measure,
)
from .complexes import (
    beta_dominator,
    branched_torsion,
    circle_det,
    connecting_map,
    cover_complex,
    torsion_inequality_check,
    homology,
    induce_matrix,
    one_minus,
    random_complex,
    torsion_report,
)
from .cosets import (
    compose,
    cycle_type,
    cyclic_cover_table,
    low_index_subgroups,
    normalized_trace,
    trivial_table,
    word_action,
)
from .presentation import (
    GroupPresentation,
    GroupRingElement,
    PresentationError,
    abelianized_alexander,
    boundary_matrices,
    fox_derivative,
    free_reduce,
    generator,
    load_presentation,
    parse_presentation,
    reduced_jacobian,
    serialize_presentation,
    word_mul,
)
from .spectral import (
    StepDensity,
    density_log_det,
    density_log_det_parts,
    det_prime_float,
    norm_bound,
    operator_norm,
    spectral_density,
)
from .zlinalg import (
    IntMatrix,
    det_prime_squared,
    gram_det,
    image_lattice,
    kernel_lattice,
    rank,
    smith_normal_form,
    torsion_bound_check_raw,
)

DATA_DIR = Path(__file__).parent / "data"
KNOTS = ("trefoil", "figure8")

Check = tuple[str, bool, str]


@dataclass
class Context:
    rng: np.random.Generator
    presentations: dict[str, GroupPresentation]
    max_index: int


def _check(name: str, ok: bool, detail: str = "") -> Check:
    return (name, bool(ok), detail)


def _random_word(rng, ngens: int, length: int):
    return free_reduce(
        (int(rng.integers(ngens)), int(rng.choice((-1, 1)))) for _ in range(length)
    )


def _random_int_matrix(rng, max_dim=8, bound=4) -> IntMatrix:
    r, c = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
    a = rng.integers(-bound, bound + 1, size=(r, c))
    if rng.random() < 0.3 and r > 1:
        a[-1] = a[0] * int(rng.integers(-2, 3))  # force rank deficiency sometimes
    return IntMatrix(r, c, a.tolist())


def _unimodular(rng, n: int) -> IntMatrix:
    u = IntMatrix.identity(n)
    for _ in range(2 * n):
        i, j = (int(x) for x in rng.choice(n, size=2, replace=False)) if n > 1 else (0, 0)
        if i == j:
            continue
        e = [[int(a == b) for b in range(n)] for a in range(n)]
        e[i][j] = int(rng.integers(-2, 3))
        u = u @ IntMatrix(n, n, e)
    return u


def _tables(ctx: Context):
    for name in KNOTS:
        p = ctx.presentations[name]
        for t in low_index_subgroups(p, ctx.max_index):
            yield name, p, t


# --- suites ---------------------------------------------------------------------


def suite_parse(ctx: Context) -> list[Check]:
    out = []
    for name, p in ctx.presentations.items():
        again = parse_presentation(serialize_presentation(p), p.name)
        out.append(_check(f"{name}: parse-serialize round trip", again == p))
    for name in KNOTS:
        delta = abelianized_alexander(ctx.presentations[name])
        out.append(_check(f"{name}: |Delta(1)| = 1", abs(delta(1)) == 1, str(delta)))
    return out


def suite_fox(ctx: Context) -> list[Check]:
    out = []
    for name, p in ctx.presentations.items():
        ok = True
        for r in p.relators:
            total = GroupRingElement()
            for j in range(p.ngens):
                total = total + fox_derivative(r, j) * (GroupRingElement.word(generator(j)) - 1)
            ok &= total == GroupRingElement.word(r) - 1
        out.append(_check(f"{name}: fundamental formula", ok))
    ok = True
    for _ in range(50):
        n = int(ctx.rng.integers(1, 4))
        u = _random_word(ctx.rng, n, int(ctx.rng.integers(0, 8)))
        v = _random_word(ctx.rng, n, int(ctx.rng.integers(0, 8)))
        for j in range(n):
            lhs = fox_derivative(word_mul(u, v), j, n)
            rhs = fox_derivative(u, j, n) + GroupRingElement.word(u) * fox_derivative(v, j, n)
            ok &= lhs == rhs
    out.append(_check("product rule on 50 random splits", ok))
    return out


def suite_cosets(ctx: Context) -> list[Check]:
    kills = cycles_ok = trace_ok = hom_ok = True
    for _, p, t in _tables(ctx):
        kills &= t.kills(p.relators)
        for _ in range(3):
            w = _random_word(ctx.rng, p.ngens, int(ctx.rng.integers(0, 7)))
            ct = cycle_type(t, w)
            cycles_ok &= ct.degree == t.index
            trace_ok &= ct.counts.get(1, 0) == t.index * normalized_trace(t, w)
            u = _random_word(ctx.rng, p.ngens, 4)
            hom_ok &= word_action(t, word_mul(w, u)) == compose(word_action(t, w), word_action(t, u))
    out = [
        _check("relators act trivially", kills),
        _check("sum n d_n = N", cycles_ok),
        _check("d_1 = N trace", trace_ok),
        _check("word_action is a homomorphism", hom_ok),
    ]
    for name in KNOTS:
        p = ctx.presentations[name]
        small = low_index_subgroups(p, ctx.max_index - 1)
        big = low_index_subgroups(p, ctx.max_index)
        prefix = [t for t in big if t.index <= ctx.max_index - 1]
        out.append(_check(f"{name}: enumeration is prefix-stable", small == prefix))
    return out


def suite_zlinalg(ctx: Context) -> list[Check]:
    detvol = integral = chain = invariant = est = u10 = True
    for _ in range(60):
        m = _random_int_matrix(ctx.rng)
        k, im = kernel_lattice(m), image_lattice(m)
        detvol &= k.volume_squared * im.volume_squared == det_prime_squared(m)
        integral &= k.volume_squared >= 1 and im.volume_squared >= 1
        s = smith_normal_form(m)
        chain &= all(b % a == 0 for a, b in zip(s.divisors, s.divisors[1:]))
        moved = _unimodular(ctx.rng, m.rows) @ m @ _unimodular(ctx.rng, m.cols)
        invariant &= smith_normal_form(moved).divisors == s.divisors
        est &= torsion_bound_check_raw(m).holds
        if im.rank:
            scale = int(ctx.rng.integers(2, 5))
            inner = gram_det(im.basis.scale(scale))
            u10 &= Fraction(inner, im.volume_squared) == scale ** (2 * im.rank)
    return [
        _check("vol^2(ker) vol^2(im) = det'^2", detvol),
        _check("sublattice volumes are >= 1", integral),
        _check("SNF divisibility chain", chain),
        _check("SNF unimodular invariance", invariant),
        _check("torsion bounds on random matrices", est),
        _check("index^2 = vol^2 ratio for k L in L", u10),
    ]


def suite_spectral(ctx: Context) -> list[Check]:
    triv = parts = normok = True
    worst = 0.0
    for _ in range(60):
        m = _random_int_matrix(ctx.rng)
        r = rank(m)
        d = det_prime_float(m, r)
        f = spectral_density(m, 1, r)
        got = math.sqrt(math.exp(density_log_det(f)))
        rel = abs(got - d) / d
        worst = max(worst, rel)
        triv &= rel <= 1e-9
        normok &= d <= operator_norm(m) ** r * (1 + 1e-9)
    for _ in range(60):
        k = int(ctx.rng.integers(1, 12))
        lam = np.cumsum(ctx.rng.uniform(0.05, 3.0, size=k))
        mass = ctx.rng.uniform(0.01, 1.0, size=k)
        f = StepDensity(tuple(zip(lam.tolist(), mass.tolist())), float(ctx.rng.uniform(0, 1)),
                        float(lam[-1] + ctx.rng.uniform(0, 2)))
        parts &= abs(density_log_det(f) - density_log_det_parts(f)) <= 1e-12
    try:
        StepDensity.from_breakpoints([0, 1, 2], [0.5, 0.7, 0.6])
        rejects = False
    except ValueError:
        rejects = True
    bound_ok = True
    for _, p, t in _tables(ctx):
        j, _ = reduced_jacobian(p)
        bound_ok &= operator_norm(induce_matrix(j, t)) <= norm_bound(j) + 1e-9
    return [
        _check("sqrt det F = det'", triv, f"worst rel {worst:.2e}"),
        _check("jump sum = interval sum", parts),
        _check("det' <= |M|^rank", normok),
        _check("decreasing densities rejected", rejects),
        _check("norm_bound dominates |J_Gamma|", bound_ok),
    ]


def suite_complexes(ctx: Context) -> list[Check]:
    dd = euler = circ = reg = ineq = dom = True
    for _, p, t in _tables(ctx):
        c = cover_complex(p, t)
        dd &= all((c.d(k + 1) @ c.d(k)).is_zero() for k in range(1, c.top))
        hom = homology(c)
        euler &= hom[0][0] == 1 and hom[1][0] == hom[2][0] + 1
        m = generator(p.ngens - 1)
        perm = word_action(t, m)
        g2 = det_prime_squared(one_minus(perm))
        cd = circle_det(t, m)
        svd = det_prime_float(one_minus(perm), t.index - len(cycle_type(t, m).lengths()))
        circ &= g2 == cd * cd and abs(svd - cd) <= 1e-9 * cd
        reg &= torsion_report(c).identity_holds()
        ineq &= torsion_inequality_check(p, t).holds
        beta = connecting_map(p, t)
        b1k, bound = beta_dominator(p, t)
        dom &= beta.rank <= b1k and math.sqrt(beta.det_prime_squared()) <= bound * (1 + 1e-12)
    rand_ok = True
    for _ in range(200):
        c = random_complex(ctx.rng, degrees=int(ctx.rng.choice((2, 3))))
        rand_ok &= torsion_report(c).identity_holds()
    oracle = True
    for name in KNOTS:
        p = ctx.presentations[name]
        delta = abelianized_alexander(p)
        for n in range(2, 13):
            r = cyclic_branched_torsion(delta, n)
            if r:
                oracle &= branched_torsion(p, cyclic_cover_table(p, n)) == r
    base = True
    for name, p in ctx.presentations.items():
        t = trivial_table(p)
        for m in boundary_matrices(p):
            if m is not None:
                aug = IntMatrix(m.rows, m.cols,
                                [[x.augmentation() for x in row] for row in m.entries])
                base &= induce_matrix(m, t) == aug
    return [
        _check("dd = 0", dd),
        _check("b1 = b2 + 1 on knot covers", euler),
        _check("circle det: cycles = Gram = SVD", circ),
        _check("tau_RS^2 = tau_H^2 R^2 on covers", reg),
        _check("tau_RS^2 = tau_H^2 R^2 on 200 random complexes", rand_ok),
        _check("t1^2 <= det'^2(beta) det'^2(J)", ineq),
        _check("rank beta <= b1(K), det' beta <= C^b1(K)", dom),
        _check("branched torsion = resultant, n <= 12", oracle),
        _check("index 1 cover is the base complex", base),
    ]


def suite_abelian(ctx: Context) -> list[Check]:
    mult = cyclo = agree = True
    cyclotomics = [
        LaurentPoly.from_list(c)
        for c in ([-1, 1], [1, 1], [1, 1, 1], [1, 0, 1], [1, -1, 1], [1, 1, 1, 1, 1],
                  [1, -1, 1, -1, 1], [1, 0, -1, 0, 1])
    ]
    for _ in range(30):
        f = LaurentPoly.from_list(ctx.rng.integers(-3, 4, size=int(ctx.rng.integers(2, 5))).tolist())
        g = LaurentPoly.from_list(ctx.rng.integers(-3, 4, size=int(ctx.rng.integers(2, 5))).tolist())
        if f.is_zero() or g.is_zero():
            continue
        mf, mg, mfg = mahler_measure(f), mahler_measure(g), mahler_measure(f * g)
        mult &= abs(mfg - mf * mg) <= 1e-8 * max(1.0, mfg)
        k = int(ctx.rng.integers(1, 4))
        prod = LaurentPoly.from_list([1])
        for _ in range(k):
            prod = prod * cyclotomics[int(ctx.rng.integers(len(cyclotomics)))]
        cyclo &= abs(mahler_measure(prod) - 1) <= 1e-9
    for name in KNOTS:
        delta = abelianized_alexander(ctx.presentations[name])
        for n in range(2, 51):
            exact = cyclic_branched_torsion(delta, n)
            if exact:
                agree &= abs(cyclic_torsion_float(delta, n) - exact) <= 1e-6 * exact
    return [
        _check("Mahler measure is multiplicative", mult),
        _check("cyclotomic products have measure 1", cyclo),
        _check("resultant = floating product, n <= 50", agree),
    ]


SUITES: dict[str, Callable[[Context], list[Check]]] = {
    "parse": suite_parse,
    "fox": suite_fox,
    "cosets": suite_cosets,
    "zlinalg": suite_zlinalg,
    "spectral": suite_spectral,
    "complexes": suite_complexes,
    "abelian": suite_abelian,
}


@dataclass
class SuiteResult:
    name: str
    checks: list[Check]
    seconds: float
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error and all(ok for _, ok, _ in self.checks)


def load_bundled(directory: Path | None = None) -> dict[str, GroupPresentation]:
    directory = Path(directory) if directory is not None else DATA_DIR
    return {
        path.stem: load_presentation(path) for path in sorted(directory.glob("*.pres"))
    }


def run_selfcheck(seed: int = 0, presentations: Path | None = None, max_index: int = 5,
                  suites: list[str] | None = None) -> list[SuiteResult]:
    names = suites or list(SUITES)
    try:
        pres = load_bundled(presentations)
        missing = [k for k in KNOTS if k not in pres]
        load_error = f"missing bundled presentations: {missing}" if missing else ""
    except (PresentationError, OSError) as exc:
        pres, load_error = {}, f"{type(exc).__name__}: {exc}"
    results = []
    for name in names:
        start = time.perf_counter()
        if load_error:
            results.append(SuiteResult(name, [], 0.0, load_error))
            continue
        ctx = Context(np.random.default_rng(seed), pres, max_index)
        try:
            checks = SUITES[name](ctx)
            results.append(SuiteResult(name, checks, time.perf_counter() - start))
        except Exception as exc:  # a crashing suite is a failing suite
            results.append(SuiteResult(name, [], time.perf_counter() - start,
                                       f"{type(exc).__name__}: {exc}"))
    return results


def format_results(results: list[SuiteResult]) -> str:
    lines = []
    for res in results:
        lines.append(f"[{'PASS' if res.ok else 'FAIL'}] {res.name} ({res.seconds:.2f}s)")
        if res.error:
            lines.append(f"    error: {res.error}")
        for check, ok, detail in res.checks:
            mark = "ok " if ok else "BAD"
            lines.append(f"    {mark} {check}" + (f"  ({detail})" if detail else ""))
    passed = sum(r.ok for r in results)
    lines.append(f"{passed}/{len(results)} suites passed")
    return "\n".join(lines)
