"""Finite-index subgroups as coset tables.

Permutations are tuples ``p`` with ``p[s]`` the image of coset ``s``.
The group acts on the right: ``s . (uv) = (s . u) . v``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .presentation import GroupPresentation, PresentationError, Word, abelianization_degrees

Perm = tuple[int, ...]


class ResourceLimitError(RuntimeError):
    """Low-index search exceeded its node budget."""


def identity_perm(n: int) -> Perm:
    return tuple(range(n))


def compose(p: Perm, q: Perm) -> Perm:
    """``p`` then ``q`` (right action)."""
    return tuple(q[x] for x in p)


def invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def cycles(p: Perm) -> list[tuple[int, ...]]:
    seen = [False] * len(p)
    out = []
    for s in range(len(p)):
        if seen[s]:
            continue
        cyc = []
        x = s
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = p[x]
        out.append(tuple(cyc))
    return out


@dataclass(frozen=True)
class CosetTable:
    """Transitive right action of the generators on ``{0, ..., N-1}``.

    Coset 0 is the subgroup itself.
    """

    perms: tuple[Perm, ...]
    generators: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.perms:
            raise ValueError("a coset table needs at least one generator")
        n = len(self.perms[0])
        if n < 1:
            raise ValueError("index must be positive")
        for p in self.perms:
            if len(p) != n or sorted(p) != list(range(n)):
                raise ValueError("every generator must act by a permutation of the cosets")
        if self.generators and len(self.generators) != len(self.perms):
            raise ValueError("generator names do not match the permutations")
        if not _is_transitive(self.perms):
            raise ValueError("action is not transitive")

    @property
    def index(self) -> int:
        return len(self.perms[0])

    @property
    def ngens(self) -> int:
        return len(self.perms)

    def flat(self) -> tuple[int, ...]:
        return tuple(x for p in self.perms for x in p)

    def sort_key(self) -> tuple:
        return (self.index, self.flat())

    def kills(self, words: Sequence[Word]) -> bool:
        ident = identity_perm(self.index)
        return all(word_action(self, w) == ident for w in words)

    def rebased(self, base: int) -> "CosetTable":
        """Same action, standardized with ``base`` as the subgroup coset."""
        return CosetTable(_standardize(self.perms, base), self.generators)


def _is_transitive(perms: Sequence[Perm]) -> bool:
    n = len(perms[0])
    seen = {0}
    stack = [0]
    while stack:
        s = stack.pop()
        # forward images suffice: on a finite set, inverses are powers
        for p in perms:
            t = p[s]
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return len(seen) == n


def _standardize(perms: Sequence[Perm], base: int) -> tuple[Perm, ...]:
    """Relabel cosets in first-visit order from ``base``.

    Scanning is coset by coset (in new labels) and, within a coset, over
    ``x1, x1^-1, x2, x2^-1, ...``, the same order the enumerator defines
    new cosets in.
    """
    n = len(perms[0])
    invs = [invert(p) for p in perms]
    label = {base: 0}
    order = [base]
    k = 0
    while k < len(order):
        s = order[k]
        for p, q in zip(perms, invs):
            for t in (p[s], q[s]):
                if t not in label:
                    label[t] = len(order)
                    order.append(t)
        k += 1
    if len(order) != n:
        raise ValueError("action is not transitive")
    return tuple(tuple(label[p[order[i]]] for i in range(n)) for p in perms)


def word_action(t: CosetTable, w: Word) -> Perm:
    """Permutation by which ``w`` acts on the cosets."""
    n = t.index
    cur = list(range(n))
    for g, s in w:
        p = t.perms[g] if s == 1 else invert(t.perms[g])
        cur = [p[x] for x in cur]
    return tuple(cur)


def fixed_points(p: Perm) -> int:
    return sum(1 for i, x in enumerate(p) if i == x)


def normalized_trace(t: CosetTable, w: Word) -> Fraction:
    """Fixed points of ``w`` on the cosets divided by the index."""
    return Fraction(fixed_points(word_action(t, w)), t.index)


@dataclass(frozen=True)
class CycleType:
    counts: dict[int, int]  # cycle length -> number of cycles

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def degree(self) -> int:
        return sum(n * d for n, d in self.counts.items())

    def lengths(self) -> list[int]:
        return sorted(n for n, d in self.counts.items() for _ in range(d))


def cycle_type(t: CosetTable, w: Word) -> CycleType:
    counts = Counter(len(c) for c in cycles(word_action(t, w)))
    return CycleType(dict(sorted(counts.items())))


# --- low-index enumeration ----------------------------------------------------


class _Search:
    """Backtracking over standardized partial coset tables."""

    def __init__(self, ngens: int, relators: Sequence[Word], max_index: int, budget: int):
        self.ngens = ngens
        # letters as column indices: 2g for g, 2g+1 for g^-1
        self.rels = [tuple(2 * g + (s < 0) for g, s in r) for r in relators if r]
        self.max_index = max_index
        self.budget = budget
        self.nodes = 0
        self.found: list[tuple[Perm, ...]] = []

    def run(self):
        table = [[None] * (2 * self.ngens)]
        self._extend(table)
        return self.found

    def _extend(self, table):
        self.nodes += 1
        if self.nodes > self.budget:
            raise ResourceLimitError(
                f"low-index search exceeded its budget of {self.budget} nodes"
            )
        hole = self._first_hole(table)
        if hole is None:
            self.found.append(
                tuple(tuple(row[2 * g] for row in table) for g in range(self.ngens))
            )
            return
        c, x = hole
        xi = x ^ 1
        n = len(table)
        targets = [d for d in range(n) if table[d][xi] is None]
        if n < self.max_index:
            targets.append(n)
        for d in targets:
            trial = [list(row) for row in table]
            if d == n:
                trial.append([None] * (2 * self.ngens))
            trial[c][x] = d
            trial[d][xi] = c
            if self._deduce(trial):
                self._extend(trial)

    @staticmethod
    def _first_hole(table):
        for c, row in enumerate(table):
            for x, v in enumerate(row):
                if v is None:
                    return c, x
        return None

    def _deduce(self, table) -> bool:
        """Scan every relator from every coset; fill forced entries.

        Returns False on a contradiction.
        """
        changed = True
        while changed:
            changed = False
            for c in range(len(table)):
                for rel in self.rels:
                    res = self._scan(table, c, rel)
                    if res is False:
                        return False
                    if res:
                        changed = True
        return True

    @staticmethod
    def _scan(table, c, rel):
        f, i = c, 0
        m = len(rel)
        while i < m:
            nxt = table[f][rel[i]]
            if nxt is None:
                break
            f, i = nxt, i + 1
        if i == m:
            return False if f != c else None
        b, j = c, m - 1
        while j >= i:
            nxt = table[b][rel[j] ^ 1]
            if nxt is None:
                break
            b, j = nxt, j - 1
        if j < i:
            return False if f != b else None
        if j == i:
            x = rel[i]
            if table[b][x ^ 1] is not None:
                return False
            table[f][x] = b
            table[b][x ^ 1] = f
            return True
        return None


def low_index_subgroups(
    p: GroupPresentation,
    max_index: int,
    *,
    conjugates: bool = False,
    budget: int = 2_000_000,
) -> list[CosetTable]:
    """Subgroups of index at most ``max_index``, as coset tables.

    By default one representative per conjugacy class is returned (the
    lexicographically smallest standardized table over all base cosets);
    with ``conjugates=True`` every subgroup is returned. Output is sorted by
    ``(index, flattened permutations)``.
    """
    if max_index < 1:
        raise ValueError("max_index must be >= 1")
    if p.ngens == 0:
        raise PresentationError("presentation has no generators")
    search = _Search(p.ngens, p.relators, max_index, budget)
    raw = search.run()
    if conjugates:
        tables = {perms for perms in raw}
    else:
        tables = set()
        for perms in raw:
            tables.add(min(_standardize(perms, b) for b in range(len(perms[0]))))
    out = [CosetTable(perms, p.generators) for perms in tables]
    out.sort(key=CosetTable.sort_key)
    return out


def trivial_table(p: GroupPresentation) -> CosetTable:
    return CosetTable(tuple((0,) for _ in range(p.ngens)), p.generators)


def cyclic_cover_table(p: GroupPresentation, n: int) -> CosetTable:
    """Kernel of the composite onto Z/n through the abelianization Z."""
    if n < 1:
        raise ValueError("n must be >= 1")
    deg = abelianization_degrees(p)
    perms = tuple(tuple((s + d) % n for s in range(n)) for d in deg)
    return CosetTable(perms, p.generators)


def is_normal(t: CosetTable) -> bool:
    """True iff every base coset gives the same standardized table."""
    ref = t.rebased(0).perms
    return all(_standardize(t.perms, b) == ref for b in range(t.index))


# --- reports and serialization -------------------------------------------------


@dataclass(frozen=True)
class TraceReport:
    words: tuple[Word, ...]
    targets: tuple[int, ...]  # trace in the group itself: 1 for e, 0 otherwise
    rows: tuple[tuple[int, tuple[Fraction, ...]], ...]  # (index, traces per word)


def trace_convergence_report(tables: Sequence[CosetTable], words: Sequence[Word]) -> TraceReport:
    """Normalized traces of each word on each table; no limit is asserted.

    The target column treats a nonempty reduced word as a nontrivial
    element, which is an assumption outside free groups.
    """
    words = tuple(words)
    targets = tuple(1 if not w else 0 for w in words)
    rows = tuple((t.index, tuple(normalized_trace(t, w) for w in words)) for t in tables)
    return TraceReport(words, targets, rows)


def serialize_table(t: CosetTable) -> str:
    names = t.generators or tuple(f"x{i}" for i in range(t.ngens))
    lines = [f"index {t.index}"]
    for name, p in zip(names, t.perms):
        lines.append(f"{name}: " + " ".join(map(str, p)))
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> CosetTable:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("index "):
        raise ValueError("coset table must start with 'index N'")
    n = int(lines[0].split()[1])
    names, perms = [], []
    for ln in lines[1:]:
        name, _, rest = ln.partition(":")
        p = tuple(int(x) for x in rest.split())
        if len(p) != n:
            raise ValueError(f"generator {name.strip()} has {len(p)} images, expected {n}")
        names.append(name.strip())
        perms.append(p)
    return CosetTable(tuple(perms), tuple(names))
