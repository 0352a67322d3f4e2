"""Group presentations, free-group words and Fox calculus.

A word is a tuple of ``(generator_index, sign)`` letters with ``sign`` in
``{+1, -1}``; words are always kept freely reduced. Group ring elements are
integer combinations of free-group words: nothing here ever decides
equality in the presented group, every downstream computation goes through
a finite permutation action instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .abelian import LaurentPoly, laurent_det

Letter = tuple[int, int]
Word = tuple[Letter, ...]

IDENTITY: Word = ()


class PresentationError(ValueError):
    """Semantic problem with a presentation (unknown generator, bad shape...)."""


class PresentationSyntaxError(PresentationError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ShapeError(PresentationError):
    """Generator/relator counts do not match the knot-exterior or closed shape."""


# --- free group -------------------------------------------------------------


def free_reduce(letters: Iterable[Letter]) -> Word:
    """Cancel adjacent ``x x^-1`` pairs until none remain."""
    stack: list[Letter] = []
    for gen, sign in letters:
        if sign not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {sign}")
        if stack and stack[-1][0] == gen and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((gen, sign))
    return tuple(stack)


def word_mul(u: Word, v: Word) -> Word:
    return free_reduce(u + v)


def word_inverse(w: Word) -> Word:
    return tuple((g, -s) for g, s in reversed(w))


def generator(i: int, sign: int = 1) -> Word:
    return ((i, sign),)


def exponent_sums(w: Word, ngens: int) -> list[int]:
    sums = [0] * ngens
    for g, s in w:
        sums[g] += s
    return sums


# --- group ring -------------------------------------------------------------


class GroupRingElement:
    """Finite integer combination of free-group words."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Word, int] | None = None):
        clean: dict[Word, int] = {}
        for w, c in (terms or {}).items():
            if c:
                w = free_reduce(w)
                clean[w] = clean.get(w, 0) + c
        self._terms = {w: c for w, c in clean.items() if c}
        self._hash = None

    @classmethod
    def word(cls, w: Word, coeff: int = 1) -> "GroupRingElement":
        return cls({w: coeff})

    @classmethod
    def scalar(cls, c: int) -> "GroupRingElement":
        return cls({IDENTITY: c})

    @property
    def terms(self) -> dict[Word, int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def l1_norm(self) -> int:
        return sum(abs(c) for c in self._terms.values())

    def augmentation(self) -> int:
        return sum(self._terms.values())

    def free_trace(self) -> int:
        """Coefficient of the empty word (the trace when the group is free)."""
        return self._terms.get(IDENTITY, 0)

    def star(self) -> "GroupRingElement":
        """The involution ``sum c_w w -> sum c_w w^-1``."""
        return GroupRingElement({word_inverse(w): c for w, c in self._terms.items()})

    def __add__(self, other: "GroupRingElement | int") -> "GroupRingElement":
        other = _as_element(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0) + c
        return GroupRingElement(out)

    __radd__ = __add__

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement({w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "GroupRingElement | int") -> "GroupRingElement":
        return self + (-_as_element(other))

    def __rsub__(self, other: "GroupRingElement | int") -> "GroupRingElement":
        return _as_element(other) - self

    def __mul__(self, other: "GroupRingElement | int") -> "GroupRingElement":
        other = _as_element(other)
        out: dict[Word, int] = {}
        for u, a in self._terms.items():
            for v, b in other._terms.items():
                w = word_mul(u, v)
                out[w] = out.get(w, 0) + a * b
        return GroupRingElement(out)

    def __rmul__(self, other: int) -> "GroupRingElement":
        return _as_element(other) * self

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = GroupRingElement.scalar(other)
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"GroupRingElement({self._terms!r})"

    def format(self, names: Sequence[str]) -> str:
        if not self._terms:
            return "0"
        parts = []
        for w in sorted(self._terms, key=lambda w: (len(w), w)):
            c = self._terms[w]
            body = format_word(w, names) if w else "1"
            if w and abs(c) == 1:
                coeff = ""
            else:
                coeff = str(abs(c)) + ("*" if w else "")
                if not w:
                    body = ""
            parts.append(("-" if c < 0 else "+", coeff + body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _as_element(x: "GroupRingElement | int") -> GroupRingElement:
    if isinstance(x, GroupRingElement):
        return x
    return GroupRingElement.scalar(int(x))


class GroupRingMatrix:
    """Matrix with entries in the integral free-group ring."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Sequence[Sequence[GroupRingElement]]):
        entries = tuple(tuple(row) for row in entries)
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise ValueError(f"entries do not match shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[GroupRingElement | int]], cols: int | None = None):
        rows = [[_as_element(x) for x in r] for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, rows)

    def __getitem__(self, ij: tuple[int, int]) -> GroupRingElement:
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def column(self, j: int) -> "GroupRingMatrix":
        return GroupRingMatrix(self.rows, 1, [[r[j]] for r in self.entries])

    def drop_column(self, j: int) -> "GroupRingMatrix":
        return GroupRingMatrix(
            self.rows, self.cols - 1, [r[:j] + r[j + 1:] for r in self.entries]
        )

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "GroupRingMatrix":
        return GroupRingMatrix(
            len(rows), len(cols), [[self.entries[i][j] for j in cols] for i in rows]
        )

    def star(self) -> "GroupRingMatrix":
        """Conjugate transpose under the group-ring involution."""
        return GroupRingMatrix(
            self.cols,
            self.rows,
            [[self.entries[i][j].star() for i in range(self.rows)] for j in range(self.cols)],
        )

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return GroupRingMatrix(
            self.rows,
            self.cols,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
        )

    def __matmul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = GroupRingElement()
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return GroupRingMatrix(self.rows, other.cols, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupRingMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.shape, self.entries))

    def __repr__(self) -> str:
        return f"GroupRingMatrix({self.rows}x{self.cols})"


# --- presentations -------------------------------------------------------------


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    meridian: int | None = None
    volume: float | None = None
    duals: tuple[Word, ...] | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise PresentationError("duplicate generator name")
        n = len(self.generators)
        for w in self.relators + (self.duals or ()):
            for g, _ in w:
                if not 0 <= g < n:
                    raise PresentationError(f"word uses undeclared generator index {g}")
        if self.duals is not None and len(self.duals) != n:
            raise PresentationError(
                f"{len(self.duals)} duals given for {n} generators"
            )
        if self.meridian is not None and not 0 <= self.meridian < n:
            raise PresentationError("meridian index out of range")
        if self.volume is not None and self.volume < 0:
            raise PresentationError("volume must be nonnegative")

    @property
    def ngens(self) -> int:
        return len(self.generators)

    @property
    def is_closed_shape(self) -> bool:
        return self.duals is not None and len(self.relators) == self.ngens

    def check_shape(self) -> str:
        """Return ``"knot"`` or ``"closed"``; raise ``ShapeError`` otherwise."""
        if len(self.relators) == self.ngens - 1:
            return "knot"
        if len(self.relators) == self.ngens and self.duals is not None:
            return "closed"
        raise ShapeError(
            f"{self.ngens} generators and {len(self.relators)} relators fit neither "
            "the knot-exterior shape (n+1, n) nor the closed shape (n+1, n+1) with duals"
        )

    def format_word(self, w: Word) -> str:
        return format_word(w, self.generators)


def format_word(w: Word, names: Sequence[str]) -> str:
    """Render a word with runs collapsed into powers, e.g. ``a^2 b^-1``."""
    if not w:
        return ""
    out = []
    i = 0
    while i < len(w):
        g, s = w[i]
        j = i
        while j < len(w) and w[j] == (g, s):
            j += 1
        k = (j - i) * s
        out.append(names[g] if k == 1 else f"{names[g]}^{k}")
        i = j
    return " ".join(out)


_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_LETTER = re.compile(r"([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?$")
_KEYS = ("generators", "relators", "meridian", "duals", "volume")


def parse_presentation(text: str, name: str = "") -> GroupPresentation:
    """Parse the line-oriented presentation format.

    ``generators:`` must come first; ``relators:`` is required. If
    ``meridian:`` is given, the generators are reordered so the meridian is
    last and all words are re-indexed accordingly.
    """
    seen: dict[str, tuple[int, int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise PresentationSyntaxError("expected '<key>: ...'", lineno, col)
        key_part, value = line.split(":", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if key not in _KEYS:
            raise PresentationSyntaxError(f"unknown key {key!r}", lineno, key_col)
        if key in seen:
            raise PresentationSyntaxError(f"duplicate key {key!r}", lineno, key_col)
        if key != "generators" and "generators" not in seen:
            raise PresentationSyntaxError(
                f"{key!r} appears before 'generators:'", lineno, key_col
            )
        seen[key] = (lineno, len(key_part) + 2, value)

    if "generators" not in seen:
        raise PresentationSyntaxError("missing 'generators:' line", 1, 1)
    if "relators" not in seen:
        raise PresentationSyntaxError("missing 'relators:' line", 1, 1)

    lineno, col0, value = seen["generators"]
    names: list[str] = []
    for tok, col in _tokens(value, col0):
        if not _NAME.fullmatch(tok):
            raise PresentationSyntaxError(f"bad generator name {tok!r}", lineno, col)
        if tok in names:
            raise PresentationError(f"duplicate generator name {tok!r} (line {lineno})")
        names.append(tok)
    index = {n: i for i, n in enumerate(names)}

    relators = tuple(_parse_words(*seen["relators"], index))
    duals = tuple(_parse_words(*seen["duals"], index)) if "duals" in seen else None

    meridian = None
    if "meridian" in seen:
        lineno, col0, value = seen["meridian"]
        toks = list(_tokens(value, col0))
        if len(toks) != 1:
            raise PresentationSyntaxError("meridian takes exactly one name", lineno, col0)
        tok, col = toks[0]
        if tok not in index:
            raise PresentationError(f"undeclared generator {tok!r} (line {lineno}, column {col})")
        meridian = index[tok]

    volume = None
    if "volume" in seen:
        lineno, col0, value = seen["volume"]
        try:
            volume = float(value.strip())
        except ValueError:
            raise PresentationSyntaxError(f"bad volume {value.strip()!r}", lineno, col0) from None
        if not volume >= 0:
            raise PresentationSyntaxError("volume must be a nonnegative number", lineno, col0)

    pres = GroupPresentation(tuple(names), relators, None, volume, duals, name)
    if meridian is not None:
        pres = move_generator_last(pres, meridian)
    return pres


def _tokens(value: str, col0: int):
    for m in re.finditer(r"\S+", value):
        yield m.group(0), col0 + m.start()


def _parse_words(lineno: int, col0: int, value: str, index: Mapping[str, int]) -> list[Word]:
    words: list[Word] = []
    if not value.strip():
        return words
    offset = 0
    for chunk in value.split(";"):
        letters: list[Letter] = []
        toks = list(_tokens(chunk, col0 + offset))
        if not toks:
            raise PresentationSyntaxError("empty word between ';'", lineno, col0 + offset)
        for tok, col in toks:
            m = _LETTER.match(tok)
            if not m:
                raise PresentationSyntaxError(f"bad letter {tok!r}", lineno, col)
            name, exp = m.group(1), m.group(2)
            if name not in index:
                raise PresentationError(
                    f"undeclared generator {name!r} (line {lineno}, column {col})"
                )
            k = int(exp) if exp is not None else 1
            if k == 0:
                raise PresentationSyntaxError("exponent must be nonzero", lineno, col)
            letters.extend([(index[name], 1 if k > 0 else -1)] * abs(k))
        words.append(free_reduce(letters))
        offset += len(chunk) + 1
    return words


def move_generator_last(p: GroupPresentation, i: int) -> GroupPresentation:
    """Reorder generators so generator ``i`` is last; it becomes the meridian."""
    n = p.ngens
    order = [j for j in range(n) if j != i] + [i]
    new_index = {old: new for new, old in enumerate(order)}

    def remap(w: Word) -> Word:
        return tuple((new_index[g], s) for g, s in w)

    duals = None
    if p.duals is not None:
        duals = tuple(remap(p.duals[old]) for old in order)
    return GroupPresentation(
        tuple(p.generators[j] for j in order),
        tuple(remap(r) for r in p.relators),
        n - 1,
        p.volume,
        duals,
        p.name,
    )


def serialize_presentation(p: GroupPresentation) -> str:
    lines = [f"generators: {' '.join(p.generators)}"]
    lines.append("relators: " + " ; ".join(p.format_word(r) for r in p.relators))
    if p.meridian is not None:
        lines.append(f"meridian: {p.generators[p.meridian]}")
    if p.duals is not None:
        lines.append("duals: " + " ; ".join(p.format_word(w) or "1" for w in p.duals))
    if p.volume is not None:
        lines.append(f"volume: {p.volume!r}")
    return "\n".join(lines) + "\n"


def load_presentation(path) -> GroupPresentation:
    from pathlib import Path

    path = Path(path)
    return parse_presentation(path.read_text(encoding="utf-8"), name=path.stem)


# --- Fox calculus -------------------------------------------------------------


def fox_derivative(r: Word, j: int, ngens: int | None = None) -> GroupRingElement:
    """Fox derivative of ``r`` with respect to generator ``j``.

    Rules: d(a_j)/d(a_j) = 1, d(a_j^-1)/d(a_j) = -a_j^-1 and
    d(uv) = du + u dv.
    """
    if j < 0 or (ngens is not None and j >= ngens):
        raise IndexError(f"generator index {j} out of range")
    terms: dict[Word, int] = {}
    prefix: list[Letter] = []
    for g, s in r:
        if g == j:
            if s == 1:
                w = free_reduce(prefix)
                terms[w] = terms.get(w, 0) + 1
            else:
                w = free_reduce(prefix + [(g, -1)])
                terms[w] = terms.get(w, 0) - 1
        prefix.append((g, s))
    return GroupRingElement(terms)


class Boundaries(NamedTuple):
    d2: GroupRingMatrix
    d1: GroupRingMatrix
    d3: GroupRingMatrix | None = None


def boundary_matrices(p: GroupPresentation) -> Boundaries:
    """Boundary matrices of the presentation complex over the group ring.

    ``d2[i][j]`` is the Fox derivative of relator ``i`` in generator ``j``
    and ``d1[j] = 1 - a_j``. In the closed shape ``d3[0][i] = 1 - b_i``.
    """
    shape = p.check_shape()
    n1 = p.ngens
    d2 = GroupRingMatrix(
        len(p.relators), n1, [[fox_derivative(r, j) for j in range(n1)] for r in p.relators]
    )
    d1 = GroupRingMatrix(n1, 1, [[1 - GroupRingElement.word(generator(j))] for j in range(n1)])
    d3 = None
    if shape == "closed":
        d3 = GroupRingMatrix(1, n1, [[1 - GroupRingElement.word(b) for b in p.duals]])
    return Boundaries(d2, d1, d3)


def reduced_jacobian(p: GroupPresentation) -> tuple[GroupRingMatrix, GroupRingMatrix]:
    """Return ``(J, c)``: the Fox matrix without its last column, and that column.

    In the closed shape the last row is dropped from both as well, so ``J``
    is always square.
    """
    shape = p.check_shape()
    d2 = boundary_matrices(p).d2
    last = p.ngens - 1
    if shape == "closed":
        d2 = d2.submatrix(range(d2.rows - 1), range(d2.cols))
    return d2.drop_column(last), d2.column(last)


# --- abelianization -----------------------------------------------------------


def abelianization_degrees(p: GroupPresentation) -> tuple[int, ...]:
    """Degrees of the generators under the surjection onto Z.

    Raises ``PresentationError`` unless the abelianization is infinite
    cyclic. The sign is fixed so the meridian (or the first generator with
    nonzero degree) maps to a positive degree.
    """
    from .zlinalg import IntMatrix, kernel_lattice, smith_normal_form

    n = p.ngens
    e = IntMatrix.from_rows([exponent_sums(r, n) for r in p.relators], cols=n)
    snf = smith_normal_form(e)
    free_rank = n - snf.rank
    if free_rank != 1 or any(d != 1 for d in snf.divisors):
        raise PresentationError(
            f"abelianization is not Z (free rank {free_rank}, divisors {snf.divisors})"
        )
    basis = kernel_lattice(e.T).basis
    assert basis.rows == 1
    deg = list(basis.data[0])
    pivot = p.meridian if p.meridian is not None and deg[p.meridian] else next(
        i for i, d in enumerate(deg) if d
    )
    if deg[pivot] < 0:
        deg = [-d for d in deg]
    return tuple(deg)


def abelianize(x: GroupRingElement, degrees: Sequence[int]) -> LaurentPoly:
    out: dict[int, int] = {}
    for w, c in x.items():
        e = sum(degrees[g] * s for g, s in w)
        out[e] = out.get(e, 0) + c
    return LaurentPoly(out)


def abelianized_alexander(p: GroupPresentation) -> LaurentPoly:
    """Alexander polynomial from the abelianized reduced Jacobian.

    When the removed generator has degree ``d`` the determinant equals
    ``Delta * (t^d - 1)/(t - 1)``; that factor is divided out exactly.
    """
    if p.check_shape() != "knot":
        raise ShapeError("Alexander polynomial needs the knot-exterior shape")
    deg = abelianization_degrees(p)
    if deg[-1] == 0:
        k = next(i for i, d in enumerate(deg) if d)
        p = move_generator_last(p, k)
        deg = abelianization_degrees(p)
    j, _ = reduced_jacobian(p)
    det = laurent_det([[abelianize(x, deg) for x in row] for row in j.entries])
    d = abs(deg[-1])
    cyclo = LaurentPoly.from_list([1] * d)
    return det.exact_div(cyclo).normalize()
