"""Exact integer linear algebra: Smith normal form and first homology.

Matrices hold Python ints, so arithmetic never overflows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .words import GeneratorSymbol, Word


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix; ``data`` is a tuple of row tuples."""

    rows: int
    cols: int
    data: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ValueError("matrix shape does not match data")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.data[ij[0]][ij[1]]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        cols = list(zip(*other.data)) if other.rows else [()] * other.cols
        return IntMatrix(
            self.rows,
            other.cols,
            tuple(tuple(sum(a * b for a, b in zip(row, c)) for c in cols) for row in self.data),
        )

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.data)) if self.rows else tuple(() for _ in range(self.cols)))

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return IntMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        a = [list(r) for r in self.data]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k]), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1] if n else 1

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    def diagonal(self) -> list[int]:
        return [self.data[i][i] for i in range(min(self.rows, self.cols))]


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(S, U, V)`` with ``S = U m V``, S diagonal, d_1 | d_2 | ...

    Pivots are the smallest nonzero absolute value in the remaining block,
    ties broken by lowest row then lowest column; diagonal entries are made
    nonnegative.
    """
    rows, cols = m.rows, m.cols
    a = [list(r) for r in m.data]
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, c):  # row dst += c * row src
        if c:
            a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
            u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, c):  # col dst += c * col src
        if c:
            for r in a:
                r[dst] += c * r[src]
            for r in v:
                r[dst] += c * r[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    x = abs(a[i][j])
                    if x and (best is None or x < best[0]):
                        best = (x, i, j)
            if best is None:
                return _finish(a, u, v, rows, cols)
            _, pi, pj = best
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return _finish(a, u, v, rows, cols)


def _finish(a, u, v, rows, cols):
    for t in range(min(rows, cols)):
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return IntMatrix.from_rows(a, cols), IntMatrix.from_rows(u, rows), IntMatrix.from_rows(v, cols)


@dataclass(frozen=True)
class AbelianInvariants:
    """``Z^free_rank + Z/d_1 + ... + Z/d_m`` with d_1 | ... | d_m, each d_i >= 2."""

    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(d) for d in self.torsion))
        if self.free_rank < 0 or any(d < 2 for d in self.torsion):
            raise ValueError(f"invalid invariants {self.free_rank}, {self.torsion}")
        if any(b % a for a, b in zip(self.torsion, self.torsion[1:])):
            raise ValueError(f"torsion {self.torsion} is not a divisibility chain")

    @classmethod
    def from_diagonal(cls, diag: Iterable[int], ngens: int) -> "AbelianInvariants":
        diag = [abs(d) for d in diag]
        rank = sum(1 for d in diag if d)
        return cls(ngens - rank, tuple(d for d in diag if d > 1))

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    def __str__(self) -> str:
        parts = [f"Z^{self.free_rank}"] if self.free_rank else []
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def _as_relator_data(group) -> tuple[list[GeneratorSymbol], list[Word]]:
    if hasattr(group, "as_presentation"):
        group = group.as_presentation()
    return list(group.generators), list(group.relators)


def exponent_vector(w: Word, index: dict[GeneratorSymbol, int]) -> list[int]:
    vec = [0] * len(index)
    for s, e in w.letters:
        vec[index[s]] += e
    return vec


def relation_matrix(group) -> tuple[list[GeneratorSymbol], IntMatrix]:
    """Relator exponent-sum rows over the generator columns."""
    gens, rels = _as_relator_data(group)
    index = {s: i for i, s in enumerate(gens)}
    return gens, IntMatrix.from_rows([exponent_vector(r, index) for r in rels], len(gens))


@dataclass(frozen=True)
class H1Data:
    """H_1 of a group with the change of basis to Smith coordinates.

    ``coords(v)`` sends a generator exponent vector to its class: one entry
    per nontrivial invariant factor (reduced mod d) followed by the free
    coordinates.
    """

    generators: tuple[GeneratorSymbol, ...]
    invariants: AbelianInvariants
    diag: tuple[int, ...]
    v: IntMatrix

    def _raw(self, vec: Sequence[int]) -> list[int]:
        n = len(self.generators)
        return [sum(vec[i] * self.v[i, j] for i in range(n)) for j in range(n)]

    def coords(self, vec: Sequence[int]) -> tuple[int, ...]:
        raw = self._raw(vec)
        tors, free = [], []
        for j, x in enumerate(raw):
            d = self.diag[j] if j < len(self.diag) else 0
            if d == 0:
                free.append(x)
            elif d > 1:
                tors.append(x % d)
        return tuple(tors + free)

    def word_coords(self, w: Word) -> tuple[int, ...]:
        index = {s: i for i, s in enumerate(self.generators)}
        return self.coords(exponent_vector(w, index))

    def is_zero(self, vec: Sequence[int]) -> bool:
        return not any(self.coords(vec))

    def word_is_zero(self, w: Word) -> bool:
        return not any(self.word_coords(w))


def h1_data(group) -> H1Data:
    gens, m = relation_matrix(group)
    s, _, v = smith_normal_form(m)
    diag = tuple(s.diagonal())
    return H1Data(tuple(gens), AbelianInvariants.from_diagonal(diag, len(gens)), diag, v)


def abelianization(group) -> AbelianInvariants:
    """Invariants of the quotient of Z^{#generators} by the relator rows."""
    return h1_data(group).invariants


def invariants_of_matrix(m: IntMatrix) -> AbelianInvariants:
    s, _, _ = smith_normal_form(m)
    return AbelianInvariants.from_diagonal(s.diagonal(), m.cols)


def exponent_matrix(h) -> IntMatrix:
    """Rows: target generators; columns: source generators; entries: exponent sums."""
    tgt = list(_as_relator_data(h.target)[0])
    src = list(_as_relator_data(h.source)[0])
    index = {s: i for i, s in enumerate(tgt)}
    cols = [exponent_vector(h.images[s], index) for s in src]
    return IntMatrix.from_rows([[c[i] for c in cols] for i in range(len(tgt))], len(src))


def induced_h1_map(h) -> IntMatrix:
    """Matrix of H_1(h) in Smith coordinates: one column per source generator.

    Rows are the target's H_1 coordinates (torsion entries reduced mod their
    order, then free coordinates), see :class:`H1Data`.
    """
    tgt = h1_data(h.target)
    src = list(_as_relator_data(h.source)[0])
    cols = [tgt.word_coords(h.images[s]) for s in src]
    nrows = len(tgt.invariants.torsion) + tgt.invariants.free_rank
    return IntMatrix.from_rows([[c[i] for c in cols] for i in range(nrows)], len(src))


@dataclass(frozen=True)
class ExactnessReport:
    passed: bool
    quotient: AbelianInvariants
    target: AbelianInvariants
    f_kills_image: bool
    f_surjective: bool
    details: str = ""

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "middle_mod_image": self.quotient.to_json(),
            "target": self.target.to_json(),
            "f_kills_image": self.f_kills_image,
            "f_surjective_on_h1": self.f_surjective,
        }


def h1_right_exactness_check(iota, f) -> ExactnessReport:
    """Check ``H1(fiber) -> H1(middle) -> H1(base) -> 0`` is exact at H1(middle).

    Compares the invariants of H1(middle)/im H1(iota) (stacked relation
    matrix) with H1(base), and checks that H1(f) kills im H1(iota) and is
    onto.  Surjective maps between isomorphic finitely generated abelian
    groups are isomorphisms, so the three together certify exactness.
    """
    mid_gens, mid_rel = relation_matrix(iota.target)
    f_src = list(_as_relator_data(f.source)[0])
    if f_src != mid_gens:
        raise ValueError("iota target and f source differ")
    index = {s: i for i, s in enumerate(mid_gens)}
    fib_gens = _as_relator_data(iota.source)[0]
    img_rows = IntMatrix.from_rows([exponent_vector(iota.images[s], index) for s in fib_gens], len(mid_gens))
    quotient = invariants_of_matrix(mid_rel.vstack(img_rows))
    base = h1_data(f.target)
    kills = all(base.word_is_zero(_apply(f, iota.images[s])) for s in fib_gens)
    fmat = induced_h1_map(f)
    surj = _is_onto(fmat, base)
    passed = quotient == base.invariants and kills and surj
    detail = f"H1(middle)/im(iota) = {quotient}; H1(base) = {base.invariants}"
    if not kills:
        detail += "; f does not kill im(iota) on H1"
    if not surj:
        detail += "; H1(f) not onto"
    return ExactnessReport(passed, quotient, base.invariants, kills, surj, detail)


def _apply(h, w: Word) -> Word:
    return w.map_symbols(lambda s: h.images[s])


def _is_onto(fmat: IntMatrix, base: H1Data) -> bool:
    """Columns of ``fmat`` generate ``Z/d_1 + ... + Z^free``."""
    tors = base.invariants.torsion
    nrows = fmat.rows
    # relations of the target coordinates: d_i e_i for torsion rows
    rel_cols = [[(d if i == j else 0) for i in range(nrows)] for j, d in enumerate(tors)]
    gen_cols = [list(c) for c in zip(*fmat.data)] if fmat.rows else []
    allc = gen_cols + rel_cols
    if nrows == 0:
        return True
    if not allc:
        return False
    m = IntMatrix.from_rows(allc, nrows)  # columns as rows
    s, _, _ = smith_normal_form(m)
    diag = s.diagonal()
    return len(diag) >= nrows and all(abs(d) == 1 for d in diag[:nrows])


def lattice_contains(m: IntMatrix, vec: Sequence[int]) -> bool:
    """Is ``vec`` an integer combination of the rows of ``m``?"""
    s, _, v = smith_normal_form(m)
    n = m.cols
    raw = [sum(vec[i] * v[i, j] for i in range(n)) for j in range(n)]
    diag = s.diagonal()
    for j, x in enumerate(raw):
        d = diag[j] if j < len(diag) else 0
        if (d == 0 and x) or (d and x % d):
            return False
    return True
