"""Point-pushing action of surface pure braids on a free group.

Take the genus-g surface with k punctures, turn puncture k into a boundary
circle and add points x_1, ..., x_n in nested collars of it.  The
fundamental group of the complement is free on the petals

    a_1, b_1, ..., a_g, b_g, p_1, ..., p_{k-1}, z_1, ..., z_n

with boundary word ``[a_1,b_1]...[a_g,b_g] p_1...p_{k-1} z_1...z_n``.
Pushing x_l around a loop gives an automorphism fixing the boundary word;
the resulting action of the pure braid group is faithful, so a word in the
braid generators is trivial iff it acts trivially.  This gives an
independent decision procedure for relators and the reference data from
which the relator templates were written.

Free-group words here are tuples of nonzero ints (``-x`` is the inverse of
letter ``x``); automorphisms are dicts letter -> image.  Composition
convention: a braid word acts letter by letter from the left, so
``act(u v) = act(v) o act(u)``.
"""
from __future__ import annotations

from functools import lru_cache

from .words import GeneratorSymbol, Word

FreeWord = tuple[int, ...]
Aut = dict[int, FreeWord]


def fw_reduce(w) -> FreeWord:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def fw_inv(w: FreeWord) -> FreeWord:
    return tuple(-x for x in reversed(w))


def fw_mul(*ws: FreeWord) -> FreeWord:
    out: list[int] = []
    for w in ws:
        out.extend(w)
    return fw_reduce(out)


def aut_apply(phi: Aut, w: FreeWord) -> FreeWord:
    out: list[int] = []
    for x in w:
        out.extend(phi[x] if x > 0 else fw_inv(phi[-x]))
    return fw_reduce(out)


def aut_compose(phi: Aut, psi: Aut) -> Aut:
    """``phi o psi`` (apply psi first)."""
    return {x: aut_apply(phi, img) for x, img in psi.items()}


def aut_inverse(phi: Aut) -> Aut:
    """Invert an automorphism by greedy Nielsen reduction of its images.

    Raises ValueError if the images do not reduce to a basis, which for the
    automorphisms built here signals a bug rather than a non-automorphism.
    """
    gens = sorted(phi)
    cur = {x: phi[x] for x in gens}
    track: dict[int, FreeWord] = {x: (x,) for x in gens}
    improved = True
    while improved:
        improved = False
        for i in gens:
            for j in gens:
                if i == j:
                    continue
                for sign in (1, -1):
                    tj = cur[j] if sign == 1 else fw_inv(cur[j])
                    trj = track[j] if sign == 1 else fw_inv(track[j])
                    for left in (False, True):
                        cand = fw_mul(tj, cur[i]) if left else fw_mul(cur[i], tj)
                        if len(cand) < len(cur[i]):
                            cur[i] = cand
                            track[i] = fw_mul(trj, track[i]) if left else fw_mul(track[i], trj)
                            improved = True
    out: Aut = {}
    for x in gens:
        w = cur[x]
        if len(w) != 1:
            raise ValueError("images do not Nielsen-reduce to a basis")
        y = w[0]
        out[abs(y)] = track[x] if y > 0 else fw_inv(track[x])
    if sorted(out) != gens:
        raise ValueError("images do not form a basis")
    return out


class PushModel:
    """Free group of the n-times-pointed surface and the petal pushes."""

    def __init__(self, g: int, k: int, n: int):
        if g < 0 or k < 1 or n < 0:
            raise ValueError("need g >= 0, k >= 1, n >= 0")
        self.g, self.k, self.n = g, k, n
        self.petals: list[tuple[str, int]] = (
            [("a", j) for j in range(1, g + 1)]
            + [("b", j) for j in range(1, g + 1)]
            + [("p", p) for p in range(1, k)]
            + [("z", i) for i in range(1, n + 1)]
        )
        self.index = {pt: i + 1 for i, pt in enumerate(self.petals)}

    def letter(self, kind: str, i: int) -> int:
        return self.index[(kind, i)]

    def identity(self) -> Aut:
        return {x: (x,) for x in range(1, len(self.petals) + 1)}

    def boundary_word(self, upto: int | None = None) -> FreeWord:
        """``[a_1,b_1]...[a_g,b_g] p_1...p_{k-1} z_1...z_upto``."""
        m = self.n if upto is None else upto
        w: list[int] = []
        for j in range(1, self.g + 1):
            a, b = self.letter("a", j), self.letter("b", j)
            w += [a, b, -a, -b]
        w += [self.letter("p", p) for p in range(1, self.k)]
        w += [self.letter("z", i) for i in range(1, m + 1)]
        return tuple(w)

    def petal_push(self, l: int, petal: tuple[str, int]) -> Aut:
        """Push of x_l once around a petal of the surface minus x_1..x_{l-1}."""
        return _petal_push(self.g, self.k, self.n, l, petal)

    def push_word(self, l: int, w: FreeWord) -> Aut:
        """Push of x_l along a free word in the petals (anti-homomorphic)."""
        phi = self.identity()
        for x in w:
            f = self.petal_push(l, self.petals[abs(x) - 1])
            if x < 0:
                f = aut_inverse(f)
            phi = aut_compose(f, phi)
        return phi


@lru_cache(maxsize=None)
def _petal_push_cached(g: int, k: int, n: int, l: int, petal: tuple[str, int]) -> tuple:
    phi = _compute_petal_push(PushModel(g, k, n), l, petal)
    return tuple(sorted(phi.items()))


def _petal_push(g, k, n, l, petal) -> Aut:
    return dict(_petal_push_cached(g, k, n, l, petal))


def _compute_petal_push(M: PushModel, l: int, petal: tuple[str, int]) -> Aut:
    z = M.letter("z", l)
    bw = M.boundary_word(l)
    phi = M.identity()
    kind, idx = petal
    if kind in "pz":
        e = M.letter(kind, idx)
        pos, zpos = bw.index(e), bw.index(z)
        c = (e, z)
        kk = (e, z, -e, -z)
        phi[e] = fw_mul(c, (e,), fw_inv(c))
        phi[z] = fw_mul(c, (z,), fw_inv(c))
        for y in bw[pos + 1 : zpos]:
            phi[abs(y)] = fw_mul(kk, (abs(y),), fw_inv(kk))
        return phi
    # handle petals: push along a_j or b_j, written first for the loop
    # conjugated past the tail V of the boundary word, then transported back
    a, b = M.letter("a", idx), M.letter("b", idx)
    tail = bw[4 * idx : -1]
    zt = fw_mul(tail, (z,), fw_inv(tail))
    local = M.identity()
    if kind == "a":
        local[a] = fw_mul((a,), zt, (a,), fw_inv(zt), (-a,))
        local[b] = fw_mul((a,), zt, (-a,), fw_inv(zt), (b, a), fw_inv(zt), (-a,))
        hz: FreeWord = (a,)
    else:
        local[a] = fw_mul((a,), zt)
        local[b] = fw_mul(fw_inv(zt), (b,), zt)
        hz = fw_mul(fw_inv(zt), (b,))
    local[z] = fw_mul(fw_inv(tail), hz, zt, fw_inv(hz), tail)
    there = M.push_word(l, tail)
    back = M.push_word(l, fw_inv(tail))
    return aut_compose(back, aut_compose(local, there))


class PushRepresentation:
    """Faithful action of the surface pure braid group PB_n(g, k).

    Generators are unbarred GeneratorSymbols; barred words are accepted and
    read through their unbarred names.
    """

    def __init__(self, g: int, k: int, n: int):
        self.model = PushModel(g, k, n)
        self.g, self.k, self.n = g, k, n
        self._cache: dict[GeneratorSymbol, Aut] = {}
        self._inv_cache: dict[GeneratorSymbol, Aut] = {}

    def generator_action(self, s: GeneratorSymbol) -> Aut:
        s = s.unbar()
        if s not in self._cache:
            M = self.model
            l = s.idx1
            if l > self.n:
                raise ValueError(f"{s} outside {self.n} strands")
            if s.family == "P" and s.idx2 == self.k:
                phi = M.push_word(l, fw_inv(M.boundary_word(l - 1)))
            else:
                kind = {"A": "a", "B": "b", "C": "z", "P": "p"}[s.family]
                if (kind, s.idx2) not in M.index or (kind == "p" and s.idx2 >= self.k):
                    raise ValueError(f"{s} is not a generator for g={self.g}, k={self.k}")
                phi = M.petal_push(l, (kind, s.idx2))
            self._cache[s] = phi
        return self._cache[s]

    def _inverse_action(self, s: GeneratorSymbol) -> Aut:
        s = s.unbar()
        if s not in self._inv_cache:
            self._inv_cache[s] = aut_inverse(self.generator_action(s))
        return self._inv_cache[s]

    def act(self, w: Word) -> Aut:
        phi = self.model.identity()
        for s, e in w.letters:
            f = self.generator_action(s) if e > 0 else self._inverse_action(s)
            for _ in range(abs(e)):
                phi = aut_compose(f, phi)
        return phi

    def is_trivial(self, w: Word) -> bool:
        return self.act(w) == self.model.identity()

    def petal_symbol(self, l: int, x: int) -> GeneratorSymbol:
        """The strand-l generator named after free letter ``x`` (x > 0)."""
        kind, idx = self.model.petals[x - 1]
        fam = {"a": "A", "b": "B", "z": "C", "p": "P"}[kind]
        return GeneratorSymbol(fam, l, idx)

    def strand_word(self, l: int, w: FreeWord) -> Word:
        """Rewrite a free word over petals of F_{l-1} as strand-l generators."""
        return Word((self.petal_symbol(l, abs(x)), 1 if x > 0 else -1) for x in w)

    def semidirect_relators(self) -> list[Word]:
        """Relators of the iterated semidirect product, computed from the action.

        For each strand l: the surface relator, and for each generator beta
        on an earlier strand and each free basis letter e of F_{l-1},
        ``beta^-1 Y_e beta = Y(rho_beta(e))``.
        """
        M = self.model
        out: list[Word] = []
        for l in range(1, self.n + 1):
            out.append(self.strand_word(l, M.boundary_word(l - 1)) * Word.from_symbol(GeneratorSymbol("P", l, self.k)))
            basis = [M.letter(*pt) for pt in M.petals if not (pt[0] == "z" and pt[1] >= l)]
            for beta in braid_generators(self.g, self.k, l - 1):
                rho = self.generator_action(beta)
                bw = Word.from_symbol(beta)
                for e in basis:
                    y = Word.from_symbol(self.petal_symbol(l, e))
                    img = self.strand_word(l, aut_apply(rho, (e,)))
                    out.append(bw.inverse() * y * bw * img.inverse())
        return out


def braid_generators(g: int, k: int, n: int, barred: bool = False) -> list[GeneratorSymbol]:
    """Generators in canonical order: per strand A's, B's, C's, P's."""
    out = []
    for l in range(1, n + 1):
        out += [GeneratorSymbol("A", l, j, barred) for j in range(1, g + 1)]
        out += [GeneratorSymbol("B", l, j, barred) for j in range(1, g + 1)]
        out += [GeneratorSymbol("C", l, m, barred) for m in range(1, l)]
        out += [GeneratorSymbol("P", l, p, barred) for p in range(1, k + 1)]
    return out
