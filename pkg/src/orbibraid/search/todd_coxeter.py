"""Todd-Coxeter coset enumeration, HLT strategy with lookahead.

Cosets are numbered from 0 (the subgroup itself).  Columns of the table are
``2*i`` for generator i and ``2*i+1`` for its inverse.  Coincidences are
processed with a union-find that always keeps the smaller number, and the
final table is renumbered in order of first appearance, so the output is
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..words import GeneratorSymbol, Word
from .quotients import PermRep


@dataclass(frozen=True)
class CosetTable:
    generators: tuple[GeneratorSymbol, ...]
    table: tuple[tuple[int, ...], ...]  # row per coset, column per generator (action on cosets)

    @property
    def index(self) -> int:
        return len(self.table)

    def to_permrep(self) -> PermRep:
        d = self.index
        imgs = tuple((s, tuple(self.table[c][i] for c in range(d))) for i, s in enumerate(self.generators))
        return PermRep(d, imgs)


@dataclass(frozen=True)
class CosetExhausted:
    max_cosets: int
    defined: int
    live: int


class _Overflow(Exception):
    pass


class _Enumerator:
    def __init__(self, gens: Sequence[GeneratorSymbol], relators: Sequence[Word], max_cosets: int):
        self.gens = list(gens)
        self.col = {s: 2 * i for i, s in enumerate(self.gens)}
        self.ncols = 2 * len(self.gens)
        self.max_cosets = max_cosets
        self.table: list[list[int]] = []
        self.parent: list[int] = []
        self.live = 0
        self.defined = 0
        self.queue: list[int] = []
        self.rels = [self._cols(r) for r in relators]
        # cyclic conjugates of relators, indexed by first column, for lookahead
        self.allow_define = True

    def _cols(self, w: Word) -> list[int]:
        out = []
        for s, e in w.expand():
            c = self.col[s]
            out.append(c if e > 0 else c ^ 1)
        return out

    def new_coset(self) -> int:
        if self.live >= self.max_cosets:
            raise _Overflow
        self.table.append([-1] * self.ncols)
        self.parent.append(len(self.parent))
        self.live += 1
        self.defined += 1
        return len(self.table) - 1

    def find(self, c: int) -> int:
        while self.parent[c] != c:
            self.parent[c] = self.parent[self.parent[c]]
            c = self.parent[c]
        return c

    def alive(self, c: int) -> bool:
        return self.parent[c] == c

    def define(self, c: int, x: int) -> int:
        d = self.new_coset()
        self.table[c][x] = d
        self.table[d][x ^ 1] = c
        return d

    def coincidence(self, a: int, b: int) -> None:
        q = [(a, b)]
        while q:
            a, b = q.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            self.parent[b] = a
            self.live -= 1
            for x in range(self.ncols):
                y = self.table[b][x]
                if y < 0:
                    continue
                self.table[b][x] = -1
                if self.table[y][x ^ 1] == b:
                    self.table[y][x ^ 1] = -1
                a2, y2 = self.find(a), self.find(y)
                ax = self.table[a2][x]
                if ax >= 0:
                    q.append((ax, y2))
                else:
                    self.table[a2][x] = y2
                yx = self.table[y2][x ^ 1]
                if yx >= 0:
                    q.append((yx, a2))
                else:
                    self.table[y2][x ^ 1] = a2

    def scan(self, c: int, word: list[int], define: bool) -> None:
        """Scan ``c . word = c``; fill or define when ``define`` is set."""
        n = len(word)
        f, i = c, 0
        b, j = c, n - 1
        while True:
            while i <= j and self.table[f][word[i]] >= 0:
                f = self.table[f][word[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and self.table[b][word[j] ^ 1] >= 0:
                b = self.table[b][word[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                self.table[f][word[i]] = b
                self.table[b][word[i] ^ 1] = f
                return
            if not define:
                return
            self.define(f, word[i])

    def lookahead(self) -> None:
        for c in range(len(self.table)):
            if not self.alive(c):
                continue
            for r in self.rels:
                if not self.alive(c):
                    break
                self.scan(c, r, define=False)


def todd_coxeter(p, subgroup_generators: Sequence[Word] = (), max_cosets: int = 10**6) -> CosetTable | CosetExhausted:
    """Enumerate cosets of the subgroup generated by ``subgroup_generators``."""
    gens = list(p.generators)
    rels = [r for r in p.relators if r.length()]
    e = _Enumerator(gens, rels, max_cosets)
    sub = [e._cols(w) for w in subgroup_generators if w.length()]
    try:
        e.new_coset()
        for w in sub:
            e.scan(0, w, define=True)
        c = 0
        while c < len(e.table):
            if e.alive(c):
                for r in e.rels:
                    if not e.alive(c):
                        break
                    try:
                        e.scan(c, r, define=True)
                    except _Overflow:
                        e.lookahead()
                        if e.live >= e.max_cosets:
                            raise
                        if e.alive(c):
                            e.scan(c, r, define=True)
                if e.alive(c):
                    for x in range(e.ncols):
                        if not e.alive(c):
                            break
                        if e.table[c][x] < 0:
                            try:
                                e.define(c, x)
                            except _Overflow:
                                e.lookahead()
                                if e.live >= e.max_cosets:
                                    raise
                                if e.alive(c) and e.table[c][x] < 0:
                                    e.define(c, x)
            c += 1
    except _Overflow:
        return CosetExhausted(max_cosets, e.defined, e.live)
    return _compact(e)


def _compact(e: _Enumerator) -> CosetTable:
    live = [c for c in range(len(e.table)) if e.alive(c)]
    # renumber by breadth-first order from coset 0 for a canonical table
    order = {live[0]: 0} if live else {}
    queue = [live[0]] if live else []
    k = 0
    while k < len(queue):
        c = queue[k]
        k += 1
        for x in range(e.ncols):
            d = e.find(e.table[c][x])
            if d not in order:
                order[d] = len(order)
                queue.append(d)
    rows = []
    for c in queue:
        rows.append(tuple(order[e.find(e.table[c][2 * i])] for i in range(len(e.gens))))
    return CosetTable(tuple(e.gens), tuple(rows))


def coset_index(p, subgroup_generators: Sequence[Word] = (), max_cosets: int = 10**6) -> int | None:
    res = todd_coxeter(p, subgroup_generators, max_cosets)
    return res.index if isinstance(res, CosetTable) else None
