"""Finite quotients: homomorphisms into symmetric groups by backtracking.

Permutations of ``{0..d-1}`` are tuples ``p`` with ``p[i]`` the image of
``i``; words act on the right, so ``x y`` means "first x, then y".
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Sequence

from ..words import GeneratorSymbol, Word

Perm = tuple[int, ...]


def perm_identity(d: int) -> Perm:
    return tuple(range(d))


def perm_mul(p: Perm, q: Perm) -> Perm:
    """First p, then q."""
    return tuple(q[i] for i in p)


def perm_inv(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_pow(p: Perm, e: int) -> Perm:
    if e < 0:
        p, e = perm_inv(p), -e
    out = perm_identity(len(p))
    base = p
    while e:
        if e & 1:
            out = perm_mul(out, base)
        base = perm_mul(base, base)
        e >>= 1
    return out


def evaluate(word: Word, images: dict[GeneratorSymbol, Perm], d: int) -> Perm:
    out = perm_identity(d)
    for s, e in word.letters:
        out = perm_mul(out, perm_pow(images[s], e))
    return out


@dataclass(frozen=True)
class PermRep:
    """A homomorphism to S_d given on generators."""

    degree: int
    images: tuple[tuple[GeneratorSymbol, Perm], ...]

    @property
    def image_map(self) -> dict[GeneratorSymbol, Perm]:
        return dict(self.images)

    def evaluate(self, word: Word) -> Perm:
        return evaluate(word, self.image_map, self.degree)

    def is_trivial_on(self, word: Word) -> bool:
        return self.evaluate(word) == perm_identity(self.degree)

    def is_transitive(self) -> bool:
        if self.degree == 0:
            return True
        seen = {0}
        frontier = [0]
        perms = [p for _, p in self.images]
        while frontier:
            i = frontier.pop()
            for p in perms:
                for j in (p[i], perm_inv(p)[i]):
                    if j not in seen:
                        seen.add(j)
                        frontier.append(j)
        return len(seen) == self.degree

    def is_trivial_rep(self) -> bool:
        return all(p == perm_identity(self.degree) for _, p in self.images)

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "transitive": self.is_transitive(),
            "images": {str(s): [x + 1 for x in p] for s, p in self.images},
        }


def validate_rep(rep: PermRep, relators: Sequence[Word]) -> bool:
    """Every relator evaluates to the identity (independent of the search)."""
    imgs = rep.image_map
    ident = perm_identity(rep.degree)
    for r in relators:
        cur = ident
        for s, e in r.letters:
            p = imgs[s]
            step = p if e > 0 else perm_inv(p)
            for _ in range(abs(e)):
                cur = tuple(step[i] for i in cur)
        if cur != ident:
            return False
    return True


def check_word_in_quotients(word: Word, reps: Sequence[PermRep]) -> bool:
    """True iff ``word`` maps to the identity in every rep."""
    return all(rep.is_trivial_on(word) for rep in reps)


@dataclass(frozen=True)
class QuotientSearch:
    reps: tuple[PermRep, ...]
    exhausted: bool
    nodes: int

    def to_json(self) -> dict:
        return {"count": len(self.reps), "exhausted": self.exhausted, "nodes": self.nodes, "degrees": sorted({r.degree for r in self.reps})}


def _canonical_under_conjugation(perms: Sequence[Perm], d: int, conj: list[tuple[Perm, Perm]]) -> tuple:
    best = None
    for s, sinv in conj:
        cand = tuple(perm_mul(perm_mul(sinv, p), s) for p in perms)
        if best is None or cand < best:
            best = cand
    return best


def find_finite_quotients(
    p,
    max_degree: int = 5,
    budget: int = 100000,
    seed: int = 0,
    degrees: Sequence[int] | None = None,
    exhaustive_bound: int = 200000,
    restarts: int = 8,
    max_reps: int | None = None,
) -> QuotientSearch:
    """Relator-satisfying assignments to S_d, deduplicated up to conjugation.

    Degrees default to ``2..max_degree``.  Generators are assigned one at a
    time in an order that completes relators early; a relator is checked as
    soon as all its symbols are assigned.  When ``(d!)^#gens`` is below
    ``exhaustive_bound`` the search is exhaustive in a fixed order,
    otherwise it runs ``restarts`` seeded randomized passes sharing the
    node budget.  ``exhausted`` is True only if every degree was searched
    completely.
    """
    gens = list(p.generators)
    rels = list(p.relators)
    degs = list(degrees) if degrees is not None else list(range(2, max_degree + 1))
    order = _assignment_order(gens, rels)
    checks = _relator_checkpoints(order, rels)
    rng = random.Random(seed)
    found: dict[tuple, PermRep] = {}
    nodes = 0
    complete = True
    for d in degs:
        if budget - nodes <= 0:
            complete = False
            break
        all_perms = list(itertools.permutations(range(d)))
        conj = [(s, perm_inv(s)) for s in all_perms]
        space = math.factorial(d) ** max(len(gens), 1)
        exhaustive = space <= exhaustive_bound
        passes = 1 if exhaustive else max(restarts, 1)
        per_pass = max((budget - nodes) // passes, 1)
        deg_complete = False
        for k in range(passes):
            cands = list(all_perms)
            if not exhaustive:
                ident = cands[0]
                rest = cands[1:]
                rng.shuffle(rest)
                # identity first on odd passes keeps partially trivial reps in reach
                cands = [ident] + rest if k % 2 else rest + [ident]
            used, done = _backtrack(order, checks, cands, d, per_pass, found, conj, max_reps)
            nodes += used
            if done and exhaustive:
                deg_complete = True
            if max_reps is not None and len(found) >= max_reps:
                break
        complete = complete and deg_complete
        if max_reps is not None and len(found) >= max_reps:
            complete = False
            break
    reps = sorted(found.values(), key=lambda r: (r.degree, [p for _, p in r.images]))
    return QuotientSearch(tuple(reps), complete, nodes)


def _assignment_order(gens, rels) -> list[GeneratorSymbol]:
    """Greedy order: next generator is the one completing the most relators."""
    remaining = list(gens)
    assigned: set = set()
    order = []
    rel_syms = [r.symbols() for r in rels]
    while remaining:
        def score(s):
            done = sum(1 for rs in rel_syms if s in rs and rs <= assigned | {s})
            touch = sum(1 for rs in rel_syms if s in rs)
            return (-done, -touch, gens.index(s))

        nxt = min(remaining, key=score)
        order.append(nxt)
        assigned.add(nxt)
        remaining.remove(nxt)
    return order


def _relator_checkpoints(order, rels) -> list[list[Word]]:
    pos = {s: i for i, s in enumerate(order)}
    out: list[list[Word]] = [[] for _ in order]
    for r in rels:
        syms = r.symbols()
        if not syms:
            continue
        out[max(pos[s] for s in syms)].append(r)
    return out


def _backtrack(order, checks, cands, d, budget, found, conj, max_reps) -> tuple[int, bool]:
    n = len(order)
    ident = perm_identity(d)
    images: dict[GeneratorSymbol, Perm] = {}
    nodes = 0

    def ok(level) -> bool:
        for r in checks[level]:
            if evaluate(r, images, d) != ident:
                return False
        return True

    def rec(level) -> bool:
        nonlocal nodes
        if level == n:
            perms = [images[s] for s in order]
            key = (d, _canonical_under_conjugation(perms, d, conj))
            if key not in found:
                # store with canonical images, in the presentation's generator order
                canon = dict(zip(order, key[1]))
                found[key] = PermRep(d, tuple(sorted(canon.items(), key=lambda t: t[0].sort_key())))
            return max_reps is None or len(found) < max_reps
        s = order[level]
        for pm in cands:
            nodes += 1
            if nodes > budget:
                return False
            images[s] = pm
            if ok(level) and not rec(level + 1):
                del images[s]
                return False
        images.pop(s, None)
        return True

    done = rec(0) if n else _empty(found, d)
    return nodes, done and nodes <= budget


def _empty(found, d) -> bool:
    found.setdefault((d, ()), PermRep(d, ()))
    return True
