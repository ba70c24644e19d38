"""Kernel witnesses: fiber words that are nontrivial yet die in PB_n.

A witness carries two certificates checked independently of the search:
its free-product normal form (nontrivial) and a Derivation of its image
in the orbifold braid group down to the empty word.

Candidates
----------
For a cone generator ``beta = Pb[i,c]`` of order q on an earlier strand,
conjugation by ``beta^q`` is trivial in the orbifold group, while on the
fiber it acts through the q-th power of the point-push action.  So for a
fiber generator Y, ``Y^-1 . beta^-q Y beta^q`` rewritten through the
conjugation relators is a fiber word that dies in PB_n; when its normal
form is nonempty it is a witness.  Commutators of fiber generators are
tried as a second, cheaper family through the rewriting search.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from ..freeprod import FreeProductGroup, NormalWord, normal_form, substitute_eliminated
from ..pushrep import PushRepresentation, aut_apply
from ..words import GeneratorSymbol, Word, cyclic_reduce, format_word, parse_word
from .rewriting import Derivation, Exhausted, ProofWord, replay, rewrite_trivialize, transport


@dataclass(frozen=True)
class KernelWitness:
    word: Word
    normal_form: NormalWord
    derivation: Derivation
    h1_zero: bool
    origin: str = ""

    def to_json(self) -> dict:
        return {
            "word": format_word(self.word, "1"),
            "normal_form": format_word(self.normal_form.to_word(), "1"),
            "h1_zero": self.h1_zero,
            "origin": self.origin,
            "derivation": self.derivation.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "KernelWitness":
        w = parse_word(str(d["word"]))
        nf = NormalWord(parse_word(str(d.get("normal_form", ""))).letters)
        return cls(w, nf, Derivation.from_json(d["derivation"]), bool(d.get("h1_zero", True)), str(d.get("origin", "")))


@dataclass(frozen=True)
class WitnessVerdict:
    accepted: bool
    reason: str


def verify_witness(fiber: FreeProductGroup, iota, target, witness: KernelWitness) -> WitnessVerdict:
    """Check both certificates from scratch.

    1. the word is over the fiber alphabet and its normal form is nonempty
       and equals the recorded one;
    2. the derivation starts at ``iota(word)`` and replays to the empty word
       using the target's relators.
    """
    from ..abelian import h1_data

    w = witness.word
    extra = w.symbols() - fiber.alphabet
    if extra:
        return WitnessVerdict(False, f"word uses non-fiber symbols {', '.join(map(str, sorted(extra)))}")
    nf = normal_form(fiber, w)
    if nf.is_identity():
        return WitnessVerdict(False, "word is trivial in the fiber (normal form is empty)")
    if nf != witness.normal_form:
        return WitnessVerdict(False, f"recorded normal form differs from {nf}")
    image = iota.apply(w)
    if witness.derivation.start != image:
        return WitnessVerdict(False, "derivation does not start at the image of the word")
    rels = list(target.relators)
    res = replay(rels, witness.derivation)
    if not res.ok:
        return WitnessVerdict(False, f"derivation replay failed: {res.error}")
    h1_zero = h1_data(target).word_is_zero(image)
    if not h1_zero:
        # cannot happen for a valid derivation; kept as a consistency guard
        return WitnessVerdict(False, "image is nonzero in H1 despite a derivation")
    return WitnessVerdict(True, "normal form nontrivial; derivation replays to the empty word")


@dataclass(frozen=True)
class WitnessSearchResult:
    witnesses: tuple[KernelWitness, ...]
    candidates_tried: int
    exhausted: bool
    stats: dict

    def to_json(self) -> dict:
        return {
            "witnesses": [w.to_json() for w in self.witnesses],
            "candidates_tried": self.candidates_tried,
            "exhausted": self.exhausted,
            "stats": self.stats,
        }


class WitnessSearchError(ValueError):
    pass


def _relator_lookup(relators: Sequence[Word]) -> dict[Word, int]:
    return {r: i for i, r in enumerate(relators)}


def _conjugation_rule(beta: GeneratorSymbol, rep: PushRepresentation, lookup: dict[Word, int], n: int):
    """Rule for ``X -> beta^-1 X beta`` on strand-n letters, via relators.

    Returns ``(Q, img)`` with ``beta^-1 X beta == Q * img`` where ``Q`` is a
    single relator conjugate; None if the needed relator is missing.
    """
    M = rep.model
    rho = rep.generator_action(beta.unbar())
    bw = Word.from_symbol(beta)
    cache: dict = {}

    def rule(X: GeneratorSymbol):
        if X in cache:
            return cache[X]
        kind = {"A": "a", "B": "b", "C": "z", "P": "p"}[X.family]
        if X.idx1 != n or (kind, X.idx2) not in M.index or (kind == "p" and X.idx2 >= rep.k):
            cache[X] = None
            raise WitnessSearchError(f"no conjugation rule for {X}")
        e = M.letter(kind, X.idx2)
        img = rep.strand_word(n, aut_apply(rho, (e,))).map_symbols(lambda s: Word.from_symbol(s.bar()))
        lhs = bw.inverse() * Word.from_symbol(X) * bw
        rel = lhs * img.inverse()
        core, conj = cyclic_reduce(rel)
        if core.is_identity():
            out = (ProofWord(), img)
        elif core in lookup:
            out = (ProofWord.relator(lookup[core], 1, conj), img)
        elif core.inverse() in lookup:
            out = (ProofWord.relator(lookup[core.inverse()], -1, conj), img)
        else:
            raise WitnessSearchError(f"relator for {beta} acting on {X} not in the presentation")
        cache[X] = out
        return out

    return rule


def _elimination_rule(fiber: FreeProductGroup, lookup: dict[Word, int]):
    """Rule rewriting the eliminated generator through the surface relator."""
    x = fiber.meta.eliminated
    rel = fiber.meta.surface_relation
    core = cyclic_reduce(rel)[0]
    if core not in lookup:
        raise WitnessSearchError("surface relator not found in the target presentation")
    idx = lookup[core]
    pos = [i for i, (s, _) in enumerate(core.letters) if s == x][0]
    u, v = Word(core.letters[:pos]), Word(core.letters[pos + 1 :])
    e = core.letters[pos][1]
    # core = u x^e v, so x^e = u^-1 v^-1 modulo a conjugate of core
    val = u.inverse() * v.inverse()
    Q = ProofWord.relator(idx, 1, u.inverse())
    if e == -1:
        val = v * u
        Q = ProofWord.relator(idx, -1, v)
    return lambda s: (Q, val) if s == x else None


def cone_candidates(fiber, rep: PushRepresentation, lookup) -> list[tuple[str, Word, ProofWord]]:
    """``(origin, ambient word w, proof)`` with ``w == proof`` freely in PB_n letters."""
    spec, n = fiber.meta.spec, fiber.meta.n
    out = []
    basis = fiber_natural_basis(spec, n)
    for slot, q in spec.cone_slots():
        for i in range(1, n):
            beta = GeneratorSymbol("P", i, slot, True)
            T = Word.from_symbol(beta, q)
            if T not in lookup:
                continue
            tidx = lookup[T]
            try:
                rule = _conjugation_rule(beta, rep, lookup, n)
                for Y in basis:
                    # beta^-q Y beta^q = P I
                    P, I = ProofWord(), Word.from_symbol(Y)
                    for _ in range(q):
                        P2, I2 = transport(I, rule)
                        P = P.conjugated(Word.from_symbol(beta, -1)) * P2
                        I = I2
                    yw = Word.from_symbol(Y)
                    w = yw.inverse() * I
                    proof = P.inverse().conjugated(yw.inverse()) * ProofWord.relator(tidx, -1, yw.inverse()) * ProofWord.relator(tidx, 1)
                    out.append((f"cone {beta}^{q} on {Y}", w, proof))
            except WitnessSearchError:
                continue
    return out


def fiber_natural_basis(spec, n) -> list[GeneratorSymbol]:
    """Barred strand-n generators named after petals (the free basis of F_{n-1})."""
    out = [GeneratorSymbol("A", n, j, True) for j in range(1, spec.g + 1)]
    out += [GeneratorSymbol("B", n, j, True) for j in range(1, spec.g + 1)]
    out += [GeneratorSymbol("P", n, p, True) for p in range(1, spec.k)]
    out += [GeneratorSymbol("C", n, m, True) for m in range(1, n)]
    return out


def kernel_witness_search(
    fiber: FreeProductGroup,
    target,
    iota,
    budget: int = 50,
    rewrite_budget: int = 500,
    seed: int = 0,
    max_witnesses: int = 5,
) -> WitnessSearchResult:
    """Enumerate candidates, certify, and return verified witnesses.

    ``budget`` caps the number of candidates examined; ``rewrite_budget``
    the nodes per rewriting attempt.  Deterministic for a given seed.
    """
    from ..abelian import h1_data

    if fiber.meta is None:
        raise WitnessSearchError("fiber group carries no instance data")
    spec, n = fiber.meta.spec, fiber.meta.n
    if spec.s == 0:
        raise WitnessSearchError("no cone point: the kernel is trivial in the classical case")
    rels = list(target.relators)
    lookup = _relator_lookup(rels)
    rep = PushRepresentation(spec.g, spec.k, n)
    h1 = h1_data(target)
    elim = _elimination_rule(fiber, lookup)
    rng = random.Random(seed)

    cands: list[tuple[tuple, str, Word, ProofWord | None]] = []
    for origin, w, proof in cone_candidates(fiber, rep, lookup):
        fw = substitute_eliminated(fiber, w)
        nf = normal_form(fiber, fw)
        tors = sum(1 for s, _ in nf.syllables if s in fiber.orders)
        cands.append(((0, len(nf), -tors, rng.random()), origin, fw, (w, proof)))
    gens = list(fiber.generators)
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            x, y = Word.from_symbol(gens[a]), Word.from_symbol(gens[b])
            c = x * y * x.inverse() * y.inverse()
            tors = sum(1 for s in (gens[a], gens[b]) if s in fiber.orders)
            cands.append(((1, 4, -tors, rng.random()), f"commutator [{gens[a]},{gens[b]}]", c, None))
    cands.sort(key=lambda t: t[0])

    found: list[KernelWitness] = []
    seen: set[Word] = set()
    tried = 0
    stats = {"cone_candidates": sum(1 for c in cands if c[0][0] == 0), "commutator_candidates": sum(1 for c in cands if c[0][0] == 1), "h1_filtered": 0, "trivial_in_fiber": 0, "rewrite_exhausted": 0}
    for _, origin, fw, extra in cands:
        if tried >= budget or len(found) >= max_witnesses:
            break
        tried += 1
        nf = normal_form(fiber, fw)
        if nf.is_identity():
            stats["trivial_in_fiber"] += 1
            continue
        if nf.to_word() in seen:
            continue
        image = iota.apply(fw)
        if not h1.word_is_zero(image):
            stats["h1_filtered"] += 1
            continue
        der = None
        if extra is not None:
            w, proof = extra
            # image = subst(w) and w = P_sub * subst(w), so image = P_sub^-1 * proof
            P_sub, I = transport(w, elim)
            if I == image:
                full = P_sub.inverse() * proof
                der = full.to_derivation(rels, image)
        else:
            res = rewrite_trivialize(rels, image, rewrite_budget)
            if isinstance(res, Exhausted):
                stats["rewrite_exhausted"] += 1
            else:
                der = res
        if der is None or not replay(rels, der).ok:
            continue
        wit = KernelWitness(fw, nf, der, True, origin)
        if verify_witness(fiber, iota, target, wit).accepted:
            found.append(wit)
            seen.add(nf.to_word())
    exhausted = tried >= budget or tried == len(cands)
    return WitnessSearchResult(tuple(found), tried, exhausted and len(found) < max_witnesses, stats)
