"""Triviality certificates: replayable derivations and a search for them.

A derivation rewrites a start word to the empty word.  Words are handled
as lists of unit letters ``(symbol, +-1)`` and are not reduced between
steps.  Step kinds:

``cancel pos``
    remove the adjacent inverse pair at ``pos, pos+1``.
``insert pos relator inverse rotation [conjugator]``
    insert ``c rho c^-1`` before position ``pos``, where ``rho`` is rotation
    ``rotation`` of relator ``relator`` (inverted first if ``inverse``) and
    ``c`` the optional conjugator word.
``delete pos relator inverse rotation``
    remove an occurrence of that rotation starting at ``pos``.

Every step preserves the element of the group, so a derivation ending in
the empty word proves the start word trivial.  :func:`replay` is the
independent checker; the search code never vouches for its own output.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

from ..words import GeneratorSymbol, Word, format_word, parse_word

Unit = tuple[GeneratorSymbol, int]


def units_of(w: Word) -> list[Unit]:
    return list(w.expand())


def _inv_units(u: Sequence[Unit]) -> list[Unit]:
    return [(s, -e) for s, e in reversed(u)]


def relator_rotation(rel: Word, inverse: bool, rotation: int) -> list[Unit]:
    u = units_of(rel)
    if inverse:
        u = _inv_units(u)
    if not 0 <= rotation < max(len(u), 1):
        raise ValueError(f"rotation {rotation} out of range for length {len(u)}")
    return u[rotation:] + u[:rotation]


@dataclass(frozen=True)
class Step:
    op: str
    pos: int
    relator: int | None = None
    inverse: bool = False
    rotation: int = 0
    conjugator: Word = field(default_factory=Word)

    def to_json(self) -> dict:
        d: dict = {"op": self.op, "pos": self.pos}
        if self.op != "cancel":
            d.update(relator=self.relator, inverse=self.inverse, rotation=self.rotation)
            if self.op == "insert" and not self.conjugator.is_identity():
                d["conjugator"] = format_word(self.conjugator)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Step":
        op = d.get("op")
        if op not in ("cancel", "insert", "delete"):
            raise ValueError(f"unknown step op {op!r}")
        pos = d.get("pos")
        if not isinstance(pos, int) or isinstance(pos, bool):
            raise ValueError("step pos must be an integer")
        if op == "cancel":
            return cls("cancel", pos)
        rel = d.get("relator")
        if not isinstance(rel, int) or isinstance(rel, bool):
            raise ValueError("step relator must be an integer index")
        conj = parse_word(d.get("conjugator", "")) if op == "insert" else Word()
        return cls(op, pos, rel, bool(d.get("inverse", False)), int(d.get("rotation", 0)), conj)


@dataclass(frozen=True)
class Derivation:
    start: Word
    steps: tuple[Step, ...]

    def to_json(self) -> dict:
        return {"start": format_word(self.start, "1"), "steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, d: dict) -> "Derivation":
        start = parse_word(str(d.get("start", "")))
        return cls(start, tuple(Step.from_json(s) for s in d.get("steps", [])))

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    final: tuple[Unit, ...]
    error: str = ""
    failed_step: int | None = None


def replay(relators: Sequence[Word], derivation: Derivation, start_units: Sequence[Unit] | None = None) -> ReplayResult:
    """Apply the steps mechanically; ok iff every step is legal and the result is empty."""
    cur: list[Unit] = list(start_units) if start_units is not None else units_of(derivation.start)
    for k, st in enumerate(derivation.steps):
        err = _apply_step(cur, st, relators)
        if err:
            return ReplayResult(False, tuple(cur), f"step {k}: {err}", k)
    if cur:
        return ReplayResult(False, tuple(cur), f"derivation ends at a nonempty word of length {len(cur)}")
    return ReplayResult(True, ())


def replay_trace(relators: Sequence[Word], derivation: Derivation) -> list[tuple[Unit, ...]]:
    """Every intermediate word, start first.  Raises ValueError on an illegal step."""
    cur = units_of(derivation.start)
    out = [tuple(cur)]
    for k, st in enumerate(derivation.steps):
        err = _apply_step(cur, st, relators)
        if err:
            raise ValueError(f"step {k}: {err}")
        out.append(tuple(cur))
    return out


def _apply_step(cur: list[Unit], st: Step, relators: Sequence[Word]) -> str:
    if st.op == "cancel":
        i = st.pos
        if not (0 <= i < len(cur) - 1):
            return f"cancel position {i} out of range"
        (s1, e1), (s2, e2) = cur[i], cur[i + 1]
        if s1 != s2 or e1 != -e2:
            return f"letters at {i} and {i + 1} do not cancel"
        del cur[i : i + 2]
        return ""
    if st.relator is None or not (0 <= st.relator < len(relators)):
        return f"relator index {st.relator} out of range"
    try:
        rho = relator_rotation(relators[st.relator], st.inverse, st.rotation)
    except ValueError as exc:
        return str(exc)
    if st.op == "insert":
        if not (0 <= st.pos <= len(cur)):
            return f"insert position {st.pos} out of range"
        c = units_of(st.conjugator)
        cur[st.pos : st.pos] = c + rho + _inv_units(c)
        return ""
    if st.op == "delete":
        if cur[st.pos : st.pos + len(rho)] != rho or st.pos < 0:
            return f"relator {st.relator} rotation {st.rotation} not found at {st.pos}"
        del cur[st.pos : st.pos + len(rho)]
        return ""
    return f"unknown op {st.op!r}"


def cancel_steps(units: Sequence[Unit], offset: int = 0) -> tuple[list[Unit], list[Step]]:
    """Freely reduce ``units`` recording leftmost cancellations.

    ``offset`` shifts the recorded positions, for reducing a segment that
    sits after ``offset`` untouched letters.
    """
    stack: list[Unit] = []
    steps: list[Step] = []
    for s, e in units:
        if stack and stack[-1] == (s, -e):
            steps.append(Step("cancel", offset + len(stack) - 1))
            stack.pop()
        else:
            stack.append((s, e))
    return stack, steps


# ---------------------------------------------------------------- proofs


@dataclass(frozen=True)
class ProofWord:
    """A formal product of relator conjugates ``prod c_i r_i^(e_i) c_i^-1``."""

    factors: tuple[tuple[Word, int, int], ...] = ()

    @classmethod
    def relator(cls, index: int, exp: int = 1, conj: Word | None = None) -> "ProofWord":
        if exp not in (1, -1):
            raise ValueError("relator factors take exponent +-1")
        return cls(((conj or Word(), index, exp),))

    def __mul__(self, other: "ProofWord") -> "ProofWord":
        return ProofWord(self.factors + other.factors)

    def inverse(self) -> "ProofWord":
        return ProofWord(tuple((c, i, -e) for c, i, e in reversed(self.factors)))

    def conjugated(self, u: Word) -> "ProofWord":
        """``u P u^-1``."""
        return ProofWord(tuple((u * c, i, e) for c, i, e in self.factors))

    def value(self, relators: Sequence[Word]) -> Word:
        out: list = []
        for c, i, e in self.factors:
            out.extend((c * relators[i] ** e * c.inverse()).letters)
        return Word(out)

    def to_derivation(self, relators: Sequence[Word], target: Word) -> Derivation:
        """Derivation of ``target`` from the claim ``target == self`` (freely).

        Appends the inverse factors to the end of the word, then cancels.
        The result only replays if the claim is true.
        """
        cur = units_of(target)
        steps: list[Step] = []
        for c, i, e in reversed(self.factors):
            rho = units_of(relators[i] ** (-e))
            steps.append(Step("insert", len(cur), i, e > 0, 0, c))
            c_u = units_of(c)
            cur += c_u + rho + _inv_units(c_u)
        _, cs = cancel_steps(cur)
        return Derivation(target, tuple(steps + cs))


def transport(word: Word, rule) -> tuple[ProofWord, Word]:
    """Rewrite ``lhs(word)`` letter by letter.

    ``rule(symbol)`` returns ``(Q, val)`` with ``lhs(symbol) == Q * val``
    (formal value of Q times val), or None when ``lhs(symbol)`` is the
    symbol itself.  ``lhs`` must be multiplicative.  Returns ``(P, I)`` with
    ``lhs(word) == P * I``.
    """
    P = ProofWord()
    I = Word()
    for s, e in word.expand():
        r = rule(s)
        if r is None:
            I = I * Word.from_symbol(s, e)
            continue
        Q, val = r
        if e > 0:
            P = P * Q.conjugated(I)
            I = I * val
        else:
            P = P * Q.inverse().conjugated(I * val.inverse())
            I = I * val.inverse()
    return P, I


# ---------------------------------------------------------------- search


@dataclass(frozen=True)
class Exhausted:
    nodes: int
    frontier: int
    best_length: int
    reason: str = "budget"

    def to_json(self) -> dict:
        return {"exhausted": True, "nodes": self.nodes, "frontier": self.frontier, "best_length": self.best_length, "reason": self.reason}


def _canonical_cyclic(units: tuple[Unit, ...]) -> tuple:
    i, j = 0, len(units) - 1
    while i < j and units[i][0] == units[j][0] and units[i][1] == -units[j][1]:
        i += 1
        j -= 1
    core = units[i : j + 1]
    if not core:
        return ()
    keyed = [(s.sort_key(), e) for s, e in core]
    return min(tuple(keyed[k:] + keyed[:k]) for k in range(len(keyed)))


class _RotationIndex:
    """All rotations of every relator and its inverse, keyed by first letter."""

    def __init__(self, relators: Sequence[Word]):
        self.by_first: dict[Unit, list[tuple[tuple[Unit, ...], int, bool, int]]] = {}
        for idx, r in enumerate(relators):
            for inv in (False, True):
                u = units_of(r)
                if inv:
                    u = _inv_units(u)
                for rot in range(len(u)):
                    rho = tuple(u[rot:] + u[:rot])
                    self.by_first.setdefault(rho[0], []).append((rho, idx, inv, rot))


def _rotation_of(relators, idx: int, inv: bool, target: Sequence[Unit]) -> int:
    u = units_of(relators[idx])
    if inv:
        u = _inv_units(u)
    t = list(target)
    for rot in range(len(u)):
        if u[rot:] + u[:rot] == t:
            return rot
    raise AssertionError("rotation not found")


def rewrite_trivialize(relators: Sequence[Word] | object, w: Word, budget: int = 20000):
    """Best-first search for a Derivation of ``w`` to the empty word.

    Moves: delete a relator rotation occurring as a subword, or replace a
    subword ``s`` with ``t^-1`` where ``s t`` is a relator rotation and
    ``|s| >= |t|``; both followed by free reduction.  States are ordered by
    (length, steps so far, discovery order) and deduplicated up to cyclic
    conjugacy.  Returns a Derivation or :class:`Exhausted`.
    """
    rels = list(getattr(relators, "relators", relators))
    index = _RotationIndex(rels)
    start, start_steps = cancel_steps(units_of(w))
    start = tuple(start)
    # start_steps are empty because Words are stored reduced; kept for clarity
    parents: dict[tuple, tuple[tuple | None, list[Step]]] = {start: (None, list(start_steps))}
    heap = [(len(start), 0, 0, start)]
    seen = {_canonical_cyclic(start)}
    counter = 1
    nodes = 0
    best = len(start)
    while heap:
        length, depth, _, cur = heapq.heappop(heap)
        if not cur:
            return _assemble(w, parents, cur)
        nodes += 1
        if nodes > budget:
            return Exhausted(nodes - 1, len(heap) + 1, best)
        for nxt, steps in _moves(cur, index, rels):
            if nxt in parents:
                continue
            key = _canonical_cyclic(nxt)
            if nxt and key in seen:
                continue
            seen.add(key)
            parents[nxt] = (cur, steps)
            best = min(best, len(nxt))
            if not nxt:
                return _assemble(w, parents, nxt)
            heapq.heappush(heap, (len(nxt), depth + 1, counter, nxt))
            counter += 1
    return Exhausted(nodes, 0, best, reason="search space exhausted")


def _moves(cur: tuple[Unit, ...], index: _RotationIndex, rels):
    n = len(cur)
    out = []
    for i in range(n):
        for rho, idx, inv, rot in index.by_first.get(cur[i], ()):
            L = len(rho)
            m = 0
            while m < L and i + m < n and cur[i + m] == rho[m]:
                m += 1
            if m == L:
                body = list(cur[:i]) + list(cur[i + L :])
                red, cs = cancel_steps(body)
                out.append((tuple(red), [Step("delete", i, idx, inv, rot)] + cs))
            elif 2 * m >= L and m > 0:
                s, t = rho[:m], rho[m:]
                # insert (s t)^-1 rotated to start with t^-1, right before s
                ins = _inv_units(t) + _inv_units(s)
                irot = _rotation_of(rels, idx, not inv, ins)
                body = list(cur[:i]) + ins + list(cur[i:])
                red, cs = cancel_steps(body)
                out.append((tuple(red), [Step("insert", i, idx, not inv, irot)] + cs))
    return out


def _assemble(w: Word, parents, end) -> Derivation:
    chain = []
    node = end
    while node is not None:
        prev, steps = parents[node]
        chain.append(steps)
        node = prev
    steps = [s for part in reversed(chain) for s in part]
    return Derivation(w, tuple(steps))
