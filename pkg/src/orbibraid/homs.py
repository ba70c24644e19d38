"""Homomorphisms given by generator images, and syntactic diagram checks.

A GroupHom does not assume well-definedness; :func:`check_relators_die`
grades how far the artifact can certify that relators map to the identity.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .freeprod import FreeProductGroup
from .presentation import (
    ParseError,
    Presentation,
    PresentationError,
    build_orbifold_pbn,
    build_surface_pbn,
    load_presentation,
)
from .words import GeneratorSymbol, Word, format_word, parse_word


class HomError(ValueError):
    pass


class EvidenceLevel(enum.IntEnum):
    NONE = 0
    H1_VERIFIED = 1
    QUOTIENT_VERIFIED = 2
    DERIVATION_VERIFIED = 3


@dataclass(frozen=True)
class Evidence:
    level: EvidenceLevel = EvidenceLevel.NONE
    quotient_degrees: tuple[int, ...] = ()

    def to_json(self) -> dict:
        d: dict = {"level": self.level.name}
        if self.level >= EvidenceLevel.QUOTIENT_VERIFIED:
            d["quotient_degrees"] = list(self.quotient_degrees)
        return d


def _gens(G) -> tuple[GeneratorSymbol, ...]:
    return tuple(G.generators)


@dataclass(frozen=True)
class GroupHom:
    source: object  # Presentation | FreeProductGroup
    target: object
    images: Mapping[GeneratorSymbol, Word]
    label: str = "h"
    evidence: Evidence = field(default_factory=Evidence, compare=False)

    def __post_init__(self):
        src = _gens(self.source)
        imgs = dict(self.images)
        missing = [s for s in src if s not in imgs]
        if missing:
            raise HomError(f"{self.label}: no image for {', '.join(map(str, missing))}")
        extra = [s for s in imgs if s not in set(src)]
        if extra:
            raise HomError(f"{self.label}: images given for non-generators {', '.join(map(str, extra))}")
        talpha = set(_gens(self.target))
        for s, w in imgs.items():
            bad = w.symbols() - talpha
            if bad:
                raise HomError(f"{self.label}: image of {s} uses {', '.join(map(str, sorted(bad)))} outside the target")
        object.__setattr__(self, "images", {s: imgs[s] for s in src})

    def apply(self, w: Word) -> Word:
        return w.map_symbols(lambda s: self.images[s])

    __call__ = apply

    def with_image(self, s: GeneratorSymbol, w: Word) -> "GroupHom":
        imgs = dict(self.images)
        imgs[s] = w
        return GroupHom(self.source, self.target, imgs, self.label)

    def with_evidence(self, ev: Evidence) -> "GroupHom":
        return GroupHom(self.source, self.target, self.images, self.label, ev)

    def kernel_generators(self) -> list[GeneratorSymbol]:
        return [s for s, w in self.images.items() if w.is_identity()]


def identity_hom(G, label: str = "id") -> GroupHom:
    return GroupHom(G, G, {s: Word.from_symbol(s) for s in _gens(G)}, label)


def trivial_hom(source, target, label: str = "trivial") -> GroupHom:
    return GroupHom(source, target, {s: Word() for s in _gens(source)}, label)


def build_projection_hom(p: Presentation, k: int, target: Presentation | None = None, schema=None) -> GroupHom:
    """Forget strands k+1..n: generators touching a strand > k die, others keep their name."""
    n = p.n
    if n is None or p.spec is None or p.kind not in ("surface", "orbifold"):
        raise HomError("projection needs a surface or orbifold build")
    if not 1 <= k < n:
        raise HomError(f"need 1 <= k < n, got k={k}, n={n}")
    if target is None:
        if p.kind == "surface":
            target = build_surface_pbn(p.spec.g, p.spec.k, k, schema)
        else:
            target = build_orbifold_pbn(p.spec, k, schema)
    elif target.n != k or target.spec != p.spec or target.kind != p.kind:
        raise HomError("projection target does not match the source instance")
    imgs = {s: (Word() if max(s.strands) > k else Word.from_symbol(s)) for s in p.generators}
    label = ("f" if p.kind == "surface" else "fo") + f"_{n}" + ("" if k == n - 1 else f"->{k}")
    return GroupHom(p, target, imgs, label)


def build_bar_hom(surface_p: Presentation, orbifold_p: Presentation) -> GroupHom:
    """X -> Xbar."""
    if surface_p.kind != "surface" or orbifold_p.kind != "orbifold":
        raise HomError("bar map goes from a surface build to an orbifold build")
    a, b = surface_p.spec, orbifold_p.spec
    if surface_p.n != orbifold_p.n or a.g != b.g or a.k != b.k:
        raise HomError("bar map: instance parameters differ")
    imgs = {s: Word.from_symbol(s.bar()) for s in surface_p.generators}
    return GroupHom(surface_p, orbifold_p, imgs, f"g_{surface_p.n}")


def build_fiber_inclusion(fiber: FreeProductGroup, p: Presentation) -> GroupHom:
    """Namesake inclusion of the fiber free product into PB_n."""
    if fiber.meta is None:
        raise HomError("fiber group carries no instance data")
    m = fiber.meta
    if p.n != m.n or p.spec is None or p.spec.g != m.spec.g or p.spec.k != m.spec.k:
        raise HomError("fiber and braid group instances differ")
    if p.kind == "orbifold" and p.spec.slots() != m.spec.slots():
        raise HomError("fiber and braid group cone data differ")
    bar = p.kind == "orbifold"
    imgs = {}
    for s in fiber.generators:
        t = s if bar else s.unbar()
        imgs[s] = Word.from_symbol(t)
    return GroupHom(fiber, p, imgs, f"iota_{m.n}")


def build_multistrand_fiber_inclusion(fiber: Presentation, p: Presentation, k: int) -> GroupHom:
    """Inclusion PB_{n-k}(M minus k points) -> PB_n(M), shifting strands by k.

    The fiber spec must be ``p.spec.with_extra_smooth(k)``: its puncture
    slots are the first K-1 slots of M, then the k forgotten points, then
    slot K.  Strand t goes to strand k+t, the slots of the forgotten points
    become C generators around strands 1..k.
    """
    n = p.n
    if p.spec is None or fiber.spec is None or n is None:
        raise HomError("needs instance builds")
    if not 1 <= k < n or fiber.n != n - k:
        raise HomError(f"fiber must have n-k = {n - k} strands")
    if fiber.spec != p.spec.with_extra_smooth(k) or fiber.kind != p.kind:
        raise HomError("fiber spec must add k smooth punctures before the last slot")
    K = p.spec.k
    bar = p.kind == "orbifold"
    imgs = {}
    for s in fiber.generators:
        t = s.idx1 + k
        if s.family in "AB":
            img = GeneratorSymbol(s.family, t, s.idx2, bar)
        elif s.family == "C":
            img = GeneratorSymbol("C", t, s.idx2 + k, bar)
        elif s.idx2 <= K - 1:
            img = GeneratorSymbol("P", t, s.idx2, bar)
        elif s.idx2 <= K - 1 + k:
            img = GeneratorSymbol("C", t, s.idx2 - K + 1, bar)
        else:
            img = GeneratorSymbol("P", t, K, bar)
        imgs[s] = Word.from_symbol(img)
    return GroupHom(fiber, p, imgs, f"iota_{n},{k}")


def compose(h2: GroupHom, h1: GroupHom, label: str | None = None) -> GroupHom:
    """``h2 o h1`` (apply h1 first)."""
    if _gens(h1.target) != _gens(h2.source):
        raise HomError(f"cannot compose {h2.label} o {h1.label}: target/source mismatch")
    imgs = {s: h2.apply(w) for s, w in h1.images.items()}
    return GroupHom(h1.source, h2.target, imgs, label or f"{h2.label}o{h1.label}")


def homs_equal(h1: GroupHom, h2: GroupHom) -> bool:
    return _gens(h1.source) == _gens(h2.source) and dict(h1.images) == dict(h2.images)


@dataclass(frozen=True)
class DiagramReport:
    passed: bool
    mismatches: tuple[tuple[GeneratorSymbol, Word, Word], ...]
    checked: int

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "mismatches": [{"generator": str(s), "right_top": format_word(a, "1"), "bottom_left": format_word(b, "1")} for s, a, b in self.mismatches],
        }


def check_square_commutes(top: GroupHom, bottom: GroupHom, left: GroupHom, right: GroupHom) -> DiagramReport:
    """``right o top == bottom o left`` on every generator, as reduced words."""
    if _gens(top.source) != _gens(left.source):
        raise HomError("square: top and left must share a source")
    if _gens(top.target) != _gens(right.source) or _gens(left.target) != _gens(bottom.source):
        raise HomError("square: edges do not chain")
    if _gens(right.target) != _gens(bottom.target):
        raise HomError("square: right and bottom must share a target")
    bad = []
    for s in _gens(top.source):
        a = right.apply(top.images[s])
        b = bottom.apply(left.images[s])
        if a != b:
            bad.append((s, a, b))
    return DiagramReport(not bad, tuple(bad), len(_gens(top.source)))


@dataclass(frozen=True)
class WitnessMap:
    passed: bool
    witnesses: tuple[tuple[GeneratorSymbol, Word], ...]
    unhit: tuple[GeneratorSymbol, ...]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "witnesses": {str(t): format_word(w) for t, w in self.witnesses},
            "unhit": [str(s) for s in self.unhit],
        }


def check_surjective_on_generators(h: GroupHom) -> WitnessMap:
    """A preimage word for each target generator, found among generator images.

    A target generator t counts as hit when some source generator maps to
    exactly ``t`` or ``t^-1``; the witness is then that generator (or its
    inverse).  Each witness is re-checked by applying ``h``.
    """
    found: dict[GeneratorSymbol, Word] = {}
    for s, w in h.images.items():
        if len(w.letters) == 1 and abs(w.letters[0][1]) == 1:
            t, e = w.letters[0]
            if t not in found:
                found[t] = Word.from_symbol(s, e)
    wits, unhit = [], []
    for t in _gens(h.target):
        w = found.get(t)
        if w is not None and h.apply(w) == Word.from_symbol(t):
            wits.append((t, w))
        else:
            unhit.append(t)
    return WitnessMap(not unhit, tuple(wits), tuple(unhit))


# ---------------------------------------------------------------- relator death


@dataclass(frozen=True)
class RelatorDeathEntry:
    relator: Word
    image: Word
    h1: bool
    quotient: bool | None
    derivation: object | None  # Derivation when found and replayed

    def to_json(self) -> dict:
        d = {"relator": format_word(self.relator), "image": format_word(self.image, "1"), "h1": self.h1, "quotient": self.quotient}
        d["derivation_steps"] = len(self.derivation.steps) if self.derivation is not None else None
        return d


@dataclass(frozen=True)
class RelatorDeathReport:
    label: str
    level: EvidenceLevel
    entries: tuple[RelatorDeathEntry, ...]
    quotient_degrees: tuple[int, ...]
    quotient_count: int

    @property
    def h1_passed(self) -> bool:
        return all(e.h1 for e in self.entries)

    def failures(self) -> list[RelatorDeathEntry]:
        return [e for e in self.entries if not e.h1 or e.quotient is False]

    def to_json(self, full: bool = False) -> dict:
        d = {
            "hom": self.label,
            "level": self.level.name,
            "relators": len(self.entries),
            "h1_failures": sum(1 for e in self.entries if not e.h1),
            "quotient_failures": sum(1 for e in self.entries if e.quotient is False),
            "derivations": sum(1 for e in self.entries if e.derivation is not None),
            "quotient_reps": self.quotient_count,
            "quotient_degrees": list(self.quotient_degrees),
        }
        if full or d["h1_failures"] or d["quotient_failures"]:
            d["failed"] = [e.to_json() for e in self.failures()][:20]
        return d


def source_relators(G) -> list[Word]:
    if hasattr(G, "as_presentation"):
        return list(G.as_presentation().relators)
    return list(G.relators)


def check_relators_die(
    h: GroupHom,
    level: EvidenceLevel = EvidenceLevel.DERIVATION_VERIFIED,
    quotient_budget: int = 20000,
    quotient_degree: int = 4,
    rewrite_budget: int = 2000,
    seed: int = 0,
    reps=None,
) -> tuple[GroupHom, RelatorDeathReport]:
    """Grade the claim that every source relator maps to the identity.

    H1: the image's exponent vector lies in the target relation lattice.
    Quotient: the image is trivial in every finite permutation quotient
    found for the target (reps may be supplied to share a search).
    Derivation: a rewriting derivation to the empty word replays.
    The level reached is the highest one at which every relator passed.
    """
    from .abelian import h1_data
    from .search.quotients import check_word_in_quotients, find_finite_quotients
    from .search.rewriting import Derivation, replay, rewrite_trivialize

    th1 = h1_data(h.target)
    trels = source_relators(h.target)
    if level >= EvidenceLevel.QUOTIENT_VERIFIED and reps is None:
        target_p = h.target.as_presentation() if hasattr(h.target, "as_presentation") else h.target
        reps = find_finite_quotients(target_p, max_degree=quotient_degree, budget=quotient_budget, seed=seed).reps
    reps = tuple(reps or ())
    entries = []
    for r in source_relators(h.source):
        img = h.apply(r)
        h1 = th1.word_is_zero(img)
        q = check_word_in_quotients(img, reps) if level >= EvidenceLevel.QUOTIENT_VERIFIED else None
        der = None
        if level >= EvidenceLevel.DERIVATION_VERIFIED and h1 and q is not False:
            res = rewrite_trivialize(trels, img, rewrite_budget)
            if isinstance(res, Derivation) and replay(trels, res).ok:
                der = res
        entries.append(RelatorDeathEntry(r, img, h1, q, der))
    reached = EvidenceLevel.NONE
    if all(e.h1 for e in entries):
        reached = EvidenceLevel.H1_VERIFIED
        if level >= EvidenceLevel.QUOTIENT_VERIFIED and reps and all(e.quotient for e in entries):
            reached = EvidenceLevel.QUOTIENT_VERIFIED
            if level >= EvidenceLevel.DERIVATION_VERIFIED and all(e.derivation is not None for e in entries):
                reached = EvidenceLevel.DERIVATION_VERIFIED
    degrees = tuple(sorted({r.degree for r in reps}))
    report = RelatorDeathReport(h.label, reached, tuple(entries), degrees, len(reps))
    return h.with_evidence(Evidence(reached, degrees)), report


# ---------------------------------------------------------------- files


def format_hom(h: GroupHom, source_file: str, target_file: str) -> str:
    lines = [f"hom {h.label} : {source_file} -> {target_file}"]
    lines += [f"{s} := {format_word(w, '1')}" for s, w in h.images.items()]
    return "\n".join(lines) + "\n"


def save_hom(h: GroupHom, path: str | Path, source_file: str, target_file: str) -> None:
    Path(path).write_text(format_hom(h, source_file, target_file), encoding="utf-8", newline="\n")


_HOM_HEADER = re.compile(r"hom\s+(?P<label>\S+)\s*:\s*(?P<src>\S+)\s*->\s*(?P<tgt>\S+)\s*$")


def load_hom(path: str | Path) -> GroupHom:
    """Load a hom file; source and target paths are relative to the hom file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise PresentationError(f"cannot read {p}: {exc.strerror}") from None
    lines = [(i, l) for i, l in enumerate(text.split("\n"), start=1) if l.strip() and not l.strip().startswith("#")]
    if not lines:
        raise ParseError("empty hom file", 1, 1, str(p))
    m = _HOM_HEADER.fullmatch(lines[0][1].strip())
    if m is None:
        raise ParseError("expected 'hom <label> : <source> -> <target>'", lines[0][0], 1, str(p))
    src = load_presentation(p.parent / m.group("src"))
    tgt = load_presentation(p.parent / m.group("tgt"))
    imgs: dict[GeneratorSymbol, Word] = {}
    talpha = set(_gens(tgt))
    for lineno, line in lines[1:]:
        if ":=" not in line:
            raise ParseError("expected 'X := <word>'", lineno, 1, str(p))
        lhs, rhs = line.split(":=", 1)
        try:
            (s, e), = parse_word(lhs).letters
            if e != 1:
                raise ValueError
        except ValueError:
            raise ParseError(f"left side must be one generator, got {lhs.strip()!r}", lineno, 1, str(p)) from None
        if s in imgs:
            raise ParseError(f"duplicate image for {s}", lineno, 1, str(p))
        try:
            imgs[s] = parse_word(rhs, talpha)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, line.index(":=") + 3, str(p)) from None
    try:
        return GroupHom(src, tgt, imgs, m.group("label"))
    except HomError as exc:
        raise ParseError(str(exc), lines[0][0], 1, str(p)) from None
