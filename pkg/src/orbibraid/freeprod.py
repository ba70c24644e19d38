"""Free products of cyclic groups ``F_m * Z_q1 * ... * Z_qs``.

Every factor is cyclic on a single symbol, so the normal form of a word is
obtained by merging adjacent powers of the same symbol and reducing
torsion exponents into ``[1, q-1]``.  This decides the word problem.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .presentation import (
    OrbifoldSpec,
    ParseError,
    Presentation,
    PresentationMeta,
    _parse_symbol_line,
    _parse_word_line,
    build_surface_pbn,
)
from .schema import RelatorSchema
from .words import GeneratorSymbol, UnknownSymbolError, Word


class FreeProductError(ValueError):
    pass


@dataclass(frozen=True)
class FiberMeta:
    spec: OrbifoldSpec
    n: int
    eliminated: GeneratorSymbol
    surface_relation: Word | None = None


@dataclass(frozen=True)
class FreeProductGroup:
    free_generators: tuple[GeneratorSymbol, ...]
    torsion_factors: tuple[tuple[GeneratorSymbol, int], ...] = ()
    meta: FiberMeta | None = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "free_generators", tuple(self.free_generators))
        object.__setattr__(self, "torsion_factors", tuple((s, int(q)) for s, q in self.torsion_factors))
        syms = list(self.free_generators) + [s for s, _ in self.torsion_factors]
        if len(set(syms)) != len(syms):
            raise FreeProductError("generator symbols must be distinct")
        if any(q < 2 for _, q in self.torsion_factors):
            raise FreeProductError("torsion orders must be >= 2")

    @property
    def orders(self) -> dict[GeneratorSymbol, int]:
        return dict(self.torsion_factors)

    @property
    def generators(self) -> tuple[GeneratorSymbol, ...]:
        """All factor generators in canonical symbol order."""
        return tuple(sorted(list(self.free_generators) + [s for s, _ in self.torsion_factors], key=GeneratorSymbol.sort_key))

    @property
    def alphabet(self) -> frozenset[GeneratorSymbol]:
        return frozenset(self.generators)

    @property
    def free_rank(self) -> int:
        return len(self.free_generators)

    def as_presentation(self) -> Presentation:
        """The one-relator-per-torsion-factor presentation."""
        rels = [Word.from_symbol(s, q) for s, q in sorted(self.torsion_factors, key=lambda t: t[0].sort_key())]
        return Presentation(self.generators, tuple(rels), PresentationMeta("generic"))

    def torsion_relators(self) -> list[Word]:
        return list(self.as_presentation().relators)

    def __str__(self) -> str:
        parts = [f"F{self.free_rank}"] + [f"Z{q}" for _, q in self.torsion_factors]
        return " * ".join(parts)


@dataclass(frozen=True)
class NormalWord:
    """Alternating syllables ``(symbol, exponent)``; torsion exponents in [1, q-1]."""

    syllables: tuple[tuple[GeneratorSymbol, int], ...]

    def is_identity(self) -> bool:
        return not self.syllables

    def to_word(self) -> Word:
        return Word(self.syllables)

    def __len__(self) -> int:
        return len(self.syllables)

    def __str__(self) -> str:
        return str(self.to_word()) or "1"


def normal_form(G: FreeProductGroup, w: Word) -> NormalWord:
    orders = G.orders
    alpha = G.alphabet
    stack: list[list] = []
    for s, e in w.letters:
        if s not in alpha:
            raise UnknownSymbolError(s)
        q = orders.get(s)
        if stack and stack[-1][0] == s:
            stack[-1][1] += e
        else:
            stack.append([s, e])
        top = stack[-1]
        if q is not None:
            top[1] %= q
        if top[1] == 0:
            stack.pop()
    return NormalWord(tuple((s, e) for s, e in stack))


def is_trivial(G: FreeProductGroup, w: Word) -> bool:
    return normal_form(G, w).is_identity()


def are_equal(G: FreeProductGroup, u: Word, v: Word) -> bool:
    return is_trivial(G, u * v.inverse())


# ---------------------------------------------------------------- fiber


def fiber_strand_generators(spec: OrbifoldSpec, n: int) -> list[GeneratorSymbol]:
    """Barred strand-n generators of PB_n: the natural fiber generators."""
    out = [GeneratorSymbol("A", n, j, True) for j in range(1, spec.g + 1)]
    out += [GeneratorSymbol("B", n, j, True) for j in range(1, spec.g + 1)]
    out += [GeneratorSymbol("C", n, m, True) for m in range(1, n)]
    out += [GeneratorSymbol("P", n, p, True) for p in range(1, spec.k + 1)]
    return out


def build_fiber_group(spec: OrbifoldSpec, n: int, schema: RelatorSchema | None = None) -> FreeProductGroup:
    """Orbifold fundamental group of the fiber over a point of PB_{n-1}.

    The fiber is the orbifold with the n-1 earlier points removed; its
    natural generators are the strand-n generators subject to one surface
    relation.  Solving that relation for ``Cb[n,n-1]`` (a smooth puncture)
    leaves the free product of a free group of rank 2g + r + n - 2 with the
    cyclic groups of the cone points.
    """
    if n < 2:
        raise FreeProductError(f"fiber needs n >= 2, got {n}")
    eliminated = GeneratorSymbol("C", n, n - 1, True)
    cones = dict(spec.cone_slots())
    free, tors = [], []
    for s in fiber_strand_generators(spec, n):
        if s == eliminated:
            continue
        if s.family == "P" and s.idx2 in cones:
            tors.append((s, cones[s.idx2]))
        else:
            free.append(s)
    rel = fiber_surface_relation(spec, n, schema)
    return FreeProductGroup(tuple(free), tuple(tors), FiberMeta(spec, n, eliminated, rel))


def fiber_surface_relation(spec: OrbifoldSpec, n: int, schema: RelatorSchema | None = None) -> Word:
    """The unique PB_n relator written purely in strand-n generators, barred."""
    surf = build_surface_pbn(spec.g, spec.k, n, schema)
    cands = [r for r in surf.relators if all(s.idx1 == n for s in r.symbols())]
    if len(cands) != 1:
        raise FreeProductError(f"expected one strand-{n} surface relator, found {len(cands)}")
    return cands[0].map_symbols(lambda s: Word.from_symbol(s.bar()))


def eliminated_value(G: FreeProductGroup) -> Word:
    """Word in the fiber generators equal to the eliminated generator."""
    if G.meta is None or G.meta.surface_relation is None:
        raise FreeProductError("group carries no surface relation")
    x = G.meta.eliminated
    rel = G.meta.surface_relation
    pos = [i for i, (s, _) in enumerate(rel.letters) if s == x]
    if len(pos) != 1 or abs(rel.letters[pos[0]][1]) != 1:
        raise FreeProductError(f"{x} does not occur exactly once in the surface relation")
    i = pos[0]
    u, v = Word(rel.letters[:i]), Word(rel.letters[i + 1 :])
    # u x^e v = 1  =>  x^e = u^-1 v^-1
    val = u.inverse() * v.inverse()
    return val if rel.letters[i][1] == 1 else val.inverse()


def substitute_eliminated(G: FreeProductGroup, w: Word) -> Word:
    """Rewrite a word in the natural fiber generators into G's generators."""
    if G.meta is None:
        return w
    x = G.meta.eliminated
    val = eliminated_value(G)
    return w.map_symbols(lambda s: val if s == x else Word.from_symbol(s))


# ---------------------------------------------------------------- files


def format_freeprod(G: FreeProductGroup) -> str:
    if G.meta is None:
        lines = ["group freeprod"]
    else:
        lines = [PresentationMeta("freeprod", G.meta.spec, G.meta.n).header()]
    lines.append("generators:")
    lines += [str(s) for s in G.free_generators]
    lines.append("torsion:")
    lines += [f"{s} {q}" for s, q in G.torsion_factors]
    if G.meta is not None:
        lines.append("eliminated:")
        lines.append(str(G.meta.eliminated))
    return "\n".join(lines) + "\n"


def save_freeprod(G: FreeProductGroup, path: str | Path) -> None:
    Path(path).write_text(format_freeprod(G), encoding="utf-8", newline="\n")


def parse_freeprod_body(params: dict, lines: list[tuple[int, str]], path: str) -> FreeProductGroup:
    from .presentation import meta_from_header

    header_line = lines[0][0]
    meta = None
    if params:
        meta = meta_from_header("freeprod", params, header_line, path)
    section = None
    free: list[GeneratorSymbol] = []
    tors: list[tuple[GeneratorSymbol, int]] = []
    elim: list[GeneratorSymbol] = []
    seen = set()
    for lineno, line in lines[1:]:
        stripped = line.strip()
        if stripped in ("generators:", "torsion:", "eliminated:"):
            if stripped in seen:
                raise ParseError(f"duplicate section {stripped!r}", lineno, 1, path)
            seen.add(stripped)
            section = stripped[:-1]
            continue
        if section == "generators":
            free.append(_parse_symbol_line(line, lineno, path))
        elif section == "torsion":
            parts = stripped.rsplit(None, 1)
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError("torsion lines are '<symbol> <order>'", lineno, 1, path)
            tors.append((_parse_symbol_line(parts[0], lineno, path), int(parts[1])))
        elif section == "eliminated":
            elim.append(_parse_symbol_line(line, lineno, path))
        else:
            raise ParseError("expected 'generators:'", lineno, 1, path)
    if "generators:" not in seen or "torsion:" not in seen:
        raise ParseError("missing 'generators:' or 'torsion:' section", lines[-1][0] + 1, 1, path)
    try:
        if meta is None:
            if elim:
                raise ParseError("'eliminated:' needs instance parameters", header_line, 1, path)
            return FreeProductGroup(tuple(free), tuple(tors))
        if len(elim) != 1:
            raise ParseError("'eliminated:' must list exactly one symbol", header_line, 1, path)
        G = build_fiber_group(meta.spec, meta.n)
    except (FreeProductError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), header_line, 1, path) from None
    loaded = FreeProductGroup(tuple(free), tuple(tors), G.meta)
    if loaded != G or elim[0] != G.meta.eliminated:
        raise ParseError("fiber generators do not match the instance parameters", header_line, 1, path)
    return G


def parse_fiber_word(G: FreeProductGroup, text: str) -> Word:
    """Parse a word over G's generators (the eliminated symbol is substituted)."""
    alpha = set(G.alphabet)
    if G.meta is not None:
        alpha.add(G.meta.eliminated)
    w = _parse_word_line(text, 1, "<word>", alpha)
    return substitute_eliminated(G, w)


def free_product(free: Iterable[GeneratorSymbol], torsion: Iterable[tuple[GeneratorSymbol, int]] = ()) -> FreeProductGroup:
    return FreeProductGroup(tuple(free), tuple(torsion))
