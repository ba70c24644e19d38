"""Finite presentations and the pure braid group builders.

Surface builds use the unbarred alphabet; orbifold builds use the barred
copy plus one torsion relator ``(Pb[i,p])^q`` per strand and cone point.

Puncture slots
--------------
Punctures are numbered 1..k.  By default slots 1..r are smooth and slots
r+1..r+s carry the cone orders q_1..q_s.  An explicit ``layout`` (one entry
per slot, 0 for smooth) allows other orders; it is used for the fiber of
the strand-forgetting map, where the forgotten points become smooth
punctures inserted before the last slot so that generators keep their
positions.  The last slot plays the role of the boundary in the relator
schema, so ``P[i,k]`` is the push around it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .pushrep import braid_generators
from .schema import RelatorSchema, SchemaError, load_schema
from .words import GeneratorSymbol, Word, WordSyntaxError, cyclic_conjugates, cyclic_reduce, parse_word

KINDS = ("surface", "orbifold", "generic")


class PresentationError(ValueError):
    pass


class ParseError(PresentationError):
    """Malformed presentation file; ``line``/``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int = 1, path: str = "<text>"):
        self.line, self.column, self.path = line, column, path
        super().__init__(f"{path}:{line}:{column}: {message}")


@dataclass(frozen=True)
class OrbifoldSpec:
    """Genus g surface with r smooth punctures and cone points of orders q."""

    g: int
    r: int
    q: tuple[int, ...] = ()
    layout: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(int(x) for x in self.q))
        if self.g < 1:
            raise PresentationError(f"genus must be >= 1, got {self.g}")
        if self.r < 0:
            raise PresentationError(f"punctures r must be >= 0, got {self.r}")
        if any(x < 2 for x in self.q):
            raise PresentationError(f"cone orders must be >= 2, got {list(self.q)}")
        if self.k < 1:
            raise PresentationError("need at least one puncture or cone point (k = r + s >= 1)")
        if self.layout is not None:
            lay = tuple(int(x) for x in self.layout)
            object.__setattr__(self, "layout", lay)
            if len(lay) != self.k or any(x == 1 or x < 0 for x in lay):
                raise PresentationError(f"bad puncture layout {list(lay)} for k={self.k}")
            if sorted(x for x in lay if x) != sorted(self.q) or lay.count(0) != self.r:
                raise PresentationError(f"layout {list(lay)} does not match r={self.r}, q={list(self.q)}")
            if lay == self.default_layout():
                object.__setattr__(self, "layout", None)

    @property
    def s(self) -> int:
        return len(self.q)

    @property
    def k(self) -> int:
        return self.r + len(self.q)

    def default_layout(self) -> tuple[int, ...]:
        return (0,) * self.r + self.q

    def slots(self) -> tuple[int, ...]:
        """Order of each puncture slot (0 = smooth)."""
        return self.layout if self.layout is not None else self.default_layout()

    def cone_slots(self) -> list[tuple[int, int]]:
        """``(slot, order)`` for each cone point, in slot order."""
        return [(i + 1, o) for i, o in enumerate(self.slots()) if o]

    def smooth_slots(self) -> list[int]:
        return [i + 1 for i, o in enumerate(self.slots()) if not o]

    def with_extra_smooth(self, extra: int) -> "OrbifoldSpec":
        """Spec with ``extra`` smooth punctures inserted before the last slot."""
        base = self.slots()
        lay = base[:-1] + (0,) * extra + base[-1:]
        return OrbifoldSpec(self.g, self.r + extra, self.q, lay)


@dataclass(frozen=True)
class PresentationMeta:
    kind: str
    spec: OrbifoldSpec | None = None
    n: int | None = None

    def header(self) -> str:
        if self.spec is None:
            return f"group {self.kind}"
        sp = self.spec
        q = ",".join(str(x) for x in sp.q)
        out = f"group {self.kind} g={sp.g} r={sp.r} q=[{q}] n={self.n}"
        if sp.layout is not None:
            out += " layout=[" + ",".join(str(x) for x in sp.layout) + "]"
        return out


@dataclass(frozen=True)
class Presentation:
    """Ordered generators and relators; relators are nonempty cyclically reduced words."""

    generators: tuple[GeneratorSymbol, ...]
    relators: tuple[Word, ...]
    meta: PresentationMeta = field(default_factory=lambda: PresentationMeta("generic"))

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relators", tuple(self.relators))
        if len(set(self.generators)) != len(self.generators):
            raise PresentationError("duplicate generators")
        alpha = self.alphabet
        for idx, r in enumerate(self.relators):
            if r.is_identity():
                raise PresentationError(f"relator {idx} is empty")
            if cyclic_reduce(r)[0] != r:
                raise PresentationError(f"relator {idx} is not cyclically reduced: {r}")
            extra = r.symbols() - alpha
            if extra:
                raise PresentationError(f"relator {idx} ({r}) uses undeclared {sorted(extra)}")

    @property
    def alphabet(self) -> frozenset[GeneratorSymbol]:
        return frozenset(self.generators)

    @property
    def kind(self) -> str:
        return self.meta.kind

    @property
    def n(self) -> int | None:
        return self.meta.n

    @property
    def spec(self) -> OrbifoldSpec | None:
        return self.meta.spec

    def word(self, text: str) -> Word:
        return parse_word(text, self.alphabet)

    def with_relators(self, relators: Iterable[Word]) -> "Presentation":
        return Presentation(self.generators, tuple(relators), self.meta)

    def __str__(self) -> str:
        return format_presentation(self)


def _check_params(g: int, k: int, n: int) -> None:
    if g < 1:
        raise PresentationError(f"genus must be >= 1, got {g}")
    if k < 1:
        raise PresentationError(f"need k >= 1 punctures, got {k}")
    if n < 1:
        raise PresentationError(f"need n >= 1 strands, got {n}")


def _schema_relators(schema: RelatorSchema | None, g: int, k: int, n: int) -> list[Word]:
    schema = schema if schema is not None else load_schema()
    labeled = schema.instantiate_labeled(g, k, n)
    gens = set(braid_generators(g, k, n))
    for label, r in labeled:
        extra = r.symbols() - gens
        if extra:
            names = ", ".join(str(x) for x in sorted(extra))
            raise SchemaError(f"schema {schema.source} v{schema.version}: relator {label} = {r} uses undeclared {names}")
    return [r for _, r in labeled]


def build_surface_pbn(g: int, k: int, n: int, schema: RelatorSchema | None = None) -> Presentation:
    """Pure braid group of n strands on the genus-g surface with k punctures."""
    _check_params(g, k, n)
    rels = _schema_relators(schema, g, k, n)
    spec = OrbifoldSpec(g, k, ())
    return Presentation(tuple(braid_generators(g, k, n)), tuple(rels), PresentationMeta("surface", spec, n))


def build_orbifold_pbn(spec: OrbifoldSpec, n: int, schema: RelatorSchema | None = None) -> Presentation:
    """Barred surface presentation plus ``(Pb[i,slot])^q`` for every strand and cone.

    With no cone points (classical mode) this is the barred surface build.
    """
    _check_params(spec.g, spec.k, n)
    rels = [w.map_symbols(lambda s: Word.from_symbol(s.bar())) for w in _schema_relators(schema, spec.g, spec.k, n)]
    for i in range(1, n + 1):
        for slot, order in spec.cone_slots():
            rels.append(Word.from_symbol(GeneratorSymbol("P", i, slot, True), order))
    gens = tuple(braid_generators(spec.g, spec.k, n, barred=True))
    return Presentation(gens, tuple(rels), PresentationMeta("orbifold", spec, n))


def torsion_relator_count(spec: OrbifoldSpec, n: int) -> int:
    return n * spec.s


# ---------------------------------------------------------------- Tietze


def _canonical_relator(w: Word) -> tuple:
    """Key identifying a relator up to cyclic rotation and inversion."""
    core = cyclic_reduce(w)[0]
    cands = cyclic_conjugates(core) + cyclic_conjugates(core.inverse())
    return min(tuple((s.sort_key(), e) for s, e in c.letters) for c in cands)


def _dedup(rels: Sequence[Word]) -> list[Word]:
    out, seen = [], set()
    for r in rels:
        core = cyclic_reduce(r)[0]
        if core.is_identity():
            continue
        key = _canonical_relator(core)
        if key in seen:
            continue
        seen.add(key)
        out.append(core)
    return out


def _total_length(rels: Iterable[Word]) -> int:
    return sum(r.length() for r in rels)


def _elimination_candidates(rels: Sequence[Word]):
    for idx, r in enumerate(rels):
        counts: dict[GeneratorSymbol, int] = {}
        for s, e in r.letters:
            counts[s] = counts.get(s, 0) + abs(e)
        for pos, (s, e) in enumerate(r.letters):
            if counts[s] == 1:
                yield idx, pos, s, e


def tietze_simplify(p: Presentation, slack: int = 0) -> Presentation:
    """Simplify by isomorphism-preserving Tietze moves.

    Drops trivial relators and duplicates up to conjugation and inversion,
    then repeatedly eliminates a generator occurring exactly once (with
    exponent +-1) in some relator, as long as the total relator length does
    not grow by more than ``slack``.  Among candidates the shortest relator
    wins, then the generator that comes last in the generator order.
    """
    gens = list(p.generators)
    rels = _dedup(p.relators)
    changed = rels != list(p.relators)
    while True:
        cands = sorted(
            ((rels[idx].length(), tuple(-x for x in s.sort_key()), idx, pos), s, e)
            for idx, pos, s, e in _elimination_candidates(rels)
        )
        for (_, _, idx, pos), s, e in cands:
            r = rels[idx]
            # r = u s^e v  =>  s = (v u)^-e
            u, v = Word(r.letters[:pos]), Word(r.letters[pos + 1 :])
            value = (v * u) if e < 0 else (v * u).inverse()
            sub = lambda t, s=s, value=value: value if t == s else Word.from_symbol(t)
            new_rels = _dedup([w.map_symbols(sub) for j, w in enumerate(rels) if j != idx])
            if _total_length(new_rels) <= _total_length(rels) + slack:
                rels = new_rels
                gens.remove(s)
                changed = True
                break
        else:
            break
    if not changed:
        return p
    return Presentation(tuple(gens), tuple(rels), PresentationMeta("generic"))


# ---------------------------------------------------------------- files


def format_presentation(p: Presentation) -> str:
    lines = [p.meta.header(), "generators:"]
    lines += [str(s) for s in p.generators]
    lines.append("relators:")
    lines += [str(r) for r in p.relators]
    return "\n".join(lines) + "\n"


def save_presentation(p: Presentation, path: str | Path) -> None:
    Path(path).write_text(format_presentation(p), encoding="utf-8", newline="\n")


_HEADER = re.compile(r"group\s+(?P<kind>[a-z]+)(?P<rest>.*)$")
_PARAM = re.compile(r"\s+(?P<key>[a-z]+)=(?P<val>\[[^\]]*\]|-?\d+)")


def parse_header(line: str, lineno: int, path: str) -> tuple[str, dict]:
    m = _HEADER.fullmatch(line.strip())
    if m is None:
        raise ParseError("expected header 'group <kind> ...'", lineno, 1, path)
    params: dict = {}
    rest = m.group("rest")
    pos = 0
    offset = line.index(rest) if rest else len(line)
    while pos < len(rest):
        pm = _PARAM.match(rest, pos)
        if pm is None:
            if rest[pos:].strip() == "":
                break
            raise ParseError(f"bad header parameter {rest[pos:].strip()!r}", lineno, offset + pos + 1, path)
        key, val = pm.group("key"), pm.group("val")
        if key in params:
            raise ParseError(f"duplicate header parameter {key!r}", lineno, offset + pm.start("key") + 1, path)
        try:
            params[key] = [int(x) for x in val[1:-1].split(",") if x.strip()] if val.startswith("[") else int(val)
        except ValueError:
            raise ParseError(f"bad value for {key!r}", lineno, offset + pm.start("val") + 1, path) from None
        pos = pm.end()
    return m.group("kind"), params


def meta_from_header(kind: str, params: dict, lineno: int, path: str) -> PresentationMeta:
    if kind == "generic":
        if params:
            raise ParseError("generic groups take no parameters", lineno, 1, path)
        return PresentationMeta("generic")
    need = {"g", "r", "q", "n"}
    missing = need - params.keys()
    if missing:
        raise ParseError(f"header missing {sorted(missing)}", lineno, 1, path)
    unknown = params.keys() - need - {"layout"}
    if unknown:
        raise ParseError(f"unknown header parameters {sorted(unknown)}", lineno, 1, path)
    if not isinstance(params["q"], list) or ("layout" in params and not isinstance(params["layout"], list)):
        raise ParseError("q and layout must be bracketed lists", lineno, 1, path)
    try:
        spec = OrbifoldSpec(params["g"], params["r"], tuple(params["q"]), tuple(params["layout"]) if "layout" in params else None)
    except PresentationError as exc:
        raise ParseError(str(exc), lineno, 1, path) from None
    if not isinstance(params["n"], int) or params["n"] < 1:
        raise ParseError("n must be a positive integer", lineno, 1, path)
    return PresentationMeta(kind, spec, params["n"])


def _content_lines(text: str):
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, line


def _parse_symbol_line(line: str, lineno: int, path: str) -> GeneratorSymbol:
    col = len(line) - len(line.lstrip()) + 1
    try:
        w = parse_word(line)
    except WordSyntaxError as exc:
        raise ParseError(str(exc).rsplit(" at position", 1)[0], lineno, exc.position + 1, path) from None
    if len(w.letters) != 1 or w.letters[0][1] != 1:
        raise ParseError(f"expected a single generator, got {line.strip()!r}", lineno, col, path)
    return w.letters[0][0]


def _parse_word_line(line: str, lineno: int, path: str, alphabet) -> Word:
    try:
        return parse_word(line, alphabet)
    except WordSyntaxError as exc:
        raise ParseError(str(exc).rsplit(" at position", 1)[0], lineno, exc.position + 1, path) from None
    except ValueError as exc:
        raise ParseError(str(exc), lineno, len(line) - len(line.lstrip()) + 1, path) from None


def parse_group_text(text: str, path: str = "<text>"):
    """Parse presentation (or ``freeprod``) file text.

    Returns a Presentation, or a FreeProductGroup for ``group freeprod``.
    """
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty file", 1, 1, path)
    lineno, header = lines[0]
    kind, params = parse_header(header, lineno, path)
    if kind == "freeprod":
        from .freeprod import parse_freeprod_body

        return parse_freeprod_body(params, lines, path)
    if kind not in KINDS:
        raise ParseError(f"unknown group kind {kind!r}", lineno, 7, path)
    meta = meta_from_header(kind, params, lineno, path)
    section = None
    gens: list[GeneratorSymbol] = []
    rels: list[Word] = []
    seen_sections = set()
    last = lineno
    for lineno, line in lines[1:]:
        last = lineno
        stripped = line.strip()
        if stripped in ("generators:", "relators:"):
            name = stripped[:-1]
            if name in seen_sections or (name == "generators" and section is not None):
                raise ParseError(f"unexpected section {stripped!r}", lineno, 1, path)
            seen_sections.add(name)
            section = name
            continue
        if section == "generators":
            s = _parse_symbol_line(line, lineno, path)
            if s in gens:
                raise ParseError(f"duplicate generator {s}", lineno, 1, path)
            gens.append(s)
        elif section == "relators":
            w = _parse_word_line(line, lineno, path, gens)
            core = cyclic_reduce(w)[0]
            if core.is_identity():
                raise ParseError("relator reduces to the identity", lineno, 1, path)
            rels.append(core)
        else:
            raise ParseError("expected 'generators:'", lineno, 1, path)
    if "relators" not in seen_sections:
        raise ParseError("missing 'relators:' section (truncated file?)", last + 1, 1, path)
    try:
        p = Presentation(tuple(gens), tuple(rels), meta)
    except PresentationError as exc:
        raise ParseError(str(exc), 1, 1, path) from None
    _check_meta_generators(p, path)
    return p


def _check_meta_generators(p: Presentation, path: str) -> None:
    if p.spec is None:
        return
    expected = braid_generators(p.spec.g, p.spec.k, p.n, barred=p.kind == "orbifold")
    if list(p.generators) != expected:
        raise ParseError(
            f"generators do not match {p.kind} g={p.spec.g} k={p.spec.k} n={p.n} (expected {len(expected)} in canonical order)",
            2,
            1,
            path,
        )


def load_presentation(path: str | Path):
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise PresentationError(f"cannot read {p}: {exc.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("file is not UTF-8", 1, exc.start + 1, str(p)) from None
    return parse_group_text(text, str(p))
