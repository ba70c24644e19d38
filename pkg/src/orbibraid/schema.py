"""Relator schema: a versioned data file of parameterized relator families.

The shipped file lives in ``orbibraid/data``; ``ORBIBRAID_SCHEMA`` or an
explicit path can point elsewhere.  Each family is a template over the
index variables ``g, k, n`` plus its own range variables, written in a small
word language::

    {prod s=1..g: A[l,s] B[l,s] A[l,s]^-1 B[l,s]^-1} P[l,k]
    KA X KA^-1            # macros, X bound to each entry of ``over``
    (Z D)^-1

A family either gives an explicit ``relator`` or the triple
``conj``/``over``/``image`` which stands for ``conj^-1 X conj image^-1``.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterator

import yaml

from .words import GeneratorSymbol, Word, cyclic_reduce

SCHEMA_ENV = "ORBIBRAID_SCHEMA"
SCHEMA_TAG = "orbibraid-pure-braid-relators"


class SchemaError(ValueError):
    """A schema file that cannot be parsed or instantiated."""


# ---------------------------------------------------------------- templates

_TOK = re.compile(
    r"""\s*(?:
        (?P<prod>\{prod\s+(?P<pv>[a-z])\s*=\s*(?P<lo>[^.]+?)\s*\.\.\s*(?P<hi>[^:]+?)\s*:)
      | (?P<close>\})
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<letter>(?P<fam>[ABCP])\[(?P<i>[^,\]]+),(?P<j>[^\]]+)\])
      | (?P<name>[A-Z][A-Z0-9]*)
      | (?P<exp>\^(?P<e>[+-]?\d+))
    )""",
    re.X,
)
_EXPR = re.compile(r"\s*([+-]?)\s*([a-z]|\d+)")


def _parse_expr(text: str) -> list[tuple[int, str | int]]:
    terms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _EXPR.match(text, pos)
        if m is None or (terms and not m.group(1)):
            raise SchemaError(f"bad index expression {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        atom = m.group(2)
        terms.append((sign, int(atom) if atom.isdigit() else atom))
        pos = m.end()
    if not terms:
        raise SchemaError("empty index expression")
    return terms


def _eval_expr(terms, env: dict[str, int]) -> int:
    total = 0
    for sign, atom in terms:
        if isinstance(atom, str):
            if atom not in env:
                raise SchemaError(f"unbound index variable {atom!r}")
            total += sign * env[atom]
        else:
            total += sign * atom
    return total


# AST nodes are tuples:
#   ("letter", fam, expr_i, expr_j, exp)
#   ("name", name, exp)
#   ("group", [nodes], exp)
#   ("prod", var, expr_lo, expr_hi, [nodes])


def parse_template(text: str) -> list[tuple]:
    """Parse template text into a node list (see module docstring)."""
    stack: list[tuple[str, Any, list]] = [("top", None, [])]
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if m is None or m.end() == pos:
            raise SchemaError(f"cannot parse template at {pos}: {text!r}")
        pos = m.end()
        body = stack[-1][2]
        if m.group("prod"):
            info = (m.group("pv"), _parse_expr(m.group("lo")), _parse_expr(m.group("hi")))
            stack.append(("prod", info, []))
        elif m.group("close"):
            kind, info, nodes = stack.pop()
            if kind != "prod":
                raise SchemaError(f"unbalanced '}}' in {text!r}")
            stack[-1][2].append(("prod", *info, nodes))
        elif m.group("lpar"):
            stack.append(("group", None, []))
        elif m.group("rpar"):
            kind, _, nodes = stack.pop()
            if kind != "group":
                raise SchemaError(f"unbalanced ')' in {text!r}")
            stack[-1][2].append(("group", nodes, 1))
        elif m.group("letter"):
            body.append(("letter", m.group("fam"), _parse_expr(m.group("i")), _parse_expr(m.group("j")), 1))
        elif m.group("name"):
            body.append(("name", m.group("name"), 1))
        else:
            if not body or body[-1][0] == "prod":
                raise SchemaError(f"exponent without base in {text!r}")
            node = body.pop()
            body.append(node[:-1] + (node[-1] * int(m.group("e")),))
    if len(stack) != 1:
        raise SchemaError(f"unterminated block in {text!r}")
    return stack[0][2]


def _eval_nodes(nodes, env: dict[str, int], names: dict[str, Any]) -> Word:
    letters: list = []
    for node in nodes:
        kind = node[0]
        if kind == "letter":
            _, fam, ei, ej, e = node
            i, j = _eval_expr(ei, env), _eval_expr(ej, env)
            try:
                s = GeneratorSymbol(fam, i, j)
            except ValueError as exc:
                raise SchemaError(str(exc)) from None
            letters.append((s, e))
        elif kind == "name":
            _, name, e = node
            if name not in names:
                raise SchemaError(f"unknown macro {name!r}")
            val = names[name]
            w = val if isinstance(val, Word) else _eval_nodes(val, env, names)
            letters.extend((w**e).letters)
        elif kind == "group":
            _, sub, e = node
            letters.extend((_eval_nodes(sub, env, names) ** e).letters)
        else:
            _, var, elo, ehi, sub = node
            for v in range(_eval_expr(elo, env), _eval_expr(ehi, env) + 1):
                letters.extend(_eval_nodes(sub, {**env, var: v}, names).letters)
    return Word(letters)


def _iter_ranges(ranges, env: dict[str, int]) -> Iterator[dict[str, int]]:
    if not ranges:
        yield env
        return
    (var, lo, hi), rest = ranges[0], ranges[1:]
    for v in range(_eval_expr(lo, env), _eval_expr(hi, env) + 1):
        yield from _iter_ranges(rest, {**env, var: v})


# ---------------------------------------------------------------- schema


@dataclass(frozen=True)
class RelatorFamily:
    id: str
    ranges: tuple
    relator: tuple | None = None
    conj: tuple | None = None
    over: tuple = ()
    image: tuple | None = None


@dataclass(frozen=True)
class RelatorSchema:
    """Parsed schema; :meth:`instantiate` produces relators for (g, k, n)."""

    version: str
    families: tuple[RelatorFamily, ...]
    macros: dict = field(default_factory=dict, hash=False)
    source: str = "<memory>"

    def instantiate_labeled(self, g: int, k: int, n: int) -> list[tuple[str, Word]]:
        """Relators as ``(label, word)``, cyclically reduced, in schema order.

        Labels look like ``A.self(l=2,i=1,j=1)``; relators that reduce to the
        identity are dropped, duplicates keep their first occurrence.
        """
        out: list[tuple[str, Word]] = []
        seen: set[Word] = set()
        base = {"g": g, "k": k, "n": n}
        for fam in self.families:
            for env in _iter_ranges(fam.ranges, base):
                tag = ",".join(f"{v}={env[v]}" for v, *_ in fam.ranges)
                for x_idx, words in enumerate(self._family_words(fam, env)):
                    core, _ = cyclic_reduce(words)
                    if core.is_identity() or core in seen:
                        continue
                    seen.add(core)
                    label = f"{fam.id}({tag})" if len(fam.over) <= 1 else f"{fam.id}[{x_idx}]({tag})"
                    out.append((label, core))
        return out

    def instantiate(self, g: int, k: int, n: int) -> list[Word]:
        return [w for _, w in self.instantiate_labeled(g, k, n)]

    def _family_words(self, fam: RelatorFamily, env) -> Iterator[Word]:
        names = dict(self.macros)
        if fam.relator is not None:
            yield _eval_nodes(fam.relator, env, names)
            return
        beta = _eval_nodes(fam.conj, env, names)
        for x_nodes in fam.over:
            x = _eval_nodes(x_nodes, env, names)
            img = _eval_nodes(fam.image, env, {**names, "X": x})
            yield beta.inverse() * x * beta * img.inverse()


def _parse_range(item) -> tuple:
    if not (isinstance(item, list) and len(item) == 3):
        raise SchemaError(f"range entry must be [var, lo, hi], got {item!r}")
    var, lo, hi = item
    if not (isinstance(var, str) and re.fullmatch(r"[a-z]", var)):
        raise SchemaError(f"bad range variable {var!r}")
    return (var, _parse_expr(str(lo)), _parse_expr(str(hi)))


def parse_schema(data: Any, source: str = "<memory>") -> RelatorSchema:
    """Build a RelatorSchema from already-decoded YAML/JSON data."""
    if not isinstance(data, dict) or data.get("schema") != SCHEMA_TAG:
        raise SchemaError(f"{source}: not a relator schema (missing 'schema: {SCHEMA_TAG}')")
    version = str(data.get("version", ""))
    if not version:
        raise SchemaError(f"{source}: missing version")
    macros = {}
    for name, text in (data.get("macros") or {}).items():
        if not re.fullmatch(r"[A-Z][A-Z0-9]*", str(name)) or name == "X":
            raise SchemaError(f"{source}: bad macro name {name!r}")
        macros[name] = parse_template(str(text))
    fams = []
    ids = set()
    for raw in data.get("families") or []:
        if not isinstance(raw, dict) or "id" not in raw:
            raise SchemaError(f"{source}: family entries need an 'id'")
        fid = str(raw["id"])
        if fid in ids:
            raise SchemaError(f"{source}: duplicate family id {fid!r}")
        ids.add(fid)
        try:
            ranges = tuple(_parse_range(r) for r in raw.get("range") or [])
            if "relator" in raw:
                fam = RelatorFamily(fid, ranges, relator=tuple(parse_template(str(raw["relator"]))))
            elif {"conj", "over", "image"} <= raw.keys():
                fam = RelatorFamily(
                    fid,
                    ranges,
                    conj=tuple(parse_template(str(raw["conj"]))),
                    over=tuple(tuple(parse_template(str(x))) for x in raw["over"]),
                    image=tuple(parse_template(str(raw["image"]))),
                )
            else:
                raise SchemaError("needs 'relator' or 'conj'/'over'/'image'")
        except SchemaError as exc:
            raise SchemaError(f"{source}: family {fid}: {exc}") from None
        fams.append(fam)
    if not fams:
        raise SchemaError(f"{source}: no relator families")
    return RelatorSchema(version, tuple(fams), macros, source)


def default_schema_path() -> Path:
    env = os.environ.get(SCHEMA_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("orbibraid") / "data" / "pure_braid_relators.yaml"))


def load_schema(path: str | os.PathLike | None = None) -> RelatorSchema:
    """Load a schema file; ``None`` means the environment override or the shipped file."""
    p = Path(path) if path is not None else default_schema_path()
    return _load_cached(str(p.resolve()) if p.exists() else str(p))


@lru_cache(maxsize=8)
def _load_cached(path: str) -> RelatorSchema:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read schema {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: invalid YAML: {exc}") from None
    return parse_schema(data, path)
