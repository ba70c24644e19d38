"""``orbibraid`` command line.

Exit codes: 0 success, 1 usage / IO / schema error, 2 a mathematical check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import yaml

from .abelian import abelianization
from .config import Config, ConfigError, load_config, with_overrides
from .freeprod import FreeProductGroup, build_fiber_group, normal_form, parse_fiber_word, save_freeprod
from .presentation import OrbifoldSpec, PresentationError, build_orbifold_pbn, build_surface_pbn, load_presentation, save_presentation
from .schema import SchemaError, load_schema
from .verify import DEFAULT_GRID, VerifyError, dumps_report, sweep, validate_schema, verify_four_term, verify_remark_k
from .words import WordSyntaxError, format_word

EXIT_OK, EXIT_USAGE, EXIT_MATH = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text or text in ("-", "[]"):
        return []
    try:
        return [int(x) for x in text.strip("[]").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _q_list(text: str) -> list[list[int]]:
    """Grid cone data: ``2;3;2,2``."""
    return [_int_list(part) for part in text.split(";")]


def _add_instance(p, need_n: bool = True):
    p.add_argument("--g", type=int, required=True, help="genus (>= 1)")
    p.add_argument("--r", type=int, default=0, help="number of smooth punctures")
    p.add_argument("--q", type=_int_list, default=[], help="cone orders, comma separated (empty for none)")
    p.add_argument("--n", type=int, required=need_n, help="number of strands")


def _add_run(p):
    p.add_argument("--config", help="YAML or JSON config file")
    p.add_argument("--schema", help="relator schema file (default: $ORBIBRAID_SCHEMA or the shipped one)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report path (default: <output_dir>/<name>.json)")
    p.add_argument("--format", choices=["json", "text"])
    p.add_argument("--quotient-degree", type=int)
    p.add_argument("--quotient-nodes", type=int)
    p.add_argument("--rewrite-nodes", type=int)
    p.add_argument("--witness-budget", type=int)
    p.add_argument("--level", choices=["H1_VERIFIED", "QUOTIENT_VERIFIED", "DERIVATION_VERIFIED"])


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="orbibraid", description="Presentations and exactness checks for surface orbifold pure braid groups.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="write a presentation file")
    _add_instance(b)
    b.add_argument("--kind", choices=["surface", "orbifold", "fiber"], default="orbifold")
    b.add_argument("--schema")
    b.add_argument("--out", help="output path (default: ./<kind>_g.._r.._q.._n...grp)")

    v = sub.add_parser("verify", help="run the check battery on one instance")
    _add_instance(v)
    v.add_argument("--k", type=int, help="keep k strands (default n-1)")
    v.add_argument("--no-witness", action="store_true", help="skip the kernel witness search")
    v.add_argument("--timings", action="store_true", help="add wall-clock timings (breaks byte-identical reports)")
    _add_run(v)

    s = sub.add_parser("sweep", help="run verify over a grid")
    s.add_argument("--grid", help="YAML/JSON file with keys g, r, q, n")
    s.add_argument("--g", type=_int_list)
    s.add_argument("--r", type=_int_list)
    s.add_argument("--q", type=_q_list, help="cone data per row, ';' separated, e.g. '2;3;2,2'")
    s.add_argument("--n", type=_int_list)
    s.add_argument("--jobs", type=int)
    s.add_argument("--no-witness", action="store_true")
    _add_run(s)

    nf = sub.add_parser("nf", help="free-product normal form of a word")
    nf.add_argument("--group", required=True, help="freeprod group file")
    nf.add_argument("--word", required=True)
    nf.add_argument("--json", action="store_true")

    ab = sub.add_parser("abelianize", help="abelian invariants of a group file")
    ab.add_argument("file")
    ab.add_argument("--json", action="store_true")

    qu = sub.add_parser("quotients", help="homomorphisms to small symmetric groups")
    qu.add_argument("file")
    qu.add_argument("--max-degree", type=int, default=4)
    qu.add_argument("--budget", type=int, default=100000)
    qu.add_argument("--seed", type=int, default=0)
    qu.add_argument("--json", action="store_true")

    tc = sub.add_parser("tc", help="Todd-Coxeter coset enumeration")
    tc.add_argument("file")
    tc.add_argument("--max-cosets", type=int, default=10**6)
    tc.add_argument("--subgroup", action="append", default=[], help="subgroup generator word (repeatable)")
    tc.add_argument("--json", action="store_true")

    wv = sub.add_parser("witness-verify", help="check kernel witnesses from a JSON file")
    wv.add_argument("file", help="verify report, or {instance, witness|witnesses}")
    wv.add_argument("--schema")
    wv.add_argument("--json", action="store_true")
    return ap


def _spec(args) -> OrbifoldSpec:
    return OrbifoldSpec(args.g, args.r, tuple(args.q))


def _qtag(q) -> str:
    return "-".join(map(str, q)) or "none"


def _config(args) -> Config:
    cfg = load_config(args.config) if getattr(args, "config", None) else Config()
    return with_overrides(
        cfg,
        schema=getattr(args, "schema", None),
        seed=getattr(args, "seed", None),
        format=getattr(args, "format", None),
        jobs=getattr(args, "jobs", None),
        quotient_degree=getattr(args, "quotient_degree", None),
        quotient_nodes=getattr(args, "quotient_nodes", None),
        rewrite_nodes=getattr(args, "rewrite_nodes", None),
        witness_budget=getattr(args, "witness_budget", None),
        level=getattr(args, "level", None),
    )


def _checked_schema(path):
    sch = load_schema(path)
    val = validate_schema(sch, quick=True)
    if not val.passed:
        raise SchemaError(val.message())
    return sch


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def cmd_build(args) -> int:
    spec = _spec(args)
    sch = _checked_schema(args.schema)
    default = Path(f"{args.kind}_g{spec.g}_r{spec.r}_q{_qtag(spec.q)}_n{args.n}.grp")
    out = Path(args.out) if args.out else default
    if args.kind == "fiber":
        G = build_fiber_group(spec, args.n, sch)
        save_freeprod(G, out)
        print(f"wrote {out}: fiber {G} ({len(G.generators)} generators, eliminated {G.meta.eliminated})")
        return EXIT_OK
    p = build_surface_pbn(spec.g, spec.k, args.n, sch) if args.kind == "surface" else build_orbifold_pbn(spec, args.n, sch)
    save_presentation(p, out)
    print(f"wrote {out}: {len(p.generators)} generators, {len(p.relators)} relators")
    return EXIT_OK


def _report_text(rep: dict) -> str:
    inst = rep["instance"]
    q = ",".join(map(str, inst["q"])) or "-"
    extra = f" k={inst['k']}" if "k" in inst else ""
    lines = [f"instance g={inst['g']} r={inst['r']} q=[{q}] n={inst['n']}{extra} ({inst['mode']}) seed={rep['seed']}"]
    for c in rep["checks"]:
        tag = "hard" if c["hard"] else "info"
        lines.append(f"  {c['name']:<24} {c['verdict']:<8} {tag}  {c['evidence_level']}")
    for name, inv in rep["h1"].items():
        lines.append(f"  H1 {name:<15} {inv}")
    lines.append(f"  witnesses: {len(rep['witnesses'])}")
    lines.append(f"verdict: {rep['verdict']}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    cfg = _config(args)
    spec = _spec(args)
    if args.n < 2:
        raise UsageError(f"--n must be >= 2 for the sequence, got {args.n}")
    sch = _checked_schema(cfg.schema)
    wit = not args.no_witness
    if args.k is None:
        rep = verify_four_term(spec, args.n, cfg.budgets, cfg.seed, sch, wit, args.timings)
    else:
        rep = verify_remark_k(spec, args.n, args.k, cfg.budgets, cfg.seed, sch, wit, args.timings)
    data = rep.to_json()
    ktag = f"_k{args.k}" if args.k is not None else ""
    ext = "json" if cfg.format == "json" else "txt"
    out = Path(args.out) if args.out else Path(cfg.output_dir) / f"report_g{spec.g}_r{spec.r}_q{_qtag(spec.q)}_n{args.n}{ktag}.{ext}"
    _write(out, dumps_report(data) if cfg.format == "json" else _report_text(data))
    print(_report_text(data), end="")
    print(f"report: {out}")
    return EXIT_OK if rep.passed else EXIT_MATH


def _load_grid(args) -> dict:
    grid = dict(DEFAULT_GRID)
    if args.grid:
        text = Path(args.grid).read_text(encoding="utf-8")
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict) or set(data) - {"g", "r", "q", "n"}:
            raise UsageError("grid file must be a mapping with keys g, r, q, n")
        grid.update(data)
    for key in ("g", "r", "q", "n"):
        val = getattr(args, key)
        if val is not None:
            grid[key] = val
    return grid


def cmd_sweep(args) -> int:
    cfg = _config(args)
    grid = _load_grid(args)
    if any(int(n) < 2 for n in grid.get("n", [])):
        raise UsageError("grid n values must be >= 2")
    _checked_schema(cfg.schema)
    res = sweep(grid, cfg.budgets, cfg.seed, cfg.schema, cfg.jobs, not args.no_witness)
    ext = "json" if cfg.format == "json" else "txt"
    out = Path(args.out) if args.out else Path(cfg.output_dir) / f"sweep.{ext}"
    _write(out, dumps_report(res.to_json()) if cfg.format == "json" else res.table() + "\n")
    print(res.table())
    print(f"sweep: {len(res.reports)} instances, verdict {'pass' if res.passed else 'fail'}")
    print(f"report: {out}")
    return EXIT_OK if res.passed else EXIT_MATH


def cmd_nf(args) -> int:
    G = load_presentation(args.group)
    if not isinstance(G, FreeProductGroup):
        raise UsageError(f"{args.group} is not a freeprod group file")
    w = parse_fiber_word(G, args.word)
    nf = normal_form(G, w)
    text = format_word(nf.to_word(), "identity")
    if args.json:
        print(json.dumps({"normal_form": format_word(nf.to_word(), "1"), "identity": nf.is_identity(), "syllables": len(nf.syllables)}, sort_keys=True))
    else:
        print(text)
    return EXIT_OK


def cmd_abelianize(args) -> int:
    inv = abelianization(load_presentation(args.file))
    print(json.dumps(inv.to_json(), sort_keys=True) if args.json else str(inv))
    return EXIT_OK


def _as_presentation(G):
    return G.as_presentation() if isinstance(G, FreeProductGroup) else G


def cmd_quotients(args) -> int:
    from .search.quotients import find_finite_quotients

    p = _as_presentation(load_presentation(args.file))
    res = find_finite_quotients(p, max_degree=args.max_degree, budget=args.budget, seed=args.seed)
    if args.json:
        print(json.dumps({**res.to_json(), "reps": [r.to_json() for r in res.reps]}, sort_keys=True, indent=2))
        return EXIT_OK
    for r in res.reps:
        imgs = " ".join(f"{s}->{''.join(map(str, (x + 1 for x in p_)))}" for s, p_ in r.images)
        print(f"degree {r.degree}{' transitive' if r.is_transitive() else ''}: {imgs}")
    print(f"{len(res.reps)} quotient maps, {res.nodes} nodes, {'exhaustive' if res.exhausted else 'budget-limited'}")
    return EXIT_OK


def cmd_tc(args) -> int:
    from .search.todd_coxeter import CosetTable, todd_coxeter

    p = _as_presentation(load_presentation(args.file))
    subs = [p.word(w) for w in args.subgroup]
    res = todd_coxeter(p, subs, args.max_cosets)
    if isinstance(res, CosetTable):
        if args.json:
            print(json.dumps({"index": res.index, "table": [list(r) for r in res.table]}, sort_keys=True))
        else:
            print(f"index {res.index}")
        return EXIT_OK
    if args.json:
        print(json.dumps({"exhausted": True, "max_cosets": res.max_cosets, "defined": res.defined, "live": res.live}, sort_keys=True))
    else:
        print(f"exhausted: {res.live} live cosets at limit {res.max_cosets} ({res.defined} defined)")
    return EXIT_OK


def cmd_witness_verify(args) -> int:
    from .homs import build_fiber_inclusion
    from .search.witness import KernelWitness, verify_witness

    try:
        data = json.loads(Path(args.file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.file}: invalid JSON: {exc}") from None
    inst = data.get("instance") if isinstance(data, dict) else None
    if not isinstance(inst, dict):
        raise UsageError("witness file needs an 'instance' object")
    raw = data.get("witnesses", [data["witness"]] if "witness" in data else None)
    if not isinstance(raw, list):
        raise UsageError("witness file needs 'witness' or 'witnesses'")
    spec = OrbifoldSpec(int(inst["g"]), int(inst["r"]), tuple(int(x) for x in inst["q"]))
    sch = _checked_schema(args.schema)
    fiber = build_fiber_group(spec, int(inst["n"]), sch)
    target = build_orbifold_pbn(spec, int(inst["n"]), sch)
    iota = build_fiber_inclusion(fiber, target)
    results = []
    for i, d in enumerate(raw):
        try:
            verdict = verify_witness(fiber, iota, target, KernelWitness.from_json(d))
            results.append((verdict.accepted, verdict.reason))
        except (KeyError, TypeError, ValueError) as exc:
            results.append((False, f"malformed witness: {exc}"))
    if args.json:
        print(json.dumps([{"index": i, "accepted": a, "reason": r} for i, (a, r) in enumerate(results)], sort_keys=True, indent=2))
    else:
        for i, (a, r) in enumerate(results):
            print(f"witness {i}: {'accepted' if a else 'rejected'} ({r})")
    return EXIT_OK if results and all(a for a, _ in results) else EXIT_MATH


COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "nf": cmd_nf,
    "abelianize": cmd_abelianize,
    "quotients": cmd_quotients,
    "tc": cmd_tc,
    "witness-verify": cmd_witness_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already printed
        return int(exc.code or 0)
    try:
        return COMMANDS[args.cmd](args)
    except (UsageError, ConfigError, SchemaError, PresentationError, VerifyError, WordSyntaxError, OSError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"orbibraid {args.cmd}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"orbibraid {args.cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
