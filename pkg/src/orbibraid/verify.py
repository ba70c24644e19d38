"""Run the check battery for one instance of the four-term sequence.

For an orbifold spec and n >= 2 the instance consists of

* the fiber free product and its inclusion ``iota_n`` into PB_n(orbifold),
* the strand-forgetting maps ``f_n`` (surface) and ``fo_n`` (orbifold),
* the bar maps ``g_n``, ``g_{n-1}`` from surface to orbifold builds.

Hard checks (1)-(5) decide the verdict; the kernel witness search (6) is
informational.  Reports are plain dicts written with sorted keys, so equal
inputs give byte-identical JSON.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .abelian import abelianization, h1_right_exactness_check
from .freeprod import FreeProductGroup, build_fiber_group
from .homs import (
    EvidenceLevel,
    GroupHom,
    build_bar_hom,
    build_fiber_inclusion,
    build_projection_hom,
    build_multistrand_fiber_inclusion,
    check_relators_die,
    check_square_commutes,
    check_surjective_on_generators,
)
from .presentation import OrbifoldSpec, Presentation, PresentationError, build_orbifold_pbn, build_surface_pbn
from .schema import RelatorSchema, SchemaError, load_schema
from .words import Word, format_word

REPORT_SCHEMA = "orbibraid-sequence-report"
REPORT_VERSION = "1.0"


class VerifyError(ValueError):
    """Bad instance parameters (the caller's fault, not a failed check)."""


@dataclass(frozen=True)
class Budgets:
    quotient_degree: int = 4
    quotient_nodes: int = 20000
    quotient_max_reps: int = 256
    rewrite_nodes: int = 2000
    coset_limit: int = 10**6
    witness_budget: int = 50
    witness_rewrite: int = 500
    level: str = "DERIVATION_VERIFIED"

    def __post_init__(self):
        for name in ("quotient_degree", "quotient_nodes", "quotient_max_reps", "rewrite_nodes", "coset_limit"):
            if int(getattr(self, name)) <= 0:
                raise VerifyError(f"budget {name} must be positive")
        if self.witness_budget < 0 or self.witness_rewrite <= 0:
            raise VerifyError("witness budgets must be non-negative (candidates) and positive (rewriting)")
        if self.level not in EvidenceLevel.__members__:
            raise VerifyError(f"unknown evidence level {self.level!r}")

    @property
    def evidence_level(self) -> EvidenceLevel:
        return EvidenceLevel[self.level]

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SequenceInstance:
    """All groups and maps of one instance; homs may be swapped for controls."""

    spec: OrbifoldSpec
    n: int
    k: int
    fiber: object  # FreeProductGroup, or a Presentation when k < n-1
    mid: Presentation  # PB_n orbifold
    base: Presentation  # PB_k orbifold
    mid_surface: Presentation
    base_surface: Presentation
    iota: GroupHom
    f: GroupHom
    fo: GroupHom
    g_mid: GroupHom
    g_base: GroupHom
    schema_version: str = ""

    @property
    def mode(self) -> str:
        return "orbifold" if self.spec.s else "classical"

    @property
    def forgets_several(self) -> bool:
        return self.k != self.n - 1

    def instance_json(self) -> dict:
        d = {"g": self.spec.g, "r": self.spec.r, "q": list(self.spec.q), "n": self.n, "mode": self.mode}
        if self.forgets_several:
            d["k"] = self.k
        return d


def _schema(schema) -> RelatorSchema:
    return schema if isinstance(schema, RelatorSchema) else load_schema(schema)


def build_instance(spec: OrbifoldSpec, n: int, schema=None, k: int | None = None) -> SequenceInstance:
    """Build every object of the instance; ``k`` is the number of strands kept (default n-1)."""
    if n < 2:
        raise VerifyError(f"the sequence needs n >= 2, got n={n}")
    k = n - 1 if k is None else k
    if not 1 <= k < n:
        raise VerifyError(f"need 1 <= k < n, got k={k}, n={n}")
    sch = _schema(schema)
    mid = build_orbifold_pbn(spec, n, sch)
    base = build_orbifold_pbn(spec, k, sch)
    mid_s = build_surface_pbn(spec.g, spec.k, n, sch)
    base_s = build_surface_pbn(spec.g, spec.k, k, sch)
    if k == n - 1:
        fiber = build_fiber_group(spec, n, sch)
        iota = build_fiber_inclusion(fiber, mid)
    else:
        fiber = build_orbifold_pbn(spec.with_extra_smooth(k), n - k, sch)
        iota = build_multistrand_fiber_inclusion(fiber, mid, k)
    return SequenceInstance(
        spec,
        n,
        k,
        fiber,
        mid,
        base,
        mid_s,
        base_s,
        iota,
        build_projection_hom(mid_s, k, base_s),
        build_projection_hom(mid, k, base),
        build_bar_hom(mid_s, mid),
        build_bar_hom(base_s, base),
        sch.version,
    )


@dataclass(frozen=True)
class Check:
    name: str
    verdict: str  # pass | fail | skipped | info
    hard: bool
    evidence_level: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "hard": self.hard, "evidence_level": self.evidence_level, "details": self.details}


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


@dataclass
class SequenceReport:
    instance: dict
    checks: list[Check]
    h1: dict
    quotients: dict
    witnesses: list
    counters: dict
    seed: int
    schema_version: str
    budgets: dict
    wall_clock: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.verdict == "pass" for c in self.checks if c.hard)

    def hard_verdicts(self) -> dict[str, str]:
        return {c.name: c.verdict for c in self.checks if c.hard}

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_json(self) -> dict:
        timings = {"counters": self.counters}
        if self.wall_clock is not None:
            timings["wall_clock_s"] = self.wall_clock
        return {
            "report_schema": REPORT_SCHEMA,
            "report_version": REPORT_VERSION,
            "relator_schema_version": self.schema_version,
            "instance": self.instance,
            "verdict": _verdict(self.passed),
            "checks": [c.to_json() for c in self.checks],
            "h1": self.h1,
            "quotients": self.quotients,
            "witnesses": self.witnesses,
            "timings": timings,
            "seed": self.seed,
            "budgets": self.budgets,
        }


def dumps_report(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _words(pairs) -> dict:
    return {str(s): format_word(w, "1") for s, w in pairs}


def run_battery(inst: SequenceInstance, budgets: Budgets = Budgets(), seed: int = 0, witnesses: bool = True, timings: bool = False) -> SequenceReport:
    """Checks (1)-(6) on an already built instance."""
    clock: dict[str, float] = {}
    counters: dict[str, int] = {}
    checks: list[Check] = []

    def lap(name, t0):
        clock[name] = round(time.perf_counter() - t0, 3)

    t0 = time.perf_counter()
    # (1) surjectivity witnesses
    surj = {h.label: check_surjective_on_generators(h) for h in (inst.fo, inst.g_mid, inst.g_base)}
    checks.append(
        Check(
            "surjectivity",
            _verdict(all(w.passed for w in surj.values())),
            True,
            "SYNTACTIC",
            {lab: {"passed": w.passed, "unhit": [str(s) for s in w.unhit]} for lab, w in surj.items()},
        )
    )
    # (2) g_base o f == fo o g_mid
    sq = check_square_commutes(inst.f, inst.fo, inst.g_mid, inst.g_base)
    checks.append(Check("commuting_square", _verdict(sq.passed), True, "SYNTACTIC", sq.to_json()))
    # (3) fo o iota is trivial, and the generators killed by fo are exactly those on strands > k
    nontriv = [(s, inst.fo.apply(w)) for s, w in inst.iota.images.items()]
    nontriv = [(s, w) for s, w in nontriv if not w.is_identity()]
    killed = {s for s, w in inst.fo.images.items() if w.is_identity()}
    expected = {s for s in inst.mid.generators if max(s.strands) > inst.k}
    checks.append(
        Check(
            "complex_property",
            _verdict(not nontriv),
            True,
            "SYNTACTIC",
            {"checked": len(inst.iota.images), "nontrivial_images": _words(nontriv)},
        )
    )
    checks.append(
        Check(
            "kernel_generator_list",
            _verdict(killed == expected),
            True,
            "SYNTACTIC",
            {
                "killed": len(killed),
                "missing": sorted(str(s) for s in expected - killed),
                "unexpected": sorted(str(s) for s in killed - expected),
            },
        )
    )
    lap("syntactic", t0)

    # (4) relator death
    t0 = time.perf_counter()
    from .search.quotients import find_finite_quotients

    level = budgets.evidence_level
    quotients: dict = {}
    reps_cache: dict[str, tuple] = {}

    def reps_for(p: Presentation, name: str):
        if level < EvidenceLevel.QUOTIENT_VERIFIED:
            return None
        if name not in reps_cache:
            res = find_finite_quotients(p, max_degree=budgets.quotient_degree, budget=budgets.quotient_nodes, seed=seed, max_reps=budgets.quotient_max_reps)
            reps_cache[name] = res.reps
            quotients[name] = res.to_json()
            counters[f"quotient_nodes[{name}]"] = res.nodes
        return reps_cache[name]

    death = {}
    for h, tname in ((inst.f, "base_surface"), (inst.fo, "base"), (inst.g_mid, "mid")):
        tp = getattr(inst, tname)
        _, rep = check_relators_die(
            h,
            level=level,
            quotient_budget=budgets.quotient_nodes,
            quotient_degree=budgets.quotient_degree,
            rewrite_budget=budgets.rewrite_nodes,
            seed=seed,
            reps=reps_for(tp, tname),
        )
        death[h.label] = rep
        counters[f"relators[{h.label}]"] = len(rep.entries)
        counters[f"derivation_steps[{h.label}]"] = sum(len(e.derivation.steps) for e in rep.entries if e.derivation is not None)
    ok = all(r.h1_passed and not r.failures() for r in death.values())
    reached = min(r.level for r in death.values())
    checks.append(Check("relator_death", _verdict(ok), True, reached.name, {lab: r.to_json() for lab, r in death.items()}))
    lap("relator_death", t0)

    # (5) H1 right exactness
    t0 = time.perf_counter()
    ex = h1_right_exactness_check(inst.iota, inst.fo)
    checks.append(Check("h1_right_exactness", _verdict(ex.passed), True, "H1_VERIFIED", ex.to_json()))
    if inst.mode == "classical":
        same = [w.map_symbols(lambda s: Word.from_symbol(s.unbar())) for w in inst.mid.relators] == list(inst.mid_surface.relators)
        checks.append(Check("classical_cross_check", _verdict(same), True, "SYNTACTIC", {"relators_match_after_unbar": same}))
    h1 = {
        "fiber": str(abelianization(inst.fiber)),
        "orbifold_mid": str(abelianization(inst.mid)),
        "orbifold_base": str(abelianization(inst.base)),
        "surface_mid": str(abelianization(inst.mid_surface)),
        "surface_base": str(abelianization(inst.base_surface)),
    }
    lap("h1", t0)

    # (6) kernel witnesses, informational
    t0 = time.perf_counter()
    wit_json: list = []
    if inst.mode == "classical":
        checks.append(Check("kernel_witness", "skipped", False, "NONE", {"reason": "no cone point"}))
    elif not isinstance(inst.fiber, FreeProductGroup):
        checks.append(Check("kernel_witness", "skipped", False, "NONE", {"reason": "witness search runs on the free-product fiber (k = n-1)"}))
    elif not witnesses or budgets.witness_budget == 0:
        checks.append(Check("kernel_witness", "skipped", False, "NONE", {"reason": "disabled"}))
    else:
        from .search.witness import kernel_witness_search

        res = kernel_witness_search(inst.fiber, inst.mid, inst.iota, budget=budgets.witness_budget, rewrite_budget=budgets.witness_rewrite, seed=seed)
        wit_json = [w.to_json() for w in res.witnesses]
        counters["witness_candidates"] = res.candidates_tried
        checks.append(
            Check(
                "kernel_witness",
                "info",
                False,
                "DERIVATION_VERIFIED" if res.witnesses else "NONE",
                {"found": len(res.witnesses), "candidates_tried": res.candidates_tried, "exhausted": res.exhausted, "stats": res.stats},
            )
        )
    lap("kernel_witness", t0)

    return SequenceReport(
        inst.instance_json(),
        checks,
        h1,
        quotients,
        wit_json,
        dict(sorted(counters.items())),
        seed,
        inst.schema_version,
        budgets.to_json(),
        clock if timings else None,
    )


def verify_four_term(spec: OrbifoldSpec, n: int, budgets: Budgets = Budgets(), seed: int = 0, schema=None, witnesses: bool = True, timings: bool = False) -> SequenceReport:
    return run_battery(build_instance(spec, n, schema), budgets, seed, witnesses, timings)


def verify_remark_k(spec: OrbifoldSpec, n: int, k: int, budgets: Budgets = Budgets(), seed: int = 0, schema=None, witnesses: bool = True, timings: bool = False) -> SequenceReport:
    """Forget the last n-k strands; the fiber is PB_{n-k} of M minus k smooth points."""
    if n < 2 or not 1 <= k < n:
        raise VerifyError(f"need 1 <= k < n, got k={k}, n={n}")
    return run_battery(build_instance(spec, n, schema, k), budgets, seed, witnesses, timings)


# ---------------------------------------------------------------- sweeps

DEFAULT_GRID = {"g": [1, 2], "r": [0, 1], "q": [[2], [3], [2, 2]], "n": [2, 3]}


def grid_instances(grid: dict) -> list[tuple[OrbifoldSpec, int]]:
    """Cartesian product of a grid, in (g, r, q, n) order; empty axes give no rows."""
    out = []
    for g in grid.get("g", []):
        for r in grid.get("r", []):
            for q in grid.get("q", []):
                for n in grid.get("n", []):
                    out.append((OrbifoldSpec(int(g), int(r), tuple(int(x) for x in q)), int(n)))
    return out


def _sweep_one(args) -> dict:
    spec, n, budgets, seed, schema_path, witnesses = args
    return verify_four_term(spec, n, budgets, seed, schema_path, witnesses).to_json()


@dataclass
class SweepResult:
    reports: list[dict]

    @property
    def passed(self) -> bool:
        return all(r["verdict"] == "pass" for r in self.reports)

    def summary(self) -> list[dict]:
        rows = []
        for r in self.reports:
            inst = r["instance"]
            rows.append(
                {
                    "instance": inst,
                    "verdict": r["verdict"],
                    "failed": [c["name"] for c in r["checks"] if c["hard"] and c["verdict"] != "pass"],
                    "relator_death_level": next(c["evidence_level"] for c in r["checks"] if c["name"] == "relator_death"),
                    "witnesses": len(r["witnesses"]),
                }
            )
        return rows

    def to_json(self) -> dict:
        return {
            "report_schema": REPORT_SCHEMA + "-sweep",
            "report_version": REPORT_VERSION,
            "verdict": _verdict(self.passed),
            "summary": self.summary(),
            "reports": self.reports,
        }

    def table(self) -> str:
        lines = [f"{'g':>2} {'r':>2} {'q':<8} {'n':>2}  {'mode':<9} {'verdict':<7} {'evidence':<20} wit"]
        for row in self.summary():
            i = row["instance"]
            q = ",".join(map(str, i["q"])) or "-"
            lines.append(f"{i['g']:>2} {i['r']:>2} {q:<8} {i['n']:>2}  {i['mode']:<9} {row['verdict']:<7} {row['relator_death_level']:<20} {row['witnesses']}")
        return "\n".join(lines)


def sweep(grid: dict | None = None, budgets: Budgets = Budgets(), seed: int = 0, schema_path: str | None = None, jobs: int = 1, witnesses: bool = True) -> SweepResult:
    """verify_four_term over a grid; results come back in grid order whatever ``jobs`` is."""
    rows = grid_instances(DEFAULT_GRID if grid is None else grid)
    work = [(spec, n, budgets, seed, schema_path, witnesses) for spec, n in rows]
    if jobs <= 1 or len(work) <= 1:
        reports = [_sweep_one(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_sweep_one, work))
    reports.sort(key=lambda r: (r["instance"]["g"], r["instance"]["r"], len(r["instance"]["q"]), r["instance"]["q"], r["instance"]["n"]))
    return SweepResult(reports)


# ---------------------------------------------------------------- schema validation


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    checks: tuple[tuple[str, bool, str], ...]

    def message(self) -> str:
        bad = [f"{name}: {why}" for name, ok, why in self.checks if not ok]
        return "schema validation passed" if not bad else "schema validation failed: " + "; ".join(bad)


def validate_schema(schema=None, quick: bool = False) -> ValidationReport:
    """Sanity-check a relator schema, stopping at the first failing check.

    (a) one-strand surface builds abelianize to Z^(2g+k-1);
    (b) instantiation uses only the canonical generator names;
    (c) every relator acts trivially in the point-push representation;
    (d) the fiber relation and free-product fiber build for n = 2.
    """
    from .pushrep import PushRepresentation

    try:
        sch = _schema(schema)
    except SchemaError as exc:
        return ValidationReport(False, (("load", False, str(exc)),))
    checks: list[tuple[str, bool, str]] = []

    def stop() -> ValidationReport:
        return ValidationReport(all(ok for _, ok, _ in checks), tuple(checks))

    gk = [(1, 1), (1, 2), (2, 1)] if quick else [(g, k) for g in (1, 2) for k in (1, 2, 3)]
    for g, k in gk:
        try:
            inv = abelianization(build_surface_pbn(g, k, 1, sch))
        except (SchemaError, PresentationError) as exc:
            checks.append((f"h1(g={g},k={k},n=1)", False, str(exc)))
            return stop()
        ok = inv.free_rank == 2 * g + k - 1 and not inv.torsion
        checks.append((f"h1(g={g},k={k},n=1)", ok, f"got {inv}, expected Z^{2 * g + k - 1}"))
        if not ok:
            return stop()
    sizes = [(1, 1, 2), (1, 2, 2), (2, 1, 2)] if quick else [(1, 1, 3), (1, 2, 3), (1, 3, 2), (2, 1, 2), (2, 2, 2)]
    for g, k, n in sizes:
        try:
            p = build_surface_pbn(g, k, n, sch)
        except (SchemaError, PresentationError) as exc:
            checks.append((f"symbols(g={g},k={k},n={n})", False, str(exc)))
            return stop()
        checks.append((f"symbols(g={g},k={k},n={n})", True, ""))
        rep = PushRepresentation(g, k, n)
        bad = [format_word(r) for r in p.relators if not rep.is_trivial(r)]
        checks.append((f"push(g={g},k={k},n={n})", not bad, f"{len(bad)} relators act nontrivially, first: {bad[0]}" if bad else ""))
        if bad:
            return stop()
    try:
        fib = build_fiber_group(OrbifoldSpec(1, 0, (2,)), 2, sch)
        checks.append(("fiber(g=1,r=0,q=[2],n=2)", fib.free_rank == 2, f"free rank {fib.free_rank}, expected 2"))
    except (SchemaError, PresentationError, ValueError) as exc:
        checks.append(("fiber(g=1,r=0,q=[2],n=2)", False, str(exc)))
    return stop()
