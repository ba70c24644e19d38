from __future__ import annotations

import json
from dataclasses import replace

import pytest

from orbibraid.presentation import OrbifoldSpec
from orbibraid.verify import (
    DEFAULT_GRID,
    Budgets,
    VerifyError,
    build_instance,
    dumps_report,
    grid_instances,
    run_battery,
    sweep,
    validate_schema,
    verify_four_term,
    verify_remark_k,
)
from orbibraid.words import GeneratorSymbol, Word

H1 = Budgets(level="H1_VERIFIED")
QUICK = Budgets(quotient_degree=3, quotient_nodes=3000, rewrite_nodes=500)
HARD = ["surjectivity", "commuting_square", "complex_property", "kernel_generator_list", "relator_death", "h1_right_exactness"]


def shifted(s: GeneratorSymbol, target) -> Word:
    """A nontrivial stand-in image for a generator that ought to die."""
    same = [x for x in target.generators if x.family == s.family]
    return Word.from_symbol(same[-1] if same else target.generators[0])


def test_smallest_cone_instance_passes():
    rep = verify_four_term(OrbifoldSpec(1, 1, (2,)), 2)
    assert rep.passed
    assert [c.name for c in rep.checks if c.hard] == HARD
    assert rep.check("relator_death").evidence_level == "DERIVATION_VERIFIED"
    assert rep.check("kernel_witness").verdict == "info"
    assert rep.h1["fiber"] == "Z^3 + Z/2"


def test_classical_mode():
    rep = verify_four_term(OrbifoldSpec(1, 1, ()), 2, QUICK)
    assert rep.passed and rep.instance["mode"] == "classical"
    assert rep.check("classical_cross_check").verdict == "pass"
    assert rep.check("kernel_witness").verdict == "skipped"


def test_rejects_bad_strand_counts():
    with pytest.raises(VerifyError):
        verify_four_term(OrbifoldSpec(1, 0, (2,)), 1)
    with pytest.raises(VerifyError):
        verify_remark_k(OrbifoldSpec(1, 0, (2,)), 3, 3)
    with pytest.raises(VerifyError):
        verify_remark_k(OrbifoldSpec(1, 0, (2,)), 3, 0)


def test_forgetting_two_strands():
    rep = verify_remark_k(OrbifoldSpec(1, 0, (2,)), 3, 1, QUICK)
    assert rep.passed
    assert rep.instance["k"] == 1
    # the fiber is PB_2 of the orbifold with one extra smooth puncture
    inst = build_instance(OrbifoldSpec(1, 0, (2,)), 3, k=1)
    assert inst.fiber.meta.n == 2 and inst.fiber.meta.spec.r == 1
    assert rep.check("kernel_witness").verdict == "skipped"


@pytest.mark.parametrize("spec,n", [(OrbifoldSpec(1, 0, (2,)), 2), (OrbifoldSpec(1, 1, (3,)), 3)])
def test_keeping_n_minus_1_strands_matches_four_term(spec, n):
    a = verify_four_term(spec, n, QUICK, witnesses=False)
    b = verify_remark_k(spec, n, n - 1, QUICK, witnesses=False)
    assert a.hard_verdicts() == b.hard_verdicts()
    assert a.h1 == b.h1


def test_sweep_empty_grid():
    res = sweep({"g": [], "r": [0], "q": [[2]], "n": [2]})
    assert res.summary() == [] and res.passed
    assert res.to_json()["reports"] == []


def test_sweep_marks_classical_rows():
    res = sweep({"g": [1], "r": [1], "q": [[], [2]], "n": [2]}, H1, witnesses=False)
    modes = [row["instance"]["mode"] for row in res.summary()]
    assert sorted(modes) == ["classical", "orbifold"]
    assert res.passed
    assert "classical" in res.table()


def test_sweep_order_does_not_depend_on_jobs():
    grid = {"g": [1], "r": [0, 1], "q": [[2]], "n": [2]}
    a = sweep(grid, H1, jobs=1, witnesses=False)
    b = sweep(grid, H1, jobs=2, witnesses=False)
    assert dumps_report(a.to_json()) == dumps_report(b.to_json())


def test_grid_instances_order():
    rows = grid_instances(DEFAULT_GRID)
    assert len(rows) == 24
    assert rows[0] == (OrbifoldSpec(1, 0, (2,)), 2)


def test_report_is_deterministic_and_serializable():
    spec = OrbifoldSpec(1, 0, (2,))
    a = dumps_report(verify_four_term(spec, 2, QUICK, seed=5).to_json())
    b = dumps_report(verify_four_term(spec, 2, QUICK, seed=5).to_json())
    assert a == b
    d = json.loads(a)
    assert d["seed"] == 5 and d["report_schema"] == "orbibraid-sequence-report"
    assert "wall_clock_s" not in d["timings"]
    assert set(d["instance"]) >= {"g", "r", "q", "n", "mode"}
    timed = verify_four_term(spec, 2, QUICK, timings=True).to_json()
    assert "wall_clock_s" in timed["timings"]


def test_budgets_validation():
    with pytest.raises(VerifyError):
        Budgets(quotient_degree=0)
    with pytest.raises(VerifyError):
        Budgets(level="PROVEN")


# ---------------------------------------------------------------- negative controls


@pytest.mark.parametrize("spec,n", grid_instances({**DEFAULT_GRID, "n": [2]}))
def test_every_single_fo_corruption_fails_a_hard_check(spec, n):
    inst = build_instance(spec, n)
    for s, img in inst.fo.images.items():
        new = Word() if not img.is_identity() else shifted(s, inst.base)
        rep = run_battery(replace(inst, fo=inst.fo.with_image(s, new)), H1, witnesses=False)
        assert not rep.passed, s


def test_corrupted_iota_fails_complex_property():
    inst = build_instance(OrbifoldSpec(1, 1, (2,)), 2)
    s = next(iter(inst.iota.images))
    bad = replace(inst, iota=inst.iota.with_image(s, Word.from_symbol(GeneratorSymbol("A", 1, 1, True))))
    rep = run_battery(bad, H1, witnesses=False)
    assert rep.check("complex_property").verdict == "fail"


def test_corrupted_bar_map_fails_square():
    inst = build_instance(OrbifoldSpec(1, 1, (2,)), 2)
    s = GeneratorSymbol("A", 1, 1)
    bad = replace(inst, g_mid=inst.g_mid.with_image(s, Word.from_symbol(GeneratorSymbol("B", 1, 1, True))))
    rep = run_battery(bad, H1, witnesses=False)
    assert rep.check("commuting_square").verdict == "fail"
    assert not rep.passed


def test_validate_schema_default_passes():
    assert validate_schema().passed
    assert validate_schema(quick=True).passed
