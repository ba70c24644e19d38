from __future__ import annotations

import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbibraid.abelian import h1_data
from orbibraid.freeprod import build_fiber_group, normal_form
from orbibraid.homs import build_fiber_inclusion
from orbibraid.presentation import OrbifoldSpec, build_orbifold_pbn
from orbibraid.search.quotients import PermRep, check_word_in_quotients, find_finite_quotients, validate_rep
from orbibraid.search.rewriting import Derivation, Exhausted, Step, replay, rewrite_trivialize
from orbibraid.search.todd_coxeter import CosetExhausted, coset_index, todd_coxeter
from orbibraid.search.witness import (
    KernelWitness,
    WitnessSearchError,
    kernel_witness_search,
    verify_witness,
)
from orbibraid.words import GeneratorSymbol, Word

from oracles import all_homs, conjugacy_classes_of_homs, cycle, evaluate_perm, gp, group_order, replay_units, w

S3 = gp("a b", "a^2", "b^3", "a b a b")
C2 = gp("a", "a^2")
C3 = gp("a", "a^3")
F2 = gp("a b")


# ---------------------------------------------------------------- quotients


def test_quotients_of_cyclic_group():
    res = find_finite_quotients(C2, degrees=[2])
    assert len(res.reps) == 2 and res.exhausted
    assert sorted(r.is_trivial_rep() for r in res.reps) == [False, True]


def test_quotients_of_free_group():
    res = find_finite_quotients(F2, degrees=[2])
    assert len(res.reps) == 4


def test_quotients_of_triangle_group_against_brute_force():
    res = find_finite_quotients(S3, degrees=[3])
    homs = all_homs(list(S3.generators), list(S3.relators), 3)
    assert len(res.reps) == conjugacy_classes_of_homs(homs, list(S3.generators), 3)
    assert any(not r.is_trivial_rep() and r.is_transitive() for r in res.reps)


@pytest.mark.parametrize("pres,d", [(C2, 3), (C3, 3), (S3, 2), (S3, 4), (gp("a b", "a^2", "b^2"), 3)])
def test_quotient_counts_match_brute_force(pres, d):
    res = find_finite_quotients(pres, degrees=[d])
    homs = all_homs(list(pres.generators), list(pres.relators), d)
    assert len(res.reps) == conjugacy_classes_of_homs(homs, list(pres.generators), d)
    for rep in res.reps:
        assert validate_rep(rep, pres.relators)
        imgs = rep.image_map
        assert all(evaluate_perm(r, imgs, d) == tuple(range(d)) for r in pres.relators)


def test_quotients_deterministic_and_valid_on_braid_group():
    p = build_orbifold_pbn(OrbifoldSpec(1, 1, (2,)), 2)
    a = find_finite_quotients(p, max_degree=3, budget=5000, seed=3)
    b = find_finite_quotients(p, max_degree=3, budget=5000, seed=3)
    assert a == b and a.reps
    assert all(validate_rep(r, p.relators) for r in a.reps)


def test_quotient_max_reps_caps_output():
    res = find_finite_quotients(F2, degrees=[3], max_reps=2)
    assert len(res.reps) == 2 and not res.exhausted


def test_check_word_in_quotients_examples():
    reps = find_finite_quotients(S3, max_degree=3).reps
    assert all(check_word_in_quotients(r, reps) for r in S3.relators)
    faithful = PermRep(2, ((w("a").letters[0][0], (1, 0)),))
    assert not check_word_in_quotients(w("a"), [faithful])
    assert check_word_in_quotients(Word(), [faithful])


def test_validate_rep_rejects_bad_assignment():
    a, b = S3.generators
    assert not validate_rep(PermRep(3, ((a, cycle(3, (1, 2, 3))), (b, cycle(3, (1, 2, 3))))), S3.relators)


# ---------------------------------------------------------------- rewriting


def test_rewrite_examples():
    der = rewrite_trivialize(C3, w("a^6"))
    assert isinstance(der, Derivation)
    assert [s.op for s in der.steps] == ["delete", "delete"]
    assert replay(C3.relators, der).ok
    res = rewrite_trivialize(C3, w("a"), budget=200)
    assert isinstance(res, Exhausted)
    assert res.to_json()["exhausted"] is True


@pytest.mark.parametrize("u", ["a", "b^-1", "a b", "b a^-1 b", "a a b"])
def test_rewrite_conjugate_of_relator(u):
    for r in S3.relators:
        uw = w(u)
        der = rewrite_trivialize(S3, uw * r * uw.inverse(), budget=5000)
        assert isinstance(der, Derivation)
        assert replay(S3.relators, der).ok
        assert replay_units(S3.relators, der.start, [s.to_json() for s in der.steps])


def test_replay_rejects_tampered_derivation():
    der = rewrite_trivialize(C3, w("a^6"))
    bad = Derivation(der.start, der.steps[:1])
    assert not replay(C3.relators, bad).ok
    wrong = Derivation(der.start, (Step("delete", 4, 0),) + der.steps[1:])
    assert not replay(C3.relators, wrong).ok


def test_derivation_json_round_trip():
    der = rewrite_trivialize(S3, w("b a b a b^3"), budget=5000)
    assert isinstance(der, Derivation)
    again = Derivation.from_json(json.loads(json.dumps(der.to_json())))
    assert again == der
    with pytest.raises(ValueError):
        Step.from_json({"op": "swap", "pos": 0})


def test_insert_step_with_conjugator():
    b = w("b")
    st = Step("insert", 0, 0, False, 0, b)
    der = Derivation(Word(), (st, Step("cancel", 3), Step("cancel", 3)))
    # after insert: b a a b^-1; the middle a a is not a free pair, so this must fail
    assert not replay(S3.relators, der).ok
    ok = Derivation(Word(), (st, Step("delete", 1, 0, False, 0), Step("cancel", 0)))
    assert replay(S3.relators, ok).ok
    assert replay_units(S3.relators, Word(), [s.to_json() for s in ok.steps])


# ---------------------------------------------------------------- coset enumeration


def test_todd_coxeter_examples():
    t = todd_coxeter(S3)
    assert t.index == 6 == group_order([cycle(3, (1, 2)), cycle(3, (1, 2, 3))])
    assert coset_index(S3, [w("a")]) == 3
    assert isinstance(todd_coxeter(F2, max_cosets=500), CosetExhausted)
    assert coset_index(F2, max_cosets=500) is None


def test_todd_coxeter_alternating_group():
    a5 = gp("a b", "a^2", "b^3", "a b a b a b a b a b")
    t = todd_coxeter(a5)
    assert t.index == 60 == group_order([cycle(5, (1, 2), (3, 4)), cycle(5, (1, 3, 5))])
    assert validate_rep(t.to_permrep(), a5.relators)
    assert coset_index(a5, [w("b")]) == 20


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
def test_todd_coxeter_dihedral(n):
    d = gp("a b", "a^2", "b^2", " ".join(["a b"] * n))
    t = todd_coxeter(d)
    assert t.index == 2 * n
    assert validate_rep(t.to_permrep(), d.relators)


# ---------------------------------------------------------------- cross-engine


short_words = st.lists(st.sampled_from(["a", "a^-1", "b", "b^-1"]), max_size=8).map(lambda xs: w(" ".join(xs)))


@settings(max_examples=60, deadline=None)
@given(short_words)
def test_engines_agree(u):
    reps = find_finite_quotients(S3, max_degree=3).reps
    table = todd_coxeter(S3).to_permrep()
    res = rewrite_trivialize(S3, u, budget=400)
    if isinstance(res, Derivation):
        assert replay(S3.relators, res).ok
        assert check_word_in_quotients(u, reps)
        assert table.is_trivial_on(u)
        assert h1_data(S3).word_is_zero(u)
    # S3 is finite and the regular rep is faithful, so this decides triviality
    if not table.is_trivial_on(u):
        assert not isinstance(res, Derivation)


# ---------------------------------------------------------------- witnesses


def _instance(g, r, q, n):
    spec = OrbifoldSpec(g, r, q)
    fiber = build_fiber_group(spec, n)
    mid = build_orbifold_pbn(spec, n)
    return fiber, mid, build_fiber_inclusion(fiber, mid)


@pytest.fixture(scope="module")
def small():
    fiber, mid, iota = _instance(1, 0, (2,), 2)
    return fiber, mid, iota, kernel_witness_search(fiber, mid, iota, budget=50, seed=0)


def test_witness_search_finds_verified_witness(small):
    fiber, mid, iota, res = small
    assert res.witnesses
    for wit in res.witnesses:
        assert not normal_form(fiber, wit.word).is_identity()
        assert replay(mid.relators, wit.derivation).ok
        assert replay_units(mid.relators, iota.apply(wit.word), wit.derivation.to_json()["steps"])
        assert verify_witness(fiber, iota, mid, wit).accepted


def test_witness_json_round_trip(small):
    fiber, mid, iota, res = small
    wit = res.witnesses[0]
    again = KernelWitness.from_json(json.loads(json.dumps(wit.to_json())))
    assert verify_witness(fiber, iota, mid, again).accepted


def test_witness_search_is_deterministic(small):
    fiber, mid, iota, res = small
    again = kernel_witness_search(fiber, mid, iota, budget=50, seed=0)
    assert json.dumps(again.to_json(), sort_keys=True) == json.dumps(res.to_json(), sort_keys=True)


def test_torsion_power_is_rejected(small):
    fiber, mid, iota, _ = small
    t, q = fiber.torsion_factors[0]
    word = Word.from_symbol(t, q)
    der = rewrite_trivialize(mid, iota.apply(word), budget=100)
    assert isinstance(der, Derivation)
    cand = KernelWitness(word, normal_form(fiber, word), der, True)
    verdict = verify_witness(fiber, iota, mid, cand)
    assert not verdict.accepted and "trivial in the fiber" in verdict.reason


def test_corrupted_derivation_is_rejected(small):
    fiber, mid, iota, res = small
    wit = res.witnesses[0]
    steps = list(wit.derivation.steps)
    del steps[len(steps) // 2]
    bad = replace(wit, derivation=Derivation(wit.derivation.start, tuple(steps)))
    assert not verify_witness(fiber, iota, mid, bad).accepted
    shifted = replace(wit, derivation=Derivation(wit.derivation.start * Word.from_symbol(fiber.generators[0]), wit.derivation.steps))
    assert not verify_witness(fiber, iota, mid, shifted).accepted


def test_wrong_normal_form_record_is_rejected(small):
    fiber, mid, iota, res = small
    wit = res.witnesses[0]
    bad = replace(wit, normal_form=normal_form(fiber, wit.word * Word.from_symbol(fiber.generators[0])))
    assert not verify_witness(fiber, iota, mid, bad).accepted


def test_foreign_symbols_rejected(small):
    fiber, mid, iota, res = small
    wit = replace(res.witnesses[0], word=Word.from_symbol(GeneratorSymbol("A", 1, 1, True)))
    assert not verify_witness(fiber, iota, mid, wit).accepted


@pytest.mark.parametrize("inst", [(1, 1, (2,), 2), (1, 0, (3,), 3), (2, 0, (2, 2), 2)])
def test_witnesses_on_other_instances(inst):
    fiber, mid, iota = _instance(*inst)
    res = kernel_witness_search(fiber, mid, iota, budget=50)
    assert res.witnesses
    assert all(verify_witness(fiber, iota, mid, x).accepted for x in res.witnesses)


def test_search_requires_cone_point():
    fiber, mid, iota = _instance(1, 1, (), 2)
    with pytest.raises(WitnessSearchError):
        kernel_witness_search(fiber, mid, iota)


def test_zero_budget_reports_exhausted():
    fiber, mid, iota = _instance(1, 0, (2,), 2)
    res = kernel_witness_search(fiber, mid, iota, budget=0)
    assert not res.witnesses and res.exhausted and res.candidates_tried == 0
