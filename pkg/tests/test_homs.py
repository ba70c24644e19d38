from __future__ import annotations

import random

import pytest

from orbibraid.freeprod import build_fiber_group
from orbibraid.homs import (
    EvidenceLevel,
    GroupHom,
    HomError,
    build_bar_hom,
    build_fiber_inclusion,
    build_projection_hom,
    check_relators_die,
    check_square_commutes,
    check_surjective_on_generators,
    compose,
    homs_equal,
    identity_hom,
    load_hom,
    save_hom,
    trivial_hom,
)
from orbibraid.presentation import OrbifoldSpec, ParseError, build_orbifold_pbn, build_surface_pbn, save_presentation
from orbibraid.search.rewriting import replay
from orbibraid.words import GeneratorSymbol, Word, sym

from oracles import gp, replay_units, w

GRID = [(g, r, q, n) for g in (1, 2) for r in (0, 1) for q in ((2,), (3,), (2, 2)) for n in (2, 3)]


def _square(spec, n):
    mid_s = build_surface_pbn(spec.g, spec.k, n)
    base_s = build_surface_pbn(spec.g, spec.k, n - 1)
    mid = build_orbifold_pbn(spec, n)
    base = build_orbifold_pbn(spec, n - 1)
    return (
        build_projection_hom(mid_s, n - 1, base_s),
        build_projection_hom(mid, n - 1, base),
        build_bar_hom(mid_s, mid),
        build_bar_hom(base_s, base),
    )


def test_projection_examples():
    p = build_surface_pbn(1, 1, 2)
    f = build_projection_hom(p, 1)
    assert f.label == "f_2"
    assert f(p.word("A[2,1]")).is_identity()
    assert f(p.word("A[1,1]")) == p.word("A[1,1]")
    p3 = build_surface_pbn(1, 1, 3)
    f31 = build_projection_hom(p3, 1)
    assert f31(p3.word("C[3,2]")).is_identity()
    assert f31(p3.word("C[2,1]")).is_identity()
    with pytest.raises(HomError):
        build_projection_hom(p, 2)


@pytest.mark.parametrize("g,k,n", [(1, 1, 2), (1, 3, 3), (2, 2, 3), (1, 2, 4)])
def test_kernel_list_is_exactly_last_strand(g, k, n):
    p = build_surface_pbn(g, k, n)
    f = build_projection_hom(p, n - 1)
    expected = (
        {GeneratorSymbol("A", n, j) for j in range(1, g + 1)}
        | {GeneratorSymbol("B", n, j) for j in range(1, g + 1)}
        | {GeneratorSymbol("C", n, m) for m in range(1, n)}
        | {GeneratorSymbol("P", n, x) for x in range(1, k + 1)}
    )
    assert set(f.kernel_generators()) == expected
    for s in p.generators:
        if s not in expected:
            assert f.images[s] == Word.from_symbol(s)


def test_bar_hom_examples():
    spec = OrbifoldSpec(1, 1, (2,))
    s, o = build_surface_pbn(1, 2, 2), build_orbifold_pbn(spec, 2)
    g = build_bar_hom(s, o)
    assert g(s.word("A[1,1]")) == o.word("Ab[1,1]")
    assert g(Word()).is_identity()
    for r in s.relators:
        assert g(r) in o.relators
    assert check_surjective_on_generators(g).passed
    with pytest.raises(HomError):
        build_bar_hom(s, build_orbifold_pbn(spec, 3))


def test_fiber_inclusion_examples():
    spec = OrbifoldSpec(1, 1, (2,))
    fib = build_fiber_group(spec, 2)
    p = build_orbifold_pbn(spec, 2)
    iota = build_fiber_inclusion(fib, p)
    assert iota(Word.from_symbol(sym("Pb[2,2]"))) == p.word("Pb[2,2]")
    assert iota.images[sym("Ab[2,1]")] == p.word("Ab[2,1]")
    fo = build_projection_hom(p, 1)
    assert all(x.is_identity() for x in compose(fo, iota).images.values())
    with pytest.raises(HomError):
        build_fiber_inclusion(fib, build_orbifold_pbn(OrbifoldSpec(1, 1, (3,)), 2))


def test_compose_laws():
    spec = OrbifoldSpec(1, 0, (2,))
    f, fo, g_mid, g_base = _square(spec, 3)
    assert homs_equal(compose(identity_hom(fo.target), fo), fo)
    assert homs_equal(compose(fo, identity_hom(fo.source)), fo)
    assert homs_equal(compose(g_base, f), compose(fo, g_mid))
    with pytest.raises(HomError):
        compose(f, fo)


def test_compose_associative_random():
    G = gp("a b", "a^2")
    rng = random.Random(3)
    gens = list(G.generators)
    letters = [w("a"), w("b"), w("a^-1"), w("b^-1")]

    def rand_hom():
        return GroupHom(G, G, {s: Word([x for _ in range(rng.randrange(0, 4)) for x in rng.choice(letters).letters]) for s in gens})

    for _ in range(50):
        h1, h2, h3 = rand_hom(), rand_hom(), rand_hom()
        assert homs_equal(compose(h3, compose(h2, h1)), compose(compose(h3, h2), h1))


@pytest.mark.parametrize("g,r,q,n", GRID)
def test_square_commutes_on_grid(g, r, q, n):
    f, fo, g_mid, g_base = _square(OrbifoldSpec(g, r, q), n)
    rep = check_square_commutes(f, fo, g_mid, g_base)
    assert rep.passed and rep.checked == len(f.source.generators)


def test_square_examples_and_corruption():
    f, fo, g_mid, g_base = _square(OrbifoldSpec(1, 1, (2,)), 2)
    a11, a21 = sym("A[1,1]"), sym("A[2,1]")
    assert g_base(f(Word.from_symbol(a11))) == fo(g_mid(Word.from_symbol(a11))) == Word.from_symbol(sym("Ab[1,1]"))
    assert g_base(f(Word.from_symbol(a21))).is_identity()
    bad = fo.with_image(sym("Ab[1,1]"), Word())
    rep = check_square_commutes(f, bad, g_mid, g_base)
    assert not rep.passed and [str(s) for s, _, _ in rep.mismatches] == ["A[1,1]"]
    with pytest.raises(HomError):
        check_square_commutes(f, fo, g_base, g_mid)


def test_surjectivity_examples():
    _, fo, g_mid, _ = _square(OrbifoldSpec(1, 1, (2,)), 2)
    wm = check_surjective_on_generators(fo)
    assert wm.passed and dict(wm.witnesses)[sym("Ab[1,1]")] == Word.from_symbol(sym("Ab[1,1]"))
    assert check_surjective_on_generators(g_mid).passed
    t = trivial_hom(fo.source, fo.target)
    wm = check_surjective_on_generators(t)
    assert not wm.passed and set(wm.unhit) == set(fo.target.generators)


def test_hom_validation():
    G = gp("a b", "a^2")
    with pytest.raises(HomError):
        GroupHom(G, G, {sym("A[1,1]"): Word()})
    with pytest.raises(HomError):
        GroupHom(G, G, {sym("A[1,1]"): Word(), sym("B[1,1]"): Word.from_symbol(sym("C[2,1]"))})


@pytest.mark.parametrize("which", ["f", "fo", "g"])
def test_relators_die_with_derivations(which):
    f, fo, g_mid, _ = _square(OrbifoldSpec(1, 1, (2,)), 2)
    h = {"f": f, "fo": fo, "g": g_mid}[which]
    h2, rep = check_relators_die(h, quotient_degree=3, quotient_budget=5000)
    assert rep.level == EvidenceLevel.DERIVATION_VERIFIED
    assert h2.evidence.level == EvidenceLevel.DERIVATION_VERIFIED
    trels = list(h.target.relators)
    for e in rep.entries:
        assert replay(trels, e.derivation).ok
        assert replay_units(trels, e.derivation.start, [s.to_json() for s in e.derivation.steps])


def test_corrupted_map_fails_h1():
    f, fo, g_mid, _ = _square(OrbifoldSpec(1, 1, (2,)), 2)
    # send a torsion generator to a free one: its q-th power survives in H1
    bad = fo.with_image(sym("Pb[1,2]"), Word.from_symbol(sym("Ab[1,1]")))
    _, rep = check_relators_die(bad, level=EvidenceLevel.H1_VERIFIED)
    assert rep.level == EvidenceLevel.NONE and not rep.h1_passed


def test_hom_file_round_trip(tmp_path):
    f, fo, g_mid, _ = _square(OrbifoldSpec(1, 0, (2,)), 2)
    save_presentation(fo.source, tmp_path / "src.grp")
    save_presentation(fo.target, tmp_path / "tgt.grp")
    save_hom(fo, tmp_path / "fo.hom", "src.grp", "tgt.grp")
    back = load_hom(tmp_path / "fo.hom")
    assert back.label == "fo_2" and homs_equal(back, fo)
    (tmp_path / "bad.hom").write_text("hom x : src.grp -> tgt.grp\nAb[1,1] := Ab[9,1]\n")
    with pytest.raises(ParseError) as exc:
        load_hom(tmp_path / "bad.hom")
    assert exc.value.line == 2
