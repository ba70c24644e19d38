from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbibraid.abelian import AbelianInvariants, abelianization
from orbibraid.freeprod import (
    FreeProductError,
    FreeProductGroup,
    are_equal,
    build_fiber_group,
    eliminated_value,
    format_freeprod,
    free_product,
    is_trivial,
    normal_form,
    parse_fiber_word,
    save_freeprod,
    substitute_eliminated,
)
from orbibraid.presentation import OrbifoldSpec, ParseError, build_orbifold_pbn, load_presentation, parse_group_text
from orbibraid.words import GeneratorSymbol, UnknownSymbolError, Word, sym

from oracles import LETTERS, freeprod_reduce, nf_units, w

X, Y = LETTERS["x"], LETTERS["y"]
Z23 = free_product([], [(X, 2), (Y, 3)])
MIXED = free_product([LETTERS["a"], LETTERS["b"]], [(LETTERS["c"], 2), (LETTERS["d"], 3)])
GRID = [(g, r, q, n) for g in (1, 2) for r in (0, 1) for q in ((2,), (3,), (2, 2)) for n in (2, 3)]


def nf(G, text):
    return normal_form(G, w(text)).to_word()


@pytest.mark.parametrize(
    "g,r,q,n,label",
    [(1, 1, (2,), 2, "F3 * Z2"), (1, 0, (3,), 3, "F3 * Z3"), (2, 0, (2, 2), 2, "F4 * Z2 * Z2")],
)
def test_fiber_examples(g, r, q, n, label):
    G = build_fiber_group(OrbifoldSpec(g, r, q), n)
    assert str(G) == label
    assert G.meta.eliminated == GeneratorSymbol("C", n, n - 1, True)
    assert all(s.family != "P" or s.idx2 <= r for s in G.free_generators)
    assert [q for _, q in G.torsion_factors] == list(q)


@pytest.mark.parametrize("g,r,q,n", GRID)
def test_fiber_shape_on_grid(g, r, q, n):
    G = build_fiber_group(OrbifoldSpec(g, r, q), n)
    assert G.free_rank == 2 * g + r + n - 2
    assert len(G.torsion_factors) == len(q)
    assert G.meta.eliminated not in G.alphabet
    # every fiber generator is a generator of the orbifold braid group
    assert G.alphabet <= set(build_orbifold_pbn(OrbifoldSpec(g, r, q), n).generators)


def test_fiber_needs_two_strands():
    with pytest.raises(FreeProductError):
        build_fiber_group(OrbifoldSpec(1, 0, (2,)), 1)


def test_group_validation():
    with pytest.raises(FreeProductError):
        free_product([X], [(X, 2)])
    with pytest.raises(FreeProductError):
        free_product([], [(X, 1)])


def test_normal_form_examples():
    assert nf(Z23, "x y^4 x") == w("x y x")
    assert nf(Z23, "x x y") == w("y")
    six = normal_form(Z23, w("x y x y x y"))
    assert len(six) == 6 and not six.is_identity()
    assert freeprod_reduce(w("x y x y x y"), Z23.orders) == nf_units(six.to_word(), Z23.orders)


def test_trivial_and_equal_examples():
    assert is_trivial(Z23, w("y^3"))
    assert is_trivial(Z23, Word())
    assert not is_trivial(MIXED, w("a"))
    comm = w("a c a^-1 c^-1")
    assert not is_trivial(MIXED, comm) and len(normal_form(MIXED, comm)) == 4
    assert are_equal(Z23, w("y^-1"), w("y^2"))
    with pytest.raises(UnknownSymbolError):
        normal_form(Z23, w("c"))


def test_torsion_exponents_are_reduced():
    out = normal_form(MIXED, w("d^-1 a d^7"))
    assert out.syllables == ((LETTERS["d"], 2), (LETTERS["a"], 1), (LETTERS["d"], 1))


GENS = list(MIXED.generators)
letter = st.tuples(st.sampled_from(GENS), st.sampled_from([-3, -2, -1, 1, 2, 3]))
words = st.lists(letter, max_size=14).map(Word)


@given(words)
def test_normal_form_matches_rewriting_oracle(u):
    assert nf_units(normal_form(MIXED, u).to_word(), MIXED.orders) == freeprod_reduce(u, MIXED.orders)


@given(words, words)
def test_normal_form_is_a_homomorphism(u, v):
    n = lambda x: normal_form(MIXED, x).to_word()
    assert n(u * v) == n(n(u) * n(v))
    assert n(u.inverse()) == n(n(u).inverse())
    assert n(n(u)) == n(u)
    assert is_trivial(MIXED, u * u.inverse())


def _perturb(rng, u: Word) -> Word:
    letters = list(u.letters)
    for _ in range(rng.randint(1, 4)):
        pos = rng.randint(0, len(letters))
        if rng.random() < 0.5:
            t, q = rng.choice(MIXED.torsion_factors)
            ins = [(t, q * rng.choice([-1, 1]))]
        else:
            s = rng.choice(GENS)
            e = rng.choice([-2, -1, 1, 2])
            ins = [(s, e), (s, -e)]
        letters[pos:pos] = ins
    return Word(letters)


def test_normal_form_invariant_under_relator_insertions():
    rng = random.Random(2024)
    for _ in range(10_000):
        u = Word([(rng.choice(GENS), rng.choice([-2, -1, 1, 2])) for _ in range(rng.randint(0, 10))])
        assert normal_form(MIXED, _perturb(rng, u)) == normal_form(MIXED, u)


@pytest.mark.parametrize("g,r,q,n", GRID)
def test_abelianization_matches_factor_orders(g, r, q, n):
    G = build_fiber_group(OrbifoldSpec(g, r, q), n)
    assert abelianization(G) == AbelianInvariants(G.free_rank, tuple(sorted(q)))


def test_abelianization_of_generic_product():
    assert abelianization(MIXED) == AbelianInvariants(2, (6,))


def test_eliminated_value_satisfies_surface_relation():
    for g, r, q, n in GRID:
        G = build_fiber_group(OrbifoldSpec(g, r, q), n)
        rel = substitute_eliminated(G, G.meta.surface_relation)
        assert is_trivial(G, rel)
        assert G.meta.eliminated not in eliminated_value(G).symbols()


def test_parse_fiber_word_substitutes_eliminated():
    G = build_fiber_group(OrbifoldSpec(1, 1, (2,)), 2)
    x = parse_fiber_word(G, "Cb[2,1]")
    assert x == eliminated_value(G)
    assert parse_fiber_word(G, "Pb[2,2]^2 Ab[2,1]") == Word.from_symbol(sym("Pb[2,2]"), 2) * Word.from_symbol(sym("Ab[2,1]"))


@pytest.mark.parametrize("g,r,q,n", GRID[:6])
def test_file_round_trip(tmp_path, g, r, q, n):
    G = build_fiber_group(OrbifoldSpec(g, r, q), n)
    path = tmp_path / "fiber.grp"
    save_freeprod(G, path)
    assert load_presentation(path) == G
    assert format_freeprod(load_presentation(path)) == path.read_text()


def test_generic_freeprod_round_trip():
    text = format_freeprod(MIXED)
    assert text.startswith("group freeprod\n")
    G = parse_group_text(text)
    assert isinstance(G, FreeProductGroup) and G == MIXED


def test_freeprod_parse_errors():
    with pytest.raises(ParseError):
        parse_group_text("group freeprod\ngenerators:\nA[1,1]\n")
    with pytest.raises(ParseError):
        parse_group_text("group freeprod\ngenerators:\ntorsion:\nP[1,1] two\n")
    G = build_fiber_group(OrbifoldSpec(1, 1, (2,)), 2)
    tampered = format_freeprod(G).replace("Pb[2,2] 2", "Pb[2,2] 3")
    with pytest.raises(ParseError):
        parse_group_text(tampered)
