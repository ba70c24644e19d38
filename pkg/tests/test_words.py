from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbibraid.words import (
    EXPONENT_BOUND,
    AlphabetMismatchError,
    GeneratorSymbol,
    UnknownSymbolError,
    Word,
    WordSyntaxError,
    commutator,
    conjugate,
    cyclic_conjugates,
    cyclic_reduce,
    format_word,
    invert,
    is_cyclically_reduced,
    multiply,
    parse_word,
    sym,
    word_algebra,
)

from oracles import w

SYMS = [
    GeneratorSymbol("A", 1, 1),
    GeneratorSymbol("B", 1, 1),
    GeneratorSymbol("C", 2, 1),
    GeneratorSymbol("P", 2, 3),
    GeneratorSymbol("A", 3, 2, True),
    GeneratorSymbol("P", 1, 1, True),
]

units = st.lists(st.tuples(st.sampled_from(SYMS), st.sampled_from([1, -1])), max_size=30)
words = units.map(Word)


def test_parse_examples():
    x = parse_word("A[1,2] P[3,1]^-1")
    assert x.letters == ((GeneratorSymbol("A", 1, 2), 1), (GeneratorSymbol("P", 3, 1), -1))
    assert parse_word("").is_identity()
    assert parse_word("A[1,1] A[1,1]^-1").is_identity()
    assert parse_word("1").is_identity()
    assert parse_word("Cb[2,1]^3").letters == ((GeneratorSymbol("C", 2, 1, True), 3),)


def test_parse_merges_adjacent():
    assert parse_word("A[1,1] A[1,1]^2 B[1,1] B[1,1]^-1 A[1,1]^-3").is_identity()
    assert format_word(parse_word("P[1,1] P[1,1]")) == "P[1,1]^2"


@pytest.mark.parametrize(
    "text,pos",
    [("A[1,1] Q[1,1]", 7), ("A[1,1", 0), ("A[1,1]^", 6), ("A[1,1]B[1,1]", 6), ("A[1,1]^0", 7)],
)
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(WordSyntaxError) as exc:
        parse_word(text)
    assert exc.value.position == pos


def test_index_invariants():
    with pytest.raises(WordSyntaxError):
        parse_word("C[1,2]")
    with pytest.raises(ValueError):
        GeneratorSymbol("C", 2, 2)
    with pytest.raises(ValueError):
        GeneratorSymbol("A", 0, 1)
    with pytest.raises(ValueError):
        GeneratorSymbol("D", 1, 1)


def test_unknown_symbol_names_it():
    with pytest.raises(UnknownSymbolError) as exc:
        parse_word("A[1,1] B[2,1]", {sym("A[1,1]")})
    assert str(exc.value.symbol) == "B[2,1]"


def test_word_algebra_examples():
    a, b = w("a"), w("b")
    assert word_algebra("multiply", a, a.inverse()).is_identity()
    assert word_algebra("commutator", a, a).is_identity()
    assert word_algebra("conjugate", b, a) == w("a b a^-1")
    assert word_algebra("invert", w("a b^2")) == w("b^-2 a^-1")
    assert commutator(a, b) == w("a b a^-1 b^-1")
    with pytest.raises(ValueError):
        word_algebra("power", a)


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatchError):
        multiply(w("a"), w("b"), alphabet={sym("A[1,1]")})
    assert multiply(w("a"), w("a"), alphabet={sym("A[1,1]")}) == w("a^2")


def test_cyclic_reduce_examples():
    assert cyclic_reduce(w("a b a^-1")) == (w("b"), w("a"))
    assert cyclic_reduce(w("b")) == (w("b"), Word())
    assert cyclic_reduce(Word()) == (Word(), Word())
    core, c = cyclic_reduce(w("a^2 b a^-1"))
    assert core == w("a b") and c == w("a")


def test_exponent_overflow_is_an_error():
    s = sym("A[1,1]")
    big = Word.from_symbol(s, EXPONENT_BOUND)
    with pytest.raises(OverflowError):
        big * Word.from_symbol(s, 1)
    with pytest.raises(OverflowError):
        parse_word(f"A[1,1]^{EXPONENT_BOUND + 1}")


def test_round_trip_ten_thousand_random_words():
    rng = random.Random(7)
    for _ in range(10_000):
        n = rng.randrange(0, 12)
        x = Word((rng.choice(SYMS), rng.choice([-3, -2, -1, 1, 2, 5])) for _ in range(n))
        assert parse_word(format_word(x)) == x


@given(units)
def test_reduction_is_confluent(us):
    """Cancel adjacent inverse pairs in random order; the result is always Word(us)."""
    rng = random.Random(len(us))
    cur = list(us)
    while True:
        spots = [i for i in range(len(cur) - 1) if cur[i][0] == cur[i + 1][0] and cur[i][1] == -cur[i + 1][1]]
        if not spots:
            break
        i = rng.choice(spots)
        del cur[i : i + 2]
    assert Word(cur) == Word(us)


@given(words, words, words)
def test_group_laws(u, v, x):
    assert (u * v) * x == u * (v * x)
    assert invert(invert(u)) == u
    assert (u * u.inverse()).is_identity()
    assert (u * v).length() <= u.length() + v.length()
    assert commutator(u, v) == u * v * u.inverse() * v.inverse()
    assert conjugate(u, v) == v * u * v.inverse()


@given(words)
def test_words_are_freely_reduced(u):
    for (s1, e1), (s2, _) in zip(u.letters, u.letters[1:]):
        assert s1 != s2
    assert all(e != 0 for _, e in u.letters)
    assert parse_word(format_word(u)) == u


@given(words)
def test_cyclic_reduce_property(u):
    core, c = cyclic_reduce(u)
    assert c * core * c.inverse() == u
    assert is_cyclically_reduced(core)
    for r in cyclic_conjugates(core):
        assert r.length() == core.length()


@given(words, st.integers(-4, 4))
def test_power(u, n):
    expected = Word()
    for _ in range(abs(n)):
        expected = expected * (u if n > 0 else u.inverse())
    assert u**n == expected
