"""Generator symbols, freely reduced words and the text grammar for words.

A letter is written ``FAMILY[i,j]`` optionally followed by ``^e``; barred
(orbifold) families carry a trailing ``b``::

    A[1,2] P[3,1]^-1 Cb[2,1]^3

Words are immutable and always stored freely reduced.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

FAMILIES = ("A", "B", "C", "P")
_FAMILY_RANK = {f: n for n, f in enumerate(FAMILIES)}

# Exponents are kept inside a signed 32-bit range; anything larger is an error.
EXPONENT_BOUND = 2**31 - 1


class WordSyntaxError(ValueError):
    """Malformed word text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownSymbolError(ValueError):
    def __init__(self, symbol: "GeneratorSymbol"):
        self.symbol = symbol
        super().__init__(f"unknown symbol {symbol}")


class AlphabetMismatchError(ValueError):
    pass


@dataclass(frozen=True, order=False)
class GeneratorSymbol:
    """A braid generator ``A_i^j``, ``B_i^j``, ``C_l^m`` or ``P_i^p``.

    ``idx1`` is the strand (``l`` for C) and ``idx2`` the handle, strand
    or puncture index.  ``barred`` marks the orbifold copy.
    """

    family: str
    idx1: int
    idx2: int
    barred: bool = False

    def __post_init__(self):
        if self.family not in _FAMILY_RANK:
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.idx1 < 1 or self.idx2 < 1:
            raise ValueError(f"indices must be positive: {self}")
        if self.family == "C" and not self.idx2 < self.idx1:
            raise ValueError(f"C[l,m] needs m < l, got {self}")

    @property
    def strands(self) -> tuple[int, ...]:
        """Strand indices this generator involves."""
        if self.family == "C":
            return (self.idx1, self.idx2)
        return (self.idx1,)

    def sort_key(self) -> tuple[int, int, int, int]:
        return (self.idx1, _FAMILY_RANK[self.family], self.idx2, int(self.barred))

    def bar(self) -> "GeneratorSymbol":
        return GeneratorSymbol(self.family, self.idx1, self.idx2, True)

    def unbar(self) -> "GeneratorSymbol":
        return GeneratorSymbol(self.family, self.idx1, self.idx2, False)

    def __lt__(self, other: "GeneratorSymbol") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"{self.family}{'b' if self.barred else ''}[{self.idx1},{self.idx2}]"

    def __repr__(self) -> str:
        return f"GeneratorSymbol({self})"


def sym(text: str) -> GeneratorSymbol:
    """Parse a single symbol such as ``"Pb[2,1]"``."""
    w = parse_word(text)
    if len(w) != 1 or w.letters[0][1] != 1:
        raise ValueError(f"not a single symbol: {text!r}")
    return w.letters[0][0]


Letter = tuple[GeneratorSymbol, int]


def _check_exp(e: int) -> int:
    if abs(e) > EXPONENT_BOUND:
        raise OverflowError(f"exponent {e} exceeds bound {EXPONENT_BOUND}")
    return e


def _reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for s, e in letters:
        if e == 0:
            continue
        if stack and stack[-1][0] == s:
            e2 = _check_exp(stack[-1][1] + e)
            stack.pop()
            if e2:
                stack.append((s, e2))
        else:
            stack.append((s, _check_exp(e)))
    return tuple(stack)


class Word:
    """Freely reduced word; the empty word is the identity."""

    __slots__ = ("letters", "_hash")

    def __init__(self, letters: Iterable[Letter] = ()):
        self.letters: tuple[Letter, ...] = _reduce(letters)
        self._hash: int | None = None

    @classmethod
    def identity(cls) -> "Word":
        return cls()

    @classmethod
    def from_symbol(cls, s: GeneratorSymbol, e: int = 1) -> "Word":
        return cls(((s, e),))

    def __len__(self) -> int:
        return len(self.letters)

    def length(self) -> int:
        """Total letter count, i.e. the sum of absolute exponents."""
        return sum(abs(e) for _, e in self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def symbols(self) -> set[GeneratorSymbol]:
        return {s for s, _ in self.letters}

    def expand(self) -> Iterator[tuple[GeneratorSymbol, int]]:
        """Yield unit letters ``(symbol, +-1)``."""
        for s, e in self.letters:
            step = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield s, step

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word((s, -e) for s, e in reversed(self.letters))

    def __invert__(self) -> "Word":
        return self.inverse()

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        out = Word()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def map_symbols(self, f) -> "Word":
        """Substitute each symbol by the Word ``f(symbol)``."""
        out: list[Letter] = []
        for s, e in self.letters:
            img = f(s)
            if e < 0:
                img = img.inverse()
            for _ in range(abs(e)):
                out.extend(img.letters)
        return Word(out)

    def exponent_sum(self, s: GeneratorSymbol) -> int:
        return sum(e for t, e in self.letters if t == s)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.letters)
        return self._hash

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


def format_word(w: Word, identity: str = "") -> str:
    if not w.letters:
        return identity
    return " ".join(str(s) if e == 1 else f"{s}^{e}" for s, e in w.letters)


_TOKEN = re.compile(r"\s*(?:(?P<fam>[ABCP]b?)\[(?P<i>[+-]?\d+)\s*,\s*(?P<j>[+-]?\d+)\](?:\^(?P<e>[+-]?\d+))?|(?P<one>1)(?![\d\[]))")


def parse_word(text: str, context=None) -> Word:
    """Parse ``text`` into a freely reduced Word.

    ``context`` may be any container of GeneratorSymbols (a Presentation
    works too); symbols outside it raise UnknownSymbolError.  A lone ``1``
    denotes the identity.
    """
    alphabet = _alphabet_of(context)
    letters: list[Letter] = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise WordSyntaxError(f"unexpected {text[pos]!r}", pos, text)
        end = m.end()
        if end < n and not text[end].isspace():
            raise WordSyntaxError(f"unexpected {text[end]!r}", end, text)
        if m.group("one"):
            pos = end
            continue
        fam = m.group("fam")
        try:
            s = GeneratorSymbol(fam[0], int(m.group("i")), int(m.group("j")), len(fam) == 2)
        except ValueError as exc:
            raise WordSyntaxError(str(exc), m.start("fam"), text) from None
        if alphabet is not None and s not in alphabet:
            raise UnknownSymbolError(s)
        e = int(m.group("e")) if m.group("e") is not None else 1
        if e == 0:
            raise WordSyntaxError("zero exponent", m.start("e"), text)
        letters.append((s, _check_exp(e)))
        pos = end
    return Word(letters)


def _alphabet_of(context) -> frozenset[GeneratorSymbol] | None:
    if context is None:
        return None
    gens = getattr(context, "alphabet", None)
    if gens is not None:
        return frozenset(gens() if callable(gens) else gens)
    return frozenset(context)


def _same_alphabet(words: Sequence[Word], alphabet) -> None:
    if alphabet is None:
        return
    allowed = _alphabet_of(alphabet)
    for w in words:
        extra = w.symbols() - allowed
        if extra:
            raise AlphabetMismatchError(f"symbols {sorted(extra)} not in alphabet")


def multiply(*words: Word, alphabet=None) -> Word:
    _same_alphabet(words, alphabet)
    out: list[Letter] = []
    for w in words:
        out.extend(w.letters)
    return Word(out)


def invert(w: Word, alphabet=None) -> Word:
    _same_alphabet((w,), alphabet)
    return w.inverse()


def conjugate(w: Word, by: Word, alphabet=None) -> Word:
    """``by * w * by^-1``."""
    _same_alphabet((w, by), alphabet)
    return by * w * by.inverse()


def commutator(u: Word, v: Word, alphabet=None) -> Word:
    """``u v u^-1 v^-1``."""
    _same_alphabet((u, v), alphabet)
    return u * v * u.inverse() * v.inverse()


def word_algebra(op: str, *args: Word, alphabet=None) -> Word:
    ops = {
        "multiply": lambda: multiply(*args, alphabet=alphabet),
        "invert": lambda: invert(*args, alphabet=alphabet),
        "conjugate": lambda: conjugate(*args, alphabet=alphabet),
        "commutator": lambda: commutator(*args, alphabet=alphabet),
    }
    if op not in ops:
        raise ValueError(f"unknown operation {op!r}")
    return ops[op]()


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return ``(core, conjugator)`` with ``w == conjugator core conjugator^-1``."""
    units = list(w.expand())
    i, j = 0, len(units) - 1
    while i < j and units[i][0] == units[j][0] and units[i][1] == -units[j][1]:
        i += 1
        j -= 1
    return Word(units[i : j + 1]), Word(units[:i])


def is_cyclically_reduced(w: Word) -> bool:
    if not w.letters:
        return True
    (s0, e0), (s1, e1) = w.letters[0], w.letters[-1]
    return not (s0 == s1 and len(w.letters) > 1 and (e0 > 0) != (e1 > 0))


def cyclic_conjugates(w: Word) -> list[Word]:
    """All rotations of a cyclically reduced word, unit-letter granularity."""
    units = [Word.from_symbol(s, e) for s, e in w.expand()]
    out = []
    for k in range(len(units)):
        out.append(Word([x.letters[0] for x in units[k:] + units[:k]]))
    return out
