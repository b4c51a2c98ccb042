"""Free-group words and finitely supported group-algebra elements.

Letters are signed integers: generator ``i`` (1-based) is ``+i`` and its
inverse is ``-i``.  In text, generator ``i`` is the ``i``-th lowercase name in
``GENERATOR_NAMES`` and its inverse is the uppercase name; ``e`` is reserved
for the identity.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

GENERATOR_NAMES = "abcdfghijklmnopqrstuvwxyz"  # no 'e'


class ParseError(ValueError):
    """Malformed word or element text; ``position`` is a 0-based index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _letter_name(letter: int) -> str:
    name = GENERATOR_NAMES[abs(letter) - 1]
    return name if letter > 0 else name.upper()


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


@dataclass(frozen=True, order=True)
class Word:
    """A freely reduced word; the empty word is the identity."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in letters):
            raise ValueError("letter 0 is not a generator")
        object.__setattr__(self, "letters", _reduce(letters))

    @classmethod
    def identity(cls) -> Word:
        return cls(())

    @classmethod
    def generator(cls, i: int) -> Word:
        return cls((i,))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __mul__(self, other: Word) -> Word:
        if not isinstance(other, Word):
            return NotImplemented
        return multiply(self, other)

    def inverse(self) -> Word:
        return invert(self)

    @property
    def rank(self) -> int:
        """Largest generator index used (0 for the identity)."""
        return max((abs(x) for x in self.letters), default=0)

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return "".join(_letter_name(x) for x in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def parse_word(text: str) -> Word:
    """Parse ``"abA"``-style text.  Whitespace is ignored; ``""``/``"e"`` is e."""
    letters = []
    for pos, ch in enumerate(text):
        if ch.isspace() or ch == "e":
            continue
        idx = GENERATOR_NAMES.find(ch.lower())
        if idx < 0:
            raise ParseError(f"unknown generator token {ch!r}", pos)
        letters.append(idx + 1 if ch.islower() else -(idx + 1))
    return Word(tuple(letters))


def multiply(u: Word, v: Word) -> Word:
    return Word(u.letters + v.letters)


def invert(w: Word) -> Word:
    return Word(tuple(-x for x in reversed(w.letters)))


def ball_words(radius: int, rank: int = 2) -> Iterator[Word]:
    """All reduced words of length <= radius, by length then lexicographically."""
    letters = [i for g in range(1, rank + 1) for i in (g, -g)]
    layer = [()]
    yield Word(())
    for _ in range(radius):
        nxt = []
        for w in layer:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        layer = nxt
        for w in layer:
            yield Word(w)


class GroupAlgebraElement(Mapping[Word, complex]):
    """Finitely supported element of C[F]; immutable, zero terms are dropped."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Word, complex] | Iterable[tuple[Word, complex]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Word, complex] = {}
        for w, c in items:
            if isinstance(w, str):
                w = parse_word(w)
            merged[w] = merged.get(w, 0j) + complex(c)
        self._terms = {w: c for w, c in sorted(merged.items()) if c != 0}

    @classmethod
    def from_word(cls, w: Word | str, coeff: complex = 1.0) -> GroupAlgebraElement:
        return cls([(w, coeff)])

    @classmethod
    def unit(cls) -> GroupAlgebraElement:
        return cls.from_word(Word())

    def __getitem__(self, w: Word) -> complex:
        return self._terms[w]

    def __iter__(self) -> Iterator[Word]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def coeff(self, w: Word | str) -> complex:
        if isinstance(w, str):
            w = parse_word(w)
        return self._terms.get(w, 0j)

    @property
    def support(self) -> tuple[Word, ...]:
        return tuple(self._terms)

    @property
    def support_radius(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    @property
    def rank(self) -> int:
        return max((w.rank for w in self._terms), default=0)

    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self._terms.values())

    def __add__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        return GroupAlgebraElement(list(self.items()) + list(other.items()))

    def __sub__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        return self + other.scale(-1)

    def scale(self, c: complex) -> GroupAlgebraElement:
        return GroupAlgebraElement([(w, c * v) for w, v in self.items()])

    def __rmul__(self, c: complex) -> GroupAlgebraElement:
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, GroupAlgebraElement):
            return convolve(self, other)
        return self.scale(other)

    def adjoint(self) -> GroupAlgebraElement:
        return adjoint(self)

    def is_self_adjoint(self, tol: float = 0.0) -> bool:
        diff = self - adjoint(self)
        return all(abs(c) <= tol for c in diff.values())

    def isclose(self, other: GroupAlgebraElement, tol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff.values())

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{_format_scalar(c)}*{w}" for w, c in self._terms.items())

    def __repr__(self) -> str:
        return f"GroupAlgebraElement({str(self)!r})"


def _format_scalar(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r}{c.imag:+}j)"


def adjoint(a: GroupAlgebraElement) -> GroupAlgebraElement:
    """(a*)_g = conj(a_{g^-1})."""
    return GroupAlgebraElement([(invert(w), c.conjugate()) for w, c in a.items()])


def convolve(a: GroupAlgebraElement, b: GroupAlgebraElement) -> GroupAlgebraElement:
    """Group-algebra product: (ab)_g = sum_h a_h b_{h^-1 g}."""
    return GroupAlgebraElement(
        [(multiply(u, v), cu * cv) for u, cu in a.items() for v, cv in b.items()]
    )


def averaging_element(rank: int = 2) -> GroupAlgebraElement:
    """(1/|S|) * sum of the symmetric generating set S = {a, a^-1, b, b^-1, ...}."""
    gens = [Word((s * g,)) for g in range(1, rank + 1) for s in (1, -1)]
    return GroupAlgebraElement([(w, 1.0 / len(gens)) for w in gens])


_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?j?")
_WORD = re.compile(r"[A-Za-z]+")


def parse_element(text: str) -> GroupAlgebraElement:
    """Parse ``"0.25*a + 0.25*A - (1+2j)*ab + b"``.

    A term is ``[sign] [scalar '*'] word``; a scalar is a real literal or a
    parenthesized Python complex literal.  Equal words are merged.
    """
    src = text
    # positions refer to the original text, so skip whitespace by hand
    i, n = 0, len(src)
    terms: list[tuple[Word, complex]] = []

    def skip_ws(j: int) -> int:
        while j < n and src[j].isspace():
            j += 1
        return j

    i = skip_ws(i)
    if i == n:
        raise ParseError("empty element", 0)
    first = True
    while True:
        i = skip_ws(i)
        sign = 1.0
        saw_op = False
        while i < n and src[i] in "+-":
            saw_op = True
            if src[i] == "-":
                sign = -sign
            i = skip_ws(i + 1)
        if not first and not saw_op:
            raise ParseError("expected '+' or '-' between terms", i)
        if i == n:
            raise ParseError("dangling operator", i)
        scalar = 1.0 + 0j
        start = i
        if src[i] == "(":
            close = src.find(")", i)
            if close < 0:
                raise ParseError("unclosed '('", i)
            try:
                scalar = complex(src[i + 1 : close].replace(" ", ""))
            except ValueError:
                raise ParseError(f"malformed scalar {src[i:close + 1]!r}", i) from None
            i = skip_ws(close + 1)
            if i >= n or src[i] != "*":
                raise ParseError("expected '*' after scalar", i)
            i = skip_ws(i + 1)
        else:
            m = _NUMBER.match(src, i)
            if m:
                try:
                    scalar = complex(m.group(0))
                except ValueError:
                    raise ParseError(f"malformed scalar {m.group(0)!r}", i) from None
                i = skip_ws(m.end())
                if i >= n or src[i] != "*":
                    raise ParseError("expected '*' after scalar", i)
                i = skip_ws(i + 1)
        m = _WORD.match(src, i)
        if not m:
            raise ParseError("expected a word", i if i < n else start)
        try:
            word = parse_word(m.group(0))
        except ParseError as exc:
            raise ParseError(f"unknown generator token in {m.group(0)!r}", i + exc.position) from None
        terms.append((word, sign * scalar))
        i = skip_ws(m.end())
        first = False
        if i == n:
            break
        if src[i] not in "+-":
            raise ParseError(f"unexpected character {src[i]!r}", i)
    return GroupAlgebraElement(terms)


def random_element(rng, radius: int = 2, terms: int = 4, rank: int = 2, complex_coeffs: bool = True):
    """Random element with support in the ball of the given radius (for tests/demos)."""
    words = list(ball_words(radius, rank))
    idx = rng.choice(len(words), size=min(terms, len(words)), replace=False)
    out = []
    for j in idx:
        c = rng.normal()
        if complex_coeffs:
            c = c + 1j * rng.normal()
        out.append((words[int(j)], c))
    return GroupAlgebraElement(out)


def kesten_norm(rank: int = 2) -> float:
    """Regular-representation norm of the averaging element of F_rank."""
    return math.sqrt(2 * rank - 1) / rank
