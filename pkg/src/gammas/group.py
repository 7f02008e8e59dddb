"""The groups Gamma(S) = <a, t1..tk | ti tj = tj ti, ti^-1 a ti = a^ni>.

Every element is stored in the normal form ``a^q t1^v1 ... tk^vk`` with
``q`` in Z[1/N] and ``v`` in Z^k, i.e. as a point of Z[1/N] x| Z^k. The law

    (q1, v1) * (q2, v2) = (q1 + q2 * n^-v1, v1 + v2),   n^v = prod ni^vi,

is forced by ``t a t^-1 = a^(1/n)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from .algebra import Localized, check_in_ring, parse_localized, prime_factors

__all__ = [
    "Element",
    "GroupSpec",
    "InvalidGroupSpec",
    "ParseError",
    "Word",
    "conjugate",
    "element_from_json",
    "element_to_json",
    "evaluate",
    "format_word",
    "height",
    "identity",
    "inverse",
    "mul",
    "parse_word",
    "power",
    "relators",
]


class InvalidGroupSpec(ValueError):
    pass


class ParseError(ValueError):
    """Malformed word; ``position`` is the 0-based offset of the bad token."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position
        self.text = text

    def caret(self) -> str:
        return f"{self.text}\n{' ' * self.position}^"


@dataclass(frozen=True)
class GroupSpec:
    """The set S = {n1, ..., nk} defining Gamma(S).

    Entries must be pairwise coprime and at least 2; order is kept, since
    ``ti`` is the generator paired with the i-th entry.
    """

    exponents: tuple[int, ...]

    def __post_init__(self):
        ns = tuple(int(n) for n in self.exponents)
        object.__setattr__(self, "exponents", ns)
        if not ns:
            raise InvalidGroupSpec("S must be non-empty")
        for n in ns:
            if n < 2:
                raise InvalidGroupSpec(f"every n_i must be >= 2, got {n}")
        for x, y in combinations(ns, 2):
            if math.gcd(x, y) != 1:
                raise InvalidGroupSpec(f"{x} and {y} are not coprime")

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """``"2,3"`` -> GroupSpec((2, 3))."""
        try:
            ns = tuple(int(p) for p in re.split(r"[,\s]+", text.strip()) if p)
        except ValueError:
            raise InvalidGroupSpec(f"not a comma-separated list of integers: {text!r}") from None
        return cls(ns)

    @property
    def k(self) -> int:
        return len(self.exponents)

    @cached_property
    def N(self) -> int:
        return math.prod(self.exponents)

    @cached_property
    def prime_factors(self) -> frozenset[int]:
        return prime_factors(self.N)

    def scale(self, v: Sequence[int]) -> Fraction:
        """n^v = prod ni^vi as an exact fraction."""
        return _scale(self.exponents, tuple(v))

    def unit_vector(self, i: int) -> tuple[int, ...]:
        return tuple(int(j == i) for j in range(self.k))

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.k

    def to_json(self) -> list[int]:
        return list(self.exponents)


@lru_cache(maxsize=4096)
def _scale(exponents: tuple[int, ...], v: tuple[int, ...]) -> Fraction:
    num = den = 1
    for n, e in zip(exponents, v):
        if e >= 0:
            num *= n**e
        else:
            den *= n ** (-e)
    return Fraction(num, den)


@dataclass(frozen=True)
class Element:
    """``a^q t^v``. Equality is coordinate equality (the normal form is unique)."""

    q: Localized
    v: tuple[int, ...]

    def __post_init__(self):
        if type(self.q) is not Fraction:
            object.__setattr__(self, "q", Fraction(self.q))
        if type(self.v) is not tuple or not all(type(x) is int for x in self.v):
            object.__setattr__(self, "v", tuple(int(x) for x in self.v))

    def __str__(self):
        return f"({self.q}, {list(self.v)})"


def identity(spec: GroupSpec) -> Element:
    return Element(Fraction(0), spec.zero())


def a_power(spec: GroupSpec, q) -> Element:
    return Element(check_in_ring(q, spec), spec.zero())


def t_power(spec: GroupSpec, i: int, e: int = 1) -> Element:
    """``t_{i+1}^e`` (``i`` is 0-based)."""
    v = [0] * spec.k
    v[i] = e
    return Element(Fraction(0), tuple(v))


def mul(spec: GroupSpec, g: Element, h: Element) -> Element:
    q = g.q
    if h.q:
        q = q + h.q * _scale(spec.exponents, tuple(-x for x in g.v))
    return Element(q, tuple(x + y for x, y in zip(g.v, h.v)))


def inverse(spec: GroupSpec, g: Element) -> Element:
    return Element(-g.q * spec.scale(g.v), tuple(-x for x in g.v))


def power(spec: GroupSpec, g: Element, e: int) -> Element:
    """``g^e``: ``(q, w)^e = (q (1 + s + ... + s^(e-1)), e w)`` with ``s = n^-w``.

    The geometric sum is ``(1 - s^e) / (1 - s)`` for every integer ``e``
    when ``s != 1``.
    """
    s = _scale(spec.exponents, tuple(-x for x in g.v))
    q = g.q * e if s == 1 else g.q * (1 - s**e) / (1 - s)
    return Element(q, tuple(e * x for x in g.v))


def product(spec: GroupSpec, elements: Iterable[Element]) -> Element:
    result = identity(spec)
    for g in elements:
        result = mul(spec, result, g)
    return result


def conjugate(spec: GroupSpec, g: Element, by: Element) -> Element:
    """``by^-1 g by``."""
    return mul(spec, mul(spec, inverse(spec, by), g), by)


def height(g: Element) -> tuple[int, ...]:
    """The height map onto Z^k: exponent sums of the ti. Its kernel is A."""
    return g.v


def in_A(g: Element) -> bool:
    return not any(g.v)


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    """Sequence of ``(generator, exponent)``; generator 0 is ``a``, i >= 1 is ``ti``."""

    letters: tuple[tuple[int, int], ...] = field(default=())

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return format_word(self)


_TOKEN = re.compile(r"(?:(a)|t(\d+))(?:\^([+-]?\d+))?$")


def parse_word(text: str, spec: GroupSpec) -> Word:
    """Parse whitespace-separated tokens ``a``, ``t1``..``tk`` with optional ``^<int>``.

    >>> parse_word("a t1^-1", GroupSpec((2,))).letters
    ((0, 1), (1, -1))
    """
    letters = []
    for m in re.finditer(r"\S+", text):
        tok = _TOKEN.match(m.group())
        if tok is None:
            raise ParseError(f"unknown symbol {m.group()!r}", m.start(), text)
        gen = 0 if tok.group(1) else int(tok.group(2))
        if gen == 0 and tok.group(2) is not None:
            raise ParseError(f"unknown symbol {m.group()!r}", m.start(), text)
        if not 0 <= gen <= spec.k:
            raise ParseError(f"generator t{gen} out of range 1..{spec.k}", m.start(), text)
        exp = int(tok.group(3)) if tok.group(3) is not None else 1
        if exp:
            letters.append((gen, exp))
    return Word(tuple(letters))


def format_word(w: Word) -> str:
    out = []
    for gen, exp in w.letters:
        name = "a" if gen == 0 else f"t{gen}"
        out.append(name if exp == 1 else f"{name}^{exp}")
    return " ".join(out)


def letter_element(spec: GroupSpec, gen: int, exp: int) -> Element:
    if gen == 0:
        return Element(Fraction(exp), spec.zero())
    return t_power(spec, gen - 1, exp)


def evaluate(w: Word, spec: GroupSpec) -> Element:
    """Normal form of the element a word represents."""
    return product(spec, (letter_element(spec, g, e) for g, e in w.letters))


def _valuation(x: int, p: int) -> int:
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


def normal_form_word(g: Element, spec: GroupSpec) -> Word:
    """A word for ``g``: ``t^u a^y t^-u t^v`` with ``y = q n^u`` an integer."""
    den = g.q.denominator
    u = []
    for n in spec.exponents:
        need = 0
        for p in prime_factors(n):
            need = max(need, -(-_valuation(den, p) // _valuation(n, p)))
        u.append(need)
    y = g.q * spec.scale(u)
    assert y.denominator == 1
    letters = [(i + 1, e) for i, e in enumerate(u) if e]
    if y:
        letters.append((0, int(y)))
    letters += [(i + 1, -e) for i, e in enumerate(u) if e]
    tail = [(i + 1, e) for i, e in enumerate(g.v) if e]
    if y == 0:
        letters = []
    return Word(tuple(letters + tail))


def relators(spec: GroupSpec) -> list[tuple[str, Word]]:
    """The defining relators as words that must evaluate to the identity."""
    out = []
    for i, j in combinations(range(1, spec.k + 1), 2):
        out.append((f"[t{i},t{j}]", Word(((i, 1), (j, 1), (i, -1), (j, -1)))))
    for i, n in enumerate(spec.exponents, start=1):
        out.append((f"t{i}^-1 a t{i} a^-{n}", Word(((i, -1), (0, 1), (i, 1), (0, -n)))))
    return out


# ---------------------------------------------------------------------------
# JSON


def element_to_json(g: Element) -> dict:
    return {"q": str(g.q), "v": list(g.v)}


def element_from_json(obj, spec: GroupSpec) -> Element:
    if not isinstance(obj, dict) or "q" not in obj or "v" not in obj:
        raise ValueError("element must be an object with 'q' and 'v'")
    v = obj["v"]
    if not isinstance(v, list) or len(v) != spec.k or not all(isinstance(x, int) for x in v):
        raise ValueError(f"'v' must be a list of {spec.k} integers")
    return Element(parse_localized(obj["q"], spec), tuple(v))
