"""Exact arithmetic in Z[1/N] and Smith normal form over Z.

Elements of the localized ring are plain :class:`fractions.Fraction` values.
Membership in Z[1/N] is checked once, at construction time, by
:func:`loc_normalize`; the ring is closed under ``+``, ``-`` and ``*`` so
sums and products of members need no further checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

__all__ = [
    "INFINITE",
    "Cardinal",
    "IntMatrix",
    "Localized",
    "NotInRing",
    "SmithForm",
    "coker_cardinality",
    "determinant",
    "identity_matrix",
    "is_unit",
    "loc_add",
    "loc_mul",
    "loc_normalize",
    "n_coprime_part",
    "parse_localized",
    "prime_factors",
    "smith",
    "smith_transform",
]

Localized = Fraction
IntMatrix = tuple[tuple[int, ...], ...]


class NotInRing(ValueError):
    """A denominator has a prime factor that does not divide N."""


class _Infinite:
    """The cardinal of an infinite set. Compares greater than every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __str__(self):
        return "infinite"

    def __reduce__(self):
        return (_Infinite, ())

    def __gt__(self, other):
        return isinstance(other, int)

    def __ge__(self, other):
        return self is other or isinstance(other, int)

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return self is other


INFINITE = _Infinite()
Cardinal = Union[int, _Infinite]


@lru_cache(maxsize=None)
def prime_factors(n: int) -> frozenset[int]:
    """Distinct prime factors of ``|n|`` by trial division (0 and ±1 have none)."""
    n = abs(n)
    primes = set()
    p = 2
    while p * p <= n:
        if n % p == 0:
            primes.add(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        primes.add(n)
    return frozenset(primes)


def n_coprime_part(x: int, primes) -> int:
    """Strip every prime in ``primes`` from ``|x|``."""
    x = abs(x)
    for p in primes:
        while x and x % p == 0:
            x //= p
    return x


def _primes_of(ring) -> frozenset[int]:
    # accepts a GroupSpec, anything exposing prime_factors, or a bare N
    if isinstance(ring, int):
        return prime_factors(ring)
    return ring.prime_factors


def loc_normalize(num: int, den: int, ring) -> Localized:
    """Reduce ``num/den`` and check it lies in Z[1/N].

    ``ring`` is a GroupSpec (or any object with ``prime_factors``) or the
    integer N itself.

    >>> loc_normalize(4, 6, 6)
    Fraction(2, 3)
    """
    if den == 0:
        raise ZeroDivisionError("denominator is zero")
    x = Fraction(num, den)
    if n_coprime_part(x.denominator, _primes_of(ring)) != 1:
        raise NotInRing(f"{x} is not in Z[1/N]: denominator has a prime not dividing N")
    return x


def check_in_ring(x, ring) -> Localized:
    x = Fraction(x)
    return loc_normalize(x.numerator, x.denominator, ring)


def parse_localized(text, ring) -> Localized:
    """Parse ``"3"``, ``"-1/2"`` or an int into an element of Z[1/N]."""
    if isinstance(text, bool):
        raise TypeError("booleans are not ring elements")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise TypeError(f"expected a 'num/den' string or int, got {type(text).__name__}")
    try:
        x = Fraction(text.strip())
    except ValueError:
        raise ValueError(f"not an exact fraction: {text!r}") from None
    if "." in text or "e" in text.lower():
        raise ValueError(f"use 'num/den' notation, not decimals: {text!r}")
    return check_in_ring(x, ring)


def loc_add(x: Localized, y: Localized) -> Localized:
    return x + y


def loc_mul(x: Localized, y: Localized) -> Localized:
    return x * y


def is_unit(x: Localized, ring) -> bool:
    """True iff ``x`` is invertible in Z[1/N]."""
    x = Fraction(x)
    if x == 0:
        return False
    return n_coprime_part(x.numerator, _primes_of(ring)) == 1


# ---------------------------------------------------------------------------
# integer matrices


def as_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    m = tuple(tuple(int(a) for a in row) for row in rows)
    k = len(m)
    if any(len(row) != k for row in m):
        raise ValueError("matrix must be square")
    return m


def identity_matrix(k: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(k)) for i in range(k))


def determinant(M: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = [list(row) for row in M]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for c in range(n - 1):
        if a[c][c] == 0:
            swap = next((r for r in range(c + 1, n) if a[r][c] != 0), None)
            if swap is None:
                return 0
            a[c], a[swap] = a[swap], a[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                a[r][j] = (a[r][j] * a[c][c] - a[r][c] * a[c][j]) // prev
        prev = a[c][c]
    return sign * a[-1][-1]


@dataclass(frozen=True)
class SmithForm:
    """Invariant factors ``d1 | d2 | ... | dk``, all non-negative."""

    diag: tuple[int, ...]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d != 0)


def smith_transform(M: Sequence[Sequence[int]]):
    """Diagonalize ``M`` by unimodular row and column operations.

    Returns ``(D, U, V)`` with ``U @ M @ V == D``, ``D`` diagonal with
    non-negative entries forming a divisibility chain, and ``U``, ``V``
    unimodular. Pivots on the smallest nonzero entry of the active block.
    """
    A = [list(row) for row in as_matrix(M)]
    n = len(A)
    U = [list(row) for row in identity_matrix(n)]
    V = [list(row) for row in identity_matrix(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for X in (A, V):
            for row in X:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):  # row dst += c * row src
        for X in (A, U):
            X[dst] = [a + c * b for a, b in zip(X[dst], X[src])]

    def add_col(dst, src, c):  # col dst += c * col src
        for X in (A, V):
            for row in X:
                row[dst] += c * row[src]

    for t in range(n):
        while True:
            entries = [(abs(A[i][j]), i, j) for i in range(t, n) for j in range(t, n) if A[i][j]]
            if not entries:
                break
            _, pi, pj = min(entries)
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = A[t][t]
            dirty = False
            for i in range(t + 1, n):
                q = A[i][t] // p
                if q:
                    add_row(i, t, -q)
                dirty |= A[i][t] != 0
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    add_col(j, t, -q)
                dirty |= A[t][j] != 0
            if dirty:
                continue
            # pivot must divide the rest of the block
            bad = next(
                ((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            U[t] = [-a for a in U[t]]
            A[t] = [-a for a in A[t]]

    D = tuple(A[i][i] for i in range(n))
    return D, as_matrix(U), as_matrix(V)


def smith(M: Sequence[Sequence[int]]) -> SmithForm:
    """Invariant factors of a square integer matrix.

    >>> smith([[2, 0], [0, 3]]).diag
    (1, 6)
    """
    D, _, _ = smith_transform(M)
    return SmithForm(D)


def coker_cardinality(M: Sequence[Sequence[int]]) -> Cardinal:
    """Order of Z^k / M Z^k, or INFINITE when ``M`` is singular."""
    diag = smith(M).diag
    if any(d == 0 for d in diag):
        return INFINITE
    return math.prod(diag)
