"""Endomorphisms of Gamma(S) given by images of the generators.

An endomorphism is determined by ``phi(a) = a^r`` and
``phi(ti) = a^qi t^wi``. The image of ``a`` always has height zero: the
relator ``ti^-1 a ti = a^ni`` forces ``h = ni * h`` for the height ``h`` of
``phi(a)``, so the parameterization loses nothing.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from . import group as G
from .algebra import (
    IntMatrix,
    Localized,
    as_matrix,
    check_in_ring,
    determinant,
    is_unit,
    parse_localized,
)
from .group import Element, GroupSpec, Word

__all__ = [
    "CandidateReport",
    "Endomorphism",
    "ForcedResult",
    "ImageNotInA",
    "InvalidEndomorphism",
    "RelatorCheck",
    "Unvalidated",
    "ValidationReport",
    "ZeroScalar",
    "apply",
    "apply_word",
    "compose",
    "endo_from_json",
    "endo_from_words",
    "endo_to_json",
    "forced_heights",
    "identity_endo",
    "induced_matrix",
    "inner_endo",
    "is_automorphism_candidate",
    "make_endo",
    "restrict_to_A",
    "validate",
    "validated",
]


class Unvalidated(ValueError):
    """The operation needs an endomorphism that passed :func:`validate`."""


class InvalidEndomorphism(ValueError):
    def __init__(self, report: "ValidationReport"):
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        super().__init__(f"relators not preserved: {failed}")
        self.report = report


class ImageNotInA(ValueError):
    pass


class ZeroScalar(ValueError):
    pass


@dataclass(frozen=True)
class Endomorphism:
    spec: GroupSpec
    r: Localized
    images: tuple[Element, ...]
    validated: bool = False

    @property
    def image_a(self) -> Element:
        return Element(self.r, self.spec.zero())

    @property
    def image_t(self) -> tuple[Element, ...]:
        return self.images

    def image(self, gen: int) -> Element:
        """Image of generator ``gen`` (0 for ``a``, i for ``ti``)."""
        return self.image_a if gen == 0 else self.images[gen - 1]

    def require_validated(self):
        if not self.validated:
            raise Unvalidated("endomorphism has not been validated")


def make_endo(spec: GroupSpec, r, images: Sequence[tuple]) -> Endomorphism:
    """Unvalidated endomorphism with ``a -> a^r`` and ``ti -> a^qi t^wi``."""
    if len(images) != spec.k:
        raise ValueError(f"need {spec.k} generator images, got {len(images)}")
    elems = []
    for q, w in images:
        w = tuple(w)
        if len(w) != spec.k:
            raise ValueError(f"height vector {w} must have length {spec.k}")
        elems.append(Element(check_in_ring(q, spec), w))
    return Endomorphism(spec, check_in_ring(r, spec), tuple(elems))


def endo_from_words(spec: GroupSpec, a_image: Word, t_images: Sequence[Word]) -> Endomorphism:
    """Build from arbitrary words; the image of ``a`` must land in A."""
    ga = G.evaluate(a_image, spec)
    if not G.in_A(ga):
        raise ImageNotInA(f"image of a has height {list(ga.v)}; no endomorphism can do that")
    ts = [G.evaluate(w, spec) for w in t_images]
    return make_endo(spec, ga.q, [(g.q, g.v) for g in ts])


def identity_endo(spec: GroupSpec) -> Endomorphism:
    e = make_endo(spec, 1, [(0, spec.unit_vector(i)) for i in range(spec.k)])
    return replace(e, validated=True)


def inner_endo(spec: GroupSpec, by: Element) -> Endomorphism:
    """``g -> by^-1 g by``."""
    ga = G.conjugate(spec, Element(1, spec.zero()), by)
    ts = [G.conjugate(spec, G.t_power(spec, i), by) for i in range(spec.k)]
    return validated(make_endo(spec, ga.q, [(g.q, g.v) for g in ts]))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class RelatorCheck:
    name: str
    lhs: Element
    rhs: Element
    discrepancy: Element  # lhs * rhs^-1

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class ValidationReport:
    endomorphism: Endomorphism
    checks: tuple[RelatorCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "relators": [
                {
                    "relator": c.name,
                    "passed": c.passed,
                    "lhs": G.element_to_json(c.lhs),
                    "rhs": G.element_to_json(c.rhs),
                    "discrepancy": G.element_to_json(c.discrepancy),
                }
                for c in self.checks
            ],
        }


def validate(e: Endomorphism) -> ValidationReport:
    """Evaluate every defining relator on the generator images.

    If all pass, the report's ``endomorphism`` is the validated copy.
    """
    spec = e.spec
    checks = []

    def record(name, lhs, rhs):
        disc = G.mul(spec, lhs, G.inverse(spec, rhs))
        checks.append(RelatorCheck(name, lhs, rhs, disc))

    for i in range(spec.k):
        for j in range(i + 1, spec.k):
            ti, tj = e.images[i], e.images[j]
            record(f"t{i + 1} t{j + 1} = t{j + 1} t{i + 1}", G.mul(spec, ti, tj), G.mul(spec, tj, ti))
    phi_a = e.image_a
    for i, n in enumerate(spec.exponents):
        lhs = G.conjugate(spec, phi_a, e.images[i])
        record(f"t{i + 1}^-1 a t{i + 1} = a^{n}", lhs, G.power(spec, phi_a, n))

    report = ValidationReport(e, tuple(checks))
    if report.ok and not e.validated:
        report = ValidationReport(replace(e, validated=True), report.checks)
    return report


def validated(e: Endomorphism) -> Endomorphism:
    """Validated copy of ``e``; raises InvalidEndomorphism on a failed relator."""
    if e.validated:
        return e
    report = validate(e)
    if not report.ok:
        raise InvalidEndomorphism(report)
    return report.endomorphism


# ---------------------------------------------------------------------------
# forced heights


@dataclass(frozen=True)
class ForcedResult:
    """Solutions of ``prod_j nj^wj = ni`` and the verdict on candidate heights.

    ``solutions[i]`` is the unique solution for ``ti`` when ``unique`` is set.
    ``candidates[i]`` is ``True`` when the i-th supplied vector solves its
    equation.
    """

    unique: bool
    solutions: tuple[tuple[int, ...], ...]
    candidates: tuple[bool, ...]

    @property
    def status(self) -> str:
        return "UNIQUE" if self.unique and all(self.candidates) else "REJECTED"


def _valuation_matrix(spec: GroupSpec):
    primes = sorted(spec.prime_factors)
    rows = []
    for p in primes:
        row = []
        for n in spec.exponents:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            row.append(e)
        rows.append(row)
    return primes, rows


def _solve_exponents(spec: GroupSpec, target: int) -> tuple[bool, Optional[tuple[int, ...]]]:
    """Integer solutions w of prod nj^wj = target: (unique?, solution or None).

    Taking p-adic valuations turns the equation into the integer linear
    system ``V w = val(target)`` over the primes dividing N; the solution is
    unique iff ``V`` has full column rank.
    """
    primes, V = _valuation_matrix(spec)
    rhs = []
    rest = target
    for p in primes:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        rhs.append(e)
    if rest != 1:
        return True, None
    # Gaussian elimination over Q on the augmented system
    k = spec.k
    rows = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(V, rhs)]
    pivots = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        rows[r] = [x / rows[r][c] for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] != 0 for row in rows[r:]):
        return len(pivots) == k, None
    if len(pivots) < k:
        return False, None
    sol = [Fraction(0)] * k
    for i, c in enumerate(pivots):
        sol[c] = rows[i][-1]
    if any(x.denominator != 1 for x in sol):
        return True, None
    return True, tuple(int(x) for x in sol)


def forced_heights(spec: GroupSpec, r, ws: Sequence[Sequence[int]]) -> ForcedResult:
    """Which height vectors ``wi`` can ``phi(ti)`` carry when ``r != 0``?

    The conjugation relator reads ``r * n^wi = r * ni``, i.e.
    ``prod_j nj^wij = ni``. For pairwise coprime ``nj >= 2`` the only
    solution is ``wi = ei``. ``ws`` may list candidates for a prefix of the
    generators.
    """
    if Fraction(r) == 0:
        raise ZeroScalar("r = 0 kills A; the heights are unconstrained")
    if len(ws) > spec.k:
        raise ValueError(f"at most {spec.k} candidate vectors")
    unique = True
    solutions = []
    for n in spec.exponents:
        u, sol = _solve_exponents(spec, n)
        unique &= u and sol is not None
        solutions.append(sol)
    candidates = tuple(
        len(w) == spec.k and spec.scale(w) == spec.exponents[i] for i, w in enumerate(ws)
    )
    return ForcedResult(unique, tuple(solutions), candidates)


# ---------------------------------------------------------------------------
# derived data


def induced_matrix(e: Endomorphism) -> IntMatrix:
    """The map on Z^k = Gamma(S)/A; row i is the height of ``phi(ti)``."""
    e.require_validated()
    return as_matrix([g.v for g in e.images])


def restrict_to_A(e: Endomorphism) -> Localized:
    """The scalar ``r``: ``phi`` acts on A = Z[1/N] as ``x -> r x``."""
    e.require_validated()
    return e.r


def apply(e: Endomorphism, g: Element) -> Element:
    """``phi(a^q t^v) = a^(r q) * phi(t^v)``."""
    e.require_validated()
    return G.mul(e.spec, Element(e.r * g.q, e.spec.zero()), _image_of_height(e, g.v))


@lru_cache(maxsize=8192)
def _image_of_height(e: Endomorphism, v: tuple[int, ...]) -> Element:
    """``phi(t^v) = prod phi(ti)^vi``; depends only on the height, so it is memoised."""
    spec = e.spec
    out = G.identity(spec)
    for img, x in zip(e.images, v):
        if x:
            out = G.mul(spec, out, img if x == 1 else G.power(spec, img, x))
    return out


def apply_word(e: Endomorphism, w: Word) -> Element:
    """Evaluate ``w`` with each letter replaced by its image."""
    e.require_validated()
    spec = e.spec
    return G.product(spec, (G.power(spec, e.image(gen), x) for gen, x in w.letters))


def compose(e1: Endomorphism, e2: Endomorphism) -> Endomorphism:
    """``e1 o e2`` (apply ``e2`` first)."""
    e1.require_validated()
    e2.require_validated()
    if e1.spec != e2.spec:
        raise ValueError("endomorphisms of different groups")
    ga = apply(e1, e2.image_a)
    ts = [apply(e1, g) for g in e2.images]
    return validated(make_endo(e1.spec, ga.q, [(g.q, g.v) for g in ts]))


@dataclass(frozen=True)
class CandidateReport:
    unit_scalar: bool
    invertible_matrix: bool
    inverse: Optional[Endomorphism] = None
    inverse_checked: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return self.unit_scalar and self.invertible_matrix and self.inverse_checked

    def to_json(self) -> dict:
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "unit_scalar": self.unit_scalar,
            "invertible_matrix": self.invertible_matrix,
            "inverse": endo_to_json(self.inverse) if self.inverse is not None else None,
            "inverse_checked": self.inverse_checked,
            "notes": list(self.notes),
        }


def _integer_inverse(M: IntMatrix) -> IntMatrix:
    """Inverse of a unimodular matrix via the adjugate."""
    k = len(M)
    det = determinant(M)

    def minor(i, j):
        return [row[:j] + row[j + 1:] for r, row in enumerate(M) if r != i]

    adj = [[(-1) ** (i + j) * determinant(minor(j, i)) for j in range(k)] for i in range(k)]
    return as_matrix([[x // det for x in row] for row in adj])


def is_automorphism_candidate(e: Endomorphism) -> CandidateReport:
    """Check ``r`` is a unit and the height matrix is in GL_k(Z); build the inverse.

    The inverse sends ``a -> a^(1/r)`` and ``ti -> a^pi t^ui`` with ``ui``
    the rows of the inverse matrix and ``pi`` chosen so that
    ``phi(a^pi t^ui) = ti``. It is validated and composed with ``e`` in both
    orders before the candidate passes.
    """
    e.require_validated()
    spec = e.spec
    unit = is_unit(e.r, spec)
    M = induced_matrix(e)
    invertible = abs(determinant(M)) == 1
    notes = []
    if not unit:
        notes.append(f"r = {e.r} is not a unit of Z[1/N]")
    if not invertible:
        notes.append("height matrix is not in GL_k(Z)")
    if not (unit and invertible):
        return CandidateReport(unit, invertible, notes=tuple(notes))

    Minv = _integer_inverse(M)
    images = []
    for u in Minv:
        c = apply(e, Element(0, u))  # = (c, ei)
        images.append((-c.q / e.r, u))
    inv = make_endo(spec, 1 / e.r, images)
    report = validate(inv)
    checked = False
    if report.ok:
        inv = report.endomorphism
        ident = identity_endo(spec)
        both = (compose(e, inv), compose(inv, e))
        checked = all(c.r == ident.r and c.images == ident.images for c in both)
    if not checked:
        notes.append("constructed inverse failed verification")
    return CandidateReport(unit, invertible, inv if checked else None, checked, tuple(notes))


# ---------------------------------------------------------------------------
# JSON


def endo_to_json(e: Endomorphism) -> dict:
    return {
        "S": e.spec.to_json(),
        "r": str(e.r),
        "images": [{"q": str(g.q), "w": list(g.v)} for g in e.images],
    }


def endo_from_json(obj, spec: GroupSpec) -> Endomorphism:
    """Parse ``{"r": "1/2", "images": [{"q": "3", "w": [1, 0]}, ...]}``.

    An optional ``"S"`` entry must agree with ``spec``.
    """
    if not isinstance(obj, dict):
        raise ValueError("endomorphism must be a JSON object")
    if "S" in obj and list(obj["S"]) != list(spec.exponents):
        raise ValueError(f"file is for S={obj['S']}, but S={list(spec.exponents)} was given")
    for key in ("r", "images"):
        if key not in obj:
            raise ValueError(f"missing key {key!r}")
    images = obj["images"]
    if not isinstance(images, list) or len(images) != spec.k:
        raise ValueError(f"'images' must list {spec.k} generator images")
    pairs = []
    for img in images:
        if not isinstance(img, dict) or "q" not in img or "w" not in img:
            raise ValueError("each image needs 'q' and 'w'")
        w = img["w"]
        if not isinstance(w, list) or len(w) != spec.k or not all(isinstance(x, int) for x in w):
            raise ValueError(f"'w' must be a list of {spec.k} integers")
        pairs.append((parse_localized(img["q"], spec), tuple(w)))
    return make_endo(spec, parse_localized(obj["r"], spec), pairs)


def content_hash(obj) -> str:
    """sha256 of the canonical JSON encoding."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()

