"""Exact arithmetic and twisted conjugacy for the solvable groups Gamma(S)."""

from .algebra import INFINITE, NotInRing, coker_cardinality, is_unit, loc_normalize, smith
from .group import Element, GroupSpec, ParseError, evaluate, parse_word
from .morphism import (
    Endomorphism,
    identity_endo,
    inner_endo,
    is_automorphism_candidate,
    make_endo,
    validate,
    validated,
)
from .twisted import certify_r_infinite, reidemeister_abelian, reidemeister_on_A, twisted_act

__version__ = "0.1.0"
