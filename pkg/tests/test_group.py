from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gammas import group as G
from gammas.group import Element, GroupSpec, InvalidGroupSpec, ParseError, Word, evaluate, parse_word
from oracles import rewrite_eval
from strategies import elements, words

S1 = GroupSpec((2,))
S23 = GroupSpec((2, 3))


def E(q, v):
    return Element(Fraction(q), tuple(v))


class TestGroupSpec:
    def test_basic(self):
        spec = GroupSpec((2, 9))
        assert spec.k == 2 and spec.N == 18
        assert spec.prime_factors == {2, 3}

    @pytest.mark.parametrize("bad", [(), (1,), (0, 3), (2, 4), (6, 10, 7)])
    def test_rejects(self, bad):
        with pytest.raises(InvalidGroupSpec):
            GroupSpec(bad)

    def test_parse(self):
        assert GroupSpec.parse("5, 6,7") == GroupSpec((5, 6, 7))
        with pytest.raises(InvalidGroupSpec):
            GroupSpec.parse("2,x")


class TestParse:
    def test_letters(self):
        assert parse_word("a t1^-1", S1).letters == ((0, 1), (1, -1))

    def test_empty(self):
        assert parse_word("", S23) == Word()
        assert parse_word("   ", S23) == Word()

    def test_zero_exponent_dropped(self):
        assert parse_word("a^0 t1", S1).letters == ((1, 1),)

    @pytest.mark.parametrize(
        "text, pos",
        [("t3 a", 0), ("a b", 2), ("a t1^x", 2), ("a0", 0), ("t0", 0), ("a t1^", 2)],
    )
    def test_errors_carry_position(self, text, pos):
        with pytest.raises(ParseError) as info:
            parse_word(text, S23)
        assert info.value.position == pos
        assert info.value.caret().splitlines()[1] == " " * pos + "^"

    def test_round_trip(self):
        w = parse_word("t1^2 a t2^-3 a^-1", S23)
        assert parse_word(G.format_word(w), S23) == w


@pytest.mark.parametrize(
    "spec, text, expected",
    [
        (S1, "t1^-1 a t1", E(2, [0])),
        (S1, "t1 a t1^-1", E(Fraction(1, 2), [0])),
        (S23, "a t1 a t2", E(Fraction(3, 2), [1, 1])),
        (S23, "", E(0, [0, 0])),
    ],
)
def test_evaluate_examples(spec, text, expected):
    w = parse_word(text, spec)
    q, v = rewrite_eval(spec.exponents, w.letters)
    assert (q, v) == (expected.q, expected.v)
    assert evaluate(w, spec) == expected


def test_mul_examples():
    a, t = E(1, [0]), E(0, [1])
    assert G.mul(S1, E(0, [-1]), G.mul(S1, a, t)) == E(2, [0])
    g = E(Fraction(5, 4), [3])
    assert G.mul(S1, g, G.identity(S1)) == g
    assert G.mul(S23, E(1, [1, 0]), E(1, [0, 1])) == E(Fraction(3, 2), [1, 1])


def test_inverse_examples():
    assert G.inverse(S1, G.identity(S1)) == G.identity(S1)
    assert G.inverse(S1, E(1, [0])) == E(-1, [0])
    assert G.inverse(S1, E(1, [1])) == E(-2, [-1])


def test_height_examples():
    assert G.height(E(1, [0, 0])) == (0, 0)
    assert G.height(G.t_power(S23, 1)) == (0, 1)
    assert G.height(evaluate(parse_word("t1^2 a t1^-1 t2", S23), S23)) == (1, 1)


def test_conjugate_examples():
    assert G.conjugate(S1, E(1, [0]), G.t_power(S1, 0)) == E(2, [0])
    g = E(Fraction(7, 3), [2, -1])
    assert G.conjugate(S23, g, G.identity(S23)) == g
    assert G.conjugate(S23, E(1, [0, 0]), E(Fraction(5, 2), [1, 1])) == E(6, [0, 0])


@pytest.mark.parametrize("S", [(2,), (3,), (2, 3), (2, 9), (5, 6, 7)])
def test_relators_are_trivial(S):
    spec = GroupSpec(S)
    for name, w in G.relators(spec):
        assert evaluate(w, spec) == G.identity(spec), name
        assert rewrite_eval(S, w.letters) == (0, (0,) * spec.k)


# --- properties ---------------------------------------------------------------


@given(words(S23), words(S23))
def test_evaluate_is_homomorphism(w1, w2):
    assert evaluate(w1 + w2, S23) == G.mul(S23, evaluate(w1, S23), evaluate(w2, S23))


@given(words(S23))
def test_evaluate_matches_matrix_oracle(w):
    g = evaluate(w, S23)
    assert (g.q, g.v) == rewrite_eval(S23.exponents, w.letters)


@given(elements(S23), elements(S23), elements(S23))
def test_associative(g, h, k):
    assert G.mul(S23, G.mul(S23, g, h), k) == G.mul(S23, g, G.mul(S23, h, k))


@given(elements(S23))
def test_inverse_two_sided(g):
    e = G.identity(S23)
    assert G.mul(S23, g, G.inverse(S23, g)) == e == G.mul(S23, G.inverse(S23, g), g)


@given(elements(S23), elements(S23))
def test_height_homomorphism(g, h):
    assert G.height(G.mul(S23, g, h)) == tuple(a + b for a, b in zip(g.v, h.v))
    assert G.in_A(g) == (G.height(g) == (0, 0))


@given(st.integers(-100, 100), elements(S23))
def test_conjugation_scales_A(x, by):
    got = G.conjugate(S23, E(x, [0, 0]), by)
    assert got == E(x * S23.scale(by.v), [0, 0])


@given(elements(S23), st.integers(-7, 7))
def test_power_matches_repeated_mul(g, e):
    expected = G.identity(S23)
    step = g if e >= 0 else G.inverse(S23, g)
    for _ in range(abs(e)):
        expected = G.mul(S23, expected, step)
    assert G.power(S23, g, e) == expected


@given(elements(S23))
def test_normal_form_word(g):
    assert evaluate(G.normal_form_word(g, S23), S23) == g


def test_element_json_round_trip():
    g = E(Fraction(-3, 4), [2, -1])
    obj = G.element_to_json(g)
    assert obj == {"q": "-3/4", "v": [2, -1]}
    assert G.element_from_json(obj, S23) == g
    with pytest.raises(ValueError):
        G.element_from_json({"q": "1/5", "v": [0, 0]}, S23)
    with pytest.raises(ValueError):
        G.element_from_json({"q": "1", "v": [0]}, S23)
