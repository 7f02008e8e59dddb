import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gammas import group as G
from gammas import morphism as H
from gammas.algebra import NotInRing, identity_matrix
from gammas.group import Element, GroupSpec, evaluate, parse_word
from oracles import rewrite_eval
from strategies import a_elements, elements, random_automorphism, words

S1 = GroupSpec((2,))
S23 = GroupSpec((2, 3))


def half_auto():
    return H.validated(H.make_endo(S23, Fraction(1, 2), [(3, (1, 0)), (4, (0, 1))]))


def inner_t1(spec=S1):
    return H.inner_endo(spec, G.t_power(spec, 0))


class TestMakeEndo:
    def test_identity(self):
        e = H.make_endo(S23, 1, [(0, (1, 0)), (0, (0, 1))])
        assert not e.validated
        assert e.image_a == Element(1, (0, 0))
        assert e.image_t[1] == Element(0, (0, 1))

    def test_inner_by_t1(self):
        e = inner_t1()
        assert e.r == 2 and e.images == (Element(0, (1,)),)

    def test_rejects_outside_ring(self):
        with pytest.raises(NotInRing):
            H.make_endo(S23, Fraction(1, 5), [(0, (1, 0)), (0, (0, 1))])

    def test_from_words(self):
        e = H.endo_from_words(S23, parse_word("t1 a^2 t1^-1", S23), [parse_word("a^3 t1", S23), parse_word("a^4 t2", S23)])
        assert e.r == 1 and e.images[0] == Element(3, (1, 0))
        with pytest.raises(H.ImageNotInA):
            H.endo_from_words(S1, parse_word("t1", S1), [parse_word("t1", S1)])


class TestValidate:
    def test_inner_passes(self):
        assert H.validate(H.make_endo(S1, 2, [(0, (1,))])).ok

    def test_inverted_height_fails(self):
        report = H.validate(H.make_endo(S1, 1, [(0, (-1,))]))
        assert not report.ok
        (check,) = report.checks
        # t1 a t1^-1 = a^(1/2), but a^2 is required
        assert check.lhs == Element(Fraction(1, 2), (0,))
        assert check.rhs == Element(2, (0,))
        assert check.discrepancy == Element(Fraction(-3, 2), (0,))
        assert not report.endomorphism.validated

    def test_half_example_passes(self):
        # (2/3) * 3 == (1/2) * 4
        assert Fraction(2, 3) * 3 == Fraction(1, 2) * 4
        report = H.validate(H.make_endo(S23, Fraction(1, 2), [(3, (1, 0)), (4, (0, 1))]))
        assert report.ok and report.endomorphism.validated

    def test_commutator_failure_reported(self):
        report = H.validate(H.make_endo(S23, 1, [(3, (1, 0)), (3, (0, 1))]))
        failed = [c.name for c in report.checks if not c.passed]
        assert failed == ["t1 t2 = t2 t1"]

    def test_report_json(self):
        obj = H.validate(H.make_endo(S1, 1, [(0, (-1,))])).to_json()
        assert obj["ok"] is False
        assert obj["relators"][0]["discrepancy"] == {"q": "-3/2", "v": [0]}

    def test_validated_raises(self):
        with pytest.raises(H.InvalidEndomorphism):
            H.validated(H.make_endo(S1, 1, [(0, (-1,))]))


def _relator_oracle(spec, r, ws):
    """Conjugation relators checked in the matrix representation (qi = 0)."""
    for i, n in enumerate(spec.exponents):
        t_img = [(j + 1, e) for j, e in enumerate(ws[i]) if e]
        inv = [(g, -e) for g, e in reversed(t_img)]
        # phi(ti)^-1 phi(a) phi(ti) with phi(a) = a^r
        lhs = rewrite_eval(spec.exponents, inv + [(0, 1)] + t_img)[0] * r
        if lhs != r * n:
            return False
    return True


class TestForcedHeights:
    def test_single(self):
        res = H.forced_heights(S1, 1, [(1,)])
        assert res.status == "UNIQUE" and res.solutions == ((1,),)

    def test_rejected(self):
        res = H.forced_heights(S23, 1, [(0, 1)])
        assert res.status == "REJECTED" and res.candidates == (False,)
        assert res.unique and res.solutions == ((1, 0), (0, 1))

    @pytest.mark.parametrize("S", [(2, 3), (2, 9)])
    def test_exhaustive(self, S):
        spec = GroupSpec(S)
        box = list(itertools.product(range(-4, 5), repeat=2))
        for i in range(2):
            # oracle: the conjugation relator for ti alone, in the matrix representation
            others = [spec.unit_vector(j) for j in range(2)]
            sols = []
            for w in box:
                ws = others[:i] + [w] + others[i + 1:]
                if _relator_oracle(spec, Fraction(1, 3), ws):
                    sols.append(w)
            assert sols == [spec.unit_vector(i)]
            for w in box:
                cands = H.forced_heights(spec, 1, others[:i] + [w]).candidates
                assert cands[i] == (w == spec.unit_vector(i))

    def test_zero_scalar(self):
        with pytest.raises(H.ZeroScalar):
            H.forced_heights(S1, 0, [(1,)])

    def test_non_coprime_valuations_not_unique(self):
        # bypass GroupSpec validation: 2 and 4 give dependent valuation columns
        class Fake:
            exponents = (2, 4)
            k = 2
            prime_factors = frozenset({2})

            def scale(self, v):
                return Fraction(2) ** v[0] * Fraction(4) ** v[1]

        res = H.forced_heights(Fake(), 1, [])
        assert not res.unique


class TestInducedMatrix:
    def test_identity(self):
        assert H.induced_matrix(H.identity_endo(S23)) == identity_matrix(2)

    def test_unvalidated(self):
        with pytest.raises(H.Unvalidated):
            H.induced_matrix(H.make_endo(S1, 1, [(0, (1,))]))

    def test_zero_scalar_endo(self):
        e = H.validated(H.make_endo(S23, 0, [(0, (2, 0)), (0, (0, 2))]))
        assert H.induced_matrix(e) == ((2, 0), (0, 2))

    def test_random_valid_endos_have_identity(self):
        rng = random.Random(11)
        hits = 0
        for _ in range(2000):
            r = Fraction(rng.choice([1, -1, 2, 3, 6])) / rng.choice([1, 2, 3])
            ws = [tuple(rng.choice([-1, 0, 1, 2]) for _ in range(2)) for _ in range(2)]
            e = H.make_endo(S23, r, [(0, w) for w in ws])
            rep = H.validate(e)
            if rep.ok:
                hits += 1
                assert H.induced_matrix(rep.endomorphism) == identity_matrix(2)
        assert hits > 0


class TestRestrictAndApply:
    def test_restrict(self):
        assert H.restrict_to_A(H.identity_endo(S1)) == 1
        assert H.restrict_to_A(inner_t1()) == 2
        e = half_auto()
        assert H.restrict_to_A(e) == Fraction(1, 2)
        assert H.apply(e, Element(3, (0, 0))) == Element(Fraction(3, 2), (0, 0))

    def test_apply_examples(self):
        g = Element(Fraction(7, 2), (3,))
        assert H.apply(H.identity_endo(S1), g) == g
        assert H.apply(inner_t1(), Element(1, (0,))) == Element(2, (0,))
        twice = H.compose(inner_t1(), inner_t1())
        assert H.apply(twice, Element(1, (0,))) == Element(4, (0,))

    @settings(max_examples=200)
    @given(words(S23), st.randoms(use_true_random=False))
    def test_homomorphism_on_words(self, w, rng):
        e = random_automorphism(S23, rng)
        assert H.apply(e, evaluate(w, S23)) == H.apply_word(e, w)

    @given(elements(S23), elements(S23))
    def test_homomorphism_on_pairs(self, g, h):
        e = half_auto()
        assert H.apply(e, G.mul(S23, g, h)) == G.mul(S23, H.apply(e, g), H.apply(e, h))

    @given(a_elements(S23))
    def test_A_invariant_and_scalar(self, x):
        e = half_auto()
        via_word = H.apply_word(e, G.normal_form_word(x, S23))
        assert G.in_A(via_word)
        assert via_word.q == e.r * x.q

    def test_compose_agrees_with_nested_apply(self):
        rng = random.Random(5)
        for _ in range(50):
            e1, e2 = random_automorphism(S23, rng), random_automorphism(S23, rng)
            c = H.compose(e1, e2)
            for gen in range(3):
                g = e2.image(gen)
                assert c.image(gen) == H.apply(e1, g)


class TestCandidate:
    def test_identity(self):
        rep = H.is_automorphism_candidate(H.identity_endo(S23))
        assert rep.passed
        assert rep.inverse.r == 1 and rep.inverse.images == H.identity_endo(S23).images

    def test_non_unit(self):
        e = H.validated(H.make_endo(S23, 5, [(0, (1, 0)), (0, (0, 1))]))
        rep = H.is_automorphism_candidate(e)
        assert not rep.passed and not rep.unit_scalar and rep.inverse is None
        assert rep.to_json()["verdict"] == "FAIL"

    def test_half(self):
        rep = H.is_automorphism_candidate(half_auto())
        assert rep.passed and rep.inverse.r == 2
        assert rep.inverse.images == (Element(-6, (1, 0)), Element(-8, (0, 1)))

    def test_zero_scalar(self):
        e = H.validated(H.make_endo(S23, 0, [(0, (2, 0)), (0, (0, 2))]))
        rep = H.is_automorphism_candidate(e)
        assert not rep.passed and not rep.invertible_matrix

    def test_random_inverses(self):
        rng = random.Random(3)
        ident = H.identity_endo(S23)
        for _ in range(100):
            e = random_automorphism(S23, rng)
            rep = H.is_automorphism_candidate(e)
            assert rep.passed
            for c in (H.compose(e, rep.inverse), H.compose(rep.inverse, e)):
                for gen in range(3):
                    assert c.image(gen) == ident.image(gen)


def test_json_round_trip():
    e = half_auto()
    obj = H.endo_to_json(e)
    assert obj == {"S": [2, 3], "r": "1/2", "images": [{"q": "3", "w": [1, 0]}, {"q": "4", "w": [0, 1]}]}
    back = H.endo_from_json(obj, S23)
    assert (back.r, back.images) == (e.r, e.images)
    with pytest.raises(ValueError):
        H.endo_from_json(obj, S1)
    with pytest.raises(ValueError):
        H.endo_from_json({"r": "1", "images": [{"q": "0"}]}, S1)
