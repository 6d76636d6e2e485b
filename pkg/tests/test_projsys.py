import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import p_integral
from stratus.ffalg import GF, RatFn
from stratus.padic import DigitProfile, PAdicRat
from stratus.projsys import (
    GroupDescription,
    RankOneProjSys,
    compile_oracle,
    compile_system,
    group_of_diagonal,
    group_of_windows,
)
from stratus.stratmod import e_alpha, local_exponents


def all_bit_vectors(max_len):
    for n in range(max_len + 1):
        yield from itertools.product((0, 1), repeat=n)


class TestSystem:
    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            RankOneProjSys(3, DigitProfile((2,), (0,)))
        with pytest.raises(ValueError):
            RankOneProjSys(4, DigitProfile((), (0,)))

    def test_parse_and_alpha(self):
        s = RankOneProjSys(2, "[](10)")
        assert s.alpha().value == Fraction(-1, 3)
        assert str(s) == "[](10)@2"
        assert RankOneProjSys.finite(2, (1, 0, 1)).alpha().value == 5
        assert s.partial_sum(4) == 5


class TestCompile:
    def test_all_zero_is_trivial(self):
        M = compile_system(RankOneProjSys(5, "[](0)"), 25)
        assert all(M.A(n)[0][0].is_zero() for n in range(1, 26))

    def test_finite_bits(self):
        M = compile_system(RankOneProjSys.finite(2, (1, 0, 1)), 8)
        assert M.matrices == e_alpha(PAdicRat(-5, 2), 8, coordinate="t").matrices
        assert local_exponents(M, 0).matches([-5])

    def test_periodic_bits(self):
        M = compile_system(RankOneProjSys(2, "[](10)"), 8)
        assert local_exponents(M, 0).matches([Fraction(1, 3)])
        assert group_of_diagonal([Fraction(1, 3)], 2).name == "mu_3"

    def test_oracle_single_bit(self):
        M = compile_oracle(RankOneProjSys.finite(3, (1,)), 3)
        F = GF(3)
        assert M.A(1)[0][0] == RatFn.local_power(F, 0, -1) * 2

    @pytest.mark.parametrize("p,max_len", [(2, 10), (3, 7), (5, 5)])
    def test_oracle_agreement(self, p, max_len):
        N = p**3
        for bits in all_bit_vectors(max_len):
            s = RankOneProjSys.finite(p, bits)
            assert compile_system(s, N).matrices == compile_oracle(s, N).matrices, bits

    @given(st.sampled_from((2, 3, 5)).flatmap(
        lambda p: st.tuples(st.just(p), st.lists(st.integers(0, 1), max_size=3),
                            st.lists(st.integers(0, 1), min_size=1, max_size=3))))
    def test_exponent_round_trip(self, data):
        p, pre, per = data
        s = RankOneProjSys(p, DigitProfile(tuple(pre), tuple(per)))
        M = compile_system(s, p**3)
        rep = local_exponents(M, 0)
        assert rep.matches([-s.alpha()])
        # prepending zeros shifts the digits of alpha
        shifted = RankOneProjSys(p, DigitProfile((0, 0) + tuple(pre), tuple(per)))
        assert shifted.alpha().value == p * p * s.alpha().value
        rep2 = local_exponents(compile_system(shifted, p**3), 0)
        assert rep2.matches([-shifted.alpha()])
        assert shifted.alpha().digits(8) == [0, 0] + s.alpha().digits(6)
        assert (-shifted.alpha()).digits(8) == [0, 0] + (-s.alpha()).digits(6)

    def test_nonpositive_order(self):
        with pytest.raises(ValueError):
            compile_system(RankOneProjSys(2, "[](1)"), 0)


class TestGroups:
    def test_examples(self):
        g = group_of_diagonal([Fraction(1, 2), Fraction(1, 3)], 5)
        assert g.kind == "finite-diag" and g.order == 6 and g.name == "mu_6"
        assert group_of_diagonal([3, -7, 0], 5).kind == "trivial"
        assert group_of_diagonal([], 5).name == "trivial"
        with pytest.raises(ValueError):
            group_of_diagonal([Fraction(1, 5)], 5)

    def test_json(self):
        g = group_of_diagonal([Fraction(3, 4)], 3)
        assert g.to_json() == {"kind": "finite-diag", "name": "mu_4", "order": 4,
                               "generators": ["3/4"]}

    @given(st.sampled_from((2, 3, 5, 7)).flatmap(
        lambda p: st.tuples(st.just(p), st.lists(p_integral(p, 20, 12), min_size=1, max_size=4),
                            st.lists(st.integers(-5, 5), min_size=4, max_size=4), st.randoms())))
    def test_invariance(self, data):
        p, exps, shifts, rnd = data
        g = group_of_diagonal(exps, p)
        moved = [e + k for e, k in zip(exps, shifts)]
        rnd.shuffle(moved)
        assert group_of_diagonal(moved, p) == g
        assert g.order == 1 or all(g.order % (e % 1).denominator == 0 for e in exps)

    def test_windows(self):
        # Thue-Morse digits are not eventually periodic
        tm = [bin(k).count("1") % 2 for k in range(64)]
        g = group_of_windows([tm], 2, 8)
        assert g.kind == "Gm-detected" and g.name == "Gm" and "64 digits" in g.precision_note
        third = PAdicRat(Fraction(1, 3), 2).digits(64)
        assert group_of_windows([third], 2, 8).kind == "undetermined"
        assert isinstance(g, GroupDescription)
