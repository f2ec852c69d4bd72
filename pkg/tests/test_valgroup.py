from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import SQ2, SQ3, combos, gv, small_rationals, to_sympy
from monomialize.errors import RankMismatch
from monomialize.valgroup import (BASIS_ENV, GroupValue, IrrationalCombination, WeightAssignment,
                                  basis, compare, express_in, is_independent, monomial_value,
                                  rational_relation, sign)


# sign ---------------------------------------------------------------------

def test_sign_examples():
    assert sign(IrrationalCombination([0, 2, -1])) == 1      # 2 sqrt2 - sqrt3
    assert sign(IrrationalCombination([0, 0, 0])) == 0
    assert sign(IrrationalCombination([1, -1])) == -1        # 1 - sqrt2


def test_sign_of_near_cancellation():
    # 577/408 - sqrt2 is a Pell convergent: tiny but positive
    assert sign(IrrationalCombination([F(577, 408), -1])) == 1
    assert sign(IrrationalCombination([F(-577, 408), 1])) == -1


@given(combos)
def test_sign_matches_exact_oracle(a):
    expected = sympy.sign(to_sympy(a))
    assert sign(a) == int(expected)


@given(combos)
def test_sign_antisymmetric(a):
    if a.is_zero():
        assert sign(a) == 0
    else:
        assert sign(a) * sign(-a) == -1
        assert sign(a + a) == sign(a)


# compare ------------------------------------------------------------------

def test_compare_examples():
    assert compare(gv(0, 2), SQ3) == 1
    assert compare(GroupValue([[0, 1], [0]]), GroupValue([[0, 0, 1], [0]])) == -1
    assert compare(GroupValue([[0], [0, 1]]), GroupValue([[0, 0, 1], [0]])) == -1
    assert compare(SQ2, SQ2) == 0


def test_compare_rank_mismatch():
    with pytest.raises(RankMismatch):
        compare(SQ2, GroupValue([[0, 1], [1]]))


values2 = st.tuples(combos, combos).map(GroupValue)


@given(values2, values2, values2)
def test_compare_total_order(a, b, c):
    assert compare(a, b) == -compare(b, a)
    if compare(a, b) <= 0 and compare(b, c) <= 0:
        assert compare(a, c) <= 0
    if compare(a, b) < 0:
        assert compare(a + c, b + c) < 0


# rational relations ------------------------------------------------------------------

def test_rational_relation_examples():
    assert rational_relation([SQ2, SQ3]) is None
    rel = rational_relation([SQ2, SQ2.scale(3)])
    assert rel[0] / rel[1] == F(-3)
    rel = rational_relation([SQ2 + SQ3, SQ2, SQ3])
    assert [x / rel[0] for x in rel] == [1, -1, -1]


@given(st.lists(combos, min_size=1, max_size=4))
def test_rational_relation_is_exact(levels):
    vals = [GroupValue([lv]) for lv in levels]
    rel = rational_relation(vals)
    mat = sympy.Matrix([[to_sympy(v)] for v in vals]).T
    k = max(len(lv.coords) for lv in levels)
    coords = sympy.Matrix([list(lv.coords) + [0] * (k - len(lv.coords)) for lv in levels])
    if rel is None:
        assert coords.rank() == len(vals)
        assert is_independent(vals)
    else:
        assert any(rel)
        total = sum((v.scale(q) for v, q in zip(vals[1:], rel[1:])), vals[0].scale(rel[0]))
        assert total.is_zero()
        assert sympy.simplify(sum(q * x for q, x in zip(rel, mat))) == 0


def test_express_in():
    assert express_in([SQ2, SQ3], SQ2.scale(2) + SQ3) == [2, 1]
    assert express_in([SQ2], SQ3) is None


# monomial values ------------------------------------------------------------------

def test_monomial_value_examples():
    w = WeightAssignment([SQ2, SQ3], 2)
    assert compare(monomial_value(w, [2, 1]), SQ2.scale(2) + SQ3) == 0
    assert monomial_value(w, [0, 0]).is_zero()
    w = WeightAssignment([SQ2, SQ2.scale(3)], 1)
    assert compare(monomial_value(w, [1, 1]), SQ2.scale(4)) == 0


@given(st.lists(st.integers(0, 6), min_size=2, max_size=2),
       st.lists(st.integers(0, 6), min_size=2, max_size=2))
def test_monomial_value_additive(e1, e2):
    w = WeightAssignment([SQ2, SQ3], 2)
    total = monomial_value(w, [a + b for a, b in zip(e1, e2)])
    assert compare(total, monomial_value(w, e1) + monomial_value(w, e2)) == 0
    if any(e1):
        assert monomial_value(w, e1).sign() > 0


def test_weight_assignment_checks():
    assert WeightAssignment([SQ2, SQ2.scale(3)], 1).check() == []
    assert WeightAssignment([SQ2, SQ3], 1).check()
    assert WeightAssignment([SQ2, SQ2.scale(2)], 2).check()
    assert WeightAssignment([SQ2.scale(-1)], 1).check()


# basis override ------------------------------------------------------------------

def test_basis_default_and_override(monkeypatch):
    assert basis(6) == (1, 2, 3, 5, 6, 7)
    monkeypatch.setenv(BASIS_ENV, "1,5,7")
    assert basis(3) == (1, 5, 7)
    assert sign(IrrationalCombination([0, 1, -1])) == -1     # sqrt5 < sqrt7
    monkeypatch.setenv(BASIS_ENV, "1,4")
    with pytest.raises(ValueError):
        basis(2)


@given(small_rationals)
def test_rational_scaling(q):
    a = SQ2 + SQ3
    assert compare(a.scale(q), GroupValue([[0, q, q]])) == 0
