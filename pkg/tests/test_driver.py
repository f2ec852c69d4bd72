import random
from fractions import Fraction as F

import pytest
import sympy

from conftest import SQ2, SQ3
from monomialize import lattice
from monomialize.driver import (TRUST_NOTE, check_injectivity, jacobian_rank, monomialize_series,
                                run, split_algebraic, step, step_bound, verify)
from monomialize.errors import (FieldExtensionRequired, InvalidPreparedForm, NotApplicable,
                                TruncationExhausted)
from monomialize.prepared import PreparedPair, Transformation, is_algebraic, type_gt
from monomialize.series import TruncatedSeries as TS, substitute
from monomialize.valgroup import WeightAssignment, value_sum

Y = sympy.symbols("y1:5")


def S(expr, nv, N=12):
    return TS.from_expr(sympy.sympify(expr, locals={f"y{i + 1}": Y[i] for i in range(4)}), Y[:nv], N)


def germ1(N=12):
    w = WeightAssignment([SQ2, SQ2.scale(5)], 1)
    return PreparedPair(2, 2, 1, 1, 0, [[1]], [S("y1^3 + y1^3*y2", 2, N)], w, 4, N)


def germ2(N=12):
    return PreparedPair(1, 2, 1, 1, 0, [[2]], [S("y1^3*(1 + y1)", 1, N)],
                        WeightAssignment([SQ2], 1), 4, N)


def monomial_pair(C, s_weights):
    n = len(s_weights)
    return PreparedPair(n, len(C), n, len(C), 0, C, [], WeightAssignment(s_weights, n))


# series monomialization ------------------------------------------------------------

def test_monomialize_series_already_monomial():
    p = germ1()
    q, d, u = monomialize_series(p, S("y1^2*(3 + y1)", 2))
    assert q == p and d == [2] and u == S("3 + y1", 2)


def test_monomialize_series_x_scope():
    p = germ1()
    g = TS(2, {(2, 0): 1, (3, 0): 1}, 12)
    q, d, u = monomialize_series(p, g, scope="x")
    assert d == [2] and u == TS(2, {(0, 0): 1, (1, 0): 1}, 12)


def test_monomialize_series_y_scope_blowup():
    p = PreparedPair(2, 1, 2, 1, 0, [[1, 1]], [], WeightAssignment([SQ2, SQ3], 2), 4, 12)
    g = S("y1^2*y2 + y1*y2^2", 2)
    q, d, u = monomialize_series(p, g)
    assert [T.tag for T in q.log] == [1]
    seq = q.log[0].payload["y_seq"]
    assert [(b.i, b.j, b.chart) for b in seq.steps] == [(0, 1, 1)]
    moved = substitute(g, [TS.monomial(row, 1, 12) for row in seq.matrix])
    assert d == [3, 1] and u.is_unit()
    assert moved.agrees(u.mul_monomial(d), min(moved.trunc, u.trunc))


# algebraic parts ------------------------------------------------------------------

def pair_23():
    return PreparedPair(2, 1, 2, 1, 0, [[2, 3]], [], WeightAssignment([SQ2, SQ3], 2), 4, 12)


def test_split_algebraic_all_algebraic():
    p = pair_23()
    g = S("y1^2*y2^3", 2)
    q, P, tail = split_algebraic(p, g)
    assert q == p and P == g and tail == ("zero",)


def test_split_algebraic_mixed():
    p = pair_23()
    q, P, tail = split_algebraic(p, S("y1^2*y2^3 + y1*y2", 2))
    assert P == S("y1^2*y2^3", 2) and is_algebraic(P, q)
    assert tail[0] == "monomial" and tail[1] == [1, 1]
    assert [T.tag for T in q.log] == [8]


def test_split_algebraic_free_variable_tail():
    w = WeightAssignment([SQ2, SQ2.scale(2)], 1)
    p = PreparedPair(2, 2, 1, 1, 0, [[1]], [S("y2 + y1^5", 2)], w, 4, 12)
    q, P, tail = split_algebraic(p, S("y1^2*y2*(1 + y1)", 2))
    assert tail == ("monomial_var", [2], 1)
    assert [T.tag for T in q.log] == [5]


# step and run ------------------------------------------------------------------

def test_step_raises_type():
    p = germ1()
    q = step(p)
    assert type_gt(q.type, p.type)
    assert verify(p, q.log)


def test_step_on_monomial_form():
    with pytest.raises(NotApplicable):
        step(monomial_pair([[1, 0], [0, 1]], [SQ2, SQ3]))


def test_run_already_monomial():
    form = run(monomial_pair([[2, 1], [1, 1]], [SQ2, SQ3]))
    assert form.certificate == [] and form.rows == [[2, 1], [1, 1]]


def test_run_worked_example():
    form = run(germ1())
    assert form.to_text() == "x1 = y1\nx2 = y2"
    assert [T.tag for T in form.certificate] == [10, 6, 9]
    assert [T.post for T in form.certificate] == [(1, 1, 0), (1, 1, 0), (1, 1, 1)]
    assert verify(germ1(), form.certificate)


def test_run_with_independent_second_value():
    w = WeightAssignment([SQ2, SQ3], 2)
    p = PreparedPair(2, 2, 2, 1, 0, [[2, 0]], [S("y1^3 + y2", 2, 10)], w, 4, 10)
    form = run(p)
    assert form.pair.r == 2 and lattice.rank(form.rows, 2) == 2
    assert verify(p, form.certificate)


def test_run_rejects_dependent_germ():
    with pytest.raises(InvalidPreparedForm) as info:
        run(germ2())
    assert info.value.clause == "quasi-regular"
    assert jacobian_rank(germ2()) == 1


def test_run_truncation_code():
    with pytest.raises(TruncationExhausted):
        run(germ1(1))


def test_step_bound():
    assert step_bound(germ1()) == 3 * 3 * 3
    assert "trusted" in TRUST_NOTE


# soundness on a seeded sweep ------------------------------------------------------------

HONEST = (TruncationExhausted, FieldExtensionRequired, InvalidPreparedForm)


def sweep(seed, count):
    rng = random.Random(seed)
    base = [SQ2, SQ3]
    for _ in range(count):
        s = rng.choice([1, 2])
        ws = base[:s]
        w = ws + [value_sum(ws, [rng.randint(1, 4) for _ in ws]) for _ in range(2 - s)]
        C = [[rng.randint(1, 3) for _ in range(s)]]
        terms = {}
        for _ in range(rng.randint(1, 3)):
            e = (rng.randint(0, 3), rng.randint(0, 3))
            if any(e):
                terms[e] = rng.choice([1, -1, 2])
        if terms:
            yield PreparedPair(2, 2, s, 1, 0, C, [TS(2, terms, 14)], WeightAssignment(w, s), 4, 14)


@pytest.mark.parametrize("seed", [0, 1])
def test_run_is_sound(seed):
    done = 0
    for p in sweep(seed, 12):
        try:
            form = run(p)
        except HONEST:
            continue
        done += 1
        assert verify(p, form.certificate)
        assert lattice.rank(form.rows + [[int(i == yj) for i in range(p.n)]
                                         for _, yj in form.identified], p.n) == p.m
        assert check_injectivity(form.pair, 4)
        for T in form.certificate:
            assert T.post is not None
    assert done >= 4


# injectivity ------------------------------------------------------------------

def test_check_injectivity_examples():
    assert check_injectivity(monomial_pair([[2, 1], [1, 1]], [SQ2, SQ3]), 3)
    p = PreparedPair(1, 2, 1, 1, 0, [[1]], [S("y1", 1)], WeightAssignment([SQ2], 1))
    assert not check_injectivity(p, 3)
    assert check_injectivity(monomial_pair([[1]], [SQ2]), 3)


def test_check_injectivity_finds_relation():
    # (x2 - x1^2)^2 = x1^3 pulls back to 0 on the dependent germ
    assert not check_injectivity(germ2(), 4)


# verify ------------------------------------------------------------------

def test_verify_empty_and_worked():
    assert verify(germ1(), [])
    assert verify(germ1(), run(germ1()).certificate)


def test_verify_reports_corrupted_stage():
    cert = run(germ1()).certificate
    T = cert[1]
    bad = Transformation(T.tag, dict(T.payload, b_last=[4]), T.promote, T.post, T.post_C)
    res = verify(germ1(), [cert[0], bad, cert[2]])
    assert not res and res.stage == 1
    wrong_post = Transformation(cert[2].tag, cert[2].payload, cert[2].promote, (1, 1, 0),
                                cert[2].post_C)
    res = verify(germ1(), cert[:2] + [wrong_post])
    assert not res and res.stage == 2


def test_verify_other_problem_fails_at_stage_zero():
    cert = run(germ1()).certificate
    res = verify(germ2(), cert)
    assert not res and res.stage == 0
