import json
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from monomialize import document as doc
from monomialize.driver import run
from monomialize.errors import InvalidPreparedForm
from monomialize.field import FieldElement
from monomialize.series import TruncatedSeries as TS
from monomialize.valgroup import GroupValue, compare

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def canonical(path):
    return doc.dumps(doc.problem_to_json(doc.load_problem(path)))


@pytest.mark.parametrize("name", ["germ1.json", "germ2.json", "g5.json"])
def test_roundtrip_is_byte_identical(name):
    text = canonical(DEMOS / name)
    again = doc.dumps(doc.problem_to_json(doc.problem_from_json(json.loads(text))))
    assert again == text


def test_roundtrip_with_log():
    prob = doc.load_problem(DEMOS / "germ1.json")
    p = prob.pair.with_(log=run(prob.pair).certificate)
    text = doc.dumps(doc.problem_to_json(doc.Problem(p)))
    back = doc.problem_from_json(json.loads(text))
    assert doc.dumps(doc.problem_to_json(back)) == text
    assert [T.tag for T in back.pair.log] == [10, 6, 9]


def test_value_expressions():
    v = doc.value_from_json(["2*sqrt(2) - sqrt(3) + 1/2"])
    assert compare(v, GroupValue([[F(1, 2), 2, -1]])) == 0
    assert doc.value_to_json(v) == [["1/2", "2", "-1"]]
    assert doc.value_from_json([["0", "1"], "sqrt(8)"]).levels[1].coords == (0, 2)
    with pytest.raises(InvalidPreparedForm):
        doc.value_from_json(["pi"])


def test_series_wire_format():
    i = FieldElement.root_of_unity(4)
    g = TS(2, {(1, 0): F(1, 3), (0, 2): i}, 6)
    out = doc.series_to_json(g)
    assert out["terms"][0] == {"exponent": ["0", "2"], "coefficient": ["0", "1"]}
    assert doc.series_from_json(out, 2, F(6), 4) == g


def test_rationals_are_strings():
    text = canonical(DEMOS / "germ1.json")
    assert "." not in text.replace("monomialize/1", "")


@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_coefficient_roundtrip(a, b):
    c = FieldElement(4, [a, b]).normal()
    assert doc.coeff_from_json(doc.coeff_to_json(c)) == c


def test_schema_errors():
    with pytest.raises(InvalidPreparedForm) as info:
        doc.problem_from_json({"schema": "other"})
    assert info.value.clause == "schema"
    with pytest.raises(InvalidPreparedForm):
        doc.parse_rat(0.5)


def test_fingerprint_ignores_log():
    prob = doc.load_problem(DEMOS / "germ1.json")
    p = prob.pair
    assert doc.fingerprint(p) == doc.fingerprint(p.with_(log=run(p).certificate))
    assert doc.fingerprint(p) != doc.fingerprint(doc.load_problem(DEMOS / "germ2.json").pair)
