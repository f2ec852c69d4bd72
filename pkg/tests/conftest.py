from fractions import Fraction as F

import sympy
from hypothesis import settings, strategies as st

from monomialize.valgroup import GroupValue, IrrationalCombination, basis

settings.register_profile("desk", max_examples=60, deadline=None)
settings.load_profile("desk")


def gv(*coords):
    """Rank-1 value with the given coordinates over 1, sqrt2, sqrt3, ..."""
    return GroupValue([list(coords)])


SQ2 = gv(0, 1)
SQ3 = gv(0, 0, 1)
SQ5 = gv(0, 0, 0, 1)


def to_sympy(lv):
    """An irrational combination as an exact sympy number (independent oracle)."""
    if isinstance(lv, GroupValue):
        lv = lv.levels[0]
    return sum((sympy.Rational(c.numerator, c.denominator) * sympy.sqrt(b)
                for c, b in zip(lv.coords, basis(len(lv.coords)))), sympy.Integer(0))


rationals = st.fractions(min_value=-9, max_value=9, max_denominator=9)
small_rationals = st.integers(-9, 9).flatmap(
    lambda p: st.integers(1, 9).map(lambda q: F(p, q)))
combos = st.lists(small_rationals, min_size=1, max_size=4).map(IrrationalCombination)


ACCEPTANCE = []


def report(number, name, ok, detail):
    """Record and print one acceptance line."""
    line = f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
