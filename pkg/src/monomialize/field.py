"""Exact arithmetic in cyclotomic fields Q(zeta_m), 4 | m.

Elements are coordinate vectors in the power basis 1, z, ..., z^(phi(m)-1)
reduced modulo the m-th cyclotomic polynomial.  Series coefficients that
happen to be rational stay plain Fractions; `FieldElement` interoperates
with Fraction and int, and `normal()` collapses rational elements back.
"""
from fractions import Fraction as F
from functools import lru_cache
from math import gcd, lcm

from sympy import Poly, cyclotomic_poly, symbols

from . import lattice

_z = symbols("z")


@lru_cache(maxsize=None)
def cyclotomic(m):
    """Coefficients of Phi_m, lowest degree first (monic, integer)."""
    coeffs = Poly(cyclotomic_poly(m, _z), _z).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


def phi(m):
    return len(cyclotomic(m)) - 1


def _reduce(poly, m):
    mod = cyclotomic(m)
    deg = len(mod) - 1
    poly = list(poly)
    for k in range(len(poly) - 1, deg - 1, -1):
        c = poly[k]
        if c:
            poly[k] = 0
            for j in range(deg):
                if mod[j]:
                    poly[k - deg + j] -= c * mod[j]
    out = poly[:deg] + [F(0)] * (deg - len(poly))
    return tuple(F(x) for x in out)


def check_modulus(m):
    if m <= 0 or m % 4:
        raise ValueError(f"field modulus must be a positive multiple of 4, got {m}")
    return m


class FieldElement:
    """Element of Q(zeta_m)."""

    __slots__ = ("m", "coords")

    def __init__(self, m, coords):
        self.m = m
        self.coords = _reduce(coords, m) if len(coords) != phi(m) else tuple(F(c) for c in coords)

    @classmethod
    def root_of_unity(cls, m, k=1):
        """zeta_m^k."""
        k %= m
        return cls(m, _reduce([0] * k + [1], m))

    @classmethod
    def from_rational(cls, m, q):
        return cls(m, [F(q)] + [F(0)] * (phi(m) - 1))

    def lift(self, m2):
        """The same number in Q(zeta_m2), m | m2."""
        if m2 == self.m:
            return self
        if m2 % self.m:
            raise ValueError(f"cannot lift from modulus {self.m} to {m2}")
        step = m2 // self.m
        poly = [F(0)] * (step * (len(self.coords) - 1) + 1)
        for k, c in enumerate(self.coords):
            poly[k * step] = c
        return FieldElement(m2, _reduce(poly, m2))

    def is_rational(self):
        return all(c == 0 for c in self.coords[1:])

    def normal(self):
        return self.coords[0] if self.is_rational() else self

    def _pair(self, other):
        if isinstance(other, FieldElement):
            m = lcm(self.m, other.m)
            return self.lift(m), other.lift(m)
        if isinstance(other, (int, F)):
            return self, FieldElement.from_rational(self.m, other)
        return None, None

    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return FieldElement(a.m, tuple(x + y for x, y in zip(a.coords, b.coords))).normal()

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.m, tuple(-x for x in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, F)):
            if other == 0:
                return F(0)
            return FieldElement(self.m, tuple(other * x for x in self.coords))
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        prod = [F(0)] * (len(a.coords) + len(b.coords) - 1)
        for i, x in enumerate(a.coords):
            if x:
                for j, y in enumerate(b.coords):
                    if y:
                        prod[i + j] += x * y
        return FieldElement(a.m, _reduce(prod, a.m)).normal()

    __rmul__ = __mul__

    def inverse(self):
        """Solve x*y = 1 with the multiplication-by-x matrix."""
        if all(c == 0 for c in self.coords):
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        d = len(self.coords)
        rows = []
        for k in range(d):
            prod = self * FieldElement(self.m, [F(int(j == k)) for j in range(d)])
            rows.append(coords_of(prod, self.m))
        one = [F(1)] + [F(0)] * (d - 1)
        y = lattice.solve_left(one, rows, d)
        return FieldElement(self.m, y).normal()

    def conjugate(self, k):
        """Image under zeta -> zeta^k (k coprime to m)."""
        out = F(0)
        for j, c in enumerate(self.coords):
            if c:
                out = out + c * FieldElement.root_of_unity(self.m, j * k)
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, F)):
            return self * (F(1) / F(other))
        return self * inv(other)

    def __rtruediv__(self, other):
        return F(other) * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return inv(self) ** (-k)
        out, base = F(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base if isinstance(base, FieldElement) else base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            m = lcm(self.m, other.m)
            return self.lift(m).coords == other.lift(m).coords
        if isinstance(other, (int, F)):
            return self.is_rational() and self.coords[0] == other
        return NotImplemented

    def __hash__(self):
        return hash(self.normal()) if self.is_rational() else hash((self.m, self.coords))

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coords):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*z{self.m}^{k}")
        return " + ".join(terms) if terms else "0"


Number = (int, F, FieldElement)


def inv(x):
    if isinstance(x, FieldElement):
        return x.inverse()
    return F(1) / F(x)


def coords_of(x, m):
    """Coordinate vector of a coefficient in Q(zeta_m)."""
    if isinstance(x, FieldElement):
        return list(x.lift(m).coords)
    return [F(x)] + [F(0)] * (phi(m) - 1)


def from_coords(m, coords):
    return FieldElement(m, [F(c) for c in coords]).normal()


def modulus_of(x):
    return x.m if isinstance(x, FieldElement) else 4


def is_zero(x):
    return x == 0


def root_of_unity_index(x, m):
    """k with x = zeta_m^k, or None."""
    x = x if isinstance(x, FieldElement) else FieldElement.from_rational(m, x)
    m = lcm(m, x.m)
    x = x.lift(m)
    for k in range(m):
        if FieldElement.root_of_unity(m, k) == x:
            return k, m
    return None


def rational_root(q, k):
    """The positive rational k-th root of q > 0, or None."""
    q = F(q)
    if q <= 0:
        return None
    num, den = _int_root(q.numerator, k), _int_root(q.denominator, k)
    if num is None or den is None:
        return None
    return F(num, den)


def _int_root(a, k):
    lo, hi = 0, 1
    while hi ** k < a:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** k < a:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** k == a else None


def split_unit(c, m):
    """(k, M, q) with c = zeta_M^k * q, q > 0 rational and m | M; None if impossible."""
    mod = lcm(m, modulus_of(c))
    for k in range(mod):
        q = c * inv(FieldElement.root_of_unity(mod, k))
        q = q.normal() if isinstance(q, FieldElement) else q
        if not isinstance(q, FieldElement) and q > 0:
            return k, mod, F(q)
    return None


def power(c, lam, m):
    """c^lam for a nonzero constant c and rational lam.

    Returns (value, M) with the value in Q(zeta_M), m | M.  Only constants
    of the form (root of unity)*(positive rational) whose rational part has
    a rational lam-th power are handled; otherwise (None, None).
    """
    lam = F(lam)
    if lam.denominator == 1:
        n = int(lam.numerator)
        return (c ** n if n >= 0 else inv(c) ** (-n)), m
    split = split_unit(c, m)
    if split is None:
        return None, None
    k, mod, q = split
    root = rational_root(q ** abs(lam.numerator), lam.denominator)
    if root is None:
        return None, None
    if lam < 0:
        root = 1 / root
    turn = F(k, mod) * lam
    big = lcm(m, turn.denominator, 4)
    unit = FieldElement.root_of_unity(big, int(turn * big) % big)
    val = unit * root
    return (val.normal() if isinstance(val, FieldElement) else val), big
