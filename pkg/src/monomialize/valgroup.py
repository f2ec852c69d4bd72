"""Value groups of finite rank with an exactly decidable order.

A real value is a rational combination of 1, sqrt(2), sqrt(3), sqrt(5), ...
(square roots of squarefree integers, which are linearly independent over
Q).  A group value is a tuple of such reals compared lexicographically.
"""
import os
from dataclasses import dataclass
from fractions import Fraction as F
from functools import lru_cache
from itertools import count
from math import isqrt

from . import lattice
from .errors import NotIndependent, RankMismatch

BASIS_ENV = "MONOMIALIZE_SQUAREFREE_BASIS"


def _squarefree(k):
    d = 2
    while d * d <= k:
        if k % (d * d) == 0:
            return False
        d += 1
    return True


@lru_cache(maxsize=None)
def _default_basis(k):
    out = [1]
    for q in count(2):
        if len(out) >= k:
            break
        if _squarefree(q):
            out.append(q)
    return tuple(out)


def basis(k):
    """The first k radicands: 1, 2, 3, 5, 6, 7, 10, ...

    The environment variable MONOMIALIZE_SQUAREFREE_BASIS (comma separated
    integers starting with 1) overrides the list.
    """
    raw = os.environ.get(BASIS_ENV)
    if raw:
        vals = tuple(int(x) for x in raw.split(",") if x.strip())
        if vals[0] != 1 or len(set(vals)) != len(vals) or not all(
                v == 1 or (v > 1 and _squarefree(v)) for v in vals):
            raise ValueError(f"{BASIS_ENV} must list 1 then distinct squarefree integers")
        if k > len(vals):
            raise ValueError(f"{BASIS_ENV} lists {len(vals)} radicands, {k} needed")
        return vals[:k]
    return _default_basis(k)


def _interval(coords, bits):
    """Rational bounds [lo, hi] on sum coords[j]*sqrt(basis[j]) at 2^-bits resolution."""
    scale = 1 << bits
    lo = hi = F(0)
    for c, b in zip(coords, basis(len(coords))):
        if c == 0:
            continue
        root = isqrt(b * scale * scale)
        if root * root == b * scale * scale:
            rl = rh = F(root, scale)
        else:
            rl, rh = F(root, scale), F(root + 1, scale)
        if c > 0:
            lo += c * rl
            hi += c * rh
        else:
            lo += c * rh
            hi += c * rl
    return lo, hi


def sign_coords(coords):
    if all(c == 0 for c in coords):
        return 0
    bits = 8
    while True:
        lo, hi = _interval(coords, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


@dataclass(frozen=True)
class IrrationalCombination:
    coords: tuple

    def __init__(self, coords=()):
        object.__setattr__(self, "coords", tuple(F(c) for c in coords))

    @classmethod
    def rational(cls, q):
        return cls((q,))

    def _pad(self, other):
        k = max(len(self.coords), len(other.coords))
        a = self.coords + (F(0),) * (k - len(self.coords))
        b = other.coords + (F(0),) * (k - len(other.coords))
        return a, b

    def _key(self):
        c = list(self.coords)
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    def __eq__(self, other):
        return isinstance(other, IrrationalCombination) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other):
        a, b = self._pad(other)
        return IrrationalCombination(x + y for x, y in zip(a, b))

    def __sub__(self, other):
        a, b = self._pad(other)
        return IrrationalCombination(x - y for x, y in zip(a, b))

    def __neg__(self):
        return IrrationalCombination(-x for x in self.coords)

    def scale(self, q):
        q = F(q)
        return IrrationalCombination(q * x for x in self.coords)

    def sign(self):
        return sign_coords(self.coords)

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def padded(self, k):
        if len(self._key()) > k:
            raise ValueError("combination does not fit the declared basis size")
        return self.coords[:k] + (F(0),) * (k - len(self.coords))

    def __repr__(self):
        terms = []
        for c, b in zip(self.coords, basis(len(self.coords))):
            if c:
                terms.append(f"{c}" if b == 1 else f"{c}*sqrt({b})")
        return " + ".join(terms) if terms else "0"


def sign(a):
    """Exact sign of an irrational combination."""
    return a.sign()


@dataclass(frozen=True)
class GroupValue:
    """Element of an ordered group of rank d: d levels, compared lexicographically."""

    levels: tuple

    def __init__(self, levels):
        object.__setattr__(self, "levels", tuple(
            lv if isinstance(lv, IrrationalCombination) else IrrationalCombination(lv)
            for lv in levels))

    @property
    def rank(self):
        return len(self.levels)

    @classmethod
    def zero(cls, rank=1):
        return cls([IrrationalCombination()] * rank)

    def _check(self, other):
        if self.rank != other.rank:
            raise RankMismatch(f"rank {self.rank} vs rank {other.rank}")

    def __add__(self, other):
        self._check(other)
        return GroupValue(a + b for a, b in zip(self.levels, other.levels))

    def __sub__(self, other):
        self._check(other)
        return GroupValue(a - b for a, b in zip(self.levels, other.levels))

    def __neg__(self):
        return GroupValue(-a for a in self.levels)

    def scale(self, q):
        return GroupValue(a.scale(q) for a in self.levels)

    def sign(self):
        for lv in self.levels:
            sg = lv.sign()
            if sg:
                return sg
        return 0

    def is_zero(self):
        return all(lv.is_zero() for lv in self.levels)

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def flat(self, k):
        """Coordinates padded to basis size k, concatenated level by level."""
        out = []
        for lv in self.levels:
            out.extend(lv.padded(k))
        return out

    def basis_size(self):
        return max((len(lv._key()) for lv in self.levels), default=0)

    def __repr__(self):
        inner = ", ".join(repr(lv) for lv in self.levels)
        return f"({inner})" if self.rank > 1 else inner


def compare(a, b):
    """-1, 0 or +1 according to the lexicographic order."""
    a._check(b)
    return (a - b).sign()


def value_sum(values, coeffs, rank=None):
    if rank is None:
        rank = values[0].rank if values else 1
    total = GroupValue.zero(rank)
    for v, c in zip(values, coeffs):
        if c:
            total = total + v.scale(c)
    return total


def rational_relation(values):
    """A primitive integer vector lam != 0 with sum lam_i*values[i] = 0, or None."""
    values = list(values)
    if not values:
        return None
    rank = values[0].rank
    for v in values:
        if v.rank != rank:
            raise RankMismatch("values of different rank")
    k = max(max(v.basis_size() for v in values), 1)
    rows = [v.flat(k) for v in values]
    ker = lattice.left_kernel(rows, rank * k)
    if not ker:
        return None
    return tuple(F(x) for x in lattice.primitive(ker[0]))


def is_independent(values):
    return rational_relation(values) is None


def express_in(values, target):
    """Rational coefficients q with target = sum q_i values[i], or None."""
    if not values:
        return [] if target.is_zero() else None
    k = max([v.basis_size() for v in values] + [target.basis_size(), 1])
    rows = [v.flat(k) for v in values]
    return lattice.solve_left(target.flat(k), rows, len(rows[0]))


@dataclass(frozen=True)
class WeightAssignment:
    """Positive values of n variables, the first s of them rationally independent."""

    weights: tuple
    s: int
    dependence: tuple

    def __init__(self, weights, s, dependence=None):
        weights = tuple(weights)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "s", s)
        if dependence is None:
            dependence = self._derive()
        object.__setattr__(self, "dependence", tuple(
            None if d is None else tuple(F(q) for q in d) for d in dependence))

    @property
    def n(self):
        return len(self.weights)

    @property
    def rank(self):
        return self.weights[0].rank if self.weights else 1

    def _derive(self):
        head = list(self.weights[:self.s])
        # None marks a weight outside the span; check() reports it
        return [express_in(head, w) or None for w in self.weights[self.s:]]

    def check(self):
        """List of violated invariants (empty when valid)."""
        problems = []
        for i, w in enumerate(self.weights):
            if w.sign() <= 0:
                problems.append(f"weight {i} is not strictly positive")
        head = list(self.weights[:self.s])
        if self.s and rational_relation(head) is not None:
            problems.append("the first s weights are rationally dependent")
        for j, w in enumerate(self.weights[self.s:]):
            q = express_in(head, w)
            if q is None:
                problems.append(f"weight {self.s + j} is rationally independent of the first s")
        return problems


def monomial_value(w, e):
    """Value of the monomial with exponent vector e."""
    weights = w.weights if isinstance(w, WeightAssignment) else tuple(w)
    if len(e) != len(weights):
        raise ValueError("exponent length differs from the number of weights")
    rank = weights[0].rank if weights else 1
    return value_sum(weights, e, rank)
