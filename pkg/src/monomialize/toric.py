"""Monomial transforms driven by a valuation.

Coordinate changes are products of elementary blow-ups of two
coordinates; after each one the chart is the one where the variable of
smaller value divides the other.  Exponent bookkeeping uses row vectors:
old variables are monomials in new ones, x_old = x_new^A, and an exponent
row e of a monomial transforms as e -> e A.
"""
from dataclasses import dataclass, field as dc_field
from fractions import Fraction as F
from itertools import combinations, product
from math import ceil, floor, lcm

from . import lattice
from .errors import (InstanceTooLarge, NotDependent, NotIndependent,
                     NotRepresentable, RankDeficient)
from .valgroup import GroupValue, compare, express_in, rational_relation, value_sum


@dataclass(frozen=True)
class ElementaryBlowup:
    """Blow-up of Z(x_i, x_j) in the chart where x_chart <- x_i * x_j.

    `chart` is i or j; the other index is the divider.
    """

    i: int
    j: int
    chart: int

    def __post_init__(self):
        if self.i == self.j or self.chart not in (self.i, self.j):
            raise ValueError(f"malformed blow-up ({self.i}, {self.j}, chart {self.chart})")

    @property
    def replaced(self):
        return self.chart

    @property
    def divider(self):
        return self.j if self.chart == self.i else self.i

    def matrix(self, n):
        a = lattice.identity(n)
        a[self.replaced][self.divider] = 1
        return a

    def apply_exponent(self, e):
        """Row exponent e in old variables -> exponent in new variables."""
        e = list(e)
        e[self.divider] += e[self.replaced]
        return e

    def apply_values(self, values):
        """Values of the new variables from those of the old ones."""
        vals = list(values)
        vals[self.replaced] = vals[self.replaced] - vals[self.divider]
        return vals

    def to_json(self):
        return {"i": self.i, "j": self.j, "chart": self.chart}


@dataclass
class TransformSeq:
    """Ordered elementary blow-ups on n variables; x_old = x_new^matrix."""

    n: int
    steps: list = dc_field(default_factory=list)

    def append(self, b):
        self.steps.append(b)

    def extend(self, other):
        self.steps.extend(other.steps)

    @property
    def matrix(self):
        a = lattice.identity(self.n)
        for b in self.steps:
            a = lattice.matmul(a, b.matrix(self.n))
        return a

    def det(self):
        return lattice.det(self.matrix)

    def apply_exponent(self, e):
        for b in self.steps:
            e = b.apply_exponent(e)
        return list(e)

    def apply_values(self, values):
        for b in self.steps:
            values = b.apply_values(values)
        return list(values)

    def embedded(self, positions, n):
        """The same blow-ups acting on the variables `positions` of an n-variable space."""
        return TransformSeq(n, [ElementaryBlowup(positions[b.i], positions[b.j], positions[b.chart])
                                for b in self.steps])

    def __len__(self):
        return len(self.steps)

    def to_json(self):
        return [b.to_json() for b in self.steps]

    @classmethod
    def from_json(cls, n, data):
        return cls(n, [ElementaryBlowup(int(d["i"]), int(d["j"]), int(d["chart"])) for d in data])


def _blow(seq, values, i, j, prefer_replace=None):
    """Blow up (i, j), letting the smaller value divide.  Ties replace `prefer_replace`."""
    c = compare(values[i], values[j])
    if c < 0:
        rep = j
    elif c > 0:
        rep = i
    else:
        rep = prefer_replace if prefer_replace in (i, j) else max(i, j)
    b = ElementaryBlowup(min(i, j), max(i, j), rep)
    seq.append(b)
    return b, b.apply_values(values)


def _pick(c):
    """(i, j): index of the largest positive and of the most negative entry (smallest index on ties)."""
    pos = max(range(len(c)), key=lambda k: (c[k], -k))
    neg = min(range(len(c)), key=lambda k: (c[k], k))
    return pos, neg


def resolve_pair(seq, values, c, allow_ties=False):
    """Blow up until the Laurent exponent c has constant sign.

    Each blow-up of (i, j) with c_i > 0 > c_j adds the replaced entry to the
    divider's entry, which strictly lowers (max |c|, #entries at max, sum on
    the other side) lexicographically, so the loop ends.
    """
    c = list(c)
    while any(x > 0 for x in c) and any(x < 0 for x in c):
        i, j = _pick(c)
        if not allow_ties and compare(values[i], values[j]) == 0:
            raise NotIndependent(f"variables {i} and {j} have equal values")
        b, values = _blow(seq, values, i, j)
        c = b.apply_exponent(c)
    return c, values


def _as_values(w):
    return list(w.weights) if hasattr(w, "weights") else list(w)


def principalize(gens, w):
    """Blow up until the monomial ideal generated by `gens` is principal.

    Returns (seq, gen, images): the blow-up sequence, the transformed
    minimal-value generator and every transformed generator.
    """
    values = _as_values(w)
    n = len(values)
    gens = [list(map(int, g)) for g in gens]
    if not gens:
        return TransformSeq(n), None, []
    involved = sorted({k for g in gens for k in range(n) if g[k]})
    if rational_relation([values[k] for k in involved]) is not None and len(
            {tuple(g) for g in gens}) > 1:
        raise NotIndependent("weights of the ideal's variables are rationally dependent")
    seq = TransformSeq(n)
    cur = [list(g) for g in gens]
    vals = list(values)
    best = min(range(len(cur)), key=lambda k: (_val(values, gens[k]), k))
    for k in range(len(cur)):
        if k == best:
            continue
        diff = [a - b for a, b in zip(cur[best], cur[k])]
        start = len(seq)
        _, vals = resolve_pair(seq, vals, diff)
        for b in seq.steps[start:]:
            cur = [b.apply_exponent(g) for g in cur]
    return seq, cur[best], cur


class _ValKey:
    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return compare(self.v, other.v) < 0

    def __eq__(self, other):
        return compare(self.v, other.v) == 0


def _val(values, e):
    rank = values[0].rank if values else 1
    return _ValKey(value_sum(values, e, rank))


@dataclass
class PerronResult:
    seq: TransformSeq
    perm: list          # new position k holds transformed variable perm[k]
    zero_index: int     # transformed variable of value 0 (before perm)
    request: list       # Laurent exponent, in the original variables, of that variable
    values: list        # transformed values (before perm)

    @property
    def matrix(self):
        return self.seq.matrix


def perron(w, dependence=None):
    """Blow up the s+1 variables until the last one has value 0.

    `w` holds s+1 values: the first s rationally independent and positive,
    the last >= 0 and dependent on them.  `dependence` is either the
    coefficient vector q with w[s] = sum q_i w[i], or a full relation of
    length s+1.  The algorithm resolves the binomial of the primitive
    integer relation; at the end its exponent is +-e_z for the single
    variable z of value 0.
    """
    values = list(w)
    n = len(values)
    s = n - 1
    head = values[:s]
    if s and rational_relation(head) is not None:
        raise NotIndependent("the first s values satisfy a rational relation")
    if dependence is None:
        q = express_in(head, values[s])
        if q is None:
            raise NotDependent("the last value is independent of the others")
        rel = list(q) + [F(-1)]
    else:
        dependence = [F(x) for x in dependence]
        rel = dependence + [F(-1)] if len(dependence) == s else list(dependence)
        if len(rel) != n or rel[s] == 0:
            raise NotDependent("relation does not involve the last value")
        if not value_sum(values, rel).is_zero():
            if express_in(head, values[s]) is None:
                raise NotDependent("the last value is independent of the others")
            raise NotDependent("supplied relation does not hold")
    for k in range(s):
        if values[k].sign() <= 0:
            raise NotIndependent(f"value {k} is not positive")
    if values[s].sign() < 0:
        raise NotDependent("last value is negative")
    seq = TransformSeq(n)
    if values[s].is_zero():
        return PerronResult(seq, list(range(n)), s, [int(k == s) for k in range(n)], values)
    c = lattice.primitive(rel)
    vals = list(values)
    while any(x > 0 for x in c) and any(x < 0 for x in c):
        i, j = _pick(c)
        b, vals = _blow(seq, vals, i, j, prefer_replace=max(i, j))
        c = b.apply_exponent(c)
    zeros = [k for k in range(n) if vals[k].is_zero()]
    assert len(zeros) == 1, "relation left more than one value-zero variable"
    z = zeros[0]
    perm = list(range(n))
    perm[z], perm[s] = perm[s], perm[z]
    inv_a = lattice.inverse(seq.matrix)
    # x_new = x_old^(A^-1): row z of the inverse
    request = [int(x) for x in inv_a[z]]
    return PerronResult(seq, perm, z, request, vals)


def make_nonneg(b, C, y_weights):
    """Blow up x_1..x_r until x^b becomes a genuine monomial.

    Needs b C >= 0 (x^b pulls back to a monomial in y).  The x-values are
    C times the y-values; they decide the charts.  Returns (seq, b1).
    """
    b = [F(x) for x in b]
    r = len(C)
    s = len(C[0]) if C else 0
    bc = lattice.vecmat(b, C, s)
    if any(x < 0 for x in bc):
        raise NotRepresentable(f"b C = {[str(x) for x in bc]} has a negative entry")
    seq = TransformSeq(r)
    if all(x >= 0 for x in b):
        return seq, b
    yv = _as_values(y_weights)[:s]
    xvals = [value_sum(yv, C[i]) for i in range(r)]
    den = 1
    for x in b:
        den = lcm(den, x.denominator)
    c = [int(x * den) for x in b]
    c, _ = resolve_pair(seq, xvals, c)
    return seq, [F(x, den) for x in c]


# ---------------------------------------------------------------------------
# lattice points of cones

HILBERT_BOX_LIMIT = 200_000


def _cone_rays(P, r):
    """Primitive extreme rays of {z in Q^r : z P >= 0} (P given as r rows)."""
    cols = lattice.transpose(P, len(P[0]) if P else 0)
    rays = set()
    if r == 1:
        for sgn in (1, -1):
            if all(sgn * c[0] >= 0 for c in cols):
                rays.add((sgn,))
        return [list(x) for x in rays]
    for sub in combinations(range(len(cols)), r - 1):
        rows = [cols[k] for k in sub]
        if lattice.rank(rows, r) != r - 1:
            continue
        ker = lattice.right_kernel(rows, r)
        z = ker[0]
        for sgn in (1, -1):
            cand = [sgn * x for x in z]
            if all(sum(a * b for a, b in zip(cand, col)) >= 0 for col in cols):
                rays.add(tuple(_primitive_ray(cand)))
    return sorted([list(x) for x in rays])


def _primitive_ray(v):
    """Coprime integer vector with the same direction as v."""
    p = lattice.primitive(v)
    lead = next(k for k, x in enumerate(v) if x != 0)
    return p if (p[lead] > 0) == (v[lead] > 0) else [-x for x in p]


def _in_cone(z, cols, shift=None):
    for k, col in enumerate(cols):
        v = sum(a * b for a, b in zip(z, col))
        if shift is not None:
            v += shift[k]
        if v < 0:
            return False
    return True


def _box(lo, hi):
    size = 1
    for a, b in zip(lo, hi):
        size *= (b - a + 1)
    if size > HILBERT_BOX_LIMIT:
        raise InstanceTooLarge(f"enumeration box of {size} points exceeds {HILBERT_BOX_LIMIT}")
    return product(*[range(int(floor(a)), int(ceil(b)) + 1) for a, b in zip(lo, hi)])


def hilbert_basis(P):
    """Minimal generators of the semigroup {z in Z^r : z P >= 0} (P: r rows, rank r)."""
    r = len(P)
    s = len(P[0]) if P else 0
    if lattice.rank(P, s) < r:
        raise RankDeficient("cone matrix has rank below its row count")
    cols = lattice.transpose(P, s)
    rays = _cone_rays(P, r)
    if not rays:
        return []
    # every Hilbert basis element lies in the zonotope of the rays
    lo = [sum(min(0, ray[k]) for ray in rays) for k in range(r)]
    hi = [sum(max(0, ray[k]) for ray in rays) for k in range(r)]
    pts = [list(z) for z in _box(lo, hi) if any(z) and _in_cone(z, cols)]
    grade = {tuple(z): sum(sum(a * b for a, b in zip(z, col)) for col in cols) for z in pts}
    pts.sort(key=lambda z: (grade[tuple(z)], z))
    basis = []
    for z in pts:
        reducible = any(_in_cone([a - b for a, b in zip(z, h)], cols) for h in basis)
        if not reducible:
            basis.append(z)
    return basis


@dataclass
class ModuleGenerators:
    H: list        # Hilbert basis of {v in Z^r : v C >= 0}
    I: list        # generators of {v in G : v C >= 0}
    M: list        # generators of {v in G : v C + lam >= 0} over H
    d: int         # common denominator of all coordinates
    G: list        # basis (rational rows) of G = {v : v C in Z^s}


def module_generators(C, lam):
    """Generators of the cone semigroups and the shifted module of the decomposition."""
    r = len(C)
    s = len(C[0]) if C else 0
    if r == 0 or lattice.rank(C, s) < r:
        raise RankDeficient(f"rank of C is below r = {r}")
    lam = [F(x) for x in lam]
    B = lattice.saturation(C, s)                 # basis rows of Q^r C intersected with Z^s
    # G basis: rows T with T C = B
    T = [lattice.solve_left(row, C, s) for row in B]
    H = hilbert_basis(C)
    Iu = hilbert_basis(B)
    I = [lattice.vecmat(u, T, r) for u in Iu]
    # M over H, in u-coordinates: {u in Z^r : u B + lam >= 0}
    colsB = lattice.transpose(B, s)
    Tinv = lattice.inverse(T)
    H_u = [lattice.vecmat(h, Tinv, r) for h in H]
    verts = []
    for sub in combinations(range(s), r):
        rows = [colsB[k] for k in sub]
        if lattice.rank(rows, r) < r:
            continue
        sq = lattice.transpose(rows, r)      # r x r, columns are the chosen constraints
        rhs = [-lam[k] for k in sub]
        u = lattice.solve_left(rhs, sq, r)
        if u is not None and _in_cone(u, colsB, lam):
            verts.append(u)
    if not verts:
        raise RankDeficient("shifted polyhedron has no vertex")
    lo = [floor(min(v[k] for v in verts)) + sum(min(0, h[k]) for h in H_u) for k in range(r)]
    hi = [ceil(max(v[k] for v in verts)) + sum(max(0, h[k]) for h in H_u) for k in range(r)]
    cand = [list(u) for u in _box(lo, hi) if _in_cone(u, colsB, lam)]
    members = {tuple(u) for u in cand}

    def in_m(u):
        t = tuple(u)
        if t in members:
            return True
        return all(F(x).denominator == 1 for x in u) and _in_cone(u, colsB, lam)

    M = []
    for u in sorted(cand):
        if not any(in_m([a - b for a, b in zip(u, h)]) for h in H_u):
            M.append(lattice.vecmat(u, T, r))
    d = 1
    for v in H + I + M:
        for x in v:
            d = lcm(d, F(x).denominator)
    return ModuleGenerators([list(map(F, h)) for h in H], I, M, d, T)
