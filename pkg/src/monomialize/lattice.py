"""Small exact linear algebra over Q and Z.

Rational elimination and the Smith decomposition come from sympy's
DomainMatrix; the row-style Hermite form is local because sympy's
convention (pivots from the right, unreduced entries) does not give the
canonical coset representatives the decomposition needs.
"""
from fractions import Fraction as F
from math import gcd, lcm

from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp


def _frac(q):
    return F(int(q.numerator), int(q.denominator))


def _qq(rows, ncols=None):
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    data = [[QQ(int(F(x).numerator), int(F(x).denominator)) for x in r] for r in rows]
    return DomainMatrix(data, (len(rows), ncols), QQ)


def _back(dm):
    return [[_frac(x) for x in row] for row in dm.to_list()]


def rank(rows, ncols=None):
    rows = list(rows)
    if not rows:
        return 0
    return _qq(rows, ncols).rank()


def right_kernel(rows, ncols):
    """Basis of {x in Q^ncols : M x = 0} as a list of vectors."""
    if not rows:
        return [[F(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    return _back(_qq(rows, ncols).nullspace()) if ncols else []


def left_kernel(rows, ncols):
    """Basis of {y : y M = 0}."""
    rows = list(rows)
    if not rows:
        return []
    return right_kernel(transpose(rows, ncols), len(rows))


def transpose(rows, ncols=None):
    rows = list(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    return [[rows[i][j] for i in range(len(rows))] for j in range(ncols)]


def matmul(a, b):
    if not a:
        return []
    inner = len(b)
    ncols = len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(inner)), 0) for j in range(ncols)]
            for i in range(len(a))]


def vecmat(v, m, ncols=None):
    if ncols is None:
        ncols = len(m[0]) if m else 0
    return [sum((v[k] * m[k][j] for k in range(len(m))), 0) for j in range(ncols)]


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def inverse(rows):
    return _back(_qq(rows).inv())


def det(rows):
    if not rows:
        return F(1)
    return _frac(_qq(rows).det())


def solve_left(v, rows, ncols):
    """Some x with x M = v, or None if v is outside the row space."""
    k = len(rows)
    if k == 0:
        return [] if all(x == 0 for x in v) else None
    # x M = v  <=>  M^T x^T = v^T
    aug = [list(rows[i][j] for i in range(k)) + [v[j]] for j in range(ncols)]
    red, pivots = _qq(aug, k + 1).rref()
    if k in pivots:
        return None
    red = _back(red)
    x = [F(0)] * k
    for row, p in zip(red, pivots):
        x[p] = row[k]
    return x


def primitive(v):
    """Scale a nonzero rational vector to coprime integers, first nonzero entry positive."""
    den = 1
    for x in v:
        den = lcm(den, F(x).denominator)
    ints = [int(F(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    return [-x for x in ints] if lead < 0 else ints


def is_integral(v):
    return all(F(x).denominator == 1 for x in v)


def _smith(rows, ncols):
    dm = DomainMatrix([[ZZ(int(x)) for x in r] for r in rows], (len(rows), ncols), ZZ)
    s, u, v = smith_normal_decomp(dm)
    return ([[int(x) for x in r] for r in s.to_list()],
            [[int(x) for x in r] for r in u.to_list()],
            [[int(x) for x in r] for r in v.to_list()])


def _int_inverse(m):
    inv = inverse(m)
    out = [[int(x) for x in r] for r in inv]
    assert all(F(x).denominator == 1 for r in inv for x in r)
    return out


def saturation(rows, ncols):
    """Integer basis (rows) of Q-span(rows) intersected with Z^ncols."""
    rows = [[int(x) for x in r] for r in rows if any(x != 0 for x in r)]
    if not rows:
        return []
    s, _, v = _smith(rows, ncols)
    rk = sum(1 for i in range(min(len(s), ncols)) if s[i][i] != 0)
    vinv = _int_inverse(v)
    return row_hnf(vinv[:rk])


def integer_left_kernel(rows, ncols):
    """Integer basis of {x in Z^k : x M = 0} for an integer k x ncols matrix M."""
    rows = [[int(x) for x in r] for r in rows]
    k = len(rows)
    if k == 0:
        return []
    if ncols == 0:
        return identity(k)
    s, u, _ = _smith(rows, ncols)
    rk = sum(1 for i in range(min(k, ncols)) if s[i][i] != 0)
    return row_hnf(u[rk:])


def row_hnf(rows):
    """Row-style Hermite normal form: echelon from the left, positive pivots,
    entries above each pivot reduced into [0, pivot). Zero rows are dropped."""
    a = [[int(x) for x in r] for r in rows]
    if not a:
        return []
    ncols = len(a[0])
    top = 0
    pivots = []
    for col in range(ncols):
        if top >= len(a):
            break
        while True:
            nz = [i for i in range(top, len(a)) if a[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][col]))
            a[top], a[piv] = a[piv], a[top]
            done = True
            for i in range(top + 1, len(a)):
                if a[i][col]:
                    q = a[i][col] // a[top][col]
                    a[i] = [x - q * y for x, y in zip(a[i], a[top])]
                    if a[i][col]:
                        done = False
            if done:
                break
        if top < len(a) and a[top][col] != 0:
            if a[top][col] < 0:
                a[top] = [-x for x in a[top]]
            for i in range(top):
                q = a[i][col] // a[top][col]
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[top])]
            pivots.append(col)
            top += 1
    return [r for r in a[:top]]


def reduce_mod(v, hnf):
    """Canonical representative of v modulo the lattice with Hermite basis `hnf`."""
    v = [int(x) for x in v]
    for row in hnf:
        col = next(j for j, x in enumerate(row) if x != 0)
        q = v[col] // row[col]
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    return v
