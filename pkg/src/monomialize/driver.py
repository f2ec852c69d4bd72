"""The monomialization loop and the independent certificate replay.

`step` raises the prepared type of a pair by working on its first series
coordinate f = x_{r+l}:

* a pure linear term in a free y_t lets f itself become the new y_t,
  which identifies x_{r+l} with it;
* the algebraic part of f (terms that are power series in the earlier x's)
  is removed by a type-10 change;
* what remains is brought to y^d * unit by y-side blow-ups; a
  non-algebraic d is made exact by type 8 and becomes a new monomial row,
  while an algebraic d is traded for u - u(0) by an x-side Perron
  transform (type 9) and the loop starts over.

The engine trusts truncated data: a series that looks like a unit modulo
the degree bound is taken to be one.
"""
from dataclasses import dataclass, field as dc_field
from fractions import Fraction as F
from itertools import combinations_with_replacement
from math import lcm

from . import field, lattice
from .errors import (InvalidPreparedForm, InvalidTransformation, IterationLimit,
                     MonomializeError, NotApplicable, TruncationExhausted)
from .prepared import (Transformation, apply_with_maps, decompose, lift_gmt, perron_y,
                       support_value, type8_exponents, type_gt, validate, x_exponent)
from .series import INF, TruncatedSeries, ord_in_last, substitute
from .toric import TransformSeq, principalize
from .valgroup import compare, express_in, value_sum

DEFAULT_BUDGET = 64
TRUST_NOTE = ("truncated data is trusted: series that look like units modulo the "
              "degree bound are treated as units")


@dataclass
class Tracked:
    """A pair together with series carried along through every change."""

    pair: object
    ys: dict = dc_field(default_factory=dict)   # name -> series in y
    xs: dict = dc_field(default_factory=dict)   # name -> series in x

    def do(self, T, check=True):
        real = apply_with_maps(self.pair, T, check)
        self.ys = {k: substitute(g, real.ymap) for k, g in self.ys.items()}
        self.xs = {k: substitute(g, real.xmap) for k, g in self.xs.items()}
        self.pair = real.pair
        return real


# ---------------------------------------------------------------------------
# series monomialization

def _x_scope(tr, name, budget):
    p = tr.pair
    g = tr.xs[name]
    if any(g.involves(i) for i in range(p.r, p.m)):
        raise ValueError("x-scope series must involve only x_0..x_{r-1}")
    if g.is_zero():
        raise NotApplicable("the zero series has no monomial form")
    gens = sorted({e[:p.r] for e in g.terms})
    xvals = [p.x_value(i) for i in range(p.r)]
    seq, _, _ = principalize([list(e) for e in gens], xvals)
    if len(seq):
        tr.do(lift_gmt(p, seq))
    return _split(tr.xs[name], tr.pair.r)


def _split(g, k):
    fac = g.monomial_factor()
    if fac is None or any(fac[0][k:]) or not fac[1].is_unit():
        return None
    return [int(x) for x in fac[0][:k]], fac[1]


def _indep_groups(g, s):
    """First-s exponents of the support and the coefficient series of each."""
    groups = {}
    for e, c in g.terms.items():
        key = e[:s]
        rest = (0,) * s + e[s:]
        groups.setdefault(key, {})[rest] = c
    return groups


def _y_scope(tr, name, t, budget):
    for _ in range(budget):
        p = tr.pair
        g = tr.ys[name]
        if g.is_zero():
            raise TruncationExhausted("every term moved past the degree bound during blow-ups")
        if any(g.involves(j) for j in range(t, p.n)):
            raise ValueError(f"series involves variables beyond y_{t}")
        done = _split(g, p.s)
        if done is not None:
            return done
        groups = _indep_groups(g, p.s)
        keys = list(groups)
        minimal = [k for k in keys if all(all(a <= b for a, b in zip(k, o)) for o in keys)]
        if not minimal:
            seq, _, _ = principalize([list(k) for k in keys], p.values[:p.s])
            tr.do(Transformation(1, {"y_seq": seq}))
            continue
        lead = groups[minimal[0]]
        # the coefficient of the lowest monomial vanishes at the origin:
        # blow up a dependent variable occurring in its lowest-degree part
        low = min(sum(e) for e in lead)
        dep = sorted({j for e in lead if sum(e) == low for j in range(p.s, p.n) if e[j]})
        # free variables first: an identified one also moves the x side
        j = min(dep, key=lambda q: (q < p.s + p.l, q))
        if j < p.s + p.l:
            tr.do(lift_gmt(p, mbar=j - p.s))
        else:
            tr.do(perron_y(p, j - p.s))
    raise IterationLimit(f"series monomialization did not finish in {budget} steps")


def monomialize_series(p, g, scope="y", t=None, budget=DEFAULT_BUDGET):
    """Transform p until g = monomial * unit.

    scope "x": g is a series in x_0..x_{r-1}; the result is x^d * u.
    scope "y": g is a series in y_0..y_{t-1}; the result is y^d * u with d
    supported on the independent variables.
    Returns (p', d, u).
    """
    tr = Tracked(p)
    if scope == "x":
        tr.xs["g"] = g
        out = _x_scope(tr, "g", budget)
    else:
        t = p.n if t is None else t
        if not p.s + p.l <= t <= p.n:
            raise ValueError("scope index must satisfy s + l <= t <= n")
        if g.is_zero():
            raise NotApplicable("the zero series has no monomial form")
        tr.ys["g"] = g
        out = _y_scope(tr, "g", t, budget)
    if out is None:
        raise TruncationExhausted("no monomial factor within the degree bound")
    d, u = out
    return tr.pair, d, u


# ---------------------------------------------------------------------------
# algebraic parts

def algebraic_part(g, p):
    """Terms of g in y_0..y_{s+l-1} whose exponents lie in the class of 0."""
    inner = g.copy_with(terms={e: c for e, c in g.terms.items()
                               if not any(e[j] for j in range(p.s + p.l, p.n))})
    if inner.is_zero():
        return inner
    comps = decompose(inner, p).components
    return comps.get((0,) * p.s, inner.copy_with(terms={}))


def as_x_series(P, p):
    """Rewrite an algebraic y-series as a series in x_0..x_{r+l-1}, or None if an exponent is fractional."""
    terms = {}
    for e, c in P.terms.items():
        px = x_exponent(e[:p.s], p)
        if px is None or any(F(x).denominator != 1 for x in px):
            return None
        ex = [int(x) for x in px] + list(e[p.s:p.s + p.l]) + [0] * (p.m - p.r - p.l)
        if any(x < 0 for x in ex):
            return False
        terms[tuple(ex)] = c
    return TruncatedSeries(p.m, terms, P.trunc, 1, P.modulus)


def _clear_negative(tr, P):
    """Type 2 so that every monomial of the algebraic part P has nonnegative x exponents."""
    p = tr.pair
    gens = [[0] * p.r]
    for e in P.terms:
        gens.append([int(x) for x in x_exponent(e[:p.s], p)])
    seq, _, _ = principalize(gens, [p.x_value(i) for i in range(p.r)])
    tr.do(lift_gmt(p, seq))


def split_algebraic(p, g, t=None, budget=DEFAULT_BUDGET):
    """g = P + tail with P algebraic over x_0..x_{r+l-1}.

    Returns (p', P, tail) where tail is ("zero",), ("monomial", d),
    ("monomial_var", d, t) or ("monomial_unit", d, u).
    """
    t = p.n if t is None else t
    tr = Tracked(p)
    P = algebraic_part(g, p)
    tr.ys["P"] = P
    tr.ys["rest"] = g - P
    rest = tr.ys["rest"]
    if rest.is_zero():
        return p, P, ("zero",)
    s, l = p.s, p.l
    free = [j for j in range(s + l, t) if rest.involves(j)]
    if free:
        low = [int(x) for x in rest.min_exponents()[:s]] + [0] * (p.n - s)
        Fq = rest.div_monomial(low)
        for j in free:
            if ord_in_last(Fq, j) == 1 and Fq.constant_term() == 0 and all(
                    not Fq.involves(q) for q in range(t, p.n)):
                tr.do(Transformation(5, {"mbar": j - s, "F": Fq}))
                return tr.pair, tr.ys["P"], ("monomial_var", low[:s], j)
    _y_scope(tr, "rest", t, budget)
    d, u = _split(tr.ys["rest"], tr.pair.s)
    q = tr.pair
    if x_exponent(d, q) is None:
        c = type8_exponents(q, d)
        tr.do(Transformation(8, {"gamma": u, "c": c}))
        return tr.pair, tr.ys["P"], ("monomial", d)
    return tr.pair, tr.ys["P"], ("monomial_unit", d, u)


# ---------------------------------------------------------------------------
# one increase of the type

def _x_dependent(p, value):
    """Whether a value is rationally dependent on the values of x_0..x_{r-1}."""
    return express_in([p.x_value(i) for i in range(p.r)], value) is not None


def _linear_free(f, p):
    """A free y_j with a pure linear term in f, when identifying keeps values dependent."""
    if not _x_dependent(p, support_value(f, p.values)):
        return None
    for j in range(p.s + p.l, p.n):
        e = tuple(int(q == j) for q in range(p.n))
        if f.terms.get(e, 0) != 0:
            return j
    return None


def _identified_var(g, p):
    """j when g equals the free variable y_j below its bound (and may be identified)."""
    for j in range(p.s + p.l, p.n):
        if g.trunc > 1 and g.agrees(TruncatedSeries.var(p.n, j, g.trunc, p.modulus), g.trunc):
            return j if _x_dependent(p, p.values[j]) else None
    return None


def _monomial_row(g, p):
    """d when g equals y^d (d on the independent variables, not algebraic) below its bound."""
    fac = g.monomial_factor()
    if fac is None or any(fac[0][p.s:]):
        return None
    d = [int(x) for x in fac[0][:p.s]]
    mono = TruncatedSeries.monomial(d + [0] * (p.n - p.s), 1, g.trunc, p.modulus)
    if g.trunc <= sum(d) or not g.agrees(mono, g.trunc):
        return None
    if lattice.rank([list(r) for r in p.C] + [d], p.s) != p.r + 1:
        return None
    return d


def _promotions(p_after, xi):
    g = p_after.xseries[xi - p_after.r - p_after.l]
    j = _identified_var(g, p_after)
    if j is not None:
        return [("identify", xi, j)]
    d = _monomial_row(g, p_after)
    if d is not None:
        return [("monomial", xi, d)]
    return []


def _do_promoting(tr, T):
    """Apply T, attaching a promotion of x_{r+l} when the result allows it."""
    p = tr.pair
    xi = p.r + p.l
    peek = apply_with_maps(p, T, check=False).pair
    if peek.type != p.type:
        return tr.do(T)
    promo = _promotions(peek, xi)
    return tr.do(T.with_promote(*promo) if promo else T)


def step(p, budget=DEFAULT_BUDGET):
    """Transform p until its type strictly increases."""
    validate(p)
    if p.r + p.l >= p.m:
        raise NotApplicable("pair is already in monomial form")
    start = p.type
    tr = Tracked(p)
    for _ in range(budget):
        q = tr.pair
        if type_gt(q.type, start):
            return q
        xi = q.r + q.l
        f = q.xseries[0]
        if f.is_zero():
            raise TruncationExhausted(f"x{xi + 1} vanishes modulo degree {f.trunc}; raise the bound")
        promo = _promotions(q, xi)
        if promo:
            tr.do(Transformation(1, {"y_seq": TransformSeq(q.s)}, promote=promo))
            continue
        j = _linear_free(f, q)
        if j is not None:
            tr.do(Transformation(5, {"mbar": j - q.s, "F": f}, promote=[("identify", xi, j)]))
            continue
        P = algebraic_part(f, q)
        phi = as_x_series(P, q) if not P.is_zero() else None
        if phi is False:
            _clear_negative(tr, P)
            continue
        if phi is not None:
            if (f - P).truncate(f.trunc).is_zero():
                raise InvalidPreparedForm(
                    "quasi-regular", f"x{xi + 1} is a power series in the other coordinates")
            _do_promoting(tr, Transformation(10, {"mbar": q.l, "phi": phi}))
            continue
        # no algebraic part, or one with fractional x exponents: monomialize all of f
        tr.ys["f"] = f
        out = _y_scope(tr, "f", q.n, budget)
        if type_gt(tr.pair.type, start):
            return tr.pair
        q = tr.pair
        d, u = out
        if x_exponent(d, q) is None:
            c = type8_exponents(q, d)
            T = Transformation(8, {"gamma": u, "c": c})
            _do_promoting(tr, T)
            continue
        if u.constant_term() == 0:
            raise TruncationExhausted("unit factor vanishes at the origin")
        _do_promoting(tr, lift_gmt(q, mbar=q.l))
    raise IterationLimit(f"type did not increase within {budget} transformations")


# ---------------------------------------------------------------------------
# the outer loop

@dataclass
class MonomialForm:
    pair: object
    rows: list              # exponent vectors over y of the monomial coordinates
    identified: list        # (x index, y index) pairs
    certificate: list       # transformation records

    def to_text(self):
        lines = []
        for i, row in enumerate(self.rows):
            mon = "*".join(f"y{j + 1}" + (f"^{e}" if e != 1 else "") for j, e in enumerate(row) if e)
            lines.append(f"x{i + 1} = {mon or '1'}")
        for xi, yj in self.identified:
            lines.append(f"x{xi + 1} = y{yj + 1}")
        return "\n".join(lines)


def step_bound(p):
    return (p.n + 1) * (p.m + 1) * (p.m + 1)


def monomial_form(p):
    rows = [list(r) + [0] * (p.n - p.s) for r in p.C]
    ident = [(p.r + k, p.s + k) for k in range(p.l)]
    return MonomialForm(p, rows, ident, list(p.log))


def run(p, max_steps=None, budget=DEFAULT_BUDGET, check_rank=True):
    """Repeat `step` until r + l = m."""
    validate(p)
    for k, g in enumerate(p.xseries):
        if g.is_zero():
            raise TruncationExhausted(
                f"x{p.r + p.l + k + 1} is zero modulo degree {g.trunc}; raise the bound")
    if p.r + p.l < p.m and check_rank and jacobian_rank(p) < p.m:
        raise InvalidPreparedForm(
            "quasi-regular", "the coordinates are algebraically dependent modulo the degree bound "
            "(Jacobian rank below m); a larger bound may help")
    limit = step_bound(p) if max_steps is None else max_steps
    k = 0
    while p.r + p.l < p.m:
        if k >= limit:
            raise IterationLimit(f"no monomial form after {limit} type increases")
        nxt = step(p, budget)
        if not type_gt(nxt.type, p.type):
            raise InvalidTransformation("step did not raise the type")
        p = nxt
        k += 1
    return monomial_form(p)


# ---------------------------------------------------------------------------
# injectivity

def _exponents(m, deg):
    out = []
    for d in range(deg + 1):
        for combo in combinations_with_replacement(range(m), d):
            e = [0] * m
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def check_injectivity(p, N):
    """No nonzero polynomial of degree <= N in the x images vanishes.

    Images are compared modulo the largest degree the data determines: the
    bound of the series coordinates, or N * (max order) + 1 when every
    coordinate is an exact monomial or identification.  On exact data the
    answer is decided.  With series coordinates a polynomial whose image
    cancels up to the bound (say (x2 - x1)^4 with x2 - x1 of order 4 and
    bound 16) is reported as a relation, so false is conclusive only for
    exact data; `jacobian_rank` is the test `run` relies on.
    """
    images = p.pullbacks()
    orders = [g.order() for g in images]
    if any(o is INF for o in orders):
        return False
    series_bounds = [g.trunc for g in p.xseries]
    bound = min(series_bounds) if series_bounds else N * max(orders) + 1
    bound = max(bound, 1)
    imgs = [p.pullback(i, bound) if i < p.r + p.l else g for i, g in enumerate(images)]
    modulus = lcm(p.modulus, *[g.modulus for g in imgs])
    deg = field.phi(modulus)
    powers = {}

    def pw(i, k):
        if (i, k) not in powers:
            powers[(i, k)] = TruncatedSeries.constant(p.n, 1, bound, modulus) if k == 0 else (
                pw(i, k - 1) * imgs[i]).truncate(bound)
        return powers[(i, k)]

    cols = {}
    rows = []
    for e in _exponents(p.m, N):
        # a product whose order reaches the known bound carries no information
        if sum(k * o for k, o in zip(e, orders)) >= bound:
            continue
        prod = TruncatedSeries.constant(p.n, 1, bound, modulus)
        for i, k in enumerate(e):
            if k:
                prod = (prod * pw(i, k)).truncate(bound)
        for twist in range(deg if any(not _rational(c) for c in prod.terms.values()) else 1):
            row = {}
            z = field.FieldElement.root_of_unity(modulus, twist) if twist else 1
            for ex, c in prod.terms.items():
                for q, x in enumerate(field.coords_of(c * z, modulus)):
                    if x:
                        row[cols.setdefault((ex, q), len(cols))] = x
            rows.append(row)
    if not cols:
        return len(rows) <= 1
    dense = [[r.get(c, F(0)) for c in range(len(cols))] for r in rows]
    return lattice.rank(dense, len(cols)) == len(dense)


def jacobian_rank(p, tries=3, seed=20261019):
    """Generic rank of the Jacobian of the x images (as the polynomials they are modulo the bound).

    Evaluated exactly at pseudo-random rational points; the maximum over a
    few points equals the generic rank except with negligible probability.
    """
    import random
    rng = random.Random(seed)
    images = p.pullbacks()
    modulus = lcm(p.modulus, *[g.modulus for g in images])
    width = field.phi(modulus)
    best = 0
    for _ in range(tries):
        pt = [F(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 3)) for _ in range(p.n)]
        rows = []
        for g in images:
            row = []
            for j in range(p.n):
                val = F(0)
                for e, c in g.derivative(j).terms.items():
                    term = c
                    for q, k in enumerate(e):
                        if k:
                            term = term * pt[q] ** k
                    val = val + term
                row.extend(field.coords_of(val, modulus))
            rows.append(row)
        best = max(best, lattice.rank(rows, p.n * width) if rows else 0)
    return best


def _rational(c):
    return not isinstance(c, field.FieldElement)


# ---------------------------------------------------------------------------
# independent replay

@dataclass
class VerifyResult:
    ok: bool
    stage: int = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _value_mismatch(ymap, old_values, new_values):
    """First old y_j whose monomial-times-unit image has a different value, else None."""
    for j, img in enumerate(ymap):
        fac = img.monomial_factor()
        if fac is None or not fac[1].is_unit():
            continue
        if compare(value_sum(new_values, fac[0]), old_values[j]) != 0:
            return j
    return None


def verify(p0, cert):
    """Replay `cert` from p0 and compare the composed maps at every stage.

    At stage k the original x_i pulled back along the composed y-change must
    equal the composed x-change evaluated at the current pullbacks.
    """
    try:
        validate(p0)
    except MonomializeError as exc:
        return VerifyResult(False, 0, f"initial pair: {exc}")
    p = p0.with_(log=())
    N = p0.trunc
    Y = [TruncatedSeries.var(p.n, i, N, p.modulus) for i in range(p.n)]
    X = [TruncatedSeries.var(p.m, i, N, p.modulus) for i in range(p.m)]
    orig = p0.pullbacks()
    for k, T in enumerate(cert):
        if not isinstance(T, Transformation):
            return VerifyResult(False, k, "malformed record")
        if T.post is None:
            return VerifyResult(False, k, "record does not state its resulting type")
        try:
            real = apply_with_maps(p, T, check=False)
        except (MonomializeError, ValueError, ZeroDivisionError) as exc:
            return VerifyResult(False, k, str(exc))
        prev = p.type
        old_values = p.values
        p = real.pair
        bad = _value_mismatch(real.ymap, old_values, p.values)
        if bad is not None:
            return VerifyResult(False, k, f"y{bad + 1} changes value under the coordinate change")
        if not type_gt(p.type, prev) and p.type != prev:
            return VerifyResult(False, k, "type decreased")
        try:
            Y = [substitute(g, real.ymap) for g in Y]
            X = [substitute(g, real.xmap) for g in X]
            pb = p.pullbacks()
            for i in range(p.m):
                lhs = substitute(orig[i], Y)
                rhs = substitute(X[i], pb)
                bound = min(lhs.trunc, rhs.trunc)
                if bound <= 0 or not lhs.agrees(rhs, bound):
                    return VerifyResult(False, k, f"x{i + 1} differs after replay")
        except (MonomializeError, ValueError) as exc:
            return VerifyResult(False, k, str(exc))
    return VerifyResult(True)
