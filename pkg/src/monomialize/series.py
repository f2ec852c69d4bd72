"""Sparse truncated power series over cyclotomic fields.

A series stores integer exponent tuples e meaning the monomial y^(e/D),
a coefficient per exponent (Fraction, or FieldElement when irrational),
and a rational total-degree bound: every stored term has degree < trunc,
and nothing is known about degrees >= trunc.
"""
from fractions import Fraction as F
from math import gcd, lcm

from . import field
from .errors import (FieldExtensionRequired, InvalidOrder, NotAUnit,
                     TruncationExhausted)
from .field import FieldElement, inv


class _Infinity:
    """Order of a series whose relevant restriction vanishes."""

    def __repr__(self):
        return "inf"

    def __eq__(self, other):
        return isinstance(other, _Infinity)

    def __hash__(self):
        return hash("inf")

    def __gt__(self, other):
        return not isinstance(other, _Infinity)

    def __lt__(self, other):
        return False


INF = _Infinity()


def _clean(c):
    return c.normal() if isinstance(c, FieldElement) else F(c)


class TruncatedSeries:
    __slots__ = ("nvars", "terms", "trunc", "denom", "modulus")

    def __init__(self, nvars, terms=None, trunc=8, denom=1, modulus=4):
        self.nvars = nvars
        self.trunc = F(trunc)
        self.denom = denom
        self.modulus = field.check_modulus(modulus)
        limit = self.trunc * denom
        out = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != nvars or any(x < 0 for x in e):
                raise ValueError(f"bad exponent {e} for {nvars} variables")
            if sum(e) >= limit:
                continue
            c = _clean(c)
            if c != 0:
                out[e] = c
                if isinstance(c, FieldElement) and self.modulus % c.m:
                    self.modulus = lcm(self.modulus, c.m)
        self.terms = out

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, nvars, trunc=8, modulus=4):
        return cls(nvars, {}, trunc, 1, modulus)

    @classmethod
    def constant(cls, nvars, c, trunc=8, modulus=4):
        return cls(nvars, {(0,) * nvars: c}, trunc, 1, modulus)

    @classmethod
    def var(cls, nvars, i, trunc=8, modulus=4):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1}, trunc, 1, modulus)

    @classmethod
    def monomial(cls, exps, coeff=1, trunc=8, modulus=4):
        """coeff * y^exps with rational exponents allowed."""
        exps = [F(x) for x in exps]
        d = 1
        for x in exps:
            d = lcm(d, x.denominator)
        return cls(len(exps), {tuple(int(x * d) for x in exps): coeff}, trunc, d, modulus)

    @classmethod
    def from_items(cls, nvars, items, trunc=8, modulus=4):
        """Build from (exponent vector, coefficient) pairs with rational exponents."""
        items = [([F(x) for x in e], c) for e, c in items]
        d = 1
        for e, _ in items:
            for x in e:
                d = lcm(d, x.denominator)
        terms = {}
        for e, c in items:
            key = tuple(int(x * d) for x in e)
            terms[key] = terms.get(key, 0) + c
        return cls(nvars, terms, trunc, d, modulus)

    @classmethod
    def from_expr(cls, expr, gens, trunc=8, modulus=4):
        """Convert a sympy polynomial expression (rational coefficients, I allowed)."""
        from sympy import I, Poly, expand
        expr = expand(expr)
        poly = Poly(expr, *gens)
        terms = {}
        for mon, c in poly.terms():
            re, im = c.as_real_imag()
            val = F(int(re.p), int(re.q))
            if im != 0:
                val = val + F(int(im.p), int(im.q)) * FieldElement.root_of_unity(4)
            terms[tuple(mon)] = val
        del I
        return cls(len(gens), terms, trunc, 1, modulus)

    def copy_with(self, terms=None, trunc=None, denom=None, modulus=None):
        return TruncatedSeries(
            self.nvars, self.terms if terms is None else terms,
            self.trunc if trunc is None else trunc,
            self.denom if denom is None else denom,
            self.modulus if modulus is None else modulus)

    # basic queries -------------------------------------------------------
    def degree_of(self, e):
        return F(sum(e), self.denom)

    def items(self):
        """(rational exponent tuple, coefficient) pairs in canonical order."""
        d = self.denom
        return [(tuple(F(x, d) for x in e), c) for e, c in sorted(self.terms.items())]

    def is_zero(self):
        return not self.terms

    def order(self):
        """Minimal total degree in the support, INF for the zero series."""
        if not self.terms:
            return INF
        return min(F(sum(e), self.denom) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, F(0))

    def is_unit(self):
        return self.constant_term() != 0

    def involves(self, i):
        return any(e[i] for e in self.terms)

    def support_vars(self):
        return sorted({i for e in self.terms for i in range(self.nvars) if e[i]})

    def is_integral(self):
        return all(x % self.denom == 0 for e in self.terms for x in e)

    def coefficient(self, exps):
        exps = [F(x) for x in exps]
        key = exps and tuple(x * self.denom for x in exps)
        if any(F(x).denominator != 1 for x in key):
            return F(0)
        return self.terms.get(tuple(int(x) for x in key), F(0))

    # normalisation -------------------------------------------------------
    def with_denom(self, d):
        if d == self.denom:
            return self
        if d % self.denom:
            raise ValueError("new denominator must be a multiple")
        k = d // self.denom
        return TruncatedSeries(self.nvars, {tuple(x * k for x in e): c for e, c in self.terms.items()},
                               self.trunc, d, self.modulus)

    def simplify_denom(self):
        g = self.denom
        for e in self.terms:
            for x in e:
                g = gcd(g, x)
        if g <= 1:
            return self
        return TruncatedSeries(self.nvars, {tuple(x // g for x in e): c for e, c in self.terms.items()},
                               self.trunc, self.denom // g, self.modulus)

    def truncate(self, n):
        n = min(F(n), self.trunc)
        return TruncatedSeries(self.nvars, self.terms, n, self.denom, self.modulus)

    def _unify(self, other):
        if self.nvars != other.nvars:
            raise ValueError(f"series in {self.nvars} and {other.nvars} variables")
        d = lcm(self.denom, other.denom)
        return self.with_denom(d), other.with_denom(d), d

    # arithmetic --------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.nvars, other, self.trunc, self.modulus)
        a, b, d = self._unify(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0) + c
        return TruncatedSeries(self.nvars, terms, min(a.trunc, b.trunc), d,
                               lcm(a.modulus, b.modulus)).simplify_denom()

    __radd__ = __add__

    def __neg__(self):
        return self.copy_with(terms={e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _clean(c)
        if c == 0:
            return self.copy_with(terms={})
        return self.copy_with(terms={e: c * v for e, v in self.terms.items()},
                              modulus=lcm(self.modulus, field.modulus_of(c)))

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        a, b, d = self._unify(other)
        # a term known to degree < N times a series of order o is known to degree < N + o
        oa, ob = a.order(), b.order()
        bounds = []
        if oa is not INF:
            bounds.append(b.trunc + oa)
        if ob is not INF:
            bounds.append(a.trunc + ob)
        trunc = min(bounds) if bounds else min(a.trunc, b.trunc)
        limit = trunc * d
        bs = sorted(b.terms.items(), key=lambda t: sum(t[0]))
        terms = {}
        for ea, ca in a.terms.items():
            da = sum(ea)
            for eb, cb in bs:
                if da + sum(eb) >= limit:
                    break
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[e] = terms.get(e, 0) + ca * cb
        return TruncatedSeries(self.nvars, terms, trunc, d,
                               lcm(a.modulus, b.modulus)).simplify_denom()

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("use unit_pow for negative powers")
        out = TruncatedSeries.constant(self.nvars, 1, self.trunc * max(k, 1) + 1, self.modulus)
        if k == 0:
            return out.truncate(self.trunc)
        base = self
        first = True
        while k:
            if k & 1:
                out = base if first else out * base
                first = False
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            n = min(self.trunc, other.trunc)
            a, b, _ = self.truncate(n)._unify(other.truncate(n))
            return a.simplify_denom().terms == b.simplify_denom().terms and self.nvars == other.nvars
        if isinstance(other, (int, F, FieldElement)):
            return self == TruncatedSeries.constant(self.nvars, other, self.trunc, self.modulus)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.simplify_denom().terms.items())))

    def agrees(self, other, n):
        """Equality of the two series below total degree n."""
        return (self.truncate(n) - other.truncate(n)).truncate(n).is_zero()

    # structural operations ---------------------------------------------------
    def mul_monomial(self, exps, coeff=1):
        return self * TruncatedSeries.monomial(exps, coeff, self.trunc + sum(F(x) for x in exps) + 1,
                                               self.modulus)

    def div_monomial(self, exps):
        """Exact division by y^exps; the degree bound drops by |exps|."""
        exps = [F(x) for x in exps]
        d = self.denom
        for x in exps:
            d = lcm(d, x.denominator)
        s = self.with_denom(d)
        shift = [int(x * d) for x in exps]
        terms = {}
        for e, c in s.terms.items():
            ne = tuple(x - y for x, y in zip(e, shift))
            if any(x < 0 for x in ne):
                raise ValueError("monomial does not divide the series")
            terms[ne] = c
        return TruncatedSeries(self.nvars, terms, self.trunc - sum(exps), d,
                               self.modulus).simplify_denom()

    def min_exponents(self):
        """Componentwise minimum of the support (rational)."""
        if not self.terms:
            return None
        return [F(min(e[i] for e in self.terms), self.denom) for i in range(self.nvars)]

    def monomial_factor(self):
        """(a, u) with self = y^a * u and u a unit, or None when no such split exists."""
        a = self.min_exponents()
        if a is None:
            return None
        key = tuple(int(x * self.denom) for x in a)
        if key not in self.terms:
            return None
        return a, self.div_monomial(a)

    def coeff_in(self, var, k):
        """Coefficient of y_var^k, as a series in the same variables (no y_var)."""
        k = F(k) * self.denom
        terms = {}
        for e, c in self.terms.items():
            if e[var] == k:
                ne = list(e)
                ne[var] = 0
                terms[tuple(ne)] = c
        return TruncatedSeries(self.nvars, terms, self.trunc - F(k, self.denom), self.denom,
                               self.modulus).simplify_denom()

    def restrict(self, keep):
        """Set every variable outside `keep` to 0."""
        keep = set(keep)
        terms = {e: c for e, c in self.terms.items()
                 if all(e[i] == 0 for i in range(self.nvars) if i not in keep)}
        return self.copy_with(terms=terms)

    def derivative(self, var):
        if self.denom != 1:
            raise ValueError("derivative of a series with fractional exponents")
        terms = {}
        for e, c in self.terms.items():
            if e[var]:
                ne = list(e)
                ne[var] -= 1
                terms[tuple(ne)] = c * e[var]
        return self.copy_with(terms=terms, trunc=self.trunc - 1)

    def embed(self, nvars, positions):
        """Rename variable i to `positions[i]` in a series with `nvars` variables."""
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for i, x in enumerate(e):
                if x:
                    ne[positions[i]] += x
            terms[tuple(ne)] = c
        return TruncatedSeries(nvars, terms, self.trunc, self.denom, self.modulus)

    def permute(self, perm):
        """New variable k is old variable perm[k]."""
        inverse = [0] * self.nvars
        for k, p in enumerate(perm):
            inverse[p] = k
        return self.embed(self.nvars, inverse)

    def lift_field(self, m):
        m = lcm(m, self.modulus)
        return self.copy_with(modulus=m)

    def __repr__(self):
        if not self.terms:
            return f"0 + O({self.trunc})"
        parts = []
        for e, c in self.items():
            mon = "*".join(f"y{i + 1}" + (f"^{x}" if x != 1 else "") for i, x in enumerate(e) if x)
            parts.append(f"({c})" + (f"*{mon}" if mon else ""))
        return " + ".join(parts) + f" + O({self.trunc})"


# ---------------------------------------------------------------------------
# substitution

class GMTEntry:
    """coeff * prod_j (y_j + shifts[j])^exps[j]: the shape of a generalized monoidal transform."""

    __slots__ = ("coeff", "exps", "shifts")

    def __init__(self, exps, shifts=None, coeff=1):
        self.exps = tuple(F(x) for x in exps)
        self.shifts = tuple(shifts) if shifts is not None else (F(0),) * len(self.exps)
        self.coeff = coeff

    def expand(self, nvars, trunc, modulus=4):
        out = TruncatedSeries.constant(nvars, self.coeff, trunc, modulus)
        out.trunc = F(trunc)
        for j, (a, alpha) in enumerate(zip(self.exps, self.shifts)):
            if a == 0:
                continue
            if alpha == 0:
                out = out * TruncatedSeries.monomial(
                    [a if i == j else 0 for i in range(nvars)], 1, trunc + a, modulus)
            else:
                base = TruncatedSeries.var(nvars, j, trunc, modulus) + alpha
                out = out * unit_pow(base, a, extend=True)
        return out.truncate(trunc)


class Substitution:
    """Images of the variables of a series, as series in a target ring."""

    def __init__(self, images, nvars=None, trunc=None, modulus=4):
        self.raw = list(images)
        if nvars is None:
            nvars = next(img.nvars for img in self.raw if isinstance(img, TruncatedSeries))
        if trunc is None:
            trunc = min(img.trunc for img in self.raw if isinstance(img, TruncatedSeries))
        self.nvars = nvars
        self.images = [img if isinstance(img, TruncatedSeries) else img.expand(nvars, trunc, modulus)
                       for img in self.raw]


def substitute(g, sigma, trunc=None):
    """g(sigma_1, ..., sigma_k) modulo the induced degree bound.

    Every image used by g must have positive order; an image of order 0
    would feed the unknown tail of g into low degrees.
    """
    images = sigma.images if isinstance(sigma, Substitution) else list(sigma)
    if len(images) != g.nvars:
        raise ValueError(f"substitution gives {len(images)} images for {g.nvars} variables")
    nv = images[0].nvars if images else 0
    used = sorted({i for e in g.terms for i in range(g.nvars) if e[i]})
    min_ord = None
    bound = None
    for i in used:
        o = images[i].order()
        if o is INF:
            o = images[i].trunc
        if o == 0:
            raise TruncationExhausted(
                f"image of variable {i} has order 0; declare it as a translation instead")
        min_ord = o if min_ord is None else min(min_ord, o)
        bound = images[i].trunc if bound is None else min(bound, images[i].trunc)
    if min_ord is None:
        out_trunc = g.trunc if bound is None else bound
        c = g.constant_term()
        return TruncatedSeries.constant(nv, c, out_trunc if trunc is None else min(out_trunc, trunc),
                                        g.modulus)
    out_trunc = min(bound, g.trunc * min_ord)
    if trunc is not None:
        out_trunc = min(out_trunc, F(trunc))
    modulus = lcm(g.modulus, *[images[i].modulus for i in used])
    d = g.denom
    roots = {}
    for i in used:
        img = images[i].truncate(out_trunc)
        if d > 1:
            img = series_power(img, F(1, d), extend=True)
        roots[i] = img
    cache = {}

    def pw(i, k):
        key = (i, k)
        if key not in cache:
            if k == 1:
                cache[key] = roots[i]
            else:
                half = pw(i, k // 2)
                sq = (half * half).truncate(out_trunc)
                cache[key] = (sq * roots[i]).truncate(out_trunc) if k % 2 else sq
        return cache[key]

    total = TruncatedSeries.zero(nv, out_trunc, modulus)
    for e, c in sorted(g.terms.items()):
        if F(sum(e), d) * min_ord >= out_trunc:
            continue
        term = TruncatedSeries.constant(nv, c, out_trunc, modulus)
        for i, x in enumerate(e):
            if x:
                term = (term * pw(i, x)).truncate(out_trunc)
        total = total + term
    return total.truncate(out_trunc)


def compose_images(first, second):
    """Images of `first` rewritten through `second` (first then second)."""
    return [substitute(img, second) for img in first]


# ---------------------------------------------------------------------------
# units and powers

def residue(u):
    """The constant term of a unit."""
    if not u.is_unit():
        raise NotAUnit("series has no constant term")
    return u.constant_term()


def _binomial_series(v, lam, trunc):
    """(1 + v)^lam for v of positive order."""
    nv = v.nvars
    out = TruncatedSeries.constant(nv, 1, trunc, v.modulus)
    if v.is_zero():
        return out
    o = v.order()
    kmax = int(trunc / o) + 1
    term = TruncatedSeries.constant(nv, 1, trunc, v.modulus)
    coeff = F(1)
    for k in range(1, kmax + 1):
        coeff = coeff * (lam - k + 1) / k
        term = (term * v).truncate(trunc)
        if term.is_zero():
            break
        if coeff:
            out = out + term.scale(coeff)
    return out.truncate(trunc)


def unit_pow(u, lam, extend=False):
    """u^lam for a unit u and rational lam, by the binomial series.

    The constant term's power must exist in the cyclotomic field of u (or in
    an enlargement when `extend` is true); otherwise FieldExtensionRequired
    reports the modulus that would be needed.
    """
    lam = F(lam)
    if not u.is_unit():
        raise NotAUnit("unit_pow needs a nonzero constant term")
    c0 = u.constant_term()
    val, needed = field.power(c0, lam, u.modulus)
    if val is None:
        raise FieldExtensionRequired(f"({c0})^({lam}) is not in any cyclotomic field", None)
    if needed != u.modulus and not extend:
        raise FieldExtensionRequired(
            f"({c0})^({lam}) needs the cyclotomic field of modulus {needed}", needed)
    v = u.scale(inv(c0)) - 1
    body = _binomial_series(v.lift_field(needed), lam, u.trunc)
    return body.scale(val).lift_field(needed)


def series_power(h, lam, extend=False):
    """h^lam for h = y^a * unit (a rational power of a monomial times a unit)."""
    lam = F(lam)
    if lam.denominator == 1 and lam >= 0:
        return h ** int(lam)
    split = h.monomial_factor()
    if split is None:
        raise NotAUnit("series is not a monomial times a unit")
    a, u = split
    up = unit_pow(u, lam, extend=extend)
    return up.mul_monomial([x * lam for x in a])


# ---------------------------------------------------------------------------
# orders and the Tschirnhaus transformation

def ord_in_last(f, var):
    """Order of f(0, ..., 0, y_var, 0, ...), or INF if that restriction is zero."""
    exps = [F(e[var], f.denom) for e in f.terms
            if all(x == 0 for i, x in enumerate(e) if i != var)]
    return min(exps) if exps else INF


def solve_implicit(g, var, iterations=None):
    """Phi (free of y_var, order >= 1) with g(..., y_var = Phi, ...) = 0 modulo the bound.

    Needs ord g(0, ..., y_var, ...) = 1; each fixed-point pass fixes one more degree.
    """
    if ord_in_last(g, var) != 1:
        raise InvalidOrder("implicit solve needs order 1 in the solved variable")
    if g.denom != 1:
        raise InvalidOrder("implicit solve needs integral exponents")
    e1 = tuple(1 if i == var else 0 for i in range(g.nvars))
    cinv = inv(g.terms[e1])
    nv = g.nvars
    others = [i for i in range(nv) if i != var]
    images = [TruncatedSeries.var(nv, i, g.trunc, g.modulus) for i in range(nv)]
    phi = TruncatedSeries.zero(nv, g.trunc, g.modulus)
    for _ in range(iterations or int(g.trunc) + 2):
        images[var] = phi
        val = substitute(g, images)
        if val.is_zero():
            return phi
        phi = (phi - val.scale(cinv)).restrict(others)
    raise TruncationExhausted("implicit solve did not settle within the degree bound")


def tschirnhaus(f, var, t):
    """(Phi, f_bar) with f_bar(y) = f(y_var -> y_var + Phi) free of y_var^(t-1).

    Phi solves d^(t-1) f / d y_var^(t-1) = 0 for y_var.
    """
    t = int(t)
    if t < 1 or ord_in_last(f, var) != t:
        raise InvalidOrder(f"ord in variable {var} is {ord_in_last(f, var)}, not {t}")
    if f.denom != 1:
        raise InvalidOrder("Tschirnhaus needs integral exponents")
    g = f
    for _ in range(t - 1):
        g = g.derivative(var)
    phi = solve_implicit(g, var)
    nv = f.nvars
    images = [TruncatedSeries.var(nv, i, f.trunc, f.modulus) for i in range(nv)]
    images[var] = images[var] + phi
    fbar = substitute(f, images)
    return phi, fbar
