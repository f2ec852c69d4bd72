"""Prepared pairs and the ten form-preserving coordinate changes.

A pair (x, y) is prepared of type (s, r, l) when

    x_i       = y^C_i            for i < r      (monomials in y_0..y_{s-1})
    x_{r+k}   = y_{s+k}          for k < l      (identified variables)
    x_i       = series in y      for i >= r + l

with y_0..y_{s-1} of rationally independent values and every other y
value dependent on them.  Indices are 0-based throughout.

Besides the weights, the state keeps one residue per dependent variable:
the constant value taken by the value-zero monomial y_j / y^q_j, where q_j
are the dependence coefficients of y_j.  Translations created by
dependent blow-ups take their constant from here, so no roots are needed.
"""
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction as F
from functools import cmp_to_key
from math import lcm

from . import field, lattice
from .errors import (FieldExtensionRequired, InvalidPreparedForm, InvalidTransformation,
                     MonomializeError, NotApplicable, NotDependent, NotIndependent)
from .series import (INF, GMTEntry, Substitution, TruncatedSeries, ord_in_last,
                     solve_implicit, substitute, unit_pow)
from .toric import TransformSeq, perron, resolve_pair
from .valgroup import (GroupValue, WeightAssignment, compare, express_in, monomial_value,
                       rational_relation, value_sum)


# ---------------------------------------------------------------------------
# state

@dataclass(frozen=True)
class PreparedPair:
    n: int
    m: int
    s: int
    r: int
    l: int
    C: tuple
    xseries: tuple
    weights: WeightAssignment
    modulus: int = 4
    trunc: F = F(8)
    residues: tuple = None
    log: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(tuple(int(x) for x in row) for row in self.C))
        object.__setattr__(self, "xseries", tuple(self.xseries))
        object.__setattr__(self, "trunc", F(self.trunc))
        if self.residues is None:
            object.__setattr__(self, "residues", (F(1),) * (self.n - self.s))
        object.__setattr__(self, "residues", tuple(
            r.normal() if isinstance(r, field.FieldElement) else F(r) for r in self.residues))
        object.__setattr__(self, "log", tuple(self.log))

    @property
    def type(self):
        return (self.s, self.r, self.l)

    @property
    def values(self):
        return list(self.weights.weights)

    def slot(self, i):
        """Position of x_i among the series slots (i >= r + l)."""
        return i - self.r - self.l

    def pullback(self, i, trunc=None):
        """x_i as a series in y."""
        t = self.trunc if trunc is None else trunc
        if i < self.r:
            return TruncatedSeries.monomial(list(self.C[i]) + [0] * (self.n - self.s), 1, t,
                                            self.modulus)
        if i < self.r + self.l:
            return TruncatedSeries.var(self.n, self.s + i - self.r, t, self.modulus)
        return self.xseries[self.slot(i)]

    def pullbacks(self, trunc=None):
        return [self.pullback(i, trunc) for i in range(self.m)]

    def x_value(self, i):
        """Value of x_i: exact for monomials and identifications, minimal support value otherwise."""
        if i < self.r:
            return monomial_value(self.values[:self.s], self.C[i])
        if i < self.r + self.l:
            return self.values[self.s + i - self.r]
        return support_value(self.xseries[self.slot(i)], self.values)

    def dependence(self, j):
        """Coefficients q with w_j = sum q_i w_i (i < s), for j >= s."""
        return list(self.weights.dependence[j - self.s])

    def with_(self, **changes):
        return replace(self, **changes)


def support_value(g, values):
    """Minimal value over the support of g (None for the zero series)."""
    best = None
    for e, _ in g.items():
        v = value_sum(values, e)
        if best is None or compare(v, best) < 0:
            best = v
    return best


def _values_key(values):
    return cmp_to_key(lambda a, b: compare(a, b))


def validate(p):
    """Check every invariant of the prepared form; return (s, r, l)."""
    n, m, s, r, l = p.n, p.m, p.s, p.r, p.l
    if not (0 <= s <= n and 0 <= r <= m and 0 <= l and r + l <= m and s + l <= n):
        raise InvalidPreparedForm("dimensions", f"n={n} m={m} s={s} r={r} l={l}")
    if len(p.C) != r or any(len(row) != s for row in p.C):
        raise InvalidPreparedForm("dimensions", "C must have r rows of length s")
    if len(p.xseries) != m - r - l:
        raise InvalidPreparedForm("dimensions", f"expected {m - r - l} series, got {len(p.xseries)}")
    if len(p.weights.weights) != n or p.weights.s != s:
        raise InvalidPreparedForm("weights", "weight assignment does not match n and s")
    if any(x < 0 for row in p.C for x in row):
        raise InvalidPreparedForm("nonnegative", "C has a negative entry")
    if any(not any(row) for row in p.C):
        raise InvalidPreparedForm("monomial", "a monomial row of C is zero")
    if r and lattice.rank(p.C, s) != r:
        raise InvalidPreparedForm("rank", f"rank C = {lattice.rank(p.C, s)} but r = {r}")
    problems = p.weights.check()
    if problems:
        clause = "independence" if any("independent" in x for x in problems) else "weights"
        raise InvalidPreparedForm(clause, "; ".join(problems))
    if len(p.residues) != n - s or any(c == 0 for c in p.residues):
        raise InvalidPreparedForm("residues", "need one nonzero residue per dependent variable")
    for k, g in enumerate(p.xseries):
        if g.nvars != n:
            raise InvalidPreparedForm("series", f"series {k} has {g.nvars} variables, not {n}")
        if g.denom != 1:
            raise InvalidPreparedForm("series", f"series {k} has fractional exponents")
        if g.constant_term() != 0:
            raise InvalidPreparedForm("series", f"series {k} has order 0")
    return p.type


def type_geq(a, b):
    """(s1, r1, l1) >= (s, r, l) in the partial order of prepared types."""
    return a[0] >= b[0] and a[1] >= b[1] and a[1] + a[2] >= b[1] + b[2]


def type_gt(a, b):
    return type_geq(a, b) and (a[0] > b[0] or a[1] > b[1] or a[1] + a[2] > b[1] + b[2])


# ---------------------------------------------------------------------------
# class decomposition

@dataclass
class ClassDecomposition:
    lattice_basis: list
    components: dict = dc_field(default_factory=dict)

    def zero_key(self, s):
        return (0,) * s

    def total(self, like):
        out = TruncatedSeries.zero(like.nvars, like.trunc, like.modulus)
        for g in self.components.values():
            out = out + g
        return out


def class_key(alpha, hnf):
    return tuple(lattice.reduce_mod(alpha, hnf))


def _check_scope(g, p):
    if g.denom != 1:
        raise ValueError("decomposition needs integral exponents")
    if any(g.involves(j) for j in range(p.s + p.l, g.nvars)):
        raise ValueError("series involves free variables beyond y_{s+l}")


def decompose(g, p):
    """Group the terms of g by the class of their first s exponents modulo Q^r C meet Z^s."""
    _check_scope(g, p)
    hnf = lattice.saturation(p.C, p.s) if p.r else []
    buckets = {}
    for e, c in g.terms.items():
        buckets.setdefault(class_key(e[:p.s], hnf), {})[e] = c
    comps = {k: g.copy_with(terms=t) for k, t in sorted(buckets.items())}
    return ClassDecomposition(hnf, comps)


def is_algebraic(g, p):
    """True when every support exponent keeps the stacked exponent matrix at rank r."""
    _check_scope(g, p)
    hnf = lattice.saturation(p.C, p.s) if p.r else []
    return all(not any(class_key(e[:p.s], hnf)) for e in g.terms)


def x_exponent(alpha, p):
    """p with alpha = p C (rational), or None."""
    if p.r == 0:
        return [] if not any(alpha) else None
    return lattice.solve_left(list(alpha), [list(r) for r in p.C], p.s)


# ---------------------------------------------------------------------------
# transformation records

TAGS = range(1, 11)


@dataclass(frozen=True)
class Transformation:
    """One coordinate change.  `promote` lists the re-indexing done afterwards:
    ("monomial", x_index, d) turns a series that equals y^d into a monomial
    row; ("identify", x_index, y_index) turns a series that equals y_index
    into an identification."""

    tag: int
    payload: dict
    promote: tuple = ()
    post: tuple = None
    post_C: tuple = None
    note: str = ""

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InvalidTransformation(f"unknown transformation type {self.tag}")
        object.__setattr__(self, "promote", tuple(tuple(x) for x in self.promote))

    def with_promote(self, *items):
        return replace(self, promote=self.promote + tuple(items))


@dataclass
class Realization:
    """Old variables as series in the new ones, plus the new pair."""

    pair: PreparedPair
    ymap: list
    xmap: list
    record: Transformation


def _mono(n, exps, trunc, modulus, offset=0):
    e = [0] * n
    for k, x in enumerate(exps):
        e[offset + k] = x
    return TruncatedSeries.monomial(e, 1, trunc, modulus)


def _identity(n, trunc, modulus):
    return [TruncatedSeries.var(n, i, trunc, modulus) for i in range(n)]


def _int_matrix(a, what):
    a = [[F(x) for x in row] for row in a]
    if any(x.denominator != 1 or x < 0 for row in a for x in row):
        raise InvalidTransformation(f"{what} must have nonnegative integer entries")
    return [[int(x) for x in row] for row in a]


def _new_monomial_rows(a, C, b, r, s):
    """a^-1 C b, which must be a nonnegative integer matrix."""
    if r == 0:
        return []
    if lattice.det(a) == 0:
        raise InvalidTransformation("x-side exponent matrix is singular")
    out = lattice.matmul(lattice.matmul(lattice.inverse(a), [list(row) for row in C]), b)
    if any(F(x).denominator != 1 or x < 0 for row in out for x in row):
        raise InvalidTransformation(
            f"transformed monomial exponents {[[str(x) for x in row] for row in out]} "
            "are not nonnegative integers")
    return [[int(x) for x in row] for row in out]


def _solve_values(b, w):
    """Values w' with b w' = w (y = y'^b)."""
    inv = lattice.inverse(b)
    return [value_sum(w, row) for row in inv]


def _gmt_image(n, exps, pos, alpha, trunc, modulus, offset=0):
    """prod_j y_{offset+j}^{exps_j} * (y_pos + alpha) as a series in n variables."""
    e = [F(0)] * n
    for k, x in enumerate(exps):
        e[offset + k] = F(x)
    e[pos] += 1
    shifts = [F(0)] * n
    shifts[pos] = alpha
    return GMTEntry(e, shifts).expand(n, trunc, modulus)


def _only_vars(g, allowed, what):
    for i in range(g.nvars):
        if i not in allowed and g.involves(i):
            raise InvalidTransformation(f"{what} involves variable {i}")


def _realize_raw(p, T):
    """The raw coordinate change before re-indexing.

    Returns (ymap, xmap, C, weights, residues, series, modulus, notes).
    """
    n, m, s, r, l = p.n, p.m, p.s, p.r, p.l
    N, mod = p.trunc, p.modulus
    w = p.values
    ymap = _identity(n, N, mod)
    xmap = _identity(m, N, mod)
    C = [list(row) for row in p.C]
    res = list(p.residues)
    series = list(p.xseries)
    d = T.payload
    notes = []
    tag = T.tag
    change_series = True

    if tag == 1:
        seq = d["y_seq"]
        if seq.n != s:
            raise InvalidTransformation("type 1 needs a blow-up sequence on y_0..y_{s-1}")
        B = seq.matrix
        for i in range(s):
            ymap[i] = _mono(n, B[i], N, mod)
        C = lattice.matmul(C, B) if r else []
        w = seq.apply_values(w[:s]) + w[s:]

    elif tag == 2:
        xs, ys = d["x_seq"], d["y_seq"]
        if xs.n != r or ys.n != s:
            raise InvalidTransformation("type 2 needs sequences on x_0..x_{r-1} and y_0..y_{s-1}")
        A, B = xs.matrix, ys.matrix
        C = _new_monomial_rows(A, C, B, r, s)
        for i in range(r):
            xmap[i] = _mono(m, A[i], N, mod)
        for i in range(s):
            ymap[i] = _mono(n, B[i], N, mod)
        w = ys.apply_values(w[:s]) + w[s:]

    elif tag in (3, 10):
        k = int(d["mbar"])
        phi = d["phi"]
        if tag == 3 and not 0 <= k < l:
            raise InvalidTransformation("type 3 needs an identified index mbar < l")
        if tag == 10 and not l <= k < m - r:
            raise InvalidTransformation("type 10 needs a series index mbar >= l")
        if phi.nvars != m or phi.denom != 1 or phi.constant_term() != 0:
            raise InvalidTransformation("Phi must be a series in the x variables without constant term")
        _only_vars(phi, set(range(r + k)), "Phi")
        xmap[r + k] = xmap[r + k] + phi
        phistar = substitute(phi, p.pullbacks())
        if tag == 3:
            ymap[s + k] = ymap[s + k] + phistar
            new = TruncatedSeries.var(n, s + k, N, mod) - phistar
            w = list(w)
            w[s + k] = support_value(new, p.values)
            res[k] = F(1)
            notes.append(f"y{s + k + 1} takes the minimal support value; residue reset to 1")
        else:
            j = k - l
            series[j] = (series[j] - phistar).truncate(min(series[j].trunc, phistar.trunc))
            change_series = False

    elif tag in (4, 6, 9):
        k = int(d["mbar"])
        alpha = d["alpha"]
        if tag == 4 and not 0 <= k < l:
            raise InvalidTransformation("type 4 needs an identified index mbar < l")
        if tag in (6, 9) and not l <= k < (n - s if tag == 6 else m - r):
            raise InvalidTransformation(f"type {tag} needs a free index mbar >= l")
        if tag in (4, 6) and alpha != p.residues[k]:
            raise InvalidTransformation(
                f"translation {alpha} differs from the residue {p.residues[k]} of y{s + k + 1}")
        b = _int_matrix(d["b"], "b")
        if len(b) != s or any(len(row) != s for row in b) or (s and lattice.det(b) == 0):
            raise InvalidTransformation("b must be an invertible s x s matrix")
        if tag in (4, 9):
            a = _int_matrix(d["a"], "a")
            alast = [int(x) for x in d["a_last"]]
            if len(a) != r or len(alast) != r:
                raise InvalidTransformation("a must be r x r and a_last of length r")
            C = _new_monomial_rows(a, C, b, r, s)
            for i in range(r):
                xmap[i] = _mono(m, a[i], N, mod)
            xmap[r + k] = _gmt_image(m, alast, r + k, alpha, N, mod)
        else:
            C = lattice.matmul(C, b) if r else []
            C = [[int(x) for x in row] for row in C]
        for i in range(s):
            ymap[i] = _mono(n, b[i], N, mod)
        w = list(w)
        w[:s] = _solve_values(b, w[:s]) if s else []
        if tag in (4, 6):
            blast = [int(x) for x in d["b_last"]]
            if len(blast) != s:
                raise InvalidTransformation("b_last must have length s")
            if tag == 4 and [sum(alast[i] * C[i][j] for i in range(r)) for j in range(s)] != blast:
                raise InvalidTransformation("y-side monomial does not match the x-side monomial")
            ymap[s + k] = _gmt_image(n, blast, s + k, alpha, N, mod)
            res[k] = F(1)
            notes.append(f"y{s + k + 1} keeps its previous value; residue reset to 1")
        else:
            j = k - l
            sub = substitute(series[j], ymap)
            shift = [sum(alast[i] * C[i][q] for i in range(r)) for q in range(s)] + [0] * (n - s)
            try:
                quot = sub.div_monomial(shift)
            except ValueError as exc:
                raise InvalidTransformation(f"type 9: x{r + k + 1} is not divisible: {exc}") from None
            if quot.constant_term() != alpha:
                raise InvalidTransformation(
                    f"type 9: residue {quot.constant_term()} differs from alpha {alpha}")
            series[j] = quot - alpha
            for jj in range(len(series)):
                if jj != j:
                    series[jj] = substitute(series[jj], ymap)
            change_series = False

    elif tag == 5:
        k = int(d["mbar"])
        Fs = d["F"]
        if not l <= k < n - s:
            raise InvalidTransformation("type 5 needs a free index mbar >= l")
        if Fs.nvars != n or Fs.denom != 1 or Fs.constant_term() != 0:
            raise InvalidTransformation("F must be a series in y without constant term")
        if ord_in_last(Fs, s + k) != 1:
            raise InvalidTransformation("F must have order 1 in the renamed variable")
        # old y_{s+k} = Psi(new y): solve F(..., Psi, ...) = y_{s+k} with an extra unknown
        pos = list(range(n))
        pos[s + k] = n
        G = Fs.embed(n + 1, pos) - TruncatedSeries.var(n + 1, s + k, Fs.trunc, mod)
        psi = solve_implicit(G, n)
        ymap[s + k] = TruncatedSeries(n, {e[:n]: c for e, c in psi.terms.items()},
                                      psi.trunc, 1, psi.modulus)
        w = list(w)
        w[s + k] = support_value(Fs, p.values)
        res[k] = F(1)
        notes.append(f"y{s + k + 1} takes the minimal support value of F; residue reset to 1")

    elif tag == 7:
        i, k = int(d["i"]), int(d["mbar"])
        if not (l <= i < n - s and l <= k < n - s and i != k):
            raise InvalidTransformation("type 7 swaps two distinct free variables")
        a, b2 = s + i, s + k
        ymap[a], ymap[b2] = ymap[b2], ymap[a]
        w = list(w)
        w[a], w[b2] = w[b2], w[a]
        res[i], res[k] = res[k], res[i]

    elif tag == 8:
        gamma = d["gamma"]
        c = [F(x) for x in d["c"]]
        if len(c) != s or gamma.nvars != n or not gamma.is_unit():
            raise InvalidTransformation("type 8 needs a unit gamma and s exponents")
        if r and any(sum(C[i][j] * c[j] for j in range(s)) != 0 for i in range(r)):
            raise InvalidTransformation("type 8 exponents must satisfy C c = 0")
        g0 = gamma.constant_term()
        for k in range(n - s):
            q = p.dependence(s + k)
            e = sum((a * b for a, b in zip(q, c)), F(0))
            val, big = field.power(g0, -e, mod)
            if val is None:
                raise FieldExtensionRequired(f"({g0})^({-e}) is not cyclotomic", None)
            mod = lcm(mod, big)
            res[k] = res[k] * val
        ymap = _type8_map(gamma, c, n, s, N, mod)
        mod = lcm(mod, *[img.modulus for img in ymap])

    if change_series:
        series = [substitute(g, ymap) for g in series]
    return ymap, xmap, C, w, res, series, mod, notes


def _type8_map(gamma, c, n, s, N, mod):
    """Old y_i = y'_i * gamma(old y)^c_i, solved by fixed point."""
    base = _identity(n, N, mod)
    cur = list(base)
    for _ in range(int(N) + 2):
        g = substitute(gamma, cur)
        nxt = list(base)
        for i in range(s):
            if c[i]:
                nxt[i] = (base[i] * unit_pow(g, c[i], extend=True)).truncate(N)
        if all(a.agrees(b, N) for a, b in zip(cur, nxt)):
            return nxt
        cur = nxt
    raise InvalidTransformation("type 8 fixed point did not settle")


def _move(order, src, dst):
    order = list(order)
    v = order.pop(src)
    order.insert(dst, v)
    return order


def apply_with_maps(p, T, check=True):
    """Apply T; return a Realization with the old variables in terms of the new."""
    before = validate(p)
    ymap, xmap, C, w, res, series, mod, notes = _realize_raw(p, T)
    n, m, s, r, l = p.n, p.m, p.s, p.r, p.l
    C = [list(row) for row in C]
    yorder = list(range(n))
    xorder = list(range(m))
    for item in T.promote:
        kind = item[0]
        xi = int(item[1])
        if not r + l <= xi < m:
            raise InvalidTransformation(f"promotion of x{xi + 1}, which is not a series")
        g = series[xi - r - l]
        if kind == "monomial":
            dvec = [int(x) for x in item[2]]
            if len(dvec) != s or any(x < 0 for x in dvec):
                raise InvalidTransformation("monomial promotion needs s nonnegative exponents")
            target = _mono(n, dvec, g.trunc, mod)
            if g.trunc <= sum(dvec) or not g.agrees(target, g.trunc):
                raise InvalidTransformation(f"x{xi + 1} is not the monomial {dvec}")
            if lattice.rank(C + [dvec], s) != r + 1:
                raise InvalidTransformation("promoted monomial does not raise the rank")
            C.append(dvec)
            xorder = _move(xorder, xi, r)
            series.pop(xi - r - l)
            r += 1
        elif kind == "identify":
            yj = int(item[2])
            if not s + l <= yj < n:
                raise InvalidTransformation(f"y{yj + 1} is not a free variable")
            target = TruncatedSeries.var(n, yj, g.trunc, mod)
            if g.trunc <= 1 or not g.agrees(target, g.trunc):
                raise InvalidTransformation(f"x{xi + 1} is not equal to y{yj + 1}")
            xorder = _move(xorder, xi, r + l)
            series.pop(xi - r - l)
            # rename y_yj to position s + l
            perm = _move(list(range(n)), yj, s + l)
            yorder = [yorder[q] for q in perm]
            series = [g2.permute(perm) for g2 in series]
            w = [w[q] for q in perm]
            res = [res[q - s] for q in perm[s:]]
            l += 1
        else:
            raise InvalidTransformation(f"unknown promotion {kind}")
    if yorder != list(range(n)):
        ymap = [img.permute(yorder) for img in ymap]
    if xorder != list(range(m)):
        xmap = [img.permute(xorder) for img in xmap]
    try:
        weights = WeightAssignment(w, s)
        new = PreparedPair(n, m, s, r, l, C, series, weights, mod, p.trunc, res, p.log)
        after = validate(new)
    except InvalidPreparedForm as exc:
        raise InvalidTransformation(f"result is not prepared ({exc})") from None
    if not type_geq(after, before):
        raise InvalidTransformation(f"type dropped from {before} to {after}")
    if T.post is not None and tuple(T.post) != after:
        raise InvalidTransformation(f"record claims type {tuple(T.post)}, replay gives {after}")
    if T.post_C is not None and [list(x) for x in T.post_C] != C:
        raise InvalidTransformation("record claims a different monomial matrix")
    if check:
        _check_maps(p, new, ymap, xmap)
    note = "; ".join(notes) if notes else T.note
    rec = replace(T, post=after, post_C=tuple(tuple(row) for row in C), note=note)
    new = new.with_(log=p.log + (rec,))
    return Realization(new, ymap, xmap, rec)


def _check_maps(old, new, ymap, xmap):
    """x_i(old pullback)(ymap) must equal x-map image evaluated at the new pullbacks."""
    newpb = new.pullbacks()
    for i in range(old.m):
        lhs = substitute(old.pullback(i), ymap)
        rhs = substitute(xmap[i], newpb)
        bound = min(lhs.trunc, rhs.trunc)
        if not lhs.agrees(rhs, bound):
            raise InvalidTransformation(f"x{i + 1} is not preserved by the coordinate change")


def apply(p, T, check=True):
    return apply_with_maps(p, T, check).pair


def transport(g, ymap):
    """A y-series rewritten in the new y variables."""
    return substitute(g, ymap)


# ---------------------------------------------------------------------------
# normal forms of translated monomial transforms

@dataclass
class NormalForm:
    order: list     # new position j holds chart variable order[j]; the translated one is last
    b: list         # exponents of the first k old variables in the first k new ones
    b_last: list    # exponents of the last old variable
    alpha: object   # translation of the last new variable
    lam: F          # power taken of the raw translated coordinate


def normalize_gmt(values, A, shifts, modulus=4):
    """Normal form of x_old_i = prod_j (xbar_j + shifts_j)^A_ij.

    `values` are the old values: the first k independent, the last dependent.
    Exactly one chart variable may carry a translation, and it must be the
    one of value zero.  Returns the re-indexed form with the translated
    variable last and the translation raised to det A / det A_kk.
    """
    k1 = len(values)
    k = k1 - 1
    A = [[int(x) for x in row] for row in A]
    shifts = list(shifts)
    if all(c == 0 for c in shifts):
        raise NotApplicable("monomial transform: nothing to normalize")
    chart = _solve_values(A, values)
    zeros = [j for j in range(k1) if chart[j].is_zero()]
    for j in range(k1):
        if shifts[j] != 0 and not chart[j].is_zero():
            raise InvalidTransformation(f"translation on chart variable {j} of positive value")
        if chart[j].sign() < 0:
            raise InvalidTransformation(f"chart variable {j} has negative value")
    if len(zeros) != 1 or shifts[zeros[0]] == 0:
        raise InvalidTransformation("need exactly one translated chart variable of value zero")
    z = zeros[0]
    order = [j for j in range(k1) if j != z] + [z]
    Ap = [[row[j] for j in order] for row in A]
    b = [row[:k] for row in Ap[:k]]
    blast = Ap[k][:k]
    dk = lattice.det(b)
    if dk == 0:
        raise InvalidTransformation("independent block of the transform is singular")
    lam = lattice.det(Ap) / dk
    val, _ = field.power(shifts[z], lam, modulus)
    if val is None:
        raise FieldExtensionRequired(f"({shifts[z]})^({lam}) is not cyclotomic", None)
    return NormalForm(order, b, blast, val, F(lam))


def _seq_normal_form(seq, values):
    """Normal-form matrices of a Perron-type sequence (translation decided separately)."""
    A = seq.matrix
    k = len(values) - 1
    chart = seq.apply_values(values)
    zeros = [j for j in range(k + 1) if chart[j].is_zero()]
    if len(zeros) != 1:
        raise InvalidTransformation("sequence does not end with a single value-zero variable")
    z = zeros[0]
    order = [j for j in range(k + 1) if j != z] + [z]
    Ap = [[row[j] for j in order] for row in A]
    return [row[:k] for row in Ap[:k]], Ap[k][:k]


def _lockstep(x_seq, rows, y_values, allow_ties):
    """Follow each x blow-up by y blow-ups keeping the pulled-back rows nonnegative."""
    ys = TransformSeq(len(y_values))
    yv = list(y_values)
    rows = [list(row) for row in rows]
    for b in x_seq.steps:
        rep, div = b.replaced, b.divider
        rows[rep] = [x - y for x, y in zip(rows[rep], rows[div])]
        start = len(ys)
        _, yv = resolve_pair(ys, yv, rows[rep], allow_ties=allow_ties)
        for yb in ys.steps[start:]:
            rows = [yb.apply_exponent(row) for row in rows]
    return ys, rows, yv


# ---------------------------------------------------------------------------
# lifting transforms of the x variables to the y side

def lift_gmt(p, x_seq=None, mbar=None):
    """Companion y-side transform for an x-side one.

    mbar None: `x_seq` is a monomial transform of x_0..x_{r-1} (type 2).
    mbar < l: Perron-type transform of (x_0..x_{r-1}, x_{r+mbar}) (type 4).
    mbar >= l: the same with x_{r+mbar} = y^d * unit (type 9).
    Without `x_seq` the Perron sequence of the x values is used.
    """
    s, r, l = p.s, p.r, p.l
    w = p.values
    if mbar is None:
        if x_seq is None or x_seq.n != r:
            raise InvalidTransformation("type 2 lift needs a sequence on x_0..x_{r-1}")
        ys, rows, _ = _lockstep(x_seq, p.C, w[:s], allow_ties=False)
        return Transformation(2, {"x_seq": x_seq, "y_seq": ys})
    mbar = int(mbar)
    xvals = [p.x_value(i) for i in range(r)]
    if mbar < l:
        yj = s + mbar
        xvals.append(w[yj])
        rows = [list(row) + [0] for row in p.C] + [[0] * s + [1]]
        yvals = w[:s] + [w[yj]]
        if express_in(xvals[:r], xvals[r]) is None:
            raise NotDependent(f"x{r + mbar + 1} is independent of the monomial variables")
        if x_seq is None:
            x_seq = perron(xvals).seq
        ys, _, _ = _lockstep(x_seq, rows, yvals, allow_ties=True)
        a, alast = _seq_normal_form(x_seq, xvals)
        b, blast = _seq_normal_form(ys, yvals)
        return Transformation(4, {"mbar": mbar, "a": a, "a_last": alast, "b": b,
                                  "b_last": blast, "alpha": p.residues[mbar],
                                  "x_seq": x_seq, "y_seq": ys})
    g = p.xseries[mbar - l]
    split = g.monomial_factor()
    if split is None or any(x for x in split[0][s:]):
        raise InvalidTransformation(f"x{r + mbar + 1} is not a monomial in y_0..y_{{s-1}} times a unit")
    d = [int(x) for x in split[0][:s]]
    u = split[1]
    if x_exponent(d, p) is None:
        raise NotDependent(f"x{r + mbar + 1} has a value independent of the monomial variables")
    xvals.append(monomial_value(w[:s], d))
    if x_seq is None:
        x_seq = perron(xvals).seq
    rows = [list(row) for row in p.C] + [d]
    ys, rows, _ = _lockstep(x_seq, rows, w[:s], allow_ties=False)
    a, alast = _seq_normal_form(x_seq, xvals)
    return Transformation(9, {"mbar": mbar, "a": a, "a_last": alast, "b": ys.matrix,
                              "alpha": u.constant_term(), "x_seq": x_seq, "y_seq": ys})


def perron_y(p, mbar):
    """Type 6 record: Perron transform of (y_0..y_{s-1}, y_{s+mbar}) in normal form."""
    s = p.s
    yvals = p.values[:s] + [p.values[s + mbar]]
    res = perron(yvals, p.dependence(s + mbar))
    b, blast = _seq_normal_form(res.seq, yvals)
    return Transformation(6, {"mbar": mbar, "b": b, "b_last": blast,
                              "alpha": p.residues[mbar], "y_seq": res.seq})


def type8_exponents(p, d):
    """c with C c = 0 and d . c = -1; integral when the lattice allows it."""
    s = p.s
    d = [F(x) for x in d]
    ker = lattice.integer_left_kernel(lattice.transpose([list(r) for r in p.C], s), p.r) \
        if p.r else lattice.identity(s)
    # integer kernel vectors of C (columns); look for an integral combination with d.c = -1
    dots = [sum(F(x) * y for x, y in zip(v, d)) for v in ker]
    nz = [(abs(x), i) for i, x in enumerate(dots) if x != 0]
    if not nz:
        raise NotApplicable("monomial is algebraic over the monomial variables; no type 8 exists")
    from math import gcd
    g = 0
    for x in dots:
        g = gcd(g, int(x))
    if g == 1:
        coeffs = _bezout([int(x) for x in dots])
        c = [F(0)] * s
        for cf, v in zip(coeffs, ker):
            for j in range(s):
                c[j] -= cf * v[j]
        return c
    _, i = min(nz)
    return [F(-x) / dots[i] for x in ker[i]]


def _bezout(vals):
    """Integers t with sum t_i vals_i = gcd(vals) (= 1 here)."""
    coeffs = [0] * len(vals)
    g = 0
    for i, v in enumerate(vals):
        if v == 0:
            continue
        if g == 0:
            g, coeffs[i] = abs(v), (1 if v > 0 else -1)
            continue
        a, b = g, abs(v)
        x0, x1, y0, y1 = 1, 0, 0, 1
        while b:
            q = a // b
            a, b = b, a - q * b
            x0, x1 = x1, x0 - q * x1
            y0, y1 = y1, y0 - q * y1
        coeffs = [x0 * t for t in coeffs]
        coeffs[i] = y0 * (1 if v > 0 else -1)
        g = a
    return coeffs
