"""One check per acceptance criterion; each prints a PASS/FAIL line.

Oracles are independent of the engine: sympy for ranks, determinants,
inverses and exact square-root arithmetic; raw exponent bookkeeping for
monomial transforms.
"""
import json
import random
import time
from fractions import Fraction as F
from pathlib import Path

import sympy

from conftest import report
from monomialize import cli
from monomialize import document as doc
from monomialize.driver import check_injectivity, run, verify
from monomialize.errors import InvalidPreparedForm, TruncationExhausted
from monomialize.prepared import (PreparedPair, Transformation, decompose, is_algebraic, lift_gmt,
                                  apply, validate)
from monomialize.series import TruncatedSeries as TS, substitute, tschirnhaus
from monomialize.toric import ElementaryBlowup, TransformSeq, perron, principalize
from monomialize.valgroup import (GroupValue, IrrationalCombination, WeightAssignment, basis,
                                  compare, monomial_value, rational_relation)

DEMOS = Path(__file__).resolve().parent.parent / "demos"


# independent oracles ------------------------------------------------------------------

def exact(lv):
    return sum((sympy.Rational(c.numerator, c.denominator) * sympy.sqrt(b)
                for c, b in zip(lv.coords, basis(len(lv.coords)))), sympy.Integer(0))


def oracle_sign(v):
    for lv in v.levels:
        sg = sympy.sign(exact(lv))
        if sg:
            return int(sg)
    return 0


def oracle_independent(values):
    k = max(len(lv.coords) for v in values for lv in v.levels)
    rows = [[c for lv in v.levels for c in list(lv.coords) + [0] * (k - len(lv.coords))]
            for v in values]
    return sympy.Matrix(rows).rank() == len(values)


def oracle_values_after(A, values):
    """x_old = x_new^A, so nu(x_new) = A^-1 nu(x_old)."""
    inv = sympy.Matrix(A).inv()
    return [sum((values[j].scale(F(int(inv[i, j]))) for j in range(len(values))
                 if inv[i, j] != 0), GroupValue.zero(values[0].rank))
            for i in range(len(values))]


def random_value(rng, rank, k):
    while True:
        levels = [IrrationalCombination([F(rng.randint(-9, 9), rng.randint(1, 9))
                                         for _ in range(k)]) for _ in range(rank)]
        v = GroupValue(levels)
        if oracle_sign(v) > 0:
            return v


def random_independent(rng, s, rank, k=5):
    while True:
        vals = [random_value(rng, rank, k) for _ in range(s)]
        if oracle_independent(vals):
            return vals


# 1. perron ------------------------------------------------------------------

def test_criterion_1_perron():
    rng = random.Random(101)
    done, failures, worst = 0, [], 0.0
    while done < 200:
        rank, s = rng.randint(1, 2), rng.randint(1, 4)
        head = random_independent(rng, s, rank)
        q = [F(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(s)]
        last = sum((v.scale(c) for v, c in zip(head, q)), GroupValue.zero(rank))
        if oracle_sign(last) < 0:
            continue
        t = time.perf_counter()
        res = perron(head + [last], q)
        worst = max(worst, time.perf_counter() - t)
        A = res.matrix
        new = oracle_values_after(A, head + [last])
        z = res.zero_index
        ok = (abs(sympy.Matrix(A).det()) == 1
              and oracle_sign(new[z]) == 0
              and all(oracle_sign(new[i]) > 0 for i in range(s + 1) if i != z)
              and all(compare(a, b) == 0 for a, b in zip(new, res.values))
              and monomial_value(head + [last], res.request).is_zero())
        if not ok:
            failures.append((head, q))
        done += 1
    ok = not failures and worst < 1
    assert report(1, "perron", ok, f"{done - len(failures)}/{done} instances, slowest {worst:.3f} s")


# 2. principalization ------------------------------------------------------------------

def test_criterion_2_principalization():
    rng = random.Random(202)
    done, failures, worst = 0, 0, 0.0
    while done < 200:
        n = rng.randint(1, 4)
        w = random_independent(rng, n, 1)
        gens = [[rng.randint(0, 6) for _ in range(n)] for _ in range(rng.randint(1, 3))]
        t = time.perf_counter()
        seq, gen, images = principalize(gens, w)
        worst = max(worst, time.perf_counter() - t)
        A = sympy.Matrix(seq.matrix) if len(seq) else sympy.eye(n)
        imgs = [list(sympy.Matrix([g]) * A) for g in gens]
        new_w = oracle_values_after(seq.matrix, w) if len(seq) else w
        vals = [sum((new_w[j].scale(F(int(e[j]))) for j in range(n)), GroupValue.zero(1))
                for e in imgs]
        best = min(range(len(imgs)), key=lambda k: exact(vals[k].levels[0]))
        ok = (imgs == [list(map(sympy.Integer, x)) for x in images]
              and all(all(a >= b for a, b in zip(e, gen)) for e in imgs)
              and list(imgs[best]) == list(gen)
              and all(oracle_sign(v - vals[best]) >= 0 for v in vals)
              and all(oracle_sign(v) > 0 for v in new_w))
        failures += not ok
        done += 1
    ok = failures == 0 and worst < 1
    assert report(2, "principalization", ok,
                  f"{done - failures}/{done} ideals principal, slowest {worst:.3f} s")


# 3. decomposition ------------------------------------------------------------------

def same_class(a, b, C):
    diff = [x - y for x, y in zip(a, b)]
    M = sympy.Matrix([list(r) for r in C] + [diff])
    return M.rank() == len(C)


def check_decomposition(g, p):
    dec = decompose(g, p)
    if dec.total(g) != g:
        return False
    keys = list(dec.components)
    for key, h in dec.components.items():
        exps = [e[:p.s] for e in h.terms]
        if not all(same_class(exps[0], e, p.C) for e in exps):
            return False
    reps = [next(iter(h.terms))[:p.s] for h in dec.components.values()]
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if same_class(reps[i], reps[j], p.C):
                return False
    h0 = dec.components.get((0,) * p.s)
    alg = h0 is not None and h0 == g or g.is_zero()
    return is_algebraic(g, p) == alg and len(keys) == len(set(keys))


def random_blowups(rng, values, length):
    seq, vals = TransformSeq(len(values)), list(values)
    for _ in range(length if len(values) > 1 else 0):
        i, j = rng.sample(range(len(values)), 2)
        rep = i if compare(vals[i], vals[j]) > 0 else j
        b = ElementaryBlowup(min(i, j), max(i, j), rep)
        seq.append(b)
        vals = b.apply_values(vals)
    return seq


def test_criterion_3_decomposition():
    rng = random.Random(303)
    done, failures = 0, 0
    while done < 200:
        s = rng.randint(1, 3)
        r = rng.randint(1, min(2, s))
        C = [[rng.randint(0, 3) for _ in range(s)] for _ in range(r)]
        if sympy.Matrix(C).rank() != r or any(not any(row) for row in C):
            continue
        w = random_independent(rng, s, 1, k=4)
        p = PreparedPair(s, r, s, r, 0, C, [], WeightAssignment(w, s), 4, 40)
        terms = {}
        for _ in range(rng.randint(1, 5)):
            e = [0] * s
            for _ in range(rng.randint(0, 6)):
                e[rng.randrange(s)] += 1
            terms[tuple(e)] = F(rng.randint(-5, 5), rng.randint(1, 3))
        g = TS(s, terms, 40)
        ok = check_decomposition(g, p)
        # invariance under a random type-1 or type-2 change
        if rng.random() < 0.5:
            T = Transformation(1, {"y_seq": random_blowups(rng, p.values, rng.randint(0, 4))})
            B = T.payload["y_seq"].matrix
        else:
            xvals = [p.x_value(i) for i in range(r)]
            xs = random_blowups(rng, xvals, rng.randint(0, 3))
            T = lift_gmt(p, xs)
            B = T.payload["y_seq"].matrix
        q = apply(p, T)
        ymap = [TS.monomial(row, 1, 40) for row in B]
        g2 = substitute(g, ymap)
        ok = ok and check_decomposition(g2, q)
        before, after = decompose(g, p), decompose(g2, q)
        moved = {}
        for h in before.components.values():
            h2 = substitute(h, ymap)
            lam = next(iter(h.terms))[:s]
            lamB = list(sympy.Matrix([lam]) * sympy.Matrix(B))
            match = [k for k, c in after.components.items()
                     if same_class(next(iter(c.terms))[:s], lamB, q.C)]
            ok = ok and len(match) == 1 and after.components[match[0]] == h2
            moved[match[0] if match else None] = h2
        ok = ok and set(moved) == set(after.components)
        failures += not ok
        done += 1
    assert report(3, "decomposition", failures == 0,
                  f"{done - failures}/{done} instances reassemble and match classes after the change")


# 4. tschirnhaus ------------------------------------------------------------------

def test_criterion_4_tschirnhaus():
    rng = random.Random(404)
    done, failures = 0, 0
    while done < 100:
        t, N, nv = rng.randint(2, 4), rng.randint(2, 8), rng.randint(2, 3)
        var = nv - 1
        terms = {tuple(t if i == var else 0 for i in range(nv)): F(rng.choice([1, 2, -3]))}
        for _ in range(rng.randint(1, 5)):
            e = [rng.randint(0, 3) for _ in range(nv)]
            if any(e[:var]) and sum(e) > 0:
                terms[tuple(e)] = F(rng.randint(-4, 4), rng.randint(1, 3))
        # the polynomial is exact, so it is given to degree N + t - 1: the
        # coefficient of y^(t-1) then stays known to degree N
        f = TS(nv, terms, N + t - 1)
        phi, fbar = tschirnhaus(f, var, t)
        coeff = fbar.coeff_in(var, t - 1)
        zero = all(sum(e) + t - 1 >= N for e in coeff.terms)
        images = [TS.var(nv, i, fbar.trunc) for i in range(nv)]
        images[var] = images[var] - phi
        back = substitute(fbar, images)
        ok = zero and back.agrees(f, N)
        failures += not ok
        done += 1
    assert report(4, "tschirnhaus", failures == 0,
                  f"{done - failures}/{done} series lose the y^(t-1) term and back-substitute")


# 5. independence ------------------------------------------------------------------

def test_criterion_5_independence():
    rng = random.Random(505)
    done, failures = 0, 0
    while done < 200:
        n = rng.randint(2, 4)
        vals = random_independent(rng, n, rng.randint(1, 2), k=5)
        seq = random_blowups(rng, vals, rng.randint(0, 6))
        new = seq.apply_values(vals)
        ok = (rational_relation(new) is None and oracle_independent(new)
              and all(compare(a, b) == 0 for a, b in zip(new, oracle_values_after(seq.matrix, vals))))
        failures += not ok
        done += 1
    assert report(5, "independence", failures == 0,
                  f"{done - failures}/{done} blow-up sequences keep the values independent")


# 6. end to end ------------------------------------------------------------------

def end_to_end(path):
    p = doc.load_problem(path).pair
    t = time.perf_counter()
    try:
        form = run(p)
    except Exception as exc:                # reported, not hidden
        return False, f"{path.name}: {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t
    q = form.pair
    ok = (q.r + q.l == q.m and bool(verify(p, form.certificate))
          and check_injectivity(q, 4) and elapsed < 10)
    return ok, f"{path.name}: {len(form.certificate)} records, {elapsed:.2f} s"


def test_criterion_6_end_to_end():
    results = [end_to_end(DEMOS / name) for name in ("germ1.json", "germ2.json")]
    ok = all(r[0] for r in results)
    assert report(6, "end-to-end", ok, "; ".join(r[1] for r in results))


# 7. negative controls ------------------------------------------------------------------

def corrupt(T, **changes):
    fields = dict(tag=T.tag, payload=dict(T.payload), promote=T.promote, post=T.post,
                  post_C=T.post_C)
    payload = changes.pop("payload", {})
    fields["payload"].update(payload)
    fields.update(changes)
    return Transformation(**fields)


def test_criterion_7_negative_controls(tmp_path):
    p = doc.load_problem(DEMOS / "germ1.json").pair
    cert = run(p).certificate
    cases = [(0, corrupt(cert[0], post=(1, 1, 1))),
             (1, corrupt(cert[1], payload={"b_last": [4]})),
             (1, corrupt(cert[1], post_C=((2,),))),
             (2, corrupt(cert[2], payload={"a_last": [7]})),
             (2, corrupt(cert[2], post=(1, 1, 0)))]
    stages = []
    for k, bad in cases:
        res = verify(p, cert[:k] + [bad] + cert[k + 1:])
        stages.append(not res and res.stage == k)
    w = WeightAssignment([GroupValue([[0, 1]]), GroupValue([[0, 3]])], 2)
    try:
        validate(PreparedPair(2, 1, 2, 1, 0, [[1, 1]], [], w))
        dependent = False
    except InvalidPreparedForm:
        dependent = True
    try:
        run(doc.load_problem(DEMOS / "germ1.json", trunc=1).pair)
        trunc_engine = False
    except TruncationExhausted:
        trunc_engine = True
    trunc_cli = cli.main(["run", str(DEMOS / "germ1.json"), "--trunc", "1"]) == 3
    ok = all(stages) and dependent and trunc_engine and trunc_cli
    assert report(7, "negative controls", ok,
                  f"{sum(stages)}/{len(stages)} corruptions caught at their stage; "
                  f"dependent weights rejected: {dependent}; N = 1 exits 3: {trunc_cli}")
