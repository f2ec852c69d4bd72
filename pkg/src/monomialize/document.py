"""JSON problem documents and certificates.

Rationals travel as strings "p/q" (or "p"), never as floats.  Canonical
output sorts keys and exponents, so parse followed by dump is the identity
on canonical documents.

Problem document::

    {"schema": "monomialize/1",
     "field": {"modulus": 4},
     "trunc": "8",
     "weights": {"s": 2, "values": [[["0", "1"]], ...]},   # levels of coordinates
     "pair": {"n": .., "m": .., "r": .., "l": .., "C": [[..]],
              "xseries": [series, ...], "residues": [coeff, ...]},
     "log": [record, ...],
     "options": {...}}

A weight level is a coordinate list over 1, sqrt(2), sqrt(3), sqrt(5), ...
or an expression string such as "5*sqrt(2)".  A series is either
{"terms": [{"exponent": [..], "coefficient": [..]}, ...], "trunc": .., "modulus": ..}
with the coefficient as coordinates in Q(zeta_modulus),
or {"expr": "y1^3 + y1^3*y2"} (variables y1..yn, I for the fourth root of unity).
A coefficient is a rational string or {"zeta": m, "coords": [...]}.
"""
import hashlib
import json
from fractions import Fraction as F

from . import field
from .errors import InvalidPreparedForm
from .field import FieldElement
from .prepared import PreparedPair, Transformation, validate
from .series import TruncatedSeries
from .toric import TransformSeq
from .valgroup import GroupValue, IrrationalCombination, WeightAssignment, basis

SCHEMA = "monomialize/1"
BASIS_SEARCH = 64


def _schema(detail):
    return InvalidPreparedForm("schema", detail)


# ---------------------------------------------------------------------------
# scalars

def rat(q):
    return str(F(q))


def parse_rat(x):
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise _schema(f"expected a rational string, got {x!r}")
    try:
        return F(x)
    except (ValueError, ZeroDivisionError):
        raise _schema(f"bad rational {x!r}") from None


def coeff_to_json(c):
    if isinstance(c, FieldElement):
        c = c.normal()
    if isinstance(c, FieldElement):
        return {"zeta": c.m, "coords": [rat(x) for x in c.coords]}
    return rat(c)


def coeff_from_json(x):
    if isinstance(x, dict):
        try:
            return field.from_coords(int(x["zeta"]), [parse_rat(c) for c in x["coords"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise _schema(f"bad field element {x!r}: {exc}") from None
    return parse_rat(x)


# ---------------------------------------------------------------------------
# values

def _level_from_expr(text):
    import sympy
    try:
        expr = sympy.nsimplify(sympy.sympify(text, rational=True))
    except (sympy.SympifyError, TypeError) as exc:
        raise _schema(f"bad value expression {text!r}: {exc}") from None
    radicands = list(basis(BASIS_SEARCH)) if not _env_basis() else list(basis(len(_env_basis())))
    coords = [F(0)] * len(radicands)
    for term in sympy.Add.make_args(sympy.expand(expr)):
        c, rest = term.as_coeff_Mul()
        if rest == 1:
            b = 1
        elif isinstance(rest, sympy.Pow) and rest.exp == sympy.Rational(1, 2) and rest.base.is_Integer:
            b = int(rest.base)
        else:
            raise _schema(f"value {text!r} is not a rational combination of square roots")
        if not c.is_Rational or b not in radicands:
            raise _schema(f"value {text!r} uses a radicand outside the basis")
        coords[radicands.index(b)] += F(int(c.p), int(c.q))
    while len(coords) > 1 and coords[-1] == 0:
        coords.pop()
    return IrrationalCombination(coords)


def _env_basis():
    import os
    from .valgroup import BASIS_ENV
    raw = os.environ.get(BASIS_ENV)
    return [x for x in raw.split(",") if x.strip()] if raw else []


def value_to_json(v):
    out = []
    for lv in v.levels:
        key = list(lv._key()) or [F(0)]
        out.append([rat(x) for x in key])
    return out


def value_from_json(x):
    if isinstance(x, str):
        x = [x]
    if not isinstance(x, list) or not x:
        raise _schema(f"a value is a non-empty list of levels, got {x!r}")
    levels = []
    for lv in x:
        if isinstance(lv, str):
            levels.append(_level_from_expr(lv))
        elif isinstance(lv, list):
            levels.append(IrrationalCombination([parse_rat(c) for c in lv]))
        else:
            raise _schema(f"bad value level {lv!r}")
    return GroupValue(levels)


def weights_to_json(w):
    return {"s": w.s, "values": [value_to_json(v) for v in w.weights]}


def weights_from_json(x):
    if not isinstance(x, dict) or "values" not in x or "s" not in x:
        raise _schema("weights need 's' and 'values'")
    values = [value_from_json(v) for v in x["values"]]
    if len({v.rank for v in values}) > 1:
        raise InvalidPreparedForm("weights", "values of different ranks")
    return WeightAssignment(values, int(x["s"]))


# ---------------------------------------------------------------------------
# series

def series_to_json(g):
    return {"modulus": g.modulus, "trunc": rat(g.trunc),
            "terms": [{"exponent": [rat(x) for x in e],
                       "coefficient": [rat(x) for x in field.coords_of(c, g.modulus)]}
                      for e, c in g.items()]}


def series_from_json(x, nvars, trunc, modulus):
    if not isinstance(x, dict):
        raise _schema(f"a series is an object, got {x!r}")
    t = parse_rat(x["trunc"]) if "trunc" in x else trunc
    mod = int(x.get("modulus", modulus))
    if "expr" in x:
        import sympy
        gens = sympy.symbols(f"y1:{nvars + 1}")
        try:
            expr = sympy.sympify(str(x["expr"]).replace("^", "**"),
                                 locals={str(g): g for g in gens} | {"I": sympy.I})
            return TruncatedSeries.from_expr(expr, gens, t, mod)
        except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
            raise _schema(f"bad series expression {x['expr']!r}: {exc}") from None
    if "terms" not in x:
        raise _schema("a series needs 'terms' or 'expr'")
    items = []
    for item in x["terms"]:
        try:
            e, c = item["exponent"], item["coefficient"]
        except (KeyError, TypeError):
            raise _schema(f"a term is {{exponent, coefficient}}, got {item!r}") from None
        if len(e) != nvars:
            raise _schema(f"exponent {e} does not have {nvars} entries")
        if isinstance(c, list):
            c = field.from_coords(mod, [parse_rat(a) for a in c]) if len(c) > 1 else parse_rat(c[0])
        else:
            c = coeff_from_json(c)
        items.append(([parse_rat(a) for a in e], c))
    try:
        return TruncatedSeries.from_items(nvars, items, t, mod)
    except ValueError as exc:
        raise _schema(str(exc)) from None


# ---------------------------------------------------------------------------
# transformation records

def _payload_to_json(v):
    if isinstance(v, TransformSeq):
        return {"n": v.n, "steps": v.to_json()}
    if isinstance(v, TruncatedSeries):
        return {"nvars": v.nvars, **series_to_json(v)}
    if isinstance(v, (FieldElement, F)):
        return coeff_to_json(v)
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, (list, tuple)):
        return [_payload_to_json(a) for a in v]
    raise TypeError(f"cannot serialize payload entry {v!r}")


def _payload_from_json(v):
    if isinstance(v, dict):
        if "steps" in v:
            return TransformSeq.from_json(int(v["n"]), v["steps"])
        if "terms" in v:
            return series_from_json(v, int(v["nvars"]), parse_rat(v["trunc"]), int(v["modulus"]))
        if "zeta" in v:
            return coeff_from_json(v)
        raise _schema(f"unknown payload object {sorted(v)}")
    if isinstance(v, str):
        return parse_rat(v)
    if isinstance(v, list):
        return [_payload_from_json(a) for a in v]
    return v


def record_to_json(T):
    out = {"type": T.tag,
           "payload": {k: _payload_to_json(v) for k, v in sorted(T.payload.items())},
           "promote": [list(x) for x in T.promote]}
    if T.post is not None:
        out["post"] = list(T.post)
    if T.post_C is not None:
        out["post_C"] = [list(row) for row in T.post_C]
    if T.note:
        out["note"] = T.note
    return out


def record_from_json(x):
    try:
        return Transformation(
            int(x["type"]), {k: _payload_from_json(v) for k, v in x["payload"].items()},
            promote=[tuple(a) for a in x.get("promote", [])],
            post=tuple(x["post"]) if "post" in x else None,
            post_C=tuple(tuple(r) for r in x["post_C"]) if "post_C" in x else None,
            note=x.get("note", ""))
    except (KeyError, TypeError) as exc:
        raise _schema(f"bad transformation record: {exc}") from None


# ---------------------------------------------------------------------------
# problem documents

class Problem:
    """A parsed document: the pair plus the command options."""

    def __init__(self, pair, options=None):
        self.pair = pair
        self.options = dict(options or {})


def pair_to_json(p):
    return {"n": p.n, "m": p.m, "r": p.r, "l": p.l,
            "C": [list(row) for row in p.C],
            "xseries": [series_to_json(g) for g in p.xseries],
            "residues": [coeff_to_json(c) for c in p.residues]}


def problem_to_json(prob):
    p = prob.pair
    doc = {"schema": SCHEMA, "field": {"modulus": p.modulus}, "trunc": rat(p.trunc),
           "weights": weights_to_json(p.weights), "pair": pair_to_json(p),
           "log": [record_to_json(T) for T in p.log]}
    if prob.options:
        doc["options"] = prob.options
    return doc


def _need(doc, key, where="document"):
    if key not in doc:
        raise _schema(f"{where} is missing '{key}'")
    return doc[key]


def problem_from_json(doc, trunc=None, check=True):
    """Parse a document; `trunc` overrides the stored bound for every series."""
    if not isinstance(doc, dict):
        raise _schema("a document is a JSON object")
    if _need(doc, "schema") != SCHEMA:
        raise _schema(f"unsupported schema {doc['schema']!r} (expected {SCHEMA})")
    modulus = int(doc.get("field", {}).get("modulus", 4))
    N = parse_rat(_need(doc, "trunc")) if trunc is None else F(trunc)
    w = weights_from_json(_need(doc, "weights"))
    body = _need(doc, "pair")
    try:
        n, m, r, l = (int(_need(body, k, "pair")) for k in ("n", "m", "r", "l"))
    except (TypeError, ValueError) as exc:
        raise _schema(str(exc)) from None
    C = _need(body, "C", "pair")
    xs = []
    for g in _need(body, "xseries", "pair"):
        if trunc is not None:
            g = {k: v for k, v in g.items() if k != "trunc"}
        s = series_from_json(g, n, N, modulus)
        xs.append(s.truncate(N) if trunc is not None else s)
    residues = [coeff_from_json(c) for c in body["residues"]] if "residues" in body else None
    log = [record_from_json(T) for T in doc.get("log", [])]
    try:
        p = PreparedPair(n, m, w.s, r, l, C, xs, w, modulus, N, residues, log)
    except (TypeError, ValueError) as exc:
        raise _schema(str(exc)) from None
    if check:
        validate(p)
    return Problem(p, doc.get("options"))


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_problem(path, trunc=None, check=True):
    return problem_from_json(_read(path), trunc, check)


def _read(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise _schema(f"{path} is not valid JSON: {exc}") from None


def fingerprint(p):
    """Digest of the canonical initial pair (log excluded)."""
    body = problem_to_json(Problem(p.with_(log=())))
    return hashlib.sha256(dumps(body).encode()).hexdigest()


# ---------------------------------------------------------------------------
# certificates

def certificate_to_json(p0, form, note):
    return {"schema": SCHEMA, "kind": "certificate", "problem": fingerprint(p0),
            "trust": note, "initial_type": list(p0.type), "final_type": list(form.pair.type),
            "final_C": [list(row) for row in form.pair.C],
            "records": [record_to_json(T) for T in form.certificate]}


def certificate_from_json(doc):
    if not isinstance(doc, dict) or doc.get("kind") != "certificate":
        raise _schema("not a certificate document")
    if doc.get("schema") != SCHEMA:
        raise _schema(f"unsupported schema {doc.get('schema')!r}")
    return doc.get("problem"), [record_from_json(T) for T in _need(doc, "records", "certificate")]


def load_certificate(path):
    return certificate_from_json(_read(path))
