"""Command line: monomialize <command> [flags].

Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 truncation
exhausted, 4 field extension needed, 5 iteration limit, 6 verify failure.
Indices in documents are 0-based; text output names variables x1.., y1...
"""
import argparse
import json
import sys

from . import document as doc
from .driver import TRUST_NOTE, run, verify
from .errors import (InvalidPreparedForm, MonomializeError, VerificationFailed)
from .prepared import decompose, is_algebraic, validate
from .series import INF, TruncatedSeries, ord_in_last, tschirnhaus
from .toric import perron, principalize

EXIT_OK, EXIT_IO = 0, 1


def exit_code(exc):
    """Total map from the error taxonomy to exit codes."""
    if isinstance(exc, MonomializeError):
        return exc.exit_code
    if isinstance(exc, OSError):
        return EXIT_IO
    return 2


# ---------------------------------------------------------------------------
# output helpers

def _type_label(t):
    return "(" + ",".join(str(x) for x in t) + ")"


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _blowups(T):
    """(side, step) pairs of the elementary blow-ups a record carries."""
    out = []
    for side in ("x_seq", "y_seq"):
        seq = T.payload.get(side)
        if seq is not None:
            out.extend((side[0], b) for b in seq.steps)
    return out


def to_dot(p0, records):
    """Blow-up tree: chart nodes labelled (s,r,l), edges labelled (i,j)."""
    lines = ["digraph blowups {", "  node [shape=box];",
             f'  c0 [label="{_type_label(p0.type)}"];']
    cur, k, t = "c0", 0, p0.type
    for idx, T in enumerate(records, 1):
        steps = _blowups(T)
        post = tuple(T.post) if T.post is not None else t
        if not steps:
            k += 1
            lines.append(f'  c{k} [label="{_type_label(post)}"];')
            lines.append(f'  {cur} -> c{k} [label="type {T.tag}", style=dashed];')
            cur = f"c{k}"
        for q, (side, b) in enumerate(steps):
            k += 1
            label = post if q == len(steps) - 1 else t
            lines.append(f'  c{k} [label="{_type_label(label)}"];')
            lines.append(f'  {cur} -> c{k} [label="({b.i + 1},{b.j + 1})", '
                         f'tooltip="record {idx}, type {T.tag}, {side}-side, chart {b.chart + 1}"];')
            cur = f"c{k}"
        t = post
    lines.append("}")
    return "\n".join(lines) + "\n"


def _run_text(p0, form):
    lines = [f"# {TRUST_NOTE}", f"# initial type {_type_label(p0.type)}"]
    for k, T in enumerate(form.certificate, 1):
        lines.append(f"{k}: type {T.tag} -> {_type_label(T.post)}")
    lines.append(form.to_text())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def cmd_validate(args):
    prob = doc.load_problem(args.path, args.trunc, check=False)
    try:
        t = validate(prob.pair)
    except InvalidPreparedForm as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"valid {_type_label(t)}")
    return EXIT_OK


def cmd_run(args):
    prob = doc.load_problem(args.path, args.trunc)
    p0 = prob.pair
    steps = args.max_steps if args.max_steps is not None else prob.options.get("max_steps")
    form = run(p0, steps)
    if args.emit == "json":
        text = doc.dumps(doc.certificate_to_json(p0, form, TRUST_NOTE))
    elif args.emit == "dot":
        text = to_dot(p0, form.certificate)
    else:
        text = _run_text(p0, form)
    _emit(args, text)
    return EXIT_OK


def cmd_verify(args):
    prob = doc.load_problem(args.problem, args.trunc, check=False)
    digest, records = doc.load_certificate(args.certificate)
    try:
        if digest is not None and digest != doc.fingerprint(prob.pair):
            raise VerificationFailed(0, "certificate was issued for a different problem")
        res = verify(prob.pair, records)
        if not res:
            raise VerificationFailed(res.stage, res.reason)
    except VerificationFailed as exc:
        print(f"verify failed at stage {exc.stage}: {exc.reason}", file=sys.stderr)
        return exc.exit_code
    print(f"verified {len(records)} records")
    return EXIT_OK


def _series_option(prob, key="series"):
    p = prob.pair
    if key in prob.options:
        return doc.series_from_json(prob.options[key], p.n, p.trunc, p.modulus)
    if not p.xseries:
        raise InvalidPreparedForm("schema", f"options need '{key}' (the pair has no series)")
    return p.xseries[0]


def cmd_decompose(args):
    prob = doc.load_problem(args.path, args.trunc)
    g = _series_option(prob)
    dec = decompose(g, prob.pair)
    if args.emit == "json":
        out = {"lattice_basis": [list(r) for r in dec.lattice_basis],
               "algebraic": is_algebraic(g, prob.pair),
               "components": [{"class": list(k), "series": doc.series_to_json(h)}
                              for k, h in dec.components.items()]}
        _emit(args, doc.dumps(out))
    else:
        lines = [f"algebraic: {is_algebraic(g, prob.pair)}"]
        lines += [f"class {list(k)}: {h}" for k, h in dec.components.items()]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_perron(args):
    prob = doc.load_problem(args.path, args.trunc)
    p = prob.pair
    j = int(prob.options.get("index", p.s))
    if not p.s <= j < p.n:
        raise InvalidPreparedForm("schema", f"perron index {j} is not a dependent variable")
    res = perron(p.values[:p.s] + [p.values[j]], p.dependence(j))
    if args.emit == "json":
        out = {"seq": {"n": res.seq.n, "steps": res.seq.to_json()}, "perm": res.perm,
               "zero_index": res.zero_index, "request": res.request,
               "matrix": res.matrix, "values": [doc.value_to_json(v) for v in res.values]}
        _emit(args, doc.dumps(out))
    else:
        lines = [f"({b.i + 1},{b.j + 1}) chart {b.chart + 1}" for b in res.seq.steps]
        lines.append(f"value-zero variable: {res.zero_index + 1}")
        lines.append(f"values: {res.values}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_principalize(args):
    prob = doc.load_problem(args.path, args.trunc)
    p = prob.pair
    if "generators" not in prob.options:
        raise InvalidPreparedForm("schema", "options need 'generators'")
    seq, gen, images = principalize(prob.options["generators"], p.values[:p.s])
    if args.emit == "json":
        out = {"seq": {"n": seq.n, "steps": seq.to_json()}, "generator": gen, "images": images}
        _emit(args, doc.dumps(out))
    else:
        lines = [f"({b.i + 1},{b.j + 1}) chart {b.chart + 1}" for b in seq.steps]
        lines.append(f"generator: {gen}")
        lines += [f"image: {g}" for g in images]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_tschirnhaus(args):
    prob = doc.load_problem(args.path, args.trunc)
    f = _series_option(prob)
    var = int(prob.options.get("var", f.nvars - 1))
    t = prob.options.get("t")
    if t is None:
        t = ord_in_last(f, var)
        if t == INF:
            raise InvalidPreparedForm("schema", f"series has infinite order in variable {var}")
    phi, fbar = tschirnhaus(f, var, int(t))
    if args.emit == "json":
        _emit(args, doc.dumps({"phi": doc.series_to_json(phi), "f": doc.series_to_json(fbar)}))
    else:
        _emit(args, f"phi: {phi}\nf: {fbar}\n")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "verify": cmd_verify,
            "decompose": cmd_decompose, "perron": cmd_perron,
            "principalize": cmd_principalize, "tschirnhaus": cmd_tschirnhaus}


def build_parser():
    ap = argparse.ArgumentParser(prog="monomialize",
                                 description="Monomialize germs of maps along a monomial valuation.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, emit=("text", "json")):
        sp.add_argument("--trunc", type=int, help="override the degree bound N")
        sp.add_argument("--emit", choices=emit, default="text")
        sp.add_argument("--out", help="write the artifact here instead of stdout")

    sp = sub.add_parser("validate", help="check a problem document")
    sp.add_argument("path")
    sp.add_argument("--trunc", type=int)
    sp = sub.add_parser("run", help="monomialize and emit a certificate")
    sp.add_argument("path")
    sp.add_argument("--max-steps", type=int)
    common(sp, ("text", "json", "dot"))
    sp = sub.add_parser("verify", help="replay a certificate against its problem")
    sp.add_argument("problem")
    sp.add_argument("certificate")
    sp.add_argument("--trunc", type=int)
    for name in ("decompose", "perron", "principalize", "tschirnhaus"):
        sp = sub.add_parser(name, help=f"run {name} on the document")
        sp.add_argument("path")
        common(sp)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (MonomializeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
