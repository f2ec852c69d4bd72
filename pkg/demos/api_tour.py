"""Monomialize the first demo germ through the Python API and replay it."""
from fractions import Fraction as F
from pathlib import Path

from monomialize import document as doc
from monomialize.driver import check_injectivity, run, verify
from monomialize.toric import perron
from monomialize.valgroup import GroupValue

HERE = Path(__file__).resolve().parent

# perron: values sqrt(2), sqrt(3) and 2*sqrt(2) + sqrt(3) = 2 w1 + w2
w = [GroupValue([[0, 1]]), GroupValue([[0, 0, 1]]), GroupValue([[0, 2, 1]])]
res = perron(w, [F(2), F(1)])
print("perron blow-ups:", [(b.i + 1, b.j + 1) for b in res.seq.steps])
print("value-zero variable:", res.zero_index + 1)

p = doc.load_problem(HERE / "germ1.json").pair
form = run(p)
print(f"initial type {p.type}, {len(form.certificate)} records:",
      [T.tag for T in form.certificate])
print(form.to_text())
print("verify:", bool(verify(p, form.certificate)))
print("injective to degree 4:", check_injectivity(form.pair, 4))
