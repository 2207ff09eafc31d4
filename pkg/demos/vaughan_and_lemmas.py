"""Vaughan decompositions reconstruct Λ and μ exactly; lemma suites check identities.

Run with ``python demos/vaughan_and_lemmas.py``.
"""

# %% Exact reconstruction
from quadfourier.arith import build_tables
from quadfourier.decompose import reconstruction_defect, vaughan_decompose
from quadfourier.lemmas import run_suites

tables = build_tables(100_000)
for function in ("von_mangoldt", "mobius"):
    d = vaughan_decompose(tables, 100_000, 46, 46, function)
    print(f"{function}: type I length {d.type_i.R}, max reconstruction defect {reconstruction_defect(tables, d):.1e}")

# %% Identity and inequality suites, then a corrupted form as a negative control
for corrupt in (False, True):
    reports = run_suites(["philemma", "quartic", "polarization"], 500, corrupt=corrupt)
    label = "corrupted" if corrupt else "quadratic"
    print(label, {name: (r.ok, f"{r.max_defect:.1e}") for name, r in reports.items()})
