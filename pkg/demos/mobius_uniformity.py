"""Möbius is Gowers-uniform in practice: U^2 and U^3 norms shrink with N.

Run with ``python demos/mobius_uniformity.py``.
"""

# %% Tables and a quadratic phase for comparison
import numpy as np

from quadfourier.arith import build_tables
from quadfourier.gowers import quadratic_witness_search, u_norm_interval

tables = build_tables(2**14)
N = 2**12
n = np.arange(1, N + 1)
phase = np.exp(2j * np.pi * 0.3 * n * n)
print("U3 of a quadratic phase on [N]:", round(u_norm_interval(phase, 3), 4))

# %% Norm ladders for mu on [N]
for s, ladder in ((2, [2**8, 2**10, 2**12, 2**14]), (3, [2**8, 2**9, 2**10, 2**11])):
    norms = [u_norm_interval(tables.interval("mobius", M), s) for M in ladder]
    print(f"U{s}:", "  ".join(f"N={M}: {v:.4f}" for M, v in zip(ladder, norms)))

# %% No quadratic phase correlates with mu on Z/1021Z
w = quadratic_witness_search(tables.interval("mobius", 1021))
print(f"best quadratic witness for mu mod 1021: a={w.a}, b={w.b}, correlation {w.correlation:.3f}")
