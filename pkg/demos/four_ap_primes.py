"""Counting 4-term progressions of primes against the singular series.

Run with ``python demos/four_ap_primes.py``.
"""

# %% Local factors of the system (x, x+y, x+2y, x+3y)
from quadfourier.linsys import four_ap_experiment, four_ap_system, local_factor_exact, singular_series

P = four_ap_system()
for p in (2, 3, 5, 7, 11):
    print(f"beta_{p} = {local_factor_exact(P, p)}")

# %% Truncated product and its tail estimate
s = singular_series(P, 1000, beta_inf=1.0)
print(f"prod_{{p <= 1000}} beta_p = {s.product:.6f}; decay constant {s.decay_constant:.3f}; tail ~ {s.tail_estimate:.1e}")

# %% Weighted counts approach the prediction as N grows
for N in (1_000, 10_000, 100_000):
    r = four_ap_experiment(N)
    print(f"N={N:>6}: average {r.lhs:.5f}, predicted {r.series:.5f}, relative gap {r.gap:.4f}")
