"""Seeded verifier suites bundled for the ``lemmas`` command.

Identity suites (philemma, quartic, polarization) report the largest defect
mod 1. Inequality suites (bohr_size, bohr0, localization, vinogradov) report
the largest amount by which the bound is violated, so ``0`` means every
instance satisfied it.
"""

from __future__ import annotations

import numpy as np

from quadfourier.bohr import build_bohr, divisible_subset, find_regular_radius, localization_defect
from quadfourier.equidist import vinogradov_quadratic_verify
from quadfourier.quadratic import (
    LemmaReport,
    make_corrupted_form,
    make_lifted_quadratic,
    philemma_suite,
    polarization_suite,
    quartic_suite,
)

SUITES = ("philemma", "quartic", "polarization", "bohr_size", "bohr0", "localization", "vinogradov")

# a domain wide enough that quartic instances are not degenerate
DEFAULT_FORM = {"N": 100_003, "S": (1, 3), "rho": 0.05, "theta": 0.1234567}


def _random_instance(rng, max_rank: int = 3, rho_hi: float = 0.45):
    N = int(rng.integers(1000, 20001))
    k = int(rng.integers(1, max_rank + 1))
    S = [1] + [int(x) for x in rng.integers(2, N, size=k - 1)]
    return N, S, float(rng.uniform(0.02, rho_hi))


def _inequality_report(lemma: str, excess: list, contexts: list) -> LemmaReport:
    excess = np.maximum(np.asarray(excess, dtype=float), 0.0)
    failures = [dict(contexts[i], defect=float(excess[i])) for i in np.flatnonzero(excess > 0)[:20]]
    return LemmaReport(lemma, int(excess.size), float(excess.max()) if excess.size else 0.0, failures)


def bohr_size_suite(samples: int = 1000, seed: int = 0) -> LemmaReport:
    """``|B(S, rho)| >= rho^|S| N / 2`` and ``|B(S, 2 rho)| <= 4^|S| |B(S, rho)|``.

    Each random instance contributes two samples.
    """
    rng = np.random.default_rng(seed)
    excess, contexts = [], []
    while len(excess) < samples:
        N, S, rho = _random_instance(rng, rho_hi=0.245)
        N = min(N, 5000)
        B = build_bohr(N, S, rho)
        B2 = build_bohr(N, S, 2 * rho)
        k = B.rank
        ctx = {"N": N, "S": list(S), "rho": rho}
        excess += [(rho**k * N / 2 - B.size) / N, (B2.size - 4**k * B.size) / N]
        contexts += [dict(ctx, bound="lower"), dict(ctx, bound="doubling")]
    return _inequality_report("bohr_size", excess, contexts)


def bohr0_suite(samples: int = 1000, b_max: int = 20, seed: int = 0) -> LemmaReport:
    """``|B_b| >= 4^-|S| |B| / b`` for ``b <= b_max`` on random Bohr sets with ``rho < 1/4``."""
    rng = np.random.default_rng(seed)
    excess, contexts = [], []
    while len(excess) < samples:
        N, S, rho = _random_instance(rng, rho_hi=0.249)
        B = build_bohr(N, S, rho)
        for b in range(1, b_max + 1):
            size = int(np.count_nonzero(divisible_subset(B, b)))
            excess.append((4.0 ** (-B.rank) * B.size / b - size) / N)
            contexts.append({"N": N, "S": list(S), "rho": rho, "b": b})
    return _inequality_report("bohr0", excess, contexts)


def localization_suite(samples: int = 1000, per_set: int = 20, seed: int = 0) -> LemmaReport:
    """Localization defect ``<= 200 |S| eps'`` for one-bounded signals on regular Bohr sets."""
    rng = np.random.default_rng(seed)
    excess, contexts = [], []
    while len(excess) < samples:
        N, S, rho = _random_instance(rng, max_rank=2, rho_hi=0.2)
        N = min(N, 4000)
        B = find_regular_radius(N, S, rho)
        eps = float(rng.uniform(0.1, 1.0)) / (100 * B.rank)
        B_eps = build_bohr(N, S, eps * B.radius)
        for _ in range(per_set):
            f = np.exp(2j * np.pi * rng.random(N)) * rng.random(N)
            excess.append(localization_defect(f, B, B_eps) - 200 * B.rank * eps)
            contexts.append({"N": N, "S": list(S), "rho": B.radius, "eps": eps})
    return _inequality_report("localization", excess, contexts)


def vinogradov_suite(samples: int = 1000, seed: int = 0) -> LemmaReport:
    """Dense near-rational quadratic phases must produce ``rational_found``.

    Instances are ``alpha = a/q``, ``beta = b/q`` with ``q <= 20`` on
    ``[1, 2000]``; ``delta`` is 90% of the measured density of zeros.
    """
    rng = np.random.default_rng(seed)
    ell = np.arange(1, 2001)
    excess, contexts = [], []
    while len(excess) < samples:
        q = int(rng.integers(2, 21))
        a, b = int(rng.integers(1, q)), int(rng.integers(0, q))
        density = np.count_nonzero((a * ell * ell + b * ell) % q == 0) / ell.size
        v = vinogradov_quadratic_verify(a / q, b / q, 0.0, (1, 2000), 1e-6, 0.9 * density, 20)
        excess.append(0.0 if v.kind == "rational_found" else 1.0)
        contexts.append({"a": a, "b": b, "q": q, "kind": v.kind})
    return _inequality_report("vinogradov", excess, contexts)


def run_suites(selection, samples: int = 1000, seed: int = 0, corrupt: bool = False, form: dict | None = None) -> dict:
    """Run the selected suites; returns ``{name: LemmaReport}`` in selection order.

    With ``corrupt`` the identity suites run on a lifted quadratic with a cubic
    perturbation, so they are expected to fail.

    Raises:
        ValueError: on an empty or unknown selection.
    """
    selection = list(selection)
    if not selection:
        raise ValueError("empty suite selection")
    unknown = [s for s in selection if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; choose from {list(SUITES)}")
    spec = dict(DEFAULT_FORM, **(form or {}))
    phi = make_lifted_quadratic(spec["N"], spec["S"], spec["rho"], spec["theta"])
    if corrupt:
        phi = make_corrupted_form(phi)
    runners = {
        "philemma": lambda: philemma_suite(phi, samples, seed=seed),
        "quartic": lambda: quartic_suite(phi, samples, seed=seed),
        "polarization": lambda: polarization_suite(phi, samples, seed=seed),
        "bohr_size": lambda: bohr_size_suite(samples, seed),
        "bohr0": lambda: bohr0_suite(samples, seed=seed),
        "localization": lambda: localization_suite(samples, seed=seed),
        "vinogradov": lambda: vinogradov_suite(samples, seed),
    }
    return {name: runners[name]() for name in selection}
