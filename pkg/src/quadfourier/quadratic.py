"""Locally quadratic phases on translates of Bohr sets and identity checkers.

A phase ``phi: Z/NZ -> R/Z`` is locally quadratic on ``h + B`` when its third
differences vanish there. Its bilinear form is

    phi''(a, b) = phi(h + a + b) - phi(h + a) - phi(h + b) + phi(h)   (mod 1).

Two families are provided:

* ``global_quadratic``: ``phi(n) = (a n^2 + b n)/N + gamma``, quadratic on all
  of ``Z/NZ`` (so ``phi''(x, y) = 2 a x y / N``);
* ``lifted_quadratic``: ``phi(n) = theta * m^2`` with ``m`` the signed
  representative of ``n - h``; quadratic only while sums stay small.

The verifiers check three consequences of local quadraticity on sampled
admissible inputs:

* arithmetic progressions: ``phi(dn + dqa) = q(q-1)/2 phi''(da, da) + alpha q + beta``;
* quartic double differences of ``phi((m + u a)(l + v b))`` equal
  ``2 u1 u2 v1 v2 phi''(ab, ab)``;
* polarization: ``phi''(a + cb, a + cb) - phi''(a - cb, a - cb) = 4 c phi''(a, b)``.

Admissibility is always checked first, and a violation raises with the offending input.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from quadfourier._numerics import dist_mod1, signed_rep
from quadfourier.bohr import BohrSet, bohr_norm, build_bohr

DEFECT_TOL = 1e-9


class AdmissibilityError(ValueError):
    """An input falls outside the domain where an identity is claimed."""

    def __init__(self, message: str, witness):
        super().__init__(f"{message}: {witness}")
        self.witness = witness


@dataclass(frozen=True)
class LocallyQuadraticForm:
    """A phase on ``translate + domain``; values are returned in ``[0, 1)``.

    Attributes:
        domain: Bohr set on which the phase is (locally) quadratic.
        translate: the centre ``h``.
        kind: ``"global_quadratic"``, ``"lifted_quadratic"`` or ``"corrupted_cubic"``.
        params: ``(a, b, gamma)`` or ``(theta,)`` respectively.
    """

    domain: BohrSet
    translate: int
    kind: str
    params: tuple

    @property
    def N(self) -> int:
        return self.domain.N

    def __call__(self, n) -> np.ndarray:
        n = np.mod(np.asarray(n, dtype=np.int64), self.N)
        if self.kind == "global_quadratic":
            a, b, gamma = self.params
            N = self.N
            num = ((a * ((n * n) % N)) % N + (b * n) % N) % N
            val = num / N + gamma
            return val - np.floor(val)
        if self.kind in ("lifted_quadratic", "corrupted_cubic"):
            # exact: theta m^2 (+ kappa m^3) mod 1 with theta, kappa as dyadic fractions
            coeffs = [Fraction(c) for c in self.params]
            m = signed_rep(n - self.translate, self.N)
            flat = [float(sum(c * int(x) ** (k + 2) for k, c in enumerate(coeffs)) % 1) for x in m.reshape(-1)]
            return np.array(flat, dtype=float).reshape(m.shape)
        raise ValueError(f"unknown kind {self.kind!r}")

    def admissible(self, n, radius: float | None = None) -> np.ndarray:
        """Whether ``n - h`` lies in the domain (or in ``B(S, radius)``).

        Global quadratics are admissible everywhere.
        """
        offset = np.mod(np.asarray(n, dtype=np.int64) - self.translate, self.N)
        if self.kind == "global_quadratic":
            # quadratic on all of Z/NZ: every point is admissible
            return np.ones(offset.shape, dtype=bool)
        if radius is None:
            return self.domain.members[offset]
        return bohr_norm(offset, self.domain) < radius


def make_global_quadratic(N: int, S, rho: float, a: int, b: int, gamma: float = 0.0) -> LocallyQuadraticForm:
    """``phi(n) = (a n^2 + b n)/N + gamma``.

    The coefficients of ``n^2`` and ``n`` must be integers over ``N``; any other value
    wraps inconsistently at ``N`` (use :func:`make_lifted_quadratic`).
    """
    for name, v in (("a", a), ("b", b)):
        if isinstance(v, (bool, np.bool_)) or int(v) != v:
            raise ValueError(f"{name} must be an integer (the phase is {name}/N)")
    domain = build_bohr(N, S, rho)
    return LocallyQuadraticForm(domain, 0, "global_quadratic", (int(a) % N, int(b) % N, float(gamma)))


def make_lifted_quadratic(N: int, S, rho: float, theta: float, translate: int = 0) -> LocallyQuadraticForm:
    """``phi(n) = theta m^2`` with ``m`` the signed representative of ``n - translate``.

    Requires ``8 rho < 1/2``, so sums of up to eight domain elements never
    wrap around and the lift is additive on them.
    """
    if not 8 * rho < 0.5:
        raise ValueError(f"radius {rho} too large: lifted quadratics need 8 rho < 1/2")
    domain = build_bohr(N, S, rho)
    return LocallyQuadraticForm(domain, int(translate) % N, "lifted_quadratic", (float(theta),))


def make_corrupted_form(phi: LocallyQuadraticForm, kappa: float = 1e-4) -> LocallyQuadraticForm:
    """Negative control: a lifted quadratic plus ``kappa m^3``.

    The cubic term has nonzero third derivative, so the quartic and
    polarization identities fail on it.
    """
    if phi.kind != "lifted_quadratic":
        raise ValueError("corruption is defined for lifted quadratics")
    return LocallyQuadraticForm(phi.domain, phi.translate, "corrupted_cubic", (phi.params[0], float(kappa)))


def second_derivative(phi: LocallyQuadraticForm, a: int, b: int, base: int | None = None) -> float:
    """``phi''(a, b)`` in ``[0, 1)``, based at ``h`` or at ``base``.

    Raises:
        AdmissibilityError: if ``a``, ``b`` or ``a + b`` leaves the domain, or the
            four evaluation points do when ``base`` is given.
    """
    N = phi.N
    a, b = int(a) % N, int(b) % N
    for label, v in (("a", a), ("b", b), ("a+b", (a + b) % N)):
        if not phi.admissible(phi.translate + v):
            raise AdmissibilityError(f"{label} outside the domain", {"a": a, "b": b})
    n = phi.translate if base is None else int(base) % N
    pts = np.array([n + a + b, n + a, n + b, n], dtype=np.int64) % N
    if base is not None and not np.all(phi.admissible(pts)):
        raise AdmissibilityError("base point too close to the boundary", {"base": n, "a": a, "b": b})
    v = phi(pts)
    return float(np.mod(v[0] - v[1] - v[2] + v[3], 1.0))


@dataclass
class LemmaReport:
    """Outcome of a verifier run; serializes to JSON."""

    lemma: str
    samples: int
    max_defect: float
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def merge(self, other: "LemmaReport") -> "LemmaReport":
        return LemmaReport(
            self.lemma,
            self.samples + other.samples,
            max(self.max_defect, other.max_defect),
            self.failures + other.failures,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _report(lemma, defects: np.ndarray, contexts, tol: float) -> LemmaReport:
    defects = np.asarray(defects, dtype=float)
    bad = np.flatnonzero(defects > tol)
    failures = [dict(contexts[i], defect=float(defects[i])) for i in bad[:20]]
    worst = float(defects.max()) if defects.size else 0.0
    return LemmaReport(lemma, int(defects.size), worst, failures)


def verify_philemma(phi, d: int, a: int, n: int, q_max: int, tol: float = DEFECT_TOL) -> LemmaReport:
    """Check ``phi(dn + dqa) = q(q-1)/2 phi''(da, da) + alpha q + beta`` for ``2 <= q <= q_max``.

    ``(alpha, beta)`` are fitted from ``q = 0, 1``.
    """
    N = phi.N
    t = (int(d) * int(a)) % N
    q = np.arange(q_max + 1, dtype=np.int64)
    pts = (int(d) * int(n) + q * t) % N
    ok = phi.admissible(pts)
    if not np.all(ok):
        bad = int(q[~ok][0])
        raise AdmissibilityError("progression leaves the domain", {"d": d, "a": a, "n": n, "q": bad})
    if q_max < 2:
        return LemmaReport("philemma", 0, 0.0)
    curvature = second_derivative(phi, t, t)
    vals = phi(pts)
    beta = vals[0]
    alpha = vals[1] - beta
    qs = q[2:].astype(float)
    predicted = qs * (qs - 1) / 2 * curvature + alpha * qs + beta
    defects = dist_mod1(vals[2:] - predicted)
    contexts = [{"d": int(d), "a": int(a), "n": int(n), "q": int(x)} for x in q[2:]]
    return _report("philemma", defects, contexts, tol)


def _bounded_triples(rng, bound: int, size: int) -> np.ndarray:
    """Nonnegative ``(x0, x1, x2)`` with ``x0 + x1 + x2 <= bound``."""
    x1 = rng.integers(0, bound + 1, size=size)
    x2 = rng.integers(0, bound - x1 + 1)
    x0 = rng.integers(0, bound - x1 - x2 + 1)
    return np.stack([x0, x1, x2], axis=1)


def verify_quartic(
    phi,
    a: int,
    b: int,
    ell: int,
    m: int,
    U: int,
    V: int,
    samples: int = 1000,
    seed: int = 0,
    tol: float = DEFECT_TOL,
) -> LemmaReport:
    """Check the quartic identity for ``f(u, v) = (m + u a)(ell + v b)``.

    Samples ``u0 + u1 + u2 <= U`` and ``v0 + v1 + v2 <= V`` and compares the
    double difference ``d_{u1,u2} d_{v1,v2} phi(f(u0, v0))`` with
    ``2 u1 u2 v1 v2 phi''(ab, ab)``.

    Raises:
        AdmissibilityError: if ``U V ||ab||_S > rho`` or a sampled value of
            ``f`` leaves ``h + B(S, rho/10)``.
    """
    N, rho = phi.N, phi.domain.radius
    ab = (int(a) * int(b)) % N
    if U * V * float(bohr_norm(ab, phi.domain)) > rho:
        raise AdmissibilityError("U V ||ab||_S exceeds rho", {"a": a, "b": b, "U": U, "V": V})
    curvature = second_derivative(phi, ab, ab)

    rng = np.random.default_rng(seed)
    us = _bounded_triples(rng, U, samples)
    vs = _bounded_triples(rng, V, samples)
    corners = np.array([(e1, e2, e3, e4) for e1 in (0, 1) for e2 in (0, 1) for e3 in (0, 1) for e4 in (0, 1)])
    u = us[:, :1] + corners[None, :, 0] * us[:, 1:2] + corners[None, :, 1] * us[:, 2:3]
    v = vs[:, :1] + corners[None, :, 2] * vs[:, 1:2] + corners[None, :, 3] * vs[:, 2:3]
    left = (int(m) + u * (int(a) % N)) % N
    right = (int(ell) + v * (int(b) % N)) % N
    pts = (left * right) % N
    inside = phi.admissible(pts, radius=rho / 10)
    if not np.all(inside):
        i = int(np.flatnonzero(~inside.all(axis=1))[0])
        raise AdmissibilityError(
            "f leaves B(S, rho/10)", {"u": us[i].tolist(), "v": vs[i].tolist(), "a": a, "b": b, "ell": ell, "m": m}
        )
    signs = (-1.0) ** (4 - corners.sum(axis=1))
    double_diff = phi(pts) @ signs
    target = 2.0 * us[:, 1] * us[:, 2] * vs[:, 1] * vs[:, 2] * curvature
    defects = dist_mod1(double_diff - target)
    contexts = [{"u": us[i].tolist(), "v": vs[i].tolist()} for i in range(samples)]
    return _report("quartic", defects, contexts, tol)


def verify_polarization(phi, a: int, b: int, c_max: int, tol: float = DEFECT_TOL) -> LemmaReport:
    """Check ``phi''(a+cb, a+cb) - phi''(a-cb, a-cb) = 4 c phi''(a, b)`` for ``c = 1..c_max``."""
    N = phi.N
    base = second_derivative(phi, a, b)
    defects, contexts = [], []
    for c in range(1, c_max + 1):
        plus = (a + c * b) % N
        minus = (a - c * b) % N
        try:
            lhs = second_derivative(phi, plus, plus) - second_derivative(phi, minus, minus)
        except AdmissibilityError as exc:
            raise AdmissibilityError("polarization argument leaves the domain", {"a": a, "b": b, "c": c}) from exc
        defects.append(float(dist_mod1(lhs - 4 * c * base)))
        contexts.append({"a": int(a), "b": int(b), "c": c})
    return _report("polarization", np.array(defects), contexts, tol)


# --- random admissible instances ------------------------------------------------


def _small_elements(phi, fraction: float) -> np.ndarray:
    small = build_bohr(phi.N, phi.domain.frequencies, phi.domain.radius * fraction)
    return small.elements()


def philemma_suite(phi, samples: int = 1000, q_max: int = 10, seed: int = 0) -> LemmaReport:
    """At least ``samples`` progression checks on random admissible ``(d, a, n)``."""
    rng = np.random.default_rng(seed)
    N = phi.N
    report = LemmaReport("philemma", 0, 0.0)
    starts = _small_elements(phi, 0.5)
    while report.samples < samples:
        d = int(rng.integers(1, 6))
        if np.gcd(d, N) != 1:
            continue
        steps = _small_elements(phi, 1.0 / (4 * q_max * d))
        a = int(rng.choice(steps))
        s = int(rng.choice(starts))
        n = (pow(d, -1, N) * (phi.translate + s)) % N
        report = report.merge(verify_philemma(phi, d, a, n, q_max))
    return report


def quartic_suite(phi, samples: int = 1000, U: int = 3, V: int = 3, per_instance: int = 50, seed: int = 0) -> LemmaReport:
    """At least ``samples`` quartic checks on random admissible ``(a, b, ell, m)``.

    Small signed integers are drawn and instances failing the admissibility
    conditions are redrawn; only translate 0 is supported.
    """
    if phi.translate != 0:
        raise ValueError("quartic_suite draws instances around 0; use translate 0")
    rng = np.random.default_rng(seed)
    N, rho = phi.N, phi.domain.radius
    R = max(1, int(np.sqrt(rho * N / 10 / ((1 + U) * (1 + V)))))
    report = LemmaReport("quartic", 0, 0.0)
    attempts = 0
    while report.samples < samples:
        attempts += 1
        if attempts > 100 * samples:
            raise RuntimeError("could not draw admissible quartic instances")
        a, b, ell, m = (int(x) for x in rng.integers(-R, R + 1, size=4))
        try:
            rep = verify_quartic(phi, a, b, ell, m, U, V, per_instance, int(rng.integers(2**31)))
        except AdmissibilityError:
            continue
        report = report.merge(rep)
    return report


def polarization_suite(phi, samples: int = 1000, c_max: int = 4, seed: int = 0) -> LemmaReport:
    """At least ``samples`` polarization checks with ``a, b`` in ``B(S, rho/(4 c_max))``."""
    rng = np.random.default_rng(seed)
    pool = _small_elements(phi, 1.0 / (4 * c_max))
    report = LemmaReport("polarization", 0, 0.0)
    while report.samples < samples:
        a, b = (int(x) for x in rng.choice(pool, size=2))
        report = report.merge(verify_polarization(phi, a, b, c_max))
    return report


def third_derivative_defect(phi, samples: int = 1000, seed: int = 0) -> float:
    """Largest ``||d_{h1,h2,h3} phi(x)||`` over sampled cubes inside the domain.

    ``x - h`` and the steps are drawn from ``B(S, rho/4)`` so all eight
    vertices stay in the domain.
    """
    rng = np.random.default_rng(seed)
    pool = _small_elements(phi, 0.25)
    picks = rng.choice(pool, size=(samples, 4))
    x = picks[:, 0] + phi.translate
    worst = 0.0
    total = np.zeros(samples)
    for e in [(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)]:
        pts = (x + e[0] * picks[:, 1] + e[1] * picks[:, 2] + e[2] * picks[:, 3]) % phi.N
        total += (-1.0) ** (3 - sum(e)) * phi(pts)
    worst = float(np.max(dist_mod1(total)))
    return worst


def bilinearity_defect(phi, samples: int = 1000, seed: int = 0) -> tuple[float, float]:
    """Largest additivity defect ``phi''(a+c, b) - phi''(a, b) - phi''(c, b)`` and
    symmetry defect ``phi''(a, b) - phi''(b, a)`` on arguments from ``B(S, rho/4)``."""
    rng = np.random.default_rng(seed)
    pool = _small_elements(phi, 0.25)
    add, sym = 0.0, 0.0
    for a, b, c in rng.choice(pool, size=(samples, 3)):
        pab = second_derivative(phi, a, b)
        add = max(add, float(dist_mod1(second_derivative(phi, a + c, b) - pab - second_derivative(phi, c, b))))
        sym = max(sym, float(dist_mod1(pab - second_derivative(phi, b, a))))
    return add, sym
