"""Weyl sums, small-denominator norms and Vinogradov-type dichotomy checks.

Coefficients are reals mod 1. Monomial phases ``alpha * n^i`` are reduced
mod 1 with :func:`frac_mul`, so large integer arguments lose no accuracy.
Rational approximation works on the exact binary value of a float
(``fractions.Fraction``), so ties are decided exactly and go to the smaller
denominator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from quadfourier._numerics import dist_mod1, frac, frac_mul

VOLUME_CAP = 10**9
SCAN_LIMIT = 1000
_CHUNK = 1 << 20


class VolumeCapError(ValueError):
    """A Weyl-sum box has more points than the configured cap."""


@dataclass(frozen=True)
class MultiPoly:
    """``P(n_1..n_d) = sum alpha_i n_1^{i_1} ... n_d^{i_d}`` with ``i_j <= caps[j]``.

    Attributes:
        dimension: number of variables ``d``.
        caps: per-variable degree caps.
        coefficients: map from exponent tuples to coefficients in ``[0, 1)``.
    """

    dimension: int
    caps: tuple
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        caps = tuple(int(c) for c in self.caps)
        if len(caps) != self.dimension or self.dimension < 1:
            raise ValueError("caps must have one entry per variable")
        reduced = {}
        for exp, alpha in self.coefficients.items():
            exp = tuple(int(i) for i in exp)
            if len(exp) != self.dimension or any(i < 0 or i > c for i, c in zip(exp, caps)):
                raise ValueError(f"exponent {exp} outside caps {caps}")
            reduced[exp] = float(alpha) - math.floor(float(alpha))
        object.__setattr__(self, "caps", caps)
        object.__setattr__(self, "coefficients", reduced)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """``P(n) mod 1`` for integer points of shape ``(m, d)``."""
        points = np.asarray(points, dtype=np.int64).reshape(-1, self.dimension)
        acc = np.zeros(len(points))
        for exp in sorted(self.coefficients):
            alpha = self.coefficients[exp]
            if alpha == 0.0:
                continue
            mono = np.ones(len(points), dtype=np.int64)
            for j, i in enumerate(exp):
                mono = mono * points[:, j] ** i
            acc = frac(acc + frac_mul(alpha, mono))
        return acc

    def to_json(self) -> str:
        items = [{"exponent": list(k), "value": v} for k, v in sorted(self.coefficients.items())]
        return json.dumps({"dimension": self.dimension, "caps": list(self.caps), "coefficients": items})

    @classmethod
    def from_json(cls, text: str) -> "MultiPoly":
        data = json.loads(text)
        unknown = set(data) - {"dimension", "caps", "coefficients"}
        if unknown:
            raise ValueError(f"unknown keys {sorted(unknown)}")
        coeffs = {tuple(c["exponent"]): c["value"] for c in data["coefficients"]}
        return cls(int(data["dimension"]), tuple(data["caps"]), coeffs)


def _box_shape(box) -> tuple[list[int], list[int]]:
    lows, sizes = [], []
    for a, b in box:
        a, b = int(a), int(b)
        if b < a:
            raise ValueError(f"empty interval [{a}, {b}]")
        lows.append(a)
        sizes.append(b - a + 1)
    return lows, sizes


def weyl_sum(P: MultiPoly, box, normalize: bool = False, cap: int = VOLUME_CAP) -> complex:
    """``sum_{n in box} e(P(n))`` over a product of inclusive integer intervals.

    Points are streamed in fixed-size chunks; the chunk sums are added in
    order, so the result does not depend on anything but the inputs.

    Raises:
        VolumeCapError: if the box has more than ``cap`` points.
    """
    if len(box) != P.dimension:
        raise ValueError("box dimension does not match the polynomial")
    lows, sizes = _box_shape(box)
    volume = math.prod(sizes)
    if volume > cap:
        raise VolumeCapError(f"box volume {volume} exceeds cap {cap}")
    total = 0j
    for start in range(0, volume, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, volume), dtype=np.int64)
        idx = np.stack(np.unravel_index(flat, sizes), axis=1) + np.array(lows, dtype=np.int64)
        total += complex(np.sum(np.exp(2j * np.pi * P.evaluate(idx))))
    return total / volume if normalize else total


# --- rational approximation ------------------------------------------------------------


def _exact(x: float) -> Fraction:
    f = Fraction(x)
    return f - math.floor(f)


def _dist_exact(q: int, x: Fraction) -> Fraction:
    r = (q * x.numerator) % x.denominator
    return Fraction(min(r, x.denominator - r), x.denominator)


def convergents(x: float, Q: int | None = None) -> list[Fraction]:
    """Continued-fraction convergents of ``x mod 1`` (denominators ``<= Q``)."""
    x = _exact(x)
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, (num, den) = num // den, (den, num % den)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if Q is not None and q1 > Q:
            break
        out.append(Fraction(p1, q1))
    return out


def rational_approx_cf(x: float, Q: int) -> Fraction:
    """Last convergent of ``x mod 1`` with denominator ``<= Q``.

    This is the best approximation in the sense ``min_{q <= Q} |q x - p|``.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    return convergents(x, Q)[-1]


def small_denominator_norm(x: float, Q: int) -> tuple[float, int]:
    """``min_{1 <= q <= Q} ||q x||`` and the smallest minimizing ``q``.

    Scans ``q`` directly for ``Q <= 1000``. Above that, the minimizer is the
    last convergent with denominator ``<= Q``.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    xe = _exact(x)
    if Q <= SCAN_LIMIT:
        best_q, best = 1, _dist_exact(1, xe)
        for q in range(2, Q + 1):
            d = _dist_exact(q, xe)
            if d < best:
                best_q, best = q, d
        return float(best), best_q
    q = rational_approx_cf(x, Q).denominator
    return float(_dist_exact(q, xe)), q


# --- dichotomy checks -------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Outcome of a quadratic Vinogradov check.

    ``kind`` is one of ``density_too_low``, ``epsilon_large``, ``interval_small``,
    ``rational_found`` or ``dichotomy_violated``. ``interval_small`` records
    whether ``|I| < 2^58 delta^-12`` (the lemma's escape clause) either way.
    """

    kind: str
    density: float | None
    q: int | None = None
    norm: float | None = None
    bound: float | None = None
    interval_small: bool = True


def vinogradov_quadratic_verify(
    alpha: float,
    beta: float,
    gamma: float,
    interval,
    eps: float,
    delta: float,
    q_cap: int,
    bound_constant: float | None = None,
    literal: bool = False,
) -> Verdict:
    """Check the quadratic Vinogradov dichotomy on ``I = [lo, hi]``.

    If at least ``delta |I|`` of the ``l`` in ``I`` have
    ``||alpha l^2 + beta l + gamma|| <= eps`` and ``eps <= delta/4``, a
    ``q <= q_cap`` with ``||q alpha|| <= bound_constant |I|^-2`` is searched
    (default constant ``delta^-2``). When none exists the verdict is
    ``dichotomy_violated``, or ``interval_small`` with ``literal=True`` when
    ``|I|`` is below the lemma's threshold.
    """
    lo, hi = int(interval[0]), int(interval[1])
    length = hi - lo + 1
    if length < 1:
        raise ValueError("empty interval")
    if length > 10**7:
        raise ValueError("interval longer than 10^7")
    small = math.log2(length) < 58 - 12 * math.log2(delta)
    if eps > delta / 4:
        return Verdict("epsilon_large", None, interval_small=small)
    ell = np.arange(lo, hi + 1, dtype=np.int64)
    phase = frac(frac_mul(alpha, ell * ell) + frac_mul(beta, ell) + gamma)
    density = float(np.count_nonzero(dist_mod1(phase) <= eps)) / length
    if density < delta:
        return Verdict("density_too_low", density, interval_small=small)
    constant = delta**-2 if bound_constant is None else bound_constant
    bound = constant / length**2
    norm, q = small_denominator_norm(alpha, q_cap)
    if norm <= bound:
        return Verdict("rational_found", density, q, norm, bound, small)
    kind = "interval_small" if (literal and small) else "dichotomy_violated"
    return Verdict(kind, density, q, norm, bound, small)


@dataclass(frozen=True)
class MultiCheck:
    """Result of the multidimensional dichotomy check on one instance."""

    normalized: float
    large: bool
    recovered: dict
    ok: bool
    scaled_ratios: dict


def multi_dichotomy_check(
    P: MultiPoly,
    box,
    threshold: float = 0.1,
    q_max: int = 400,
    tol: float = 1e-6,
) -> MultiCheck:
    """Desk form of the multidimensional Weyl dichotomy.

    When ``|normalized Weyl sum| >= threshold``, every coefficient must have
    some ``q <= q_max`` with ``||q alpha|| <= tol``. The ratio of the
    recovered ``||q alpha||`` to ``delta^-2 prod_j N_j^{-i_j}`` (the scaled
    form of the bound) is reported for each monomial but not enforced.
    """
    value = abs(weyl_sum(P, box, normalize=True))
    large = value >= threshold
    recovered, ratios, ok = {}, {}, True
    if large:
        _, sizes = _box_shape(box)
        for exp, alpha in sorted(P.coefficients.items()):
            norm, q = small_denominator_norm(alpha, q_max)
            recovered[exp] = (q, norm)
            ok = ok and norm <= tol
            scale = value**-2 * math.prod(float(n) ** -i for n, i in zip(sizes, exp))
            ratios[exp] = norm / scale
    return MultiCheck(value, large, recovered, ok, ratios)


def random_near_rational_poly(
    rng, dimension: int, caps, q_max: int = 20, noise: float = 1e-8, common_denominator: bool = True
) -> MultiPoly:
    """Coefficients ``p/q + noise`` with ``q <= q_max`` on every monomial of positive degree.

    With ``common_denominator`` one ``q`` is shared by all coefficients, which
    keeps many Weyl sums large enough to exercise the structured branch.
    """
    coeffs = {}
    shared = int(rng.integers(1, q_max + 1))
    for exp in product(*(range(c + 1) for c in caps)):
        if sum(exp) == 0:
            continue
        q = shared if common_denominator else int(rng.integers(1, q_max + 1))
        p = int(rng.integers(0, q))
        coeffs[exp] = p / q + float(rng.uniform(-noise, noise))
    return MultiPoly(dimension, tuple(caps), coeffs)
