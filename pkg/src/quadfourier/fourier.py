"""Fourier-complexity constructions: trigonometric approximants with certified errors.

Two settings appear:

* the d-torus ``(R/Z)^d``: frequencies are integer vectors and a polynomial
  evaluates as ``sum_i a_i e(k_i . x)``;
* a cyclic group ``Z/MZ`` (or a product of copies): the same sum with
  ``x`` integer and phases ``e(k_i . x / M)``.

Every approximant carries an ``error_bound`` together with the norm in which
it holds (``uniform`` for sup-norm, ``mean`` for the normalized L1 norm).

The smoothing kernel throughout is the polynomial bump
``phi(x) = (315/256) (1 - x^2)^4`` on ``[-1, 1]`` (unit mass). Its Fourier
transform has the closed form below and obeys
``|phi^(w)| <= V / (2 pi |w|)^5`` with ``V`` the total variation of
``phi''''`` (jumps at the endpoints included).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from quadfourier.bohr import BohrSet, build_bohr, is_regular

log = logging.getLogger(__name__)

MAX_DIM = 3
DEFAULT_GRID_POINTS = 1 << 24
DEFAULT_MAX_TERMS = 1 << 22

# phi as power-series coefficients (lowest degree first)
_BUMP = P.polymul(P.polypow([1.0, 0.0, -1.0], 4), [315.0 / 256.0])
_TAYLOR_SWITCH = 10.0


def _moments(poly, count):
    """``int_{-1}^{1} x^n p(x) dx`` for n = 0..count-1."""
    out = np.empty(count)
    for n in range(count):
        antider = P.polyint(P.polymul(poly, [0.0] * n + [1.0]))
        out[n] = P.polyval(1.0, antider) - P.polyval(-1.0, antider)
    return out


_EVEN_MOMENTS = _moments(_BUMP, 120)[0::2]


def _bump_variation() -> float:
    """Total variation of ``phi''''`` on R, endpoint jumps included."""
    d4 = P.polyder(_BUMP, 4)
    d5 = P.polyder(d4)
    roots = [r.real for r in P.polyroots(P.polyder(d5)) if abs(r.imag) < 1e-12 and -1 < r.real < 1]
    knots = [-1.0, *sorted(roots), 1.0]
    anti = P.polyint(d5)
    inner = sum(abs(P.polyval(b, anti) - P.polyval(a, anti)) for a, b in zip(knots, knots[1:]))
    return inner + abs(P.polyval(1.0, d4)) + abs(P.polyval(-1.0, d4))


BUMP_VARIATION = _bump_variation()


def bump(x):
    """``phi(x)``; zero outside ``[-1, 1]``."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, P.polyval(x, _BUMP), 0.0)


def bump_transform(w):
    """``phi^(w) = int phi(x) e(-w x) dx`` (real and even)."""
    w = np.abs(np.asarray(w, dtype=float))
    t = 2.0 * np.pi * w
    out = np.empty_like(t)

    small = t < _TAYLOR_SWITCH
    ts = t[small]
    acc = np.zeros_like(ts)
    term = np.ones_like(ts)
    for j, m in enumerate(_EVEN_MOMENTS):
        acc += term * m
        term = term * (-(ts**2)) / ((2 * j + 1) * (2 * j + 2))
    out[small] = acc

    # integration by parts: int p e^{-itx} = sum_k (-1)^k [p^(k) e^{-itx}]/(-it)^{k+1}
    tl = t[~small]
    total = np.zeros(tl.shape, dtype=complex)
    deriv = _BUMP
    for k in range(len(_BUMP)):
        upper = P.polyval(1.0, deriv) * np.exp(-1j * tl)
        lower = P.polyval(-1.0, deriv) * np.exp(1j * tl)
        total += (-1) ** k * (upper - lower) / (-1j * tl) ** (k + 1)
        deriv = P.polyder(deriv)
    out[~small] = total.real
    return out


def _bump_tail(eta: float, M: int) -> float:
    """Upper bound for ``sum_{|k| > M} |phi^(eta k)|``."""
    return 2.0 * BUMP_VARIATION / (2.0 * np.pi * eta) ** 5 / (4.0 * M**4)


# --- trigonometric polynomials -------------------------------------------------


@dataclass
class TrigPolynomial:
    """``sum_i a_i e(k_i . x)`` on the torus, or ``e(k_i . x / modulus)``.

    Attributes:
        coefficients: complex array of length ``n_terms``.
        frequencies: integer array of shape ``(n_terms, d)``.
        error_bound: declared approximation error.
        error_norm: ``"uniform"`` or ``"mean"``.
        modulus: ``None`` for the torus, otherwise the cyclic modulus.
        info: construction parameters, for logging only.
    """

    coefficients: np.ndarray
    frequencies: np.ndarray
    error_bound: float
    error_norm: str = "uniform"
    modulus: int | None = None
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex).reshape(-1)
        freqs = np.asarray(self.frequencies, dtype=np.int64)
        if freqs.ndim == 1:
            freqs = freqs.reshape(-1, 1)
        self.frequencies = freqs
        if self.frequencies.shape[0] != self.coefficients.size:
            raise ValueError("one frequency vector per coefficient is required")
        if self.error_norm not in ("uniform", "mean"):
            raise ValueError("error_norm must be 'uniform' or 'mean'")

    @property
    def dim(self) -> int:
        return self.frequencies.shape[1]

    @property
    def coefficient_l1(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    def __len__(self) -> int:
        return self.coefficients.size

    def evaluate(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(m, d)`` (or ``(m,)`` when d = 1)."""
        x = np.asarray(x)
        chunk = max(1, (1 << 20) // max(1, len(self)))
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.shape[1] != self.dim:
            raise ValueError("point dimension does not match the polynomial")
        out = np.empty(x.shape[0], dtype=complex)
        for start in range(0, x.shape[0], chunk):
            pts = x[start : start + chunk]
            if self.modulus is None:
                phase = pts.astype(float) @ self.frequencies.T.astype(float)
            else:
                # integer phase reduced mod the modulus before scaling
                ints = pts.astype(np.int64) @ self.frequencies.T
                phase = np.mod(ints, self.modulus) / self.modulus
            out[start : start + chunk] = np.exp(2j * np.pi * phase) @ self.coefficients
        return out

    def to_json(self) -> str:
        payload = {
            "terms": [
                {"re": float(c.real), "im": float(c.imag), "freq": [int(k) for k in f]}
                for c, f in zip(self.coefficients, self.frequencies)
            ],
            "error": float(self.error_bound),
            "norm": self.error_norm,
        }
        if self.modulus is not None:
            payload["modulus"] = int(self.modulus)
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "TrigPolynomial":
        data = json.loads(text)
        terms = data["terms"]
        coeffs = [complex(t["re"], t["im"]) for t in terms]
        dim = len(terms[0]["freq"]) if terms else 1
        freqs = np.array([t["freq"] for t in terms], dtype=np.int64).reshape(-1, dim)
        return cls(coeffs, freqs, data["error"], data["norm"], data.get("modulus"))


def _prune(coeffs: np.ndarray, freqs: np.ndarray, budget: float):
    """Drop the smallest coefficients whose total modulus stays within ``budget``."""
    mags = np.abs(coeffs)
    order = np.argsort(mags, kind="stable")
    dropped = np.cumsum(mags[order])
    n_drop = int(np.searchsorted(dropped, budget, side="right"))
    keep = np.sort(order[n_drop:])
    spent = float(dropped[n_drop - 1]) if n_drop else 0.0
    return coeffs[keep], freqs[keep], spent


def _tensor_frequencies(M: int, d: int) -> np.ndarray:
    axis = np.arange(-M, M + 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def _tensor_values(vals: list[np.ndarray]) -> np.ndarray:
    out = vals[0]
    for v in vals[1:]:
        out = np.multiply.outer(out, v)
    return out.reshape(-1)


# --- Fejer-type expansion of Lipschitz functions on tori ----------------------


def fejer_approx(
    F: Callable[[np.ndarray], np.ndarray],
    L: float,
    delta: float,
    dim: int = 1,
    lipschitz: float | None = None,
    fourier_coefficients: Callable[[np.ndarray], np.ndarray] | None = None,
    max_grid_points: int = DEFAULT_GRID_POINTS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> TrigPolynomial:
    """Trigonometric polynomial within ``3 delta`` of ``F`` in sup-norm.

    ``F`` maps points of shape ``(m, dim)`` in ``[0, 1)^dim`` to values and
    satisfies ``||F||_inf + Lip(F) <= L``, with the Lipschitz constant taken
    for the max-coordinate distance on the torus.

    Construction: ``F`` is convolved with the periodized product kernel
    ``K(x) = prod phi_eta(x_i)`` with ``eta = delta / L``, which moves values
    by at most ``Lip(F) eta <= delta``. The expansion of ``F * K`` is
    truncated to the box ``|k|_inf <= M`` (tail ``<= delta/2``). Coefficients of
    ``F`` come from ``fourier_coefficients`` when supplied, otherwise from a
    midpoint rule on a ``G^dim`` grid whose error is bounded through the
    Lipschitz constant of ``F(x) e(-k.x)`` (``<= delta/2`` overall).

    Raises:
        ValueError: for ``dim > 3``, ``delta`` outside ``(0, 1)``, a frequency
            box with more than ``max_terms`` points, or a quadrature grid
            larger than ``max_grid_points``.
    """
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dimension must lie in 1..{MAX_DIM}")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if L <= 0:
        raise ValueError("L must be positive")
    lip = L if lipschitz is None else float(lipschitz)

    if lip == 0.0:
        # Lipschitz constant zero: F is constant
        c = complex(np.asarray(F(np.zeros((1, dim))))[0])
        return TrigPolynomial([c], np.zeros((1, dim), dtype=np.int64), 0.0, "uniform")

    eta = delta / L
    smoothing = lip * eta

    # A >= phi^(0) = 1 gives a lower bound on the box size without any sums
    M_floor = (L * dim * 2.0 * BUMP_VARIATION / ((2.0 * np.pi * eta) ** 5 * 2.0 * delta)) ** 0.25
    if (2 * math.floor(M_floor) + 1) ** dim > max_terms:
        raise ValueError(f"frequency box of side >= {2 * math.floor(M_floor) + 1} exceeds {max_terms} terms")

    M = 1
    while True:
        A_M = float(np.sum(np.abs(bump_transform(eta * np.arange(-M, M + 1)))))
        tail = _bump_tail(eta, M)
        A = A_M + tail
        truncation = L * dim * A ** (dim - 1) * tail
        if truncation <= delta / 2:
            break
        M *= 2
    # bisect down to the smallest power-of-two-bracketed M that still works
    lo, hi = M // 2, M
    while hi - lo > 1:
        mid = (lo + hi) // 2
        tail = _bump_tail(eta, mid)
        A = float(np.sum(np.abs(bump_transform(eta * np.arange(-mid, mid + 1))))) + tail
        if L * dim * A ** (dim - 1) * tail <= delta / 2:
            hi = mid
        else:
            lo = mid
    M = max(hi, 1)
    ks = np.arange(-M, M + 1)
    kernel_1d = bump_transform(eta * ks)
    tail = _bump_tail(eta, M)
    A = float(np.sum(np.abs(kernel_1d))) + tail
    truncation = L * dim * A ** (dim - 1) * tail
    if (2 * M + 1) ** dim > max_terms:
        raise ValueError(f"frequency box (2*{M}+1)^{dim} exceeds {max_terms} terms")

    freqs = _tensor_frequencies(M, dim)
    kernel = _tensor_values([kernel_1d] * dim)

    if fourier_coefficients is not None:
        fhat = np.asarray(fourier_coefficients(freqs), dtype=complex)
        discretization = 0.0
        G = 0
    else:
        A_M = float(np.sum(np.abs(kernel_1d)))
        B_M = float(np.sum(np.abs(ks) * np.abs(kernel_1d)))
        weight = A_M**dim + 2 * np.pi * dim * A_M ** (dim - 1) * B_M
        G = max(2 * M + 1, math.ceil(L * weight / delta))
        if G**dim > max_grid_points:
            raise ValueError(
                f"quadrature grid {G}^{dim} exceeds {max_grid_points} points; "
                "supply fourier_coefficients"
            )
        discretization = L * weight / (2 * G)
        fhat = _grid_coefficients(F, G, dim, freqs)

    coeffs = fhat * kernel
    coeffs, freqs, pruned = _prune(coeffs, freqs, 1e-3 * delta)
    bound = smoothing + truncation + discretization + pruned
    info = {"eta": eta, "M": M, "grid": G, "l1_over_L": float(np.sum(np.abs(coeffs))) / L}
    log.debug("fejer_approx: %s", info)
    return TrigPolynomial(coeffs, freqs, bound, "uniform", None, info)


def _grid_coefficients(F, G: int, dim: int, freqs: np.ndarray) -> np.ndarray:
    """Midpoint-rule ``E_x F(x) e(-k.x)`` on the grid ``((j + 1/2)/G)^dim``."""
    axis = (np.arange(G) + 0.5) / G
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    values = np.asarray(F(pts), dtype=complex).reshape((G,) * dim)
    spectrum = np.fft.fftn(values) / G**dim
    # shift from grid nodes j/G to midpoints (j + 1/2)/G
    phase = np.exp(-1j * np.pi * freqs.sum(axis=1) / G)
    idx = tuple(np.mod(freqs[:, i], G) for i in range(dim))
    return spectrum[idx] * phase


# --- smooth Bohr cutoffs -------------------------------------------------------


@dataclass(frozen=True)
class SmoothCutoff:
    """A Lipschitz cutoff supported in ``base`` with its L1 distance to ``1_B``."""

    base: BohrSet
    values: np.ndarray = field(repr=False)
    approximation_error: float


def trapezoid_coefficients(k, half_width: float, ramp: float) -> np.ndarray:
    """Fourier coefficients of the torus function equal to 1 on ``|x| <= half_width - ramp``,
    0 on ``|x| >= half_width + ramp``, linear between.

    It is ``1_[-h, h] * (1/(2 ramp)) 1_[-ramp, ramp]``, whose coefficients are
    ``sin(2 pi k h)/(pi k) * sinc(2 k ramp)``.
    """
    k = np.asarray(k, dtype=float)
    box = np.where(k == 0, 2.0 * half_width, np.sin(2 * np.pi * k * half_width) / (np.pi * np.where(k == 0, 1, k)))
    return box * np.sinc(2.0 * k * ramp)


def trapezoid(x, half_width: float, ramp: float) -> np.ndarray:
    """Values of the trapezoid on the torus (distance read mod 1)."""
    d = np.abs(np.asarray(x, dtype=float) - np.rint(x))
    return np.clip((half_width + ramp - d) / (2.0 * ramp), 0.0, 1.0)


def smooth_bohr_indicator(B: BohrSet, delta: float) -> tuple[SmoothCutoff, TrigPolynomial]:
    """Lipschitz cutoff for a regular Bohr set and its Fourier expansion on ``Z/NZ``.

    The cutoff is ``prod_xi T(xi n / N)`` times ``1_B``, where ``T`` is the
    trapezoid equal to 1 on ``||x|| <= rho - delta/|S|`` and 0 beyond
    ``rho + delta/|S|``.

    The torus series of the product trapezoid, composed with
    ``n -> (xi n / N)_xi``, collapses mod ``N`` onto the discrete Fourier
    transform of the unclipped product, which is therefore computed directly.
    Coefficients of total modulus at most ``delta`` are then dropped, so the
    polynomial is within ``delta`` of the unclipped product in sup-norm (this is
    ``error_bound``). The clipping to ``B`` is not part of the expansion.

    Raises:
        ValueError: if ``B`` is not regular or ``delta > rho/100`` (the largest
            ``delta`` for which regularity controls the transition band).
    """
    if not (B.regular or is_regular(B)):
        raise ValueError("smooth_bohr_indicator needs a regular Bohr set")
    if not 0.0 < delta <= B.radius / 100:
        raise ValueError("delta must lie in (0, rho/100]")
    N, k = B.N, B.rank
    ramp = delta / k
    n = np.arange(N, dtype=np.int64)
    unclipped = np.ones(N)
    for xi in B.frequencies:
        unclipped *= trapezoid(((xi * n) % N) / N, B.radius, ramp)
    values = unclipped * B.members
    l1 = float(np.mean(np.abs(values - B.members)))
    cutoff = SmoothCutoff(B, values, l1)

    coeffs = np.fft.fft(unclipped) / N
    coeffs, freqs, pruned = _prune(coeffs, np.arange(N, dtype=np.int64), delta)
    poly = TrigPolynomial(coeffs, freqs, pruned, "uniform", N, {"cutoff_l1": l1})
    log.debug("smooth_bohr_indicator: terms=%d l1=%g mass=%g", len(poly), l1, poly.coefficient_l1)
    return cutoff, poly


# --- U^2-dual functions ---------------------------------------------------------


def dual_convolution(g, h) -> np.ndarray:
    """``f(x) = sum_y g(x + y) h(y)`` on ``Z/NZ``."""
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if g.shape != h.shape or g.ndim != 1:
        raise ValueError("g and h must be 1-d signals with a shared modulus")
    # sum_y g(x+y) h(y) = ifft(fft(g) * conj(fft(conj h)))
    return np.fft.ifft(np.fft.fft(g) * np.conj(np.fft.fft(np.conj(h))))


def u2_dual_l1_mass(g, h) -> float:
    """``sum_xi |f^(xi)|`` for ``f(x) = sum_y g(x + y) h(y)``, with
    ``f^(xi) = E_x f(x) e(xi x / N)``.

    It never exceeds :func:`u2_dual_bound`.
    """
    f = dual_convolution(g, h)
    return float(np.sum(np.abs(np.fft.fft(f)))) / f.size


def u2_dual_bound(g, h) -> float:
    """``N ||g||_2 ||h||_2`` with expectation-normalized L2 norms."""
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    return g.size * float(np.sqrt(np.mean(np.abs(g) ** 2) * np.mean(np.abs(h) ** 2)))


def fourier_polynomial(values) -> TrigPolynomial:
    """Exact expansion ``values(n) = sum_xi c_xi e(xi n / N)`` (zero error)."""
    values = np.asarray(values, dtype=complex)
    N = values.size
    coeffs = np.fft.fft(values) / N
    keep = np.abs(coeffs) > 0.0
    return TrigPolynomial(coeffs[keep], np.flatnonzero(keep), 0.0, "mean", N)


# --- locally linear phases -------------------------------------------------------


class LocalLinearityError(ValueError):
    """The phase is not locally linear on the Bohr set."""


def check_local_linearity(B: BohrSet, ell, samples: int = 2000, seed: int = 0, tol: float = 1e-9) -> None:
    """Test ``ell(x + y) - ell(x) - ell(y) = -ell(0)`` mod 1 on random
    ``x, y`` with ``x, y, x + y`` in ``B``."""
    rng = np.random.default_rng(seed)
    elems = B.elements()
    x = rng.choice(elems, size=samples)
    y = rng.choice(elems, size=samples)
    s = (x + y) % B.N
    ok = B.members[s]
    x, y, s = x[ok], y[ok], s[ok]
    c = -float(np.asarray(ell(np.array([0])))[0])
    defect = np.asarray(ell(s)) - np.asarray(ell(x)) - np.asarray(ell(y)) - c
    worst = np.abs(defect - np.rint(defect))
    if worst.size and worst.max() > tol:
        i = int(np.argmax(worst))
        raise LocalLinearityError(
            f"ell is not locally linear: x={int(x[i])}, y={int(y[i])}, defect={worst[i]:.3g}"
        )


def locally_linear_expansion(B: BohrSet, ell, eps: float, seed: int = 0) -> TrigPolynomial:
    """Expansion of ``1_B e(ell)`` with mean (L1) error at most ``eps``.

    For a small Bohr set ``B' = B(S, eps' rho)``,
    ``1_B(x) e(ell(x)) ~ E_{t in B'} 1_B(x + t) e(ell(x + t)) e(ell(0) - ell(t))``,
    exact except where ``x`` lies within ``eps' rho`` of the boundary of ``B``.
    The right side is a convolution whose transform is a product. ``eps'``
    starts at ``eps/|S|`` and halves until the measured L1 error is at most
    ``eps``.

    Raises:
        LocalLinearityError: if ``ell`` fails the sampled linearity check.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    check_local_linearity(B, ell, seed=seed)
    N = B.N
    elems = B.elements()
    phase = np.zeros(N)
    phase[elems] = np.asarray(ell(elems), dtype=float)
    target = B.members * np.exp(2j * np.pi * phase)
    ell0 = float(np.asarray(ell(np.array([0])))[0])

    eps_p = min(eps / B.rank, 0.49 / B.radius)
    while True:
        small = build_bohr(N, B.frequencies, eps_p * B.radius)
        Hvals = small.members * np.exp(2j * np.pi * (ell0 - phase)) / small.size
        # small lies inside B, so phase is defined on its support
        approx_vals = dual_convolution(target, Hvals)
        err = float(np.mean(np.abs(approx_vals - target)))
        if err <= eps or small.size == 1:
            break
        eps_p /= 2.0
    poly = fourier_polynomial(approx_vals)
    poly.error_bound = err
    poly.info = {"eps_prime": eps_p, "inner_size": small.size}
    return poly


# --- box indicators --------------------------------------------------------------


def _interval_expansion(a: int, b: int, N: int, eps: float):
    """Smoothed indicator of ``[a, b]`` on ``Z/4NZ`` with L1 error on the window
    ``[-N, N]`` at most ``eps``; returns (coefficients on Z/4N, error)."""
    Mod = 4 * N
    window = np.arange(-N, N + 1)
    exact = ((window >= a) & (window <= b)).astype(float)
    if a <= -N and b >= N:
        coeffs = np.zeros(Mod, dtype=complex)
        coeffs[0] = 1.0
        return coeffs, 0.0

    def smoothed(w):
        # edges on the window boundary are pushed outward so no ramp enters the window
        lo = a - w if a <= -N else a
        hi = b + w if b >= N else b
        ind = np.zeros(Mod)
        ind[np.arange(lo, hi + 1) % Mod] = 1.0
        kern = np.zeros(Mod)
        kern[np.arange(-w, w + 1) % Mod] = 1.0 / (2 * w + 1)
        vals = np.fft.ifft(np.fft.fft(ind) * np.fft.fft(kern))
        err = float(np.mean(np.abs(vals[window % Mod] - exact)))
        return vals, err

    w = max(1, int(eps * (2 * N + 1)))
    w = min(w, N // 2)
    while True:
        vals, err = smoothed(w)
        if err <= eps or w == 0:
            break
        w //= 2
    if w == 0:
        vals, err = smoothed(0)
    return np.fft.fft(vals) / Mod, err


def box_indicator_approx(box, N: int, eps: float) -> TrigPolynomial:
    """Expansion on ``(Z/4NZ)^d`` of a box ``prod [a_i, b_i]`` inside ``[-N, N]^d``.

    Each side is an interval indicator convolved with a normalized box kernel
    (zero L1 error when the side spans the window). The mean error is taken
    over the window ``[-N, N]^d``. Each smoothed side takes values in
    ``[0, 1]``, so the product error is at most the sum of the side errors.
    """
    box = [(int(a), int(b)) for a, b in box]
    d = len(box)
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must lie in 1..{MAX_DIM}")
    for a, b in box:
        if not -N <= a <= b <= N:
            raise ValueError("box sides must lie inside [-N, N]")
    per_side = eps / d
    coeff_lists, freq_lists, errs = [], [], []
    for a, b in box:
        coeffs, err = _interval_expansion(a, b, N, per_side)
        # only exact zeros are dropped, so side errors add up with no extra factor
        keep = np.flatnonzero(coeffs)
        coeff_lists.append(coeffs[keep])
        freq_lists.append(keep.astype(np.int64))
        errs.append(err)
    bound = float(sum(errs))

    coeffs = _tensor_values(coeff_lists)
    grids = np.meshgrid(*freq_lists, indexing="ij")
    freqs = np.stack([g.reshape(-1) for g in grids], axis=1)
    return TrigPolynomial(coeffs, freqs, bound, "mean", 4 * N, {"side_errors": errs})
