"""Gowers uniformity norms on Z/NZ and on intervals [N].

Signals on ``Z/NZ`` are 1-d arrays of length ``N`` indexed by residues
``0..N-1``; interval signals are arrays ``f(1), ..., f(N)``.

The brute-force routines evaluate the defining average term by term and are
the oracle for the FFT-based ones:

* ``||f||_{U^2}^4 = sum_xi |f^(xi)|^4`` with ``f^(xi) = E_x f(x) e(xi x / N)``;
* ``||f||_{U^3}^8 = E_h ||Delta_h f||_{U^2}^4`` with
  ``Delta_h f(x) = f(x + h) conj(f(x))``.
"""

from __future__ import annotations

import functools
import itertools
from typing import NamedTuple, Sequence

import numpy as np
import scipy.fft

BRUTE_FORCE_CAPS = {1: 4096, 2: 256, 3: 64, 4: 32}
WITNESS_CAP = 4096
CLAMP_TOL = 1e-10

# rows per FFT batch is chosen so one batch holds about this many complex values
_BATCH_VALUES = 1 << 21


class CapExceededError(ValueError):
    """Signal too long for a brute-force or quadratic-time routine."""


class GowersConsistencyError(ArithmeticError):
    """A Gowers power came out negative beyond rounding."""


def _as_signal(f) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("signal must be a non-empty 1-d array")
    return f


def _root(power: float, s: int) -> float:
    if power < 0.0:
        if power < -CLAMP_TOL:
            raise GowersConsistencyError(f"negative U^{s} power {power!r}")
        power = 0.0
    return float(power) ** (1.0 / 2**s)


def gowers_inner_product(fs: Sequence, s: int, cap: int | None = None) -> complex:
    """Gowers inner product of ``2**s`` signals, by direct summation.

    ``fs`` is ordered like ``itertools.product((0, 1), repeat=s)``; the
    factor at vertex ``omega`` is conjugated when ``|omega|`` is odd.
    Cost is O(N^(s+1)).
    """
    if s < 1 or s > 4:
        raise ValueError("s must lie in 1..4")
    fs = [_as_signal(f) for f in fs]
    if len(fs) != 2**s:
        raise ValueError(f"need {2**s} signals for s={s}, got {len(fs)}")
    N = fs[0].size
    if any(f.size != N for f in fs):
        raise ValueError("all signals must share the same modulus")
    cap = BRUTE_FORCE_CAPS[s] if cap is None else cap
    if N > cap:
        raise CapExceededError(f"N={N} exceeds the brute-force cap {cap} for s={s}")

    # Terms are grouped by the last coordinate of omega: for fixed
    # (n, h_1..h_{s-1}) the omega_s = 0 factors form P0 and the omega_s = 1
    # factors form P1 evaluated at n + h_s.
    axes = np.indices((N,) * s, sparse=True)
    n_axis, h_axes = axes[0], axes[1:]
    half = [np.ones((1,) * s, dtype=complex), np.ones((1,) * s, dtype=complex)]
    for k, omega in enumerate(itertools.product((0, 1), repeat=s)):
        shift = n_axis + sum(w * h for w, h in zip(omega[:-1], h_axes))
        vals = fs[k][np.mod(shift, N)]
        if sum(omega) % 2:
            vals = np.conj(vals)
        half[omega[-1]] = half[omega[-1]] * vals
    p0 = np.broadcast_to(half[0], (N,) * s)
    p1 = np.broadcast_to(half[1], (N,) * s)

    partial = np.empty(N, dtype=complex)
    rows = np.arange(N)
    for h in range(N):
        partial[h] = np.sum(p0 * p1[(rows + h) % N])
    return complex(np.sum(partial)) / float(N) ** (s + 1)


def u_norm_bruteforce(f, s: int, cap: int | None = None) -> float:
    """``||f||_{U^s(Z/NZ)}`` straight from the definition."""
    f = _as_signal(f)
    power = gowers_inner_product([f] * 2**s, s, cap=cap)
    return _root(power.real, s)


def u2_norm_fast(f) -> float:
    """``||f||_{U^2}`` from the fourth moment of the Fourier transform."""
    f = _as_signal(f)
    fhat = np.fft.fft(f) / f.size
    return _root(np.sum(np.abs(fhat) ** 4), 2)


def _u3_power(f: np.ndarray, shifts: np.ndarray, workers: int | None) -> float:
    """``E_h ||Delta_h f||_{U^2}^4`` where only ``h`` in ``shifts`` can be nonzero."""
    N = f.size
    conj_f = np.conj(f)
    x = np.arange(N)
    batch = max(1, _BATCH_VALUES // N)
    per_shift = np.empty(shifts.size, dtype=float)
    for start in range(0, shifts.size, batch):
        hs = shifts[start : start + batch]
        rows = f[(x[None, :] + hs[:, None]) % N] * conj_f[None, :]
        spectrum = scipy.fft.fft(rows, axis=1, workers=workers)
        per_shift[start : start + hs.size] = np.sum(np.abs(spectrum) ** 4, axis=1)
    return float(np.sum(per_shift)) / float(N) ** 5


def u3_norm_fast(f, workers: int | None = None) -> float:
    """``||f||_{U^3(Z/NZ)}`` in O(N^2 log N).

    Per-shift contributions are stored and summed in a fixed order, so the
    result does not depend on ``workers``.
    """
    f = _as_signal(f)
    return _root(_u3_power(f, np.arange(f.size), workers), 3)


def embedding_modulus(N: int, s: int) -> int:
    """Least power of two ``>= 2 (s + 1) N``; no wraparound can occur."""
    M = 1
    while M < 2 * (s + 1) * N:
        M *= 2
    return M


def _embedded_power(values: np.ndarray, s: int, M: int, workers: int | None) -> float:
    N = values.size
    g = np.zeros(M, dtype=complex)
    g[1 : N + 1] = values
    if s == 2:
        ghat = np.fft.fft(g) / M
        return float(np.sum(np.abs(ghat) ** 4))
    # Delta_h g vanishes unless |h| < N (as an integer representative).
    shifts = np.concatenate([np.arange(N), np.arange(M - N + 1, M)])
    return _u3_power(g, shifts, workers)


@functools.lru_cache(maxsize=64)
def _indicator_power(N: int, s: int, M: int) -> float:
    return _embedded_power(np.ones(N, dtype=complex), s, M, None)


def _pad_size(L: int) -> int:
    """Power of two ``>= 2L - 1``: linear and cyclic convolution agree."""
    P = 1
    while P < 2 * L - 1:
        P *= 2
    return P


def _z_quadruple_sums(rows: np.ndarray, L: int, workers: int | None) -> np.ndarray:
    """``sum_{x+y=z+w} g(x) g(y) conj(g(z) g(w))`` over Z for each row ``g``."""
    P = _pad_size(L)
    spectrum = scipy.fft.fft(rows, n=P, axis=1, workers=workers)
    return np.sum(np.abs(spectrum) ** 4, axis=1) / P


def indicator_quadruples(L: int) -> int:
    """Additive quadruples in an interval of length ``L``: ``(2L^3 + L)/3``."""
    return (2 * L**3 + L) // 3


def _interval_power_z(f: np.ndarray, s: int, workers: int | None) -> float:
    """Ratio of Z-counts for ``f 1_[N]`` and ``1_[N]`` without any embedding."""
    N = f.size
    if s == 2:
        num = float(_z_quadruple_sums(f[None, :], N, workers)[0])
        return num / indicator_quadruples(N)
    # Delta_{-h} f is a conjugated translate of Delta_h f, with the same count,
    # so only h >= 0 is computed. Shifts are grouped by padded FFT size.
    conj_f = np.conj(f)
    counts = np.empty(N, dtype=float)
    h = 0
    while h < N:
        P = _pad_size(N - h)
        # shifts h..h_end share the same padded size
        h_end = h
        while h_end + 1 < N and _pad_size(N - h_end - 1) == P:
            h_end += 1
        L = N - h
        batch = max(1, _BATCH_VALUES // P)
        for start in range(h, h_end + 1, batch):
            hs = np.arange(start, min(h_end + 1, start + batch))
            x = np.arange(L)
            idx = x[None, :] + hs[:, None]
            valid = idx < N
            rows = np.where(valid, f[np.minimum(idx, N - 1)] * conj_f[x][None, :], 0.0)
            counts[hs] = _z_quadruple_sums(rows, L, workers)
        h = h_end + 1
    num = counts[0] + 2.0 * float(np.sum(counts[1:]))
    den = indicator_quadruples(N) + 2 * sum(indicator_quadruples(N - k) for k in range(1, N))
    return num / den


def u_norm_interval(f, s: int, modulus: int | None = None, workers: int | None = None) -> float:
    """``||f||_{U^s([N])} = ||f 1_[N]||_{U^s(Z)} / ||1_[N]||_{U^s(Z)}``.

    By default both norms are evaluated as exact counts over ``Z``. Passing
    ``modulus`` instead computes them on ``Z/MZ`` with ``f`` embedded in an
    ``M``-cycle, ``M >= 2 (s + 1) N``; the two routes agree.
    """
    if s not in (2, 3):
        raise ValueError("interval norms are provided for s = 2, 3")
    f = _as_signal(f)
    N = f.size
    if modulus is None:
        return _root(_interval_power_z(f, s, workers), s)
    M = int(modulus)
    if M < 2 * (s + 1) * N:
        raise ValueError(f"modulus {M} too small for wraparound-free embedding of [{N}]")
    num = _embedded_power(f, s, M, workers)
    den = _indicator_power(N, s, M)
    return _root(num / den, s)


class Witness(NamedTuple):
    a: int
    b: int
    correlation: float


def quadratic_witness_search(f, cap: int = WITNESS_CAP, workers: int | None = None) -> Witness:
    """Maximise ``|E_n f(n) e(-(a n^2 + b n)/N)|`` over all ``(a, b)``.

    For each ``a`` one FFT covers every ``b``. Ties go to the
    lexicographically smallest ``(a, b)``.
    """
    f = _as_signal(f)
    N = f.size
    if N > cap:
        raise CapExceededError(f"N={N} exceeds the witness-search cap {cap}")
    n = np.arange(N, dtype=np.int64)
    squares = (n * n) % N
    chirp = np.exp(-2j * np.pi * np.arange(N) / N)
    batch = max(1, _BATCH_VALUES // N)

    best = Witness(0, 0, -1.0)
    for start in range(0, N, batch):
        a = np.arange(start, min(N, start + batch), dtype=np.int64)
        rows = f[None, :] * chirp[(a[:, None] * squares[None, :]) % N]
        mags = np.abs(scipy.fft.fft(rows, axis=1, workers=workers)) / N
        flat = int(np.argmax(mags))
        i, b = divmod(flat, N)
        if mags[i, b] > best.correlation:
            best = Witness(int(a[i]), int(b), float(mags[i, b]))
    return best
