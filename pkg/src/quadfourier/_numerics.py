"""Small numeric helpers shared across modules: phases, mod-1 distances,
accurate products modulo one, and deterministic reductions."""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * np.pi

# Digit width used when splitting integers for frac_mul. 12 bits keeps every
# partial product below 2**12 ulp(1), i.e. absolute error < 1e-12.
_DIGIT_BITS = 12
_DIGIT_MASK = (1 << _DIGIT_BITS) - 1


def e(x):
    """The additive character e(x) = exp(2 pi i x)."""
    return np.exp(1j * TWO_PI * np.asarray(x, dtype=float))


def frac(x):
    """Fractional part in [0, 1)."""
    x = np.asarray(x, dtype=float)
    out = x - np.floor(x)
    # x - floor(x) can round up to exactly 1.0 for tiny negative x
    return np.where(out >= 1.0, 0.0, out)


def dist_mod1(x):
    """Distance from x to the nearest integer, ||x||_{R/Z}."""
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.rint(x))


def frac_mul(alpha: float, m) -> np.ndarray:
    """Return alpha * m mod 1 for integer m, accurate to ~1e-12.

    A plain float product loses log2(|m|) bits; here m is split into 12-bit
    digits and each digit multiplies frac(alpha * 2**(12 i)), which is exact
    in binary floating point.
    """
    m = np.asarray(m, dtype=np.int64)
    sign = np.sign(m)
    mag = np.abs(m)
    alpha = float(alpha) - math.floor(float(alpha))
    acc = np.zeros(mag.shape, dtype=float)
    scale = alpha
    remaining = mag.copy()
    while True:
        digit = remaining & _DIGIT_MASK
        acc = frac(acc + scale * digit)
        remaining = remaining >> _DIGIT_BITS
        if not remaining.any():
            break
        scale = math.ldexp(scale, _DIGIT_BITS)
        scale -= math.floor(scale)
    return frac(sign * acc)


def pairwise_sum(values) -> complex | float:
    """Order-fixed sum of a 1-d array (numpy's pairwise summation)."""
    return np.sum(np.asarray(values))


def fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def signed_rep(n, N: int):
    """Signed representative of n mod N in (-N/2, N/2]."""
    r = np.mod(np.asarray(n, dtype=np.int64), N)
    return np.where(2 * r > N, r - N, r)
