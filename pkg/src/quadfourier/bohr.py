"""Bohr sets ``B(S, rho) = {n : ||xi n / N||_{R/Z} < rho for all xi in S}`` on Z/NZ.

Frequencies are residues ``xi`` (the frequency ``alpha = xi/N``) and the
set always contains ``xi = 1``, so Bohr sets sit inside the interval
``(-rho N, rho N)``.

Membership is decided through the integer table

    dist[n] = max_xi min(xi n mod N, N - (xi n mod N)),

since ``||xi n / N|| = dist / N``. A Bohr set of any radius ``r`` is then
``{n : dist[n] < r N}``, and sizes for many radii come from one sorted copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from quadfourier._numerics import signed_rep

REGULARITY_GRID = 200
RADIUS_CANDIDATES = 200


class BohrSearchError(RuntimeError):
    """No radius in [rho/2, rho] passed the regularity test."""


def _distance_table(N: int, frequencies: tuple[int, ...]) -> np.ndarray:
    n = np.arange(N, dtype=np.int64)
    dist = np.zeros(N, dtype=np.int64)
    for xi in frequencies:
        r = (xi * n) % N
        np.maximum(dist, np.minimum(r, N - r), out=dist)
    return dist


@dataclass(frozen=True)
class BohrSet:
    """An immutable Bohr set on ``Z/NZ``.

    Attributes:
        N: modulus.
        frequencies: residues ``xi`` with ``1`` among them.
        radius: ``rho`` in ``(0, 1/2)``.
        members: boolean membership table over ``0..N-1``.
        regular: True only when certified by :func:`is_regular`.
    """

    N: int
    frequencies: tuple[int, ...]
    radius: float
    members: np.ndarray = field(repr=False)
    regular: bool = False
    dist: np.ndarray = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.members))

    @property
    def rank(self) -> int:
        """``|S|``."""
        return len(self.frequencies)

    def elements(self) -> np.ndarray:
        """Members as residues in increasing order."""
        return np.flatnonzero(self.members)

    def signed_elements(self) -> np.ndarray:
        """Members as integers in ``(-N/2, N/2]``, sorted."""
        return np.sort(signed_rep(self.elements(), self.N))

    def count_at(self, radius) -> np.ndarray:
        """``|B(S, r)|`` for each radius ``r``, same frequencies."""
        ordered = np.sort(self.dist)
        return np.searchsorted(ordered, np.asarray(radius, dtype=float) * self.N, side="left")

    def to_hex(self) -> str:
        """Membership bits packed little-endian (bit n is residue n)."""
        return np.packbits(self.members, bitorder="little").tobytes().hex()


def build_bohr(N: int, S, rho: float) -> BohrSet:
    """Bohr set by direct scan, O(N |S|)."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be positive")
    if not 0.0 < rho < 0.5:
        raise ValueError(f"radius must lie in (0, 1/2); got {rho}")
    frequencies = tuple(sorted({int(xi) % N for xi in S}))
    if 1 % N not in frequencies:
        raise ValueError("the frequency set must contain 1")
    dist = _distance_table(N, frequencies)
    members = dist < rho * N
    return BohrSet(N, frequencies, float(rho), members, False, dist)


def bohr_norm(n, B: BohrSet):
    """``||n||_S = max_xi ||xi n / N||_{R/Z}``."""
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape, dtype=np.int64)
    for xi in B.frequencies:
        r = (xi * n) % B.N
        out = np.maximum(out, np.minimum(r, B.N - r))
    return out / B.N


def _epsilon_grid(rank: int, grid: int) -> np.ndarray:
    bound = 1.0 / (100 * rank)
    return np.linspace(-bound, bound, grid + 2)[1:-1]


def is_regular(B: BohrSet, grid: int = REGULARITY_GRID) -> bool:
    """Check ``(1 - 100|S||eps|)|B| <= |B(S, rho(1+eps))| <= (1 + 100|S||eps|)|B|``
    on ``grid`` equispaced ``eps`` strictly inside ``(-1/(100|S|), 1/(100|S|))``."""
    if grid < 10:
        raise ValueError("grid must be at least 10")
    eps = _epsilon_grid(B.rank, grid)
    sizes = B.count_at(B.radius * (1.0 + eps))
    base = B.size
    slack = 100 * B.rank * np.abs(eps) * base
    return bool(np.all((sizes >= base - slack) & (sizes <= base + slack)))


def find_regular_radius(N: int, S, rho: float, grid: int = REGULARITY_GRID) -> BohrSet:
    """First radius on a geometric grid from ``rho`` down to ``rho/2`` whose
    Bohr set passes :func:`is_regular`.

    Raises:
        BohrSearchError: if neither the coarse grid nor a 10x finer one yields a
            regular set.
    """
    probe = build_bohr(N, S, rho)
    for count in (RADIUS_CANDIDATES, 10 * RADIUS_CANDIDATES):
        for r in np.geomspace(rho, rho / 2, count):
            candidate = replace(probe, radius=float(r), members=probe.dist < r * probe.N)
            if is_regular(candidate, grid):
                return replace(candidate, regular=True)
    raise BohrSearchError(f"no regular radius in [{rho / 2}, {rho}] for N={N}")


def divisible_subset(B: BohrSet, b: int) -> np.ndarray:
    """Membership of ``B_b = {n in B : b | n}``, divisibility read on the
    signed representative in ``(-N/2, N/2]``."""
    if not 1 <= b <= B.N:
        raise ValueError("b must lie in 1..N")
    reps = signed_rep(np.arange(B.N), B.N)
    return B.members & (reps % b == 0)


def localization_defect(f, B: BohrSet, B_eps: BohrSet) -> float:
    """``|E_{x in B} f(x) - E_{x in B} E_{y in x + B_eps} f(y)|``."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (B.N,) or B_eps.N != B.N:
        raise ValueError("signal and Bohr sets must share the modulus")
    # (f * 1_{B_eps})(x) = sum_t 1_{B_eps}(t) f(x + t); B_eps is symmetric.
    smoothed = np.fft.ifft(np.fft.fft(f) * np.fft.fft(B_eps.members.astype(float)))
    smoothed /= B_eps.size
    direct = f[B.members].mean()
    local = smoothed[B.members].mean()
    return float(abs(direct - local))
