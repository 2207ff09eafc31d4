"""Sieved arithmetic tables and the major-arc approximants to mu and Lambda.

All tables are numpy arrays of length ``N + 1`` indexed directly by ``n``;
entry 0 is a placeholder (zero) so that ``table[n]`` is the value at ``n``.

The approximants follow the usual conventions:

* ``Lambda_Q(n) = prod_{p<Q} (1 - 1/p)^{-1}`` if ``n`` has no prime factor
  below ``Q``, else 0;
* ``Lambda_Siegel(n) = Lambda_Q(n) (1 - n^{beta-1} chi(n))``;
* ``mu_Siegel = (1_{n | P(Q)} mu) * (alpha n^{beta-1} chi(n) 1_{(n,P(Q))=1})``.

The primorial ``P(Q)`` is never formed as an integer.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

MAX_LIMIT = 50_000_000


class CapacityError(ValueError):
    """Requested table size exceeds the configured memory budget."""


class UnsupportedModulusError(ValueError):
    """No real primitive character exists for the requested conductor."""


@dataclass(frozen=True)
class ArithTables:
    """Dense tables of arithmetic functions on ``0..limit``.

    Attributes:
        limit: largest ``n`` covered.
        mobius: int8 array, ``mu(n)``.
        von_mangoldt: float64 array, ``Lambda(n)``.
        divisor_count: int64 array, ``tau(n)``.
        is_prime: bool array.
        primes: int64 array of all primes ``<= limit``.
    """

    limit: int
    mobius: np.ndarray
    von_mangoldt: np.ndarray
    divisor_count: np.ndarray
    is_prime: np.ndarray
    primes: np.ndarray = field(repr=False)

    def interval(self, name: str, N: int | None = None) -> np.ndarray:
        """Values ``f(1..N)`` of a table as an interval signal."""
        N = self.limit if N is None else N
        if N > self.limit:
            raise ValueError(f"N={N} exceeds table limit {self.limit}")
        return np.asarray(getattr(self, name)[1 : N + 1], dtype=float)


def prime_sieve(limit: int) -> np.ndarray:
    """Boolean primality table on ``0..limit`` (Eratosthenes)."""
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return is_prime


def build_tables(N: int, max_limit: int = MAX_LIMIT) -> ArithTables:
    """Sieve mu, Lambda, tau and primality up to ``N``.

    Every update is a strided slice over multiples of a prime power, so the
    total work is O(N log log N) array operations.
    """
    N = int(N)
    if N < 2:
        raise ValueError("N must be at least 2")
    if N > max_limit:
        raise CapacityError(f"N={N} exceeds the table budget {max_limit}")

    is_prime = prime_sieve(N)
    primes = np.flatnonzero(is_prime).astype(np.int64)

    mobius = np.ones(N + 1, dtype=np.int8)
    mobius[0] = 0
    von_mangoldt = np.zeros(N + 1, dtype=np.float64)
    tau = np.ones(N + 1, dtype=np.int64)
    tau[0] = 0

    for p in primes.tolist():
        mobius[p::p] *= -1
        logp = math.log(p)
        tau[p::p] *= 2
        pk, k = p, 1
        while pk <= N:
            von_mangoldt[pk] = logp
            if k >= 2:
                # entries divisible by p^k currently carry a factor k from p
                tau[pk::pk] = tau[pk::pk] // k * (k + 1)
            if pk > N // p:
                break
            pk *= p
            k += 1
        if p * p <= N:
            mobius[p * p :: p * p] = 0

    return ArithTables(
        limit=N,
        mobius=mobius,
        von_mangoldt=von_mangoldt,
        divisor_count=tau,
        is_prime=is_prime,
        primes=primes,
    )


def primes_below(Q: float) -> list[int]:
    """Primes ``p < Q``."""
    if Q <= 2:
        return []
    bound = math.ceil(Q) - 1
    sieve = prime_sieve(max(bound, 1))
    return [p for p in np.flatnonzero(sieve).tolist() if p < Q]


def sieve_ratio(Q: float) -> float:
    """``P(Q)/phi(P(Q)) = prod_{p<Q} (1 - 1/p)^{-1}`` as a float product."""
    ratio = 1.0
    for p in primes_below(Q):
        ratio /= 1.0 - 1.0 / p
    return ratio


def coprime_to_primorial(limit: int, Q: float) -> np.ndarray:
    """Mask of ``n <= limit`` with no prime factor below ``Q`` (index 0 False)."""
    mask = np.ones(limit + 1, dtype=bool)
    mask[0] = False
    for p in primes_below(Q):
        mask[::p] = False
    return mask


def lambda_q_table(tables: ArithTables, Q: float) -> np.ndarray:
    """Table of ``Lambda_Q`` on ``0..N``."""
    if Q < 2 or Q > tables.limit:
        raise ValueError(f"Q must lie in [2, N]; got {Q}")
    mask = coprime_to_primorial(tables.limit, Q)
    return np.where(mask, sieve_ratio(Q), 0.0)


# --- real characters -------------------------------------------------------


def _is_squarefree(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def fundamental_discriminant(q: int) -> int:
    """Fundamental discriminant ``D`` with ``|D| = q``.

    Odd squarefree ``q`` maps to ``q`` or ``-q`` (whichever is 1 mod 4);
    ``q = 4m`` with ``m`` odd squarefree maps to ``4m'`` with
    ``m' = +-m = 3 mod 4``; ``q = 8m`` uses ``D = 8m`` when ``m = 1 mod 4``
    and ``D = -8m`` otherwise. ``q = 1`` gives the trivial character.
    """
    q = int(q)
    if q < 1:
        raise UnsupportedModulusError("modulus must be positive")
    if q == 1:
        return 1
    if q % 2 == 1:
        if not _is_squarefree(q):
            raise UnsupportedModulusError(f"no real primitive character mod {q}")
        return q if q % 4 == 1 else -q
    if q % 16 == 0:
        raise UnsupportedModulusError(f"no real primitive character mod {q}")
    if q % 8 == 0:
        m = q // 8
        if m % 2 == 0 or not _is_squarefree(m):
            raise UnsupportedModulusError(f"no real primitive character mod {q}")
        return 8 * m if m % 4 == 1 else -8 * m
    if q % 4 == 0:
        m = q // 4
        if not _is_squarefree(m):
            raise UnsupportedModulusError(f"no real primitive character mod {q}")
        return 4 * m if m % 4 == 3 else -4 * m
    raise UnsupportedModulusError(f"no real primitive character mod {q}")


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol ``(D | n)`` for ``n >= 1``."""
    if n <= 0:
        raise ValueError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    # Jacobi symbol (D | n) for odd n
    a = D % n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@dataclass(frozen=True)
class RealCharacter:
    """The character ``n -> (D | n)`` of period ``|D|``."""

    discriminant: int
    period_values: np.ndarray = field(repr=False)

    @property
    def modulus(self) -> int:
        return abs(self.discriminant)

    def __call__(self, n):
        n = np.asarray(n, dtype=np.int64)
        return self.period_values[np.mod(n, self.modulus)]

    def table(self, limit: int) -> np.ndarray:
        """Values on ``0..limit``."""
        return self(np.arange(limit + 1))


def real_character(q: int) -> RealCharacter:
    """Real primitive character of conductor ``q`` (Kronecker symbol)."""
    D = fundamental_discriminant(q)
    period = abs(D)
    values = np.zeros(period, dtype=np.int8)
    for n in range(period):
        values[n] = kronecker(D, n) if n > 0 else (1 if period == 1 else 0)
    return RealCharacter(D, values)


@dataclass(frozen=True)
class SiegelData:
    """A modelled exceptional zero ``beta`` of a real character.

    With ``present=False`` (the default) no zero is modelled: downstream
    ``Lambda_Siegel`` equals ``Lambda_Q`` and ``mu_Siegel`` vanishes.
    """

    Q: float
    conductor: int = 1
    beta: float = 1.0
    present: bool = False
    chi: RealCharacter | None = None

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1]; got {self.beta}")
        if self.chi is None:
            object.__setattr__(self, "chi", real_character(self.conductor))


def lambda_siegel_table(tables: ArithTables, s: SiegelData) -> np.ndarray:
    lam_q = lambda_q_table(tables, s.Q)
    if not s.present:
        return lam_q
    n = np.arange(tables.limit + 1, dtype=float)
    n[0] = 1.0
    chi = s.chi.table(tables.limit).astype(float)
    out = lam_q * (1.0 - n ** (s.beta - 1.0) * chi)
    out[0] = 0.0
    return out


def mu_siegel_table(tables: ArithTables, s: SiegelData, alpha: float) -> np.ndarray:
    """Dirichlet convolution defining ``mu_Siegel`` on ``0..N``.

    ``alpha`` is an input: it involves ``L'(beta, chi)``, which is not
    computed here.
    """
    N = tables.limit
    out = np.zeros(N + 1, dtype=float)
    if not s.present:
        return out
    m = np.arange(N + 1, dtype=float)
    m[0] = 1.0
    g = alpha * m ** (s.beta - 1.0) * s.chi.table(N).astype(float)
    g *= coprime_to_primorial(N, s.Q)
    g[0] = 0.0
    for d, mu_d in _squarefree_smooth(primes_below(s.Q), N):
        out[d::d] += mu_d * g[1 : N // d + 1]
    return out


def _squarefree_smooth(primes: list[int], limit: int):
    """Yield ``(d, mu(d))`` for squarefree ``d <= limit`` built from ``primes``."""
    stack = [(1, 1, 0)]
    while stack:
        d, sign, start = stack.pop()
        yield d, sign
        for i in range(start, len(primes)):
            nd = d * primes[i]
            if nd > limit:
                break
            stack.append((nd, -sign, i + 1))


def export_csv(
    path,
    tables: ArithTables,
    Q: float,
    siegel: SiegelData | None = None,
) -> None:
    """Write ``n,mu,lambda,tau,lambda_q,lambda_siegel`` rows for n = 1..N."""
    siegel = siegel or SiegelData(Q=Q)
    lam_q = lambda_q_table(tables, Q)
    lam_s = lambda_siegel_table(tables, siegel)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "mu", "lambda", "tau", "lambda_q", "lambda_siegel"])
        for n in range(1, tables.limit + 1):
            writer.writerow(
                [
                    n,
                    int(tables.mobius[n]),
                    fmt(tables.von_mangoldt[n]),
                    int(tables.divisor_count[n]),
                    fmt(lam_q[n]),
                    fmt(lam_s[n]),
                ]
            )


def fmt(x: float) -> str:
    """Floats are written with 12 significant digits everywhere."""
    return f"{float(x):.12g}"

