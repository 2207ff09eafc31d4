"""Type I / type II decompositions of the von Mangoldt and Moebius functions.

Vaughan's identity with cutoffs ``U, V`` (``a_{<=U}`` is ``a`` restricted to
``n <= U`` and ``*`` is Dirichlet convolution):

    Lambda = Lambda_{<=V} + mu_{<=U} * log - mu_{<=U} * Lambda_{<=V} * 1
             + (mu_{>U} * 1) * Lambda_{>V},
    mu     = mu_{<=U} + mu_{<=V} - mu_{<=U} * mu_{<=V} * 1
             + mu_{>U} * (mu_{>V} * 1).

The first terms form the stored head, the middle terms form a type I sum
``sum_{d <= UV} a_d 1_{d|n}`` (plus ``log n sum_{d <= U} mu(d) 1_{d|n}`` for
Lambda), and the last term is a type II sum ``sum_{dw = n} a_d b_w`` whose
coefficients vanish unless ``d, w > min(U, V)``.

Signals are interval signals: ``f[i]`` is the value at ``n = i + 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from quadfourier.arith import ArithTables, RealCharacter, fmt


@dataclass
class TypeISum:
    """``n -> sum_{d <= R} (a_d + b_d log n) 1_{d|n} twist(n/d)`` on ``n <= N'``.

    Attributes:
        R: cutoff; coefficient tables have length ``R + 1`` (index 0 unused).
        coefficients: ``a_d``.
        N_prime: range cap ``N'``.
        twist: optional real character applied to ``n/d``.
        log_coefficients: optional ``b_d`` (weight ``log n``), used by the
            Vaughan term ``mu_{<=U} * log``.
    """

    R: int
    coefficients: np.ndarray
    N_prime: int
    twist: RealCharacter | None = None
    log_coefficients: np.ndarray | None = None

    def _twist_values(self, count: int) -> np.ndarray:
        if self.twist is None:
            return np.ones(count)
        return self.twist(np.arange(1, count + 1)).astype(float)

    def evaluate(self) -> np.ndarray:
        """Values at ``n = 0..N'`` (entry 0 is 0)."""
        out = np.zeros(self.N_prime + 1)
        logs = np.log(np.maximum(np.arange(self.N_prime + 1), 1))
        tw = self._twist_values(self.N_prime)
        for d in range(1, min(self.R, self.N_prime) + 1):
            a = self.coefficients[d]
            b = 0.0 if self.log_coefficients is None else self.log_coefficients[d]
            if a == 0 and b == 0:
                continue
            k = self.N_prime // d
            out[d::d] += tw[:k] * (a + b * logs[d::d])
        return out

    def coefficient_bound_ratio(self, tables: ArithTables, k: int = 1) -> float:
        """``max_d |a_d| / (tau(d)^k max(1, log d))``."""
        d = np.arange(1, self.R + 1)
        denom = tables.divisor_count[d].astype(float) ** k * np.maximum(1.0, np.log(d))
        vals = np.abs(self.coefficients[1:])
        if self.log_coefficients is not None:
            vals = np.maximum(vals, np.abs(self.log_coefficients[1:]))
        return float(np.max(vals / denom)) if self.R else 0.0


@dataclass
class TypeIISum:
    """``n -> sum_{dw = n} a_d b_w`` on ``n <= N``; coefficient tables indexed from 0."""

    cutoff: int
    a: np.ndarray
    b: np.ndarray
    N: int

    def evaluate(self) -> np.ndarray:
        return _dirichlet(self.a, self.b, self.N)


@dataclass
class Decomposition:
    """``f(n) = head(n) + typeI(n) + typeII(n)`` for ``1 <= n <= N``."""

    function: str
    N: int
    U: int
    V: int
    type_i: TypeISum
    type_ii: TypeIISum
    remainder: dict = field(default_factory=dict)

    def reconstruct(self) -> np.ndarray:
        """Values at ``n = 0..N``."""
        total = self.type_i.evaluate() + self.type_ii.evaluate()
        for n, v in self.remainder.items():
            total[n] += v
        return total


def _dirichlet(a: np.ndarray, b: np.ndarray, limit: int) -> np.ndarray:
    """``(a * b)(n)`` for ``n = 0..limit``; arrays are indexed by ``n``."""
    out = np.zeros(limit + 1)
    nb = len(b) - 1
    for d in np.flatnonzero(a[: limit + 1]):
        if d == 0:
            continue
        k = min(limit // d, nb)
        if k:
            out[d : d * k + 1 : d] += a[d] * b[1 : k + 1]
    return out


def _restrict(values: np.ndarray, lo: int, hi: int, limit: int) -> np.ndarray:
    """Copy of ``values[0..limit]`` that is zero outside ``lo < n <= hi``."""
    out = np.zeros(limit + 1)
    hi = min(hi, limit)
    if hi > lo:
        out[lo + 1 : hi + 1] = values[lo + 1 : hi + 1]
    return out


def vaughan_decompose(tables: ArithTables, N: int, U: int, V: int, function: str = "von_mangoldt") -> Decomposition:
    """Split ``Lambda`` (or ``mu`` with ``function="mobius"``) on ``[1, N]``.

    Raises:
        ValueError: unless ``2 <= U, V``, ``U V <= N`` and ``N`` fits the tables.
    """
    if not (U >= 2 and V >= 2 and U * V <= N):
        raise ValueError(f"need 2 <= U, V and U V <= N (got U={U}, V={V}, N={N})")
    if N > tables.limit:
        raise ValueError(f"N={N} exceeds table limit {tables.limit}")
    R = U * V
    mu = tables.mobius[: N + 1].astype(float)
    ones = np.ones(N + 1)
    ones[0] = 0.0
    mu_lo_u = _restrict(mu, 0, U, N)
    mu_hi_u = mu - mu_lo_u

    if function == "von_mangoldt":
        lam = tables.von_mangoldt[: N + 1].astype(float)
        lam_lo = _restrict(lam, 0, V, N)
        logs = np.log(np.maximum(np.arange(N + 1), 1))
        # mu_{<=U} * log = sum_{d<=U} mu(d) (log n - log d) 1_{d|n}
        coeffs = np.zeros(R + 1)
        coeffs[: U + 1] = -mu_lo_u[: U + 1] * logs[: U + 1]
        coeffs -= _dirichlet(mu_lo_u, lam_lo, R)
        log_coeffs = np.zeros(R + 1)
        log_coeffs[: U + 1] = mu_lo_u[: U + 1]
        type_i = TypeISum(R, coeffs, N, log_coefficients=log_coeffs)
        type_ii = TypeIISum(min(U, V), lam - lam_lo, _dirichlet(mu_hi_u, ones, N), N)
        head = {n: float(lam[n]) for n in range(1, V + 1) if lam[n] != 0}
    elif function == "mobius":
        mu_lo_v = _restrict(mu, 0, V, N)
        coeffs = -_dirichlet(mu_lo_u, mu_lo_v, R)
        type_i = TypeISum(R, coeffs, N)
        type_ii = TypeIISum(min(U, V), mu_hi_u, _dirichlet(mu - mu_lo_v, ones, N), N)
        head_vals = mu_lo_u + mu_lo_v
        head = {n: float(head_vals[n]) for n in range(1, max(U, V) + 1) if head_vals[n] != 0}
    else:
        raise ValueError(f"unknown function {function!r}")
    return Decomposition(function, N, U, V, type_i, type_ii, head)


def reconstruction_defect(tables: ArithTables, decomposition: Decomposition) -> float:
    """``max_{V < n <= N} |reconstructed(n) - f(n)|``."""
    N, V = decomposition.N, decomposition.V
    target = getattr(tables, decomposition.function)[: N + 1].astype(float)
    diff = np.abs(decomposition.reconstruct() - target)
    return float(diff[V + 1 :].max()) if N > V else 0.0


def export_coefficients(path, t: TypeISum) -> None:
    """Write ``d,a_d`` rows (only nonzero coefficients)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["d", "a_d"])
        for d in np.flatnonzero(t.coefficients):
            writer.writerow([int(d), fmt(t.coefficients[d])])


# --- correlations -----------------------------------------------------------------


def type_i_correlate(f, t: TypeISum, weight: str | None = None) -> np.ndarray:
    """Entry ``d`` is ``sum_{n <= N', d | n} f(n) twist(n/d)`` (times ``log n`` with ``weight="log"``).

    Returns a complex array indexed by ``d = 0..R`` (entry 0 is 0).
    """
    f = np.asarray(f, dtype=complex)
    if len(f) < t.N_prime:
        raise ValueError(f"signal has length {len(f)} < N' = {t.N_prime}")
    vals = f[: t.N_prime].copy()
    if weight == "log":
        vals *= np.log(np.arange(1, t.N_prime + 1))
    elif weight is not None:
        raise ValueError(f"unknown weight {weight!r}")
    tw = t._twist_values(t.N_prime)
    out = np.zeros(t.R + 1, dtype=complex)
    for d in range(1, min(t.R, t.N_prime) + 1):
        k = t.N_prime // d
        out[d] = np.sum(vals[d - 1 :: d][:k] * tw[:k])
    return out


def type_i_total(f, t: TypeISum) -> complex:
    """``sum_{n <= N'} f(n) c(n)`` computed through the per-``d`` entries."""
    total = np.sum(t.coefficients * type_i_correlate(f, t))
    if t.log_coefficients is not None:
        total += np.sum(t.log_coefficients * type_i_correlate(f, t, weight="log"))
    return complex(total)


@dataclass(frozen=True)
class DyadicBlock:
    """The block ``lo <= d < hi`` with its score mass and witness count."""

    lo: int
    hi: int
    mass: float
    witnesses: int

    @property
    def D(self) -> int:
        """Upper end in the ``[D/2, D]`` convention."""
        return 2 * self.lo


def dyadic_pigeonhole(scores) -> DyadicBlock:
    """Dyadic block ``[2^j, 2^(j+1))`` (clipped to ``d <= R``) of largest total score.

    ``scores[d]`` is the score of ``d`` (index 0 ignored). Witnesses are the
    ``d`` in the block scoring at least half the block's mean. Ties go to
    the smaller block.

    Raises:
        ValueError: if there is no ``d >= 1``.
    """
    scores = np.asarray(scores, dtype=float)
    R = len(scores) - 1
    if R < 1:
        raise ValueError("empty score table")
    best = None
    lo = 1
    while lo <= R:
        hi = min(2 * lo, R + 1)
        mass = float(np.sum(scores[lo:hi]))
        if best is None or mass > best[2]:
            best = (lo, hi, mass)
        lo *= 2
    lo, hi, mass = best
    mean = mass / (hi - lo)
    witnesses = int(np.count_nonzero(scores[lo:hi] >= mean / 2))
    return DyadicBlock(lo, hi, mass, witnesses)


def _block(X: int) -> range:
    """Integers in ``[X/2, X]``."""
    return range((X + 1) // 2, X + 1)


def type_ii_correlate(f, D: int, W: int) -> complex:
    """``sum_{d,d' in [D/2,D]} sum_{w,w' in [W/2,W]} f(dw) conj(f(d'w) f(dw')) f(d'w')``.

    Computed as ``sum_{d,d'} |G(d,d')|^2`` with ``G(d,d') = sum_w f(dw) conj(f(d'w))``.

    Raises:
        ValueError: if ``D W`` exceeds the signal length.
    """
    f = np.asarray(f, dtype=complex)
    if D < 1 or W < 1 or D * W > len(f):
        raise ValueError(f"D W = {D * W} exceeds signal length {len(f)}")
    ds = np.array(_block(D))
    ws = np.array(_block(W))
    M = f[np.outer(ds, ws) - 1]
    # einsum without optimize does not dispatch to threaded BLAS, so the
    # reduction order does not depend on the thread count
    G = np.einsum("dw,ew->de", M, M.conj())
    return complex(np.sum(np.abs(G) ** 2))


def type_ii_naive(f, D: int, W: int) -> complex:
    """Literal quadruple loop, for testing."""
    f = np.asarray(f, dtype=complex)
    total = 0j
    for d in _block(D):
        for e in _block(D):
            for w in _block(W):
                for v in _block(W):
                    total += f[d * w - 1] * np.conj(f[e * w - 1]) * np.conj(f[d * v - 1]) * f[e * v - 1]
    return total


# --- audited pipeline ------------------------------------------------------------------


@dataclass
class PipelineStep:
    """One inequality ``lhs >= rhs`` of the chain."""

    name: str
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs * (1 - 1e-12) - 1e-12


@dataclass
class PipelineLog:
    steps: list
    block: DyadicBlock | None = None
    W: int | None = None
    quadrilinear: complex | None = None

    @property
    def ok(self) -> bool:
        return all(s.holds for s in self.steps)


def type_i_pipeline(f, t: TypeISum) -> PipelineLog:
    """Correlation with a type I sum, pushed down to a dyadic block of moduli.

    Steps: triangle inequality over ``d``, then Cauchy-Schwarz with weights
    ``1/d``, then dyadic pigeonholing of ``d |entry_d|^2``.
    """
    if t.log_coefficients is not None and np.any(t.log_coefficients):
        raise ValueError("pipeline needs a plain type I sum (no log weights)")
    entries = type_i_correlate(f, t)
    total = abs(complex(np.sum(t.coefficients * entries)))
    d = np.arange(t.R + 1)
    weighted = float(np.sum(np.abs(t.coefficients) * np.abs(entries)))
    moment = float(np.sum(t.coefficients[1:] ** 2 / d[1:]))
    scores = np.zeros(t.R + 1)
    scores[1:] = d[1:] * np.abs(entries[1:]) ** 2
    second = float(scores.sum())
    steps = [
        PipelineStep("triangle: sum_d |a_d||S_d| >= |sum f c|", weighted, total),
        PipelineStep("cauchy-schwarz: (sum |a_d|^2/d)(sum d|S_d|^2) >= (sum |a_d||S_d|)^2", moment * second, weighted**2),
    ]
    block = dyadic_pigeonhole(scores)
    n_blocks = math.floor(math.log2(t.R)) + 1
    steps.append(PipelineStep("pigeonhole: block mass >= total / #blocks", block.mass, second / n_blocks))
    return PipelineLog(steps, block)


def type_ii_pipeline(f, t: TypeIISum, delta: float) -> PipelineLog:
    """Correlation with a type II sum on ``[delta N, N]``, pushed down to a quadrilinear form.

    Steps: triangle inequality over ``d``, Cauchy-Schwarz with weights
    ``1/d``, dyadic pigeonholing in ``d`` then in ``w``; the final quadrilinear
    form at the chosen ``(D, W)`` is recorded.
    """
    f = np.asarray(f, dtype=complex)
    N = t.N
    lo_n = max(1, math.ceil(delta * N))
    values = t.evaluate()
    total = abs(complex(np.sum(f[lo_n - 1 : N] * values[lo_n : N + 1])))
    inner = np.zeros(N + 1, dtype=complex)
    nb = len(t.b) - 1
    for d in np.flatnonzero(t.a[: N + 1]):
        w_lo = max(1, math.ceil(lo_n / d))
        w_hi = min(N // d, nb)
        if w_hi >= w_lo:
            w = np.arange(w_lo, w_hi + 1)
            inner[d] = np.sum(t.b[w] * f[d * w - 1])
    d = np.arange(N + 1)
    weighted = float(np.sum(np.abs(t.a[: N + 1]) * np.abs(inner)))
    moment = float(np.sum(t.a[1 : N + 1] ** 2 / d[1:]))
    scores = np.zeros(N + 1)
    scores[1:] = d[1:] * np.abs(inner[1:]) ** 2
    second = float(scores.sum())
    steps = [
        PipelineStep("triangle: sum_d |a_d||T_d| >= |sum f c|", weighted, total),
        PipelineStep("cauchy-schwarz: (sum |a_d|^2/d)(sum d|T_d|^2) >= (sum |a_d||T_d|)^2", moment * second, weighted**2),
    ]
    block = dyadic_pigeonhole(scores)
    D = min(block.D, N)
    best_W, best_mass = 1, -1.0
    W = 1
    while D * W <= N:
        mass = 0.0
        for dd in _block(D):
            ws = np.array([w for w in _block(W) if dd * w <= N])
            if ws.size:
                mass += abs(np.sum(f[dd * ws - 1])) ** 2
        if mass > best_mass:
            best_W, best_mass = W, mass
        W *= 2
    quad = type_ii_correlate(f, D, best_W) if D * best_W <= len(f) else None
    return PipelineLog(steps, block, best_W, quad)
