"""Affine linear systems, counting operators, local factors and the 4-AP experiment.

A system ``Psi = (psi_1..psi_k)`` maps ``v in Z^d`` to ``psi_i(v) = row_i . v + c_i``.
The singular series is ``beta_inf * prod_p beta_p`` with

* ``beta_q``: average over ``v in (Z/qZ)^d`` of ``prod_i Lambda_q(psi_i(v))``,
  where ``Lambda_q(x) = q/phi(q)`` if ``gcd(x, q) = 1`` and ``0`` otherwise;
* ``beta_inf``: the fraction of a (unit-scaled) region ``K`` on which the
  forms are positive, and with ``range_condition`` also at most 1, so that
  "``psi_i(v) in [N]``" becomes a volume after dividing by ``N``.

Interval signals are indexed from 1: ``f[i]`` is the value at ``n = i + 1``.
Weight tables for :func:`count_operator` are indexed directly by ``n``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from quadfourier.arith import ArithTables, build_tables, primes_below

log = logging.getLogger(__name__)

LOCAL_FACTOR_CAP = 10**8
MAX_DIMENSION = 3
P_MAX_CAP = 1000
_GRID_BLOCK = 1 << 21


@dataclass(frozen=True)
class LinearSystem:
    """``k`` affine-linear forms in ``d`` variables.

    Raises:
        ValueError: if two forms have the same linear part (they would differ
            by a constant), or the shapes disagree.
    """

    matrix: tuple
    constants: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.matrix)
        consts = tuple(int(c) for c in self.constants)
        if not rows or len(rows) != len(consts) or len({len(r) for r in rows}) != 1:
            raise ValueError("matrix must be k x d with k constants")
        if len(set(rows)) != len(rows):
            raise ValueError("two forms differ by a constant")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "constants", consts)

    @property
    def k(self) -> int:
        return len(self.matrix)

    @property
    def d(self) -> int:
        return len(self.matrix[0])

    def size(self, N: int) -> float:
        """``||Psi||_N = sum |psi_i(e_j) - psi_i(0)| + sum |psi_i(0)| / N``."""
        return float(sum(abs(x) for r in self.matrix for x in r) + sum(abs(c) for c in self.constants) / N)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Form values, shape ``(m, k)``, for integer points of shape ``(m, d)``."""
        A = np.array(self.matrix, dtype=np.int64)
        return np.asarray(points, dtype=np.int64) @ A.T + np.array(self.constants, dtype=np.int64)

    def to_json(self) -> str:
        return json.dumps({"matrix": [list(r) for r in self.matrix], "constants": list(self.constants)})

    @classmethod
    def from_json(cls, text: str) -> "LinearSystem":
        data = json.loads(text)
        unknown = set(data) - {"matrix", "constants"}
        if unknown:
            raise ValueError(f"unknown keys {sorted(unknown)}")
        matrix = data["matrix"]
        return cls(tuple(map(tuple, matrix)), tuple(data.get("constants", [0] * len(matrix))))


def four_ap_system() -> LinearSystem:
    """``(x, x + y, x + 2y, x + 3y)``."""
    return LinearSystem(((1, 0), (1, 1), (1, 2), (1, 3)), (0, 0, 0, 0))


@dataclass(frozen=True)
class Polytope:
    """``{v : A v <= b}`` with a bounding box ``[lows, highs]``."""

    A: tuple
    b: tuple
    lows: tuple
    highs: tuple

    @classmethod
    def box(cls, lows, highs) -> "Polytope":
        return cls((), (), tuple(float(x) for x in lows), tuple(float(x) for x in highs))

    def with_constraint(self, a, bound) -> "Polytope":
        return Polytope(self.A + (tuple(float(x) for x in a),), self.b + (float(bound),), self.lows, self.highs)

    @property
    def d(self) -> int:
        return len(self.lows)

    def contains(self, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.d)
        inside = np.all((points >= np.array(self.lows) - tol) & (points <= np.array(self.highs) + tol), axis=1)
        for a, bound in zip(self.A, self.b):
            inside &= points @ np.array(a) <= bound + tol
        return inside

    def halfplanes(self) -> list[tuple[np.ndarray, float]]:
        """All constraints (box included) as ``a . v <= b``."""
        out = []
        for j in range(self.d):
            e = np.zeros(self.d)
            e[j] = 1.0
            out.append((e, self.highs[j]))
            out.append((-e, -self.lows[j]))
        out.extend((np.array(a), bound) for a, bound in zip(self.A, self.b))
        return out


# --- counting operator ----------------------------------------------------------------


def count_operator(Psi: LinearSystem, N: int, fs, K: Polytope | None = None) -> float:
    """``E_{v in [N]^d cap K} prod_i f_i(psi_i(v))``.

    ``fs[i]`` is a table indexed by the form value; values outside a table
    count as 0 (the number of such terms is logged).

    Raises:
        ValueError: for ``d > 3``, a wrong number of tables, or empty ``[N]^d cap K``.
    """
    if Psi.d > MAX_DIMENSION:
        raise ValueError(f"dimension {Psi.d} exceeds {MAX_DIMENSION}")
    if len(fs) != Psi.k:
        raise ValueError("need one weight table per form")
    tables = [np.asarray(f) for f in fs]
    A = np.array(Psi.matrix, dtype=np.int64)
    c = np.array(Psi.constants, dtype=np.int64)
    last = np.arange(1, N + 1, dtype=np.int64)
    total, count, outside = 0.0, 0, 0
    for outer in product(range(1, N + 1), repeat=Psi.d - 1):
        pts = np.empty((N, Psi.d), dtype=np.int64)
        pts[:, :-1] = outer
        pts[:, -1] = last
        if K is not None:
            pts = pts[K.contains(pts)]
            if not len(pts):
                continue
        vals = pts @ A.T + c
        term = np.ones(len(pts))
        for i, table in enumerate(tables):
            v = vals[:, i]
            ok = (v >= 0) & (v < len(table))
            outside += int(np.count_nonzero(~ok))
            term *= np.where(ok, table[np.clip(v, 0, len(table) - 1)], 0.0)
        total += float(np.sum(term))
        count += len(pts)
    if count == 0:
        raise ValueError("[N]^d cap K is empty")
    if outside:
        log.info("count_operator: %d form values outside their weight tables were treated as 0", outside)
    return total / count


# --- local factors -------------------------------------------------------------------


def _totient(q: int) -> int:
    result, m, p = q, q, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def local_factor_exact(Psi: LinearSystem, q: int) -> Fraction:
    """``beta_q`` as an exact rational, by enumerating ``(Z/qZ)^d``.

    Raises:
        ValueError: if ``q^d`` exceeds the enumeration cap.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if q**Psi.d > LOCAL_FACTOR_CAP:
        raise ValueError(f"q^d = {q ** Psi.d} exceeds {LOCAL_FACTOR_CAP}")
    if q == 1:
        return Fraction(1)
    A = np.array(Psi.matrix, dtype=np.int64) % q
    c = np.array(Psi.constants, dtype=np.int64) % q
    coprime = np.gcd(np.arange(q), q) == 1
    residues = np.arange(q, dtype=np.int64)
    good = 0
    if q**Psi.d <= _GRID_BLOCK:
        grid = np.indices((q,) * Psi.d).reshape(Psi.d, -1).T
        vals = (grid @ A.T + c) % q
        good = int(np.count_nonzero(np.all(coprime[vals], axis=1)))
        return Fraction(good * q**Psi.k, _totient(q) ** Psi.k * q**Psi.d)
    # enumerate all but the last coordinate, vectorize the last
    for outer in product(range(q), repeat=Psi.d - 1):
        partial = (A[:, :-1] @ np.array(outer, dtype=np.int64) if Psi.d > 1 else 0) + c
        vals = (partial[None, :] + residues[:, None] * A[:, -1][None, :]) % q
        good += int(np.count_nonzero(np.all(coprime[vals], axis=1)))
    phi = _totient(q)
    return Fraction(good * q**Psi.k, phi**Psi.k * q**Psi.d)


def local_factor(Psi: LinearSystem, q: int) -> float:
    """``beta_q`` in floating point (see :func:`local_factor_exact`)."""
    return float(local_factor_exact(Psi, q))


# --- archimedean factor ---------------------------------------------------------------


def _positivity_polytope(Psi: LinearSystem, K: Polytope, N: float | None, range_condition: bool) -> Polytope:
    """``K`` intersected with ``psi_i > 0`` (and ``psi_i <= 1``) in unit-scaled coordinates."""
    P = K
    scale = 0.0 if N is None else 1.0 / N
    for row, c in zip(Psi.matrix, Psi.constants):
        # row . u + c/N > 0  <=>  -row . u <= c/N
        P = P.with_constraint([-x for x in row], c * scale)
        if range_condition:
            P = P.with_constraint(row, 1.0 - c * scale)
    return P


def _positive_mask(Psi: LinearSystem, u: np.ndarray, N: float | None, range_condition: bool) -> np.ndarray:
    A = np.array(Psi.matrix, dtype=float)
    shift = 0.0 if N is None else np.array(Psi.constants, dtype=float) / N
    vals = u @ A.T + shift
    ok = np.all(vals > 0, axis=1)
    if range_condition:
        ok &= np.all(vals <= 1, axis=1)
    return ok


def beta_infinity(
    Psi: LinearSystem,
    K: Polytope,
    samples: int,
    seed: int = 0,
    N: float | None = None,
    range_condition: bool = False,
) -> tuple[float, float]:
    """Monte Carlo ``vol(K cap {psi > 0}) / vol(K)`` and its standard error.

    ``K`` is given in unit-scaled coordinates (``v / N``); constants enter as
    ``c_i / N`` when ``N`` is given and are dropped otherwise.

    Raises:
        ValueError: if ``samples < 1`` or no sample lands in ``K``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if Psi.d > MAX_DIMENSION or K.d != Psi.d:
        raise ValueError("dimension mismatch or above 3")
    rng = np.random.default_rng(seed)
    lows, highs = np.array(K.lows), np.array(K.highs)
    u = lows + (highs - lows) * rng.random((samples, Psi.d))
    inside = K.contains(u)
    n_in = int(np.count_nonzero(inside))
    if n_in == 0:
        raise ValueError("no sample landed in K")
    hits = int(np.count_nonzero(_positive_mask(Psi, u[inside], N, range_condition)))
    p = hits / n_in
    return p, math.sqrt(p * (1 - p) / n_in)


def _clip(poly: list[np.ndarray], a: np.ndarray, bound: float) -> list[np.ndarray]:
    """Sutherland-Hodgman clip of a convex polygon by ``a . v <= bound``."""
    out = []
    n = len(poly)
    for i in range(n):
        cur, nxt = poly[i], poly[(i + 1) % n]
        fc, fn = a @ cur - bound, a @ nxt - bound
        if fc <= 0:
            out.append(cur)
        if (fc < 0 < fn) or (fn < 0 < fc):
            t = fc / (fc - fn)
            out.append(cur + t * (nxt - cur))
    return out


def polygon_area(K: Polytope) -> float:
    """Exact area (up to rounding) of a 2-d polytope by half-plane clipping."""
    if K.d != 2:
        raise ValueError("polygon_area needs d = 2")
    (x0, y0), (x1, y1) = K.lows, K.highs
    poly = [np.array(p, dtype=float) for p in ((x0, y0), (x1, y0), (x1, y1), (x0, y1))]
    for a, bound in zip(K.A, K.b):
        poly = _clip(poly, np.array(a), bound)
        if len(poly) < 3:
            return 0.0
    xs = np.array([p[0] for p in poly])
    ys = np.array([p[1] for p in poly])
    return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))


def beta_infinity_exact(Psi: LinearSystem, K: Polytope, N: float | None = None, range_condition: bool = False) -> float:
    """Exact ``vol(K cap {psi > 0}) / vol(K)`` for ``d = 2``. Strict versus weak
    inequalities do not change a volume."""
    return polygon_area(_positivity_polytope(Psi, K, N, range_condition)) / polygon_area(K)


# --- singular series -------------------------------------------------------------------


@dataclass
class SingularSeries:
    """Truncated singular series ``beta_inf prod_{p <= P_max} beta_p``."""

    primes: list
    beta_p: list
    beta_inf: float
    beta_inf_se: float
    product: float
    decay_constant: float = 0.0
    tail_estimate: float = 0.0
    log: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "primes": self.primes,
            "beta_p": self.beta_p,
            "beta_inf": self.beta_inf,
            "beta_inf_se": self.beta_inf_se,
            "series": self.product,
            "decay_constant": self.decay_constant,
            "tail_estimate": self.tail_estimate,
        }


def singular_series(
    Psi: LinearSystem,
    P_max: int,
    K: Polytope | None = None,
    samples: int = 100_000,
    seed: int = 0,
    beta_inf: float | None = None,
    range_condition: bool = False,
) -> SingularSeries:
    """Local factors for primes ``p <= P_max`` times ``beta_inf``.

    ``beta_inf`` is taken as given (standard error 0) when supplied, else
    estimated by :func:`beta_infinity` on ``K`` (default the unit box).
    The decay of ``|beta_p - 1|`` is summarized by
    ``C = max_{p > sqrt(P_max)} p^2 |beta_p - 1|``, and the tail beyond
    ``P_max`` is estimated as ``C / (P_max log P_max)``.
    """
    if P_max > P_MAX_CAP:
        raise ValueError(f"P_max {P_max} exceeds {P_MAX_CAP}")
    primes = primes_below(P_max + 1)
    betas = [local_factor(Psi, p) for p in primes]
    if beta_inf is None:
        K = K or Polytope.box([0.0] * Psi.d, [1.0] * Psi.d)
        value, se = beta_infinity(Psi, K, samples, seed, range_condition=range_condition)
    else:
        value, se = float(beta_inf), 0.0
    prod = value * math.prod(betas)
    upper = [(p, b) for p, b in zip(primes, betas) if p > math.isqrt(P_max)]
    decay = max((p * p * abs(b - 1) for p, b in upper), default=0.0)
    tail = decay / (P_max * math.log(P_max)) if P_max > 1 else 0.0
    entries = [{"p": p, "beta_p": b, "p2_defect": p * p * abs(b - 1)} for p, b in zip(primes, betas)]
    return SingularSeries(list(primes), betas, value, se, prod, decay, tail, entries)


# --- W-trick -----------------------------------------------------------------------------


def w_trick(f, W: int, b: int) -> np.ndarray:
    """``f_{W,b}(n) = phi(W)/W f(W n + b)`` for ``n = 1..floor((N - b)/W)``.

    Raises:
        ValueError: if ``gcd(b, W) != 1``.
    """
    if math.gcd(b, W) != 1:
        raise ValueError(f"b={b} is not coprime to W={W}")
    f = np.asarray(f)
    N = len(f)
    length = max(0, (N - b) // W)
    idx = W * np.arange(1, length + 1) + b - 1
    return (_totient(W) / W) * f[idx]


# --- 4-AP experiment ------------------------------------------------------------------


def four_ap_sum(lam: np.ndarray, N: int, reverse: bool = False, signed: bool = False) -> float:
    """``sum_{x, y >= 1, x + 3y <= N} Lambda(x)Lambda(x+y)Lambda(x+2y)Lambda(x+3y)``.

    ``lam`` is indexed by ``n``. With ``reverse`` the same progressions are
    enumerated from their top term with step ``-y``. With ``signed`` the step
    ranges over nonzero ``y`` in ``[-N, N]`` with every term in ``[N]``, so each
    progression is counted once in each direction.
    """
    if signed:
        return four_ap_sum(lam, N) + four_ap_sum(lam, N, reverse=True)
    total = 0.0
    starts = np.flatnonzero(lam[1 : N + 1]) + 1
    if reverse:
        for z in starts[::-1]:
            y = np.arange(1, (z - 1) // 3 + 1)
            if y.size:
                total += lam[z] * float(np.sum(lam[z - y] * lam[z - 2 * y] * lam[z - 3 * y]))
        return total
    for x in starts:
        y = np.arange(1, (N - x) // 3 + 1)
        if y.size:
            total += lam[x] * float(np.sum(lam[x + y] * lam[x + 2 * y] * lam[x + 3 * y]))
    return total


@dataclass
class FourAPReport:
    N: int
    lhs: float
    series: float
    beta_p: list
    beta_inf: float
    gap: float
    tail_estimate: float

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "lhs": self.lhs,
            "series": self.series,
            "beta_p": self.beta_p,
            "beta_inf": self.beta_inf,
            "gap": self.gap,
            "tail_estimate": self.tail_estimate,
        }


def four_ap_experiment(
    N: int, P_max: int = 1000, tables: ArithTables | None = None, signed: bool = False
) -> FourAPReport:
    """Compare ``N^-2 sum_{x,y in [N], x+3y in [N]} prod Lambda`` with the singular series.

    ``beta_inf = vol{(x, y) in [0,1]^2 : x + 3y <= 1} = 1/6`` is computed exactly
    by polygon clipping; the gap is ``|lhs / series - 1|``. With ``signed`` the
    step ranges over ``[-N, N]``, the average is over ``2 N^2`` pairs and the
    box for ``beta_inf`` is ``[0,1] x [-1,1]``.
    """
    if N > 10**5:
        raise ValueError("N above 10^5")
    tables = tables if tables is not None and tables.limit >= N else build_tables(N)
    lam = np.asarray(tables.von_mangoldt[: N + 1], dtype=float)
    Psi = four_ap_system()
    unit = Polytope.box([0.0, -1.0 if signed else 0.0], [1.0, 1.0])
    b_inf = beta_infinity_exact(Psi, unit, range_condition=True)
    series = singular_series(Psi, P_max, beta_inf=b_inf)
    lhs = four_ap_sum(lam, N, signed=signed) / ((2 if signed else 1) * N**2)
    gap = abs(lhs / series.product - 1.0)
    return FourAPReport(N, lhs, series.product, series.beta_p, b_inf, gap, series.tail_estimate)
