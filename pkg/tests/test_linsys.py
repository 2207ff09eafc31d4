import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from quadfourier.arith import build_tables
from quadfourier.linsys import (
    LinearSystem,
    Polytope,
    beta_infinity,
    beta_infinity_exact,
    count_operator,
    four_ap_experiment,
    four_ap_sum,
    four_ap_system,
    local_factor,
    local_factor_exact,
    polygon_area,
    singular_series,
    w_trick,
)


@pytest.fixture(scope="module")
def tables():
    return build_tables(10**6)


def _brute_local_factor(rows, consts, q):
    # pure-python enumeration of (Z/qZ)^d
    phi = sum(1 for x in range(q) if math.gcd(x, q) == 1)
    d = len(rows[0])
    good = 0
    for v in itertools.product(range(q), repeat=d):
        if all(math.gcd(sum(a * x for a, x in zip(r, v)) + c, q) == 1 for r, c in zip(rows, consts)):
            good += 1
    return Fraction(good * q ** len(rows), phi ** len(rows) * q**d)


# --- systems ----------------------------------------------------------------------


def test_system_validation_and_size():
    with pytest.raises(ValueError):
        LinearSystem(((1, 0), (1, 0)), (0, 5))
    with pytest.raises(ValueError):
        LinearSystem(((1, 0), (1,)), (0, 0))
    P = LinearSystem(((1, 2), (3, -1)), (4, -6))
    assert P.size(10) == pytest.approx(1 + 2 + 3 + 1 + 0.4 + 0.6)
    assert LinearSystem.from_json(P.to_json()) == P
    with pytest.raises(ValueError):
        LinearSystem.from_json('{"matrix": [[1]], "bogus": 1}')


# --- local factors -------------------------------------------------------------------


def test_four_ap_small_primes():
    P = four_ap_system()
    assert abs(local_factor(P, 2) - 4.0) <= 1e-12
    assert abs(local_factor(P, 3) - 1.125) <= 1e-12
    assert local_factor_exact(P, 2) == _brute_local_factor(P.matrix, P.constants, 2) == 4
    assert local_factor_exact(P, 3) == _brute_local_factor(P.matrix, P.constants, 3) == Fraction(9, 8)
    assert local_factor(P, 1) == 1.0


def test_four_ap_closed_form_large_primes():
    # the four forms are distinct lines through 0 in F_p^2 for p >= 5:
    # (p - 1)(p - 3) points avoid all of them
    P = four_ap_system()
    for p in [5, 7, 11, 13, 29, 97]:
        assert local_factor_exact(P, p) == Fraction(p * p * (p - 3), (p - 1) ** 3)


def test_local_factor_against_brute_force_random_systems():
    rng = np.random.default_rng(0)
    for _ in range(15):
        k, d = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        rows = set()
        while len(rows) < k:
            rows.add(tuple(int(x) for x in rng.integers(-3, 4, size=d)))
        rows = tuple(sorted(rows))
        consts = tuple(int(x) for x in rng.integers(-5, 6, size=k))
        P = LinearSystem(rows, consts)
        for q in (2, 4, 6, 9, 10):
            assert local_factor_exact(P, q) == _brute_local_factor(rows, consts, q)


def test_local_factor_multiplicative():
    P = four_ap_system()
    for p, q in [(2, 3), (2, 5), (3, 5), (2, 7), (5, 7), (3, 7)]:
        assert abs(local_factor(P, p * q) - local_factor(P, p) * local_factor(P, q)) <= 1e-9


def test_local_factor_cap():
    with pytest.raises(ValueError):
        local_factor(LinearSystem(((1, 0, 0), (0, 1, 0)), (0, 0)), 500)


def test_singular_series_trivial_and_four_ap():
    triv = singular_series(LinearSystem(((1,),), (0,)), 100, beta_inf=1.0)
    assert all(abs(b - 1) <= 1e-12 for b in triv.beta_p)
    s = singular_series(four_ap_system(), 100, beta_inf=1.0)
    assert s.primes[:2] == [2, 3]
    assert s.beta_p[0] * s.beta_p[1] == pytest.approx(4.5, abs=1e-12)
    assert s.product == pytest.approx(math.prod(s.beta_p), rel=1e-12)
    # |beta_p - 1| <= C / p^2 for p >= 5; exact value p^2 |beta_p - 1| -> 3 from above
    defects = [p * p * abs(b - 1) for p, b in zip(s.primes, s.beta_p) if p >= 5]
    assert max(defects) <= 8.0
    assert s.decay_constant <= 4.0


# --- archimedean factor -----------------------------------------------------------------


def test_beta_infinity_full_box():
    P = LinearSystem(((1, 0), (0, 1)), (5, 5))
    v, se = beta_infinity(P, Polytope.box([0, 0], [1, 1]), 10_000, seed=1, N=1)
    assert (v, se) == (1.0, 0.0)


def test_beta_infinity_four_ap_against_area():
    P = four_ap_system()
    unit = Polytope.box([0, 0], [1, 1])
    exact = beta_infinity_exact(P, unit, range_condition=True)
    assert exact == pytest.approx(1 / 6, abs=1e-15)
    v, se = beta_infinity(P, unit, 200_000, seed=2, range_condition=True)
    assert abs(v - exact) <= 3 * se


def test_beta_infinity_region_is_full():
    # on the region {x + 3y <= 1} itself every form is positive and at most 1
    P = four_ap_system()
    region = Polytope.box([0, 0], [1, 1]).with_constraint([1, 3], 1.0)
    assert polygon_area(region) == pytest.approx(1 / 6, abs=1e-15)
    assert beta_infinity_exact(P, region, range_condition=True) == pytest.approx(1.0)


def test_beta_infinity_rejects_zero_samples():
    with pytest.raises(ValueError):
        beta_infinity(four_ap_system(), Polytope.box([0, 0], [1, 1]), 0)


def test_polygon_area_triangle_and_empty():
    tri = Polytope.box([0, 0], [2, 2]).with_constraint([1, 1], 2.0)
    assert polygon_area(tri) == pytest.approx(2.0)
    empty = Polytope.box([0, 0], [1, 1]).with_constraint([1, 1], -1.0)
    assert polygon_area(empty) == 0.0


# --- counting operator --------------------------------------------------------------------


def test_count_operator_ones():
    for P in [four_ap_system(), LinearSystem(((1, 1, 1), (2, 0, 1)), (0, 3))]:
        N = 12
        fs = [np.ones(20 * N)] * P.k
        assert count_operator(P, N, fs) == pytest.approx(1.0, abs=1e-15)
        K = Polytope.box([1] * P.d, [N] * P.d).with_constraint([1] * P.d, N)
        assert count_operator(P, N, fs, K) == pytest.approx(1.0, abs=1e-15)


def test_count_operator_matches_double_loop():
    N = 200
    lam = build_tables(4 * N).von_mangoldt
    P = four_ap_system()
    K = Polytope.box([1, 1], [N, N]).with_constraint([1, 3], N)
    total, count = 0.0, 0
    for x in range(1, N + 1):
        for y in range(1, N + 1):
            if x + 3 * y <= N:
                count += 1
                total += lam[x] * lam[x + y] * lam[x + 2 * y] * lam[x + 3 * y]
    assert count_operator(P, N, [lam] * 4, K) == pytest.approx(total / count, rel=1e-12)
    assert four_ap_sum(lam, N) == pytest.approx(total, rel=1e-12)


def test_count_operator_out_of_range_and_errors():
    P = LinearSystem(((1,),), (-5,))
    # values -4 .. 5 index the table directly; the four negative ones count as 0
    assert count_operator(P, 10, [np.ones(20)]) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        count_operator(LinearSystem(((1, 1, 1, 1),), (0,)), 3, [np.ones(20)])
    with pytest.raises(ValueError):
        count_operator(P, 10, [np.ones(20)], Polytope.box([20], [30]))


# --- W-trick -------------------------------------------------------------------------------


def test_w_trick_examples(tables):
    f = np.arange(1.0, 11.0)
    assert np.array_equal(w_trick(f, 1, 1), f[1:])
    lam = tables.interval("von_mangoldt", 10_000)
    out = w_trick(lam, 6, 1)
    assert len(out) == (10_000 - 1) // 6
    n = np.arange(1, len(out) + 1)
    assert np.allclose(out, tables.von_mangoldt[6 * n + 1] / 3, rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        w_trick(lam, 6, 3)


def test_w_trick_mass(tables):
    lam = tables.interval("von_mangoldt", 10_000)
    for W, b in [(6, 1), (6, 5), (30, 7), (210, 11)]:
        out = w_trick(lam, W, b)
        phi = sum(1 for x in range(W) if math.gcd(x, W) == 1)
        expected = phi / W * sum(lam[n - 1] for n in range(W + b, 10_001, W))
        assert np.sum(out) == pytest.approx(expected, rel=1e-12)


def test_w_trick_mean_near_one(tables):
    out = w_trick(tables.interval("von_mangoldt"), 6, 1)
    assert abs(out.mean() - 1) <= 0.1


# --- 4-AP experiment ---------------------------------------------------------------------


def test_four_ap_small_n():
    r = four_ap_experiment(1000, P_max=100)
    assert r.lhs > 0 and math.isfinite(r.lhs)
    assert r.beta_p[0] * r.beta_p[1] == pytest.approx(4.5)
    assert r.beta_inf == pytest.approx(1 / 6)


def test_four_ap_reverse_enumeration(tables):
    lam = np.asarray(tables.von_mangoldt[:20_001], dtype=float)
    assert four_ap_sum(lam, 20_000, reverse=True) == pytest.approx(four_ap_sum(lam, 20_000), rel=1e-12)


def _lambda(n):
    # trial division: log p when n = p^k, else 0
    for p in range(2, n + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return 0.0


def test_four_ap_sum_against_trial_division():
    N = 80
    lam = build_tables(4 * N).von_mangoldt
    direct = sum(
        _lambda(x) * _lambda(x + y) * _lambda(x + 2 * y) * _lambda(x + 3 * y)
        for x in range(1, N + 1)
        for y in range(1, N + 1)
        if x + 3 * y <= N
    )
    assert four_ap_sum(lam, N) == pytest.approx(direct, rel=1e-12)
    # 5, 11, 17, 23 and 2, 9, 16, 23 both contribute at N = 23
    assert four_ap_sum(lam, 23) > math.log(5) * math.log(11) * math.log(17) * math.log(23)


def test_signed_step_convention():
    lam = build_tables(2000).von_mangoldt
    assert four_ap_sum(lam, 2000, signed=True) == pytest.approx(2 * four_ap_sum(lam, 2000), rel=1e-12)
    a = four_ap_experiment(2000, P_max=50)
    b = four_ap_experiment(2000, P_max=50, signed=True)
    assert b.beta_inf == pytest.approx(a.beta_inf, abs=1e-15)
    assert b.lhs == pytest.approx(a.lhs, rel=1e-12)
