import json
from fractions import Fraction

import numpy as np
import pytest

from quadfourier.quadratic import (
    AdmissibilityError,
    LemmaReport,
    bilinearity_defect,
    make_corrupted_form,
    make_global_quadratic,
    make_lifted_quadratic,
    philemma_suite,
    polarization_suite,
    quartic_suite,
    second_derivative,
    third_derivative_defect,
    verify_philemma,
    verify_polarization,
    verify_quartic,
)


def _dist(x):
    x = x % 1.0
    return min(x, 1.0 - x)


def test_global_second_derivative_examples():
    phi = make_global_quadratic(10, [1], 0.49, 1, 0)
    assert second_derivative(phi, 2, 3) == pytest.approx(0.2)
    phi3 = make_global_quadratic(10, [1], 0.49, 3, 0)
    assert second_derivative(phi3, 1, 1) == pytest.approx(0.6)
    assert second_derivative(phi3, 4, 0) == 0.0
    lin = make_global_quadratic(97, [1], 0.49, 0, 5, 0.3)
    assert all(_dist(second_derivative(lin, x, y)) <= 1e-12 for x in range(-20, 21) for y in (1, 7, 20))


def test_global_rejects_non_integer_coefficients():
    with pytest.raises(ValueError):
        make_global_quadratic(10, [1], 0.2, 0.5, 0)
    with pytest.raises(ValueError):
        make_global_quadratic(10, [1], 0.2, 1, 2.25)


def test_global_closed_form():
    rng = np.random.default_rng(0)
    N = 1009
    a, b = 123, 45
    phi = make_global_quadratic(N, [1, 17], 0.45, a, b, 0.1)
    dom = phi.domain.elements()
    for x, y in rng.choice(dom, size=(300, 2)):
        if not phi.domain.members[(x + y) % N]:
            continue
        assert _dist(second_derivative(phi, x, y) - 2 * a * x * y / N) <= 1e-10


def test_lifted_value_example():
    phi = make_lifted_quadratic(100, [1], 0.05, 0.25)
    assert phi(3) == pytest.approx(0.25)
    assert phi(97) == pytest.approx(0.25)


def test_lifted_closed_form_and_radius_check():
    N, theta = 10_000, 0.3183098861837907
    phi = make_lifted_quadratic(N, [1], 0.05, theta)
    for a, b in [(3, 7), (-40, 11), (200, -150)]:
        assert _dist(second_derivative(phi, a, b) - 2 * theta * a * b) <= 1e-10
    with pytest.raises(ValueError):
        make_lifted_quadratic(N, [1], 0.0625, theta)
    with pytest.raises(ValueError):
        make_lifted_quadratic(N, [3], 0.01, theta)


def test_lifted_is_not_globally_quadratic():
    # across the wraparound the lift breaks the third-difference identity
    N, theta = 101, 0.123456789
    phi = make_lifted_quadratic(N, [1], 0.05, theta)
    x, h = 40, 10
    pts = [(x + i * h + j * h + k * h) % N for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    signs = [(-1) ** (3 - i - j - k) for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    assert _dist(sum(s * v for s, v in zip(signs, phi(pts)))) > 1e-3


@pytest.mark.parametrize("kind", ["global", "lifted"])
def test_triple_derivative_vanishes(kind):
    rng = np.random.default_rng(1)
    if kind == "global":
        phi = make_global_quadratic(10_007, [1, 77], 0.3, int(rng.integers(10_007)), int(rng.integers(10_007)))
    else:
        phi = make_lifted_quadratic(10_000, [1], 0.05, float(rng.random()))
    assert third_derivative_defect(phi, samples=1000, seed=2) <= 1e-10


@pytest.mark.parametrize(
    "phi",
    [
        make_global_quadratic(10_007, [1, 300], 0.3, 4321, 17),
        make_lifted_quadratic(10_000, [1], 0.05, 0.7071067811865476),
        make_lifted_quadratic(10_000, [1, 37], 0.05, 0.1234, translate=500),
    ],
)
def test_bilinear_and_symmetric(phi):
    add, sym = bilinearity_defect(phi, samples=1000, seed=3)
    assert add <= 1e-10
    assert sym <= 1e-10


def test_basepoint_independence():
    rng = np.random.default_rng(4)
    phi = make_lifted_quadratic(10_000, [1], 0.05, 0.377, translate=1234)
    for _ in range(100):
        a, b, n = (int(x) for x in rng.integers(-120, 121, size=3))
        via_h = second_derivative(phi, a, b)
        via_n = second_derivative(phi, a, b, base=phi.translate + n)
        assert _dist(via_h - via_n) <= 1e-10


def test_second_derivative_admissibility():
    phi = make_lifted_quadratic(1000, [1], 0.05, 0.3)
    with pytest.raises(AdmissibilityError) as info:
        second_derivative(phi, 49, 2)
    assert info.value.witness["a"] == 49
    with pytest.raises(AdmissibilityError):
        second_derivative(phi, 1, 1, base=48)


# --- philemma --------------------------------------------------------------------


def test_philemma_trivial_range():
    phi = make_global_quadratic(101, [1], 0.4, 7, 3)
    rep = verify_philemma(phi, 2, 5, 9, 1)
    assert rep.max_defect == 0.0 and rep.samples == 0


def test_philemma_global():
    rng = np.random.default_rng(5)
    N = 10_007
    phi = make_global_quadratic(N, [1], 0.49, 911, 12)
    for _ in range(20):
        d, a, n = (int(x) for x in rng.integers(1, N, size=3))
        rep = verify_philemma(phi, d, a, n, 20)
        assert rep.max_defect <= 1e-10 and rep.ok


def test_philemma_lifted_maximal_q():
    N = 100_000
    phi = make_lifted_quadratic(N, [1], 0.01, 0.41421356)
    d, a, n = 3, 7, -100
    # dn + dqa = -300 + 21 q must stay below rho N = 1000 in absolute value
    q_max = (999 + 300) // 21
    rep = verify_philemma(phi, d, a, n, q_max)
    assert rep.max_defect <= 1e-9
    with pytest.raises(AdmissibilityError) as info:
        verify_philemma(phi, d, a, n, q_max + 1)
    assert info.value.witness["q"] == q_max + 1


def test_philemma_suite():
    phi = make_lifted_quadratic(10_000, [1], 0.05, 0.2718281828)
    rep = philemma_suite(phi, samples=1000, seed=6)
    assert rep.samples >= 1000 and rep.max_defect <= 1e-9


# --- quartic -----------------------------------------------------------------------


def test_quartic_trivial_u1_zero():
    phi = make_lifted_quadratic(100_000, [1], 0.02, 0.3)
    rep = verify_quartic(phi, 2, 3, 4, 5, 0, 3, samples=50)
    assert rep.max_defect <= 1e-12


def test_quartic_global():
    phi = make_global_quadratic(10_007, [1], 0.49, 5003, 11)
    rep = verify_quartic(phi, 3, 4, 2, 5, 2, 2, samples=1000, seed=7)
    assert rep.samples == 1000 and rep.max_defect <= 1e-10


def test_quartic_lifted_example():
    phi = make_lifted_quadratic(100_000, [1], 0.02, 0.5772156649)
    rep = verify_quartic(phi, 2, -3, 5, 4, 3, 3, samples=1000, seed=8)
    assert rep.max_defect <= 1e-9


def test_quartic_admissibility_errors():
    phi = make_lifted_quadratic(100_000, [1], 0.02, 0.3)
    with pytest.raises(AdmissibilityError):
        verify_quartic(phi, 40, 40, 1, 1, 3, 3)  # products leave B(S, rho/10)
    with pytest.raises(AdmissibilityError):
        verify_quartic(phi, 100, 100, 1, 1, 30, 30)  # U V ||ab|| > rho


def test_quartic_suite():
    phi = make_lifted_quadratic(100_000, [1], 0.02, 0.1414)
    rep = quartic_suite(phi, samples=1000, seed=9)
    assert rep.samples >= 1000 and rep.max_defect <= 1e-9


# --- polarization -------------------------------------------------------------------


def test_polarization_global_and_lifted():
    glob = make_global_quadratic(10_007, [1], 0.49, 1234, 5)
    assert verify_polarization(glob, 17, 33, 10).max_defect <= 1e-10
    lifted = make_lifted_quadratic(10_000, [1], 0.05, 0.6180339887)
    # a +- c b must stay inside 2(a + c b) < rho N = 500
    rep = verify_polarization(lifted, 20, 11, 20)
    assert rep.samples == 20 and rep.max_defect <= 1e-9
    with pytest.raises(AdmissibilityError):
        verify_polarization(lifted, 20, 11, 25)
    assert verify_polarization(lifted, 20, 11, 0).max_defect == 0.0


def test_polarization_quadratic_factor_fails():
    # the factor is linear in c; a c^2 factor is off by 4 (c^2 - c) phi''(a, b)
    phi = make_lifted_quadratic(10_000, [1], 0.05, 0.01)
    a, b, c = 20, 11, 2
    lhs = second_derivative(phi, a + c * b, a + c * b) - second_derivative(phi, a - c * b, a - c * b)
    base = second_derivative(phi, a, b)
    assert _dist(lhs - 4 * c * base) <= 1e-10
    assert _dist(lhs - 4 * c * c * base) > 1e-2


def test_polarization_suite():
    phi = make_global_quadratic(10_007, [1, 99], 0.3, 77, 1)
    rep = polarization_suite(phi, samples=1000, seed=10)
    assert rep.samples >= 1000 and rep.max_defect <= 1e-10


def test_report_json_and_failures():
    rep = LemmaReport("quartic", 3, 0.5, [{"u": [0, 1, 1], "defect": 0.5}])
    data = json.loads(rep.to_json())
    assert set(data) == {"lemma", "samples", "max_defect", "failures"}
    assert not rep.ok
    phi = make_global_quadratic(101, [1], 0.4, 3, 0)
    # a tolerance below zero turns every sample into a reported failure
    bad = verify_polarization(phi, 1, 2, 3, tol=-1.0)
    assert len(bad.failures) == 3 and bad.failures[0]["c"] == 1


def test_corrupted_form_is_caught():
    phi = make_lifted_quadratic(100_003, [1, 3], 0.05, 0.1234567)
    bad = make_corrupted_form(phi, kappa=1e-4)
    m = np.array([5, -7, 40])
    expected = [(Fraction(0.1234567) * int(x) ** 2 + Fraction(1e-4) * int(x) ** 3) % 1 for x in m]
    assert np.allclose(bad(m % phi.N), [float(v) for v in expected], atol=1e-15)
    assert third_derivative_defect(bad, 200) > 1e-6
    for suite in (quartic_suite, polarization_suite, philemma_suite):
        assert not suite(bad, 200).ok
    with pytest.raises(ValueError):
        make_corrupted_form(make_global_quadratic(101, [1], 0.1, 3, 4))
