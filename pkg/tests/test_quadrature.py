import math

import numpy as np
import pytest

from srwpnet.errors import DomainError, QuadratureError
from srwpnet.quadrature import (DEFAULT_SPEC, GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureSpec,
                                gauss_legendre_panels, integrate_adaptive, integrate_semi_infinite,
                                integrate_singular)


def test_rule_weights_sum_to_interval_length():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-14)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("deg", [0, 5, 19, 31])
def test_kronrod_is_exact_for_polynomials(deg):
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert np.dot(KRONROD_WEIGHTS, NODES ** deg) == pytest.approx(exact, abs=1e-14)


def test_gauss_is_exact_to_degree_19_only():
    assert np.dot(GAUSS_WEIGHTS, NODES ** 18) == pytest.approx(2.0 / 19, abs=1e-14)
    assert abs(np.dot(GAUSS_WEIGHTS, NODES ** 20) - 2.0 / 21) > 1e-8


def test_basic_integrals():
    assert integrate_adaptive(lambda x: x, 0, 1).value == pytest.approx(0.5, abs=1e-12)
    assert integrate_adaptive(np.sin, 0, math.pi).value == pytest.approx(2.0, abs=DEFAULT_SPEC.abs_tol)


def test_breakpoints_handle_kinks():
    res = integrate_adaptive(lambda x: np.abs(x - 0.3), 0, 1, points=[0.3])
    assert res.value == pytest.approx(0.5 * (0.3 ** 2 + 0.7 ** 2), rel=1e-12)


def test_singular_endpoints():
    assert integrate_singular(lambda x: 1 / np.sqrt(x), 0, 1).value == pytest.approx(2.0, rel=1e-9)
    assert integrate_singular(lambda x: 1 / np.sqrt(x * (1 - x)), 0, 1).value == pytest.approx(math.pi, rel=1e-9)
    assert integrate_singular(lambda x: 1 / np.sqrt(1 - x * x), -1, 1).value == pytest.approx(math.pi, rel=1e-9)


def test_singular_offsets_are_exact_distances_to_the_ends():
    seen = []

    def f(z, za, zb):
        seen.append(np.max(np.abs(za + zb - 2.0)))
        return 1 / np.sqrt(za * zb)

    res = integrate_singular(f, 1.0, 3.0, offsets=True)
    assert res.value == pytest.approx(math.pi, rel=1e-9)
    assert max(seen) < 1e-14


def test_arcsine_density_normalises():
    s = 250.0
    res = integrate_singular(lambda z: 2 / (math.pi * np.sqrt((2 * s - z) * (2 * s + z))), 0, 2 * s)
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_semi_infinite():
    assert integrate_semi_infinite(lambda x: np.exp(-x), 0).value == pytest.approx(1.0, rel=1e-9)
    assert integrate_semi_infinite(lambda x: x * np.exp(-x * x), 0).value == pytest.approx(0.5, rel=1e-9)


def test_semi_infinite_polynomial_decay_against_reference():
    res = integrate_semi_infinite(lambda u: u / (1 + u ** 3), 0)
    exact = 2 * math.pi / (3 * math.sqrt(3))
    # Independent reference: a fine fixed rule on [0, 1e4] plus the analytic 1/u tail.
    x, w = gauss_legendre_panels(0.0, 1e4, 20000, 10)
    ref = np.dot(w, x / (1 + x ** 3)) + 1e-4
    assert res.value == pytest.approx(exact, rel=1e-8)
    assert ref == pytest.approx(exact, rel=1e-8)


def test_semi_infinite_without_decay_fails():
    with pytest.raises(QuadratureError):
        integrate_semi_infinite(lambda x: np.ones_like(x), 0, max_doublings=20)


def test_vector_valued_integrand():
    ks = np.array([1.0, 2.0, 3.0])
    res = integrate_adaptive(lambda x: x[:, None] ** ks[None, :], 0, 1)
    np.testing.assert_allclose(res.value, 1 / (ks + 1), rtol=1e-12)


def test_failure_carries_best_estimate():
    spec = QuadratureSpec(max_subdivisions=5)
    with pytest.raises(QuadratureError) as info:
        integrate_adaptive(lambda x: np.sin(1 / x), 1e-4, 1, spec)
    assert info.value.estimate is not None


def test_non_finite_integrand_is_reported():
    with pytest.raises(QuadratureError):
        integrate_adaptive(lambda x: 1 / (x - x), 0, 1)


def test_deterministic():
    f = lambda x: np.exp(-x) * np.cos(5 * x)
    assert integrate_semi_infinite(f, 0) == integrate_semi_infinite(f, 0)


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0), dict(abs_tol=-1), dict(max_subdivisions=0),
                                    dict(max_subdivisions=2.5), dict(tail_epsilon=0)])
def test_spec_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureSpec(**kwargs)


def test_reversed_bounds_rejected():
    with pytest.raises(DomainError):
        integrate_adaptive(np.sin, 1, 0)
