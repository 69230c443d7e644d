import math

import numpy as np
import pytest
from scipy import integrate, special

from srwpnet.core import NetworkConfig
from srwpnet.errors import DomainError
from srwpnet.montecarlo import SimConfig, empirical_coverage
from srwpnet.rate import (Model, RateQuery, average_rate, average_rate_udm, average_rate_uim, coverage,
                          rate_curve, sir_ccdf_conditional)


def _ground_level_rate(alpha):
    """Rate of a static PPP with the user and drones on one plane, via the closed form
    of the interference integral (Gauss hypergeometric function)."""
    delta = alpha / 2.0

    def cov(g):
        rho = g / (delta - 1.0) * special.hyp2f1(1.0, 1.0 - 1.0 / delta, 2.0 - 1.0 / delta, -g)
        return 1.0 / (1.0 + rho)

    return integrate.quad(lambda g: cov(g) / (1.0 + g), 0, np.inf, limit=500)[0]


def test_ground_level_rate_against_closed_form():
    cfg = NetworkConfig(1e-6, 0.0, 4.0)
    ref = _ground_level_rate(4.0)
    assert ref == pytest.approx(1.49, abs=0.01)
    assert average_rate_uim(cfg) == pytest.approx(ref, rel=1e-4)


def test_ground_level_rate_is_density_free():
    a = average_rate_uim(NetworkConfig(1e-6, 0.0, 3.0))
    b = average_rate_uim(NetworkConfig(4e-6, 0.0, 3.0))
    assert a == pytest.approx(b, rel=1e-5)


def test_rate_ignores_power():
    a = average_rate_uim(NetworkConfig(1e-6, 100.0, 3.0, P=1.0))
    b = average_rate_uim(NetworkConfig(1e-6, 100.0, 3.0, P=50.0))
    assert a == b


def test_follow_model_at_zero_equals_independent(network, mobility):
    assert average_rate_udm(0.0, network, mobility) == pytest.approx(average_rate_uim(network), rel=1e-4)


def test_rate_falls_with_altitude():
    rates = [average_rate_uim(NetworkConfig(1e-6, h, 3.0)) for h in (100.0, 150.0, 200.0)]
    assert rates[0] > rates[1] > rates[2]


def test_follow_rate_falls_with_altitude(mobility):
    low = average_rate_udm(60.0, NetworkConfig(1e-6, 100.0, 3.0), mobility)
    high = average_rate_udm(60.0, NetworkConfig(1e-6, 200.0, 3.0), mobility)
    assert low > high


def test_conditional_ccdf_limits(network, mobility):
    assert sir_ccdf_conditional(1e-9, 0.0, 500.0, network, model=Model.UIM) == pytest.approx(1.0, abs=1e-6)
    assert sir_ccdf_conditional(1e9, 0.0, 500.0, network, model=Model.UIM) < 1e-6
    vals = sir_ccdf_conditional(np.array([0.1, 1.0, 10.0]), 60.0, 500.0, network, mobility)
    assert np.all(np.diff(vals) < 0) and np.all((vals > 0) & (vals <= 1))


def test_ccdf_rejects_bad_threshold(network):
    with pytest.raises(DomainError):
        sir_ccdf_conditional(0.0, 0.0, 500.0, network, model=Model.UIM)


@pytest.mark.parametrize("model, t", [(Model.UIM, 0.0), (Model.UDM, 60.0)])
def test_coverage_against_simulation(network, mobility, model, t):
    gammas = [0.1, 1.0, 10.0]
    sim = SimConfig(trials=20_000, seed=5, batch=2000)
    emp, n = empirical_coverage(gammas, t, model, network, mobility, sim)
    ana = coverage(np.array(gammas), t, network, mobility, model)
    se = np.sqrt(emp * (1 - emp) / n)
    assert np.all(np.abs(emp - ana) < np.maximum(3 * se, 0.01))


def test_independent_curve_is_flat(network, mobility):
    curve = rate_curve(Model.UIM, [0.0, 60.0, 120.0], network, mobility)
    assert np.ptp(curve.rates) < 1e-6
    assert list(curve.times) == [0.0, 60.0, 120.0]


def test_follow_curve_rises_above_independent(network, mobility):
    curve = rate_curve(Model.UDM, [0.0, 30.0, 60.0], network, mobility)
    r = curve.rates
    assert r[0] == pytest.approx(average_rate_uim(network), rel=1e-4)
    assert np.all(r >= r[0] - 1e-4)
    assert r[-1] > r[0]


def test_query_dispatch(network, mobility):
    assert average_rate(RateQuery(0.0, network, mobility, model=Model.UIM)) == average_rate_uim(network)
    with pytest.raises(DomainError):
        RateQuery(-1.0, network, mobility)
    with pytest.raises(DomainError):
        rate_curve(Model.UIM, [60.0, 0.0], network, mobility)
