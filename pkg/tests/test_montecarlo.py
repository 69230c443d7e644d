import math

import numpy as np
import pytest

from srwpnet.core import make_rng
from srwpnet.errors import DomainError
from srwpnet.montecarlo import (MarginPolicy, SimConfig, batch_streams, empirical_density, empirical_rates,
                                equal_area_edges, simulate_realization, simulate_sir, test_psi_uniform,
                                test_zn_fit, trial_rng)
from srwpnet.rate import Model


def test_same_seed_same_output(network, mobility):
    sim = SimConfig(trials=500, seed=3, time_grid=(0.0, 60.0), batch=200)
    a = simulate_sir(network, mobility, sim, Model.UDM)
    b = simulate_sir(network, mobility, sim, Model.UDM)
    for x, y in zip(a[:3], b[:3]):
        assert np.array_equal(x, y)
    c = simulate_sir(network, mobility, SimConfig(trials=500, seed=4, time_grid=(0.0, 60.0), batch=200),
                     Model.UDM)
    assert not np.array_equal(a[0], c[0])


def test_batches_cover_all_trials():
    sizes = [n for n, _ in batch_streams(0, 4500, 2000)]
    assert sizes == [2000, 2000, 500]


def test_serving_drone_hovers_above_user_after_arrival(network, mobility):
    sim = SimConfig(trials=400, seed=1, time_grid=(0.0, 60.0, 300.0), batch=400)
    _, r0, _, _ = simulate_sir(network, mobility, sim, Model.UDM)
    # Serving distance shrinks at speed v, then stays at the altitude.
    assert np.all(r0[:, 2] == pytest.approx(network.h))
    horiz0 = np.sqrt(r0[:, 0] ** 2 - network.h ** 2)
    horiz1 = np.sqrt(np.maximum(r0[:, 1] ** 2 - network.h ** 2, 0))
    np.testing.assert_allclose(horiz1, np.maximum(horiz0 - 60 * mobility.v, 0), atol=1e-6)


def test_independent_server_is_nearest_drone(network, mobility):
    sim = SimConfig(trials=300, seed=2, time_grid=(0.0, 60.0), batch=300)
    _, r0, _, _ = simulate_sir(network, mobility, sim, Model.UIM)
    assert np.all(r0 >= network.h)


def test_single_realization_matches_sample_type(network, mobility):
    out = simulate_realization(network, mobility, SimConfig(time_grid=(0.0, 30.0)), Model.UDM, make_rng(0))
    assert [s.t for s in out] == [0.0, 30.0]
    assert all(s.sir > 0 and s.interference > 0 for s in out)


def test_truncated_margin_can_leave_no_interferer(mobility):
    from srwpnet.core import NetworkConfig
    sparse = NetworkConfig(1e-8, 100.0, 3.0)
    sim = SimConfig(r_obs=100.0, trials=2000, seed=0, margin_policy=MarginPolicy.TRUNCATE, batch=2000)
    est = empirical_rates(Model.UIM, sparse, mobility, sim)[0]
    assert est.infinite > 0 and est.n + est.infinite == 2000


def test_rate_estimates_need_enough_trials(network, mobility):
    with pytest.raises(DomainError):
        empirical_rates(Model.UIM, network, mobility, SimConfig(trials=10))


def test_bearing_uniformity_detects_bias():
    assert test_psi_uniform(3, 100_000, make_rng(1)).pvalue > 0.01
    assert test_psi_uniform(3, 100_000, make_rng(1), bearing_span=math.pi).pvalue < 0.001


def test_two_flight_law_fits():
    assert test_zn_fit(2, 100_000, make_rng(2)).pvalue > 0.01


def test_equal_area_edges():
    e = equal_area_edges(3000.0, 30)
    assert e[0] == 0 and e[-1] == 3000
    np.testing.assert_allclose(np.diff(e ** 2), 3000.0 ** 2 / 30)


def test_density_without_exclusion_is_flat(network, mobility):
    sim = SimConfig(trials=2000, seed=3, batch=1000)
    hist = empirical_density([70.0], 0.0, network, mobility, sim)[0]
    z = (hist.ratio - 1.0) / hist.stderr
    assert np.max(np.abs(z)) < 4.5


def test_density_at_time_zero_is_a_step(network, mobility):
    sim = SimConfig(trials=500, seed=4, batch=500)
    edges = np.array([0.0, 250.0, 499.0, 501.0, 1000.0, 2000.0])
    hist = empirical_density([0.0], 500.0, network, mobility, sim, edges=edges)[0]
    assert hist.ratio[0] == 0 and hist.ratio[1] == 0
    assert hist.ratio[3] == pytest.approx(1.0, abs=5 * hist.stderr[3])


def test_trial_streams_are_distinct():
    assert trial_rng(1, 0).random() != trial_rng(1, 1).random()
    assert trial_rng(1, 5).random() == trial_rng(1, 5).random()
