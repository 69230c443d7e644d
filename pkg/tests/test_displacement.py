import math

import numpy as np
import pytest

from srwpnet.core import make_rng
from srwpnet.displacement import (ZnDistribution, ZnKind, displacement_distribution, ln_cdf, ln_pdf, zn_cdf,
                                  zn_pdf)
from srwpnet.errors import DomainError
from srwpnet.mobility import sample_displacement_paths
from srwpnet.quadrature import integrate_singular

S = 250.0


def test_kind_dispatch():
    assert ZnDistribution(0, S).kind is ZnKind.POINT_MASS
    assert ZnDistribution(1, S).kind is ZnKind.POINT_MASS
    assert ZnDistribution(2, S).kind is ZnKind.ARCSINE
    assert ZnDistribution(7, S).kind is ZnKind.TRUNCATED_RAYLEIGH
    with pytest.raises(DomainError):
        ZnDistribution(-1, S)


def test_two_flight_law():
    assert zn_pdf(2, S, 0.0) == pytest.approx(2 / (500 * math.pi))
    assert zn_cdf(2, S, S * math.sqrt(2)) == pytest.approx(0.5, abs=1e-12)
    assert zn_cdf(2, S, 2 * S) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [3, 5, 10, 50])
def test_rayleigh_form_normalises(n):
    top = n * S
    res = integrate_singular(lambda z: zn_pdf(n, S, z), 0.0, top)
    assert res.value == pytest.approx(1.0, abs=1e-9)
    assert zn_cdf(n, S, top) == pytest.approx(1.0, abs=1e-12)
    assert zn_pdf(n, S, top * 1.01) == 0


def test_five_flight_cdf_at_simulated_median():
    th = make_rng(1).uniform(0, 2 * math.pi, (100_000, 5))
    z = S * np.hypot(np.cos(th).sum(1), np.sin(th).sum(1))
    assert zn_cdf(5, S, float(np.median(z))) == pytest.approx(0.5, abs=0.02)


def test_one_flight_median_at_quarter_turn(mobility):
    # t = 40: one flight done, 125 m into the second.
    dist = displacement_distribution(40.0, mobility)
    assert dist.phase.n == 1 and dist.phase.d == pytest.approx(125.0)
    assert ln_cdf(math.hypot(S, 125.0), 40.0, mobility) == pytest.approx(0.5, abs=1e-9)
    assert ln_cdf(375.0, 40.0, mobility) == pytest.approx(1.0, abs=1e-12)
    assert ln_cdf(125.0 - 1e-9, 40.0, mobility) == 0.0


def test_three_flights_in_flight_against_simulation(mobility):
    t = 88.0  # n = 3, d = 100
    moves = sample_displacement_paths(200_000, [t], mobility, make_rng(2))
    lengths = np.hypot(moves[:, 0, 0], moves[:, 0, 1])
    emp = np.mean(lengths <= 300.0)
    assert ln_cdf(300.0, t, mobility) == pytest.approx(emp, abs=0.05)


@pytest.mark.parametrize("t, l", [(40.0, 300.0), (88.0, 300.0), (70.0, 200.0), (170.0, 600.0)])
def test_pdf_is_derivative_of_cdf(mobility, t, l):
    step = 0.1
    fd = (ln_cdf(l + step, t, mobility) - ln_cdf(l - step, t, mobility)) / (2 * step)
    assert float(ln_pdf(l, t, mobility)) == pytest.approx(fd, rel=1e-3)


@pytest.mark.parametrize("t", [0.0, 3.0, 5.0, 15.0, 27.0, 30.0, 30.0001, 40.0, 55.0, 70.0, 88.0, 170.0,
                               300.0, 1000.0])
def test_total_mass_is_one(mobility, t):
    assert displacement_distribution(t, mobility).total_mass() == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("t, where", [(3.0, 0.0), (15.0, 125.0), (27.0, 250.0)])
def test_atoms(mobility, t, where):
    dist = displacement_distribution(t, mobility)
    assert dist.atoms == ((pytest.approx(where), 1.0),)
    assert dist.continuous_pdf is None


def test_cdf_is_monotone(mobility):
    for t in (40.0, 70.0, 88.0, 300.0):
        ls = np.linspace(0, mobility.v * t, 60)
        dist = displacement_distribution(t, mobility)
        vals = [dist.cdf(float(l)) for l in ls]
        assert np.all(np.diff(vals) >= -1e-9)
        assert vals[-1] == pytest.approx(1.0, abs=1e-6)


def test_measure_matches_law(mobility):
    dist = displacement_distribution(170.0, mobility)
    x, w = dist.measure()
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    for q in (300.0, 600.0, 900.0):
        assert w[x <= q].sum() == pytest.approx(dist.cdf(q), abs=5e-3)
