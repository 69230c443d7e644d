"""Interference density and average rate in drone cellular networks under
simplified random waypoint mobility, with a Monte Carlo counterpart."""

__version__ = "0.1.0"

from .core import MobilityConfig, NetworkConfig, PlanarPoint, QuadratureSpec
from .displacement import DisplacementDistribution, ZnDistribution, displacement_distribution, ln_cdf, ln_pdf
from .interference import (DensityField, DensityProfile, DensityQuery, beta, density_profile, displaced_mass,
                           lambda1_direct, udm_density, uim_density)
from .montecarlo import SimConfig, SirSample, empirical_density, empirical_rate, simulate_realization
from .rate import Model, RateCurve, RateQuery, average_rate_udm, average_rate_uim, rate_curve, sir_ccdf_conditional

__all__ = [
    "MobilityConfig", "NetworkConfig", "PlanarPoint", "QuadratureSpec",
    "DisplacementDistribution", "ZnDistribution", "displacement_distribution", "ln_cdf", "ln_pdf",
    "DensityField", "DensityProfile", "DensityQuery", "beta", "density_profile", "displaced_mass",
    "lambda1_direct", "udm_density", "uim_density",
    "SimConfig", "SirSample", "empirical_density", "empirical_rate", "simulate_realization",
    "Model", "RateCurve", "RateQuery", "average_rate_udm", "average_rate_uim", "rate_curve",
    "sir_ccdf_conditional",
]
