"""Density of the interfering-drone field seen from the typical user.

At t = 0 interferers form a PPP of density ``lambda0`` outside the
exclusion disc of radius ``u0`` around the user's projection o'.  Each
drone then moves independently, so the field stays Poisson; its density
at distance ``u_x`` is ``lambda0 * beta`` where ``1 - beta`` is the
probability that a uniformly-directed displacement of length L(t) maps
a point at distance ``u_x`` back into the exclusion disc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import MobilityConfig, NetworkConfig
from .displacement import DisplacementDistribution, displacement_distribution, displacement_measure
from .errors import DomainError, NumericalConsistencyError
from .quadrature import DEFAULT_SPEC, QuadratureSpec, gauss_legendre_panels, integrate_singular

_ARCCOS_GUARD = 1e-12
_BETA_GUARD = 1e-6


@dataclass(frozen=True)
class DensityQuery:
    t: float
    u_x: float
    u_0: float

    def __post_init__(self):
        if min(self.t, self.u_x, self.u_0) < 0:
            raise DomainError(f"density query needs non-negative t, u_x, u_0; got {self}")


@dataclass(frozen=True)
class DensityProfile:
    """lambda(t; u_x, u_0) / lambda0 tabulated over a grid of ``u_x``."""

    t: float
    u_0: float
    u_x: np.ndarray
    ratio: np.ndarray

    def rows(self):
        return list(zip(self.u_x.tolist(), self.ratio.tolist()))


def uim_density(u_x, u_0_t, lambda0: float):
    """Interferer density when every drone, the server included, moves alike."""
    u = np.asarray(u_x, dtype=float)
    if np.any(u < 0) or np.any(np.asarray(u_0_t) < 0):
        raise DomainError("distances must be non-negative")
    out = np.where(u > u_0_t, lambda0, 0.0)
    return float(out) if out.ndim == 0 else out


def _safe_arccos(c):
    c = np.asarray(c, dtype=float)
    if np.any(np.abs(c) > 1.0 + _ARCCOS_GUARD):
        raise NumericalConsistencyError("arccos argument outside [-1, 1] beyond rounding guard")
    return np.arccos(np.clip(c, -1.0, 1.0))


def return_probability(l, u_x, u_0):
    """Probability that a point at distance ``u_x`` displaced by ``l`` in a
    uniform direction lands in the disc of radius ``u_0``.

    Equals 1 for l <= u_0 - u_x, 0 for l >= u_x + u_0 or l <= u_x - u_0,
    and arccos((l^2 + u_x^2 - u_0^2) / (2 l u_x)) / pi in between.
    Broadcasts over all three arguments.
    """
    l, u_x, u_0 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (l, u_x, u_0)))
    denom = 2.0 * l * u_x
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (l * l + u_x * u_x - u_0 * u_0) / denom
    p = np.arccos(np.clip(c, -1.0, 1.0)) / math.pi
    degenerate = denom == 0
    # l = 0 or u_x = 0: the displaced distance is exactly max(l, u_x).
    return np.where(degenerate, (np.maximum(l, u_x) <= u_0).astype(float), p)


def beta(t: float, u_x: float, u_0: float, mobility: MobilityConfig,
         spec: QuadratureSpec = DEFAULT_SPEC,
         dist: DisplacementDistribution | None = None) -> float:
    """Fraction of ``lambda0`` present at distance ``u_x`` at time ``t``.

    Evaluated term by term: 1 - F_L(u_0 - u_x) minus the integral of
    f_L(l) arccos(.)/pi over |u_x - u_0| <= l <= min(v t, u_x + u_0), with
    point masses of L(t) inside that range added as weighted terms.
    """
    if min(t, u_x, u_0) < 0:
        raise DomainError("t, u_x and u_0 must be non-negative")
    if dist is None:
        dist = displacement_distribution(t, mobility, spec)
    if u_x == 0:
        raw = 1.0 - dist.cdf(u_0)
    else:
        lo = abs(u_x - u_0)
        hi = min(mobility.v * t, u_x + u_0)
        raw = 1.0 - dist.cdf(u_0 - u_x)
        for a, m in dist.atoms:
            if lo < a < hi:
                raw -= m * float(_safe_arccos((a * a + u_x * u_x - u_0 * u_0) / (2 * a * u_x))) / math.pi
        if lo < hi:
            def integrand(l):
                c = (l * l + u_x * u_x - u_0 * u_0) / (2.0 * l * u_x)
                return dist.pdf(l) * _safe_arccos(c) / math.pi

            for a, b in dist.pieces(lo, hi):
                raw -= integrate_singular(integrand, a, b, spec).value
    if raw < -_BETA_GUARD or raw > 1.0 + _BETA_GUARD:
        raise NumericalConsistencyError(f"beta={raw!r} outside [0, 1] at t={t}, u_x={u_x}, u_0={u_0}")
    return min(max(raw, 0.0), 1.0)


def udm_density(q: DensityQuery, cfg: NetworkConfig, mobility: MobilityConfig,
                spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Interferer density when the serving drone flies to the user and hovers."""
    t, u_x, u_0 = q.t, q.u_x, q.u_0
    lam = cfg.lambda0
    if t == 0:
        return float(uim_density(u_x, u_0, lam))
    vt = mobility.v * t
    if u_x >= u_0 + vt:
        return lam
    if u_x < abs(u_0 - vt) and t <= u_0 / mobility.v:
        # The displaced disc has not yet uncovered this inner region.
        return 0.0
    return lam * beta(t, u_x, u_0, mobility, spec)


def lambda1_direct(t: float, u_x: float, u_0: float, cfg: NetworkConfig,
                   mobility: MobilityConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Density at distance ``u_x`` of drones that started inside the exclusion disc.

    Evaluates the unsimplified double integral over the displacement
    length l and the initial radius r, r restricted to the disc and to
    |l - u_x| <= r <= l + u_x.  Independent of :func:`beta`.
    """
    if min(t, u_x, u_0) < 0:
        raise DomainError("t, u_x and u_0 must be non-negative")
    lam = cfg.lambda0
    dist = displacement_distribution(t, mobility, spec)
    if u_x == 0:
        # Limit u_x -> 0: the ring at radius l around o' carries the weight.
        return lam * dist.cdf(u_0)

    def radial(l: float) -> float:
        """(1/pi) * integral over R_1 of 2 r / sqrt(...) dr."""
        if l == 0:
            return float(u_x <= u_0)
        a = abs(l - u_x)
        b = min(l + u_x, u_0)
        if not a < b:
            return 0.0
        # With r = a + ra = b - rb the radicand factors as
        # ra (2a + ra) (l + u_x - b + rb) (l + r + u_x), free of cancellation.
        c_hi = 0.0 if b == l + u_x else l + u_x - b

        def kern(r, ra, rb):
            prod = ra * (2.0 * a + ra) * (c_hi + rb) * (l + r + u_x)
            return 2.0 * r / np.sqrt(prod)

        return integrate_singular(kern, a, b, spec, offsets=True).value / math.pi

    total = sum(m * radial(a) for a, m in dist.atoms)
    vt = mobility.v * t
    cuts = [p for p in (u_x, abs(u_0 - u_x), u_0 + u_x) if 0 < p < vt]
    for a, b in dist.pieces(0.0, vt):
        inner = sorted({a, b, *[p for p in cuts if a < p < b]})
        for lo, hi in zip(inner[:-1], inner[1:]):
            def integrand(ls):
                return dist.pdf(ls) * np.array([radial(float(l)) for l in ls])
            total += integrate_singular(integrand, lo, hi, spec).value
    return lam * total


class DensityField:
    """Vectorised interferer density at a fixed time.

    The law of L(t) is replaced once by a discrete quadrature measure
    (see :meth:`DisplacementDistribution.measure`), after which beta is a
    weighted sum of :func:`return_probability` values and can be
    evaluated on whole grids of (u_x, u_0).
    """

    def __init__(self, t: float, mobility: MobilityConfig, spacing: float = 20.0, order: int = 8):
        if t < 0:
            raise DomainError(f"time must be non-negative, got {t}")
        self.t = float(t)
        self.mobility = mobility
        self.vt = mobility.v * self.t
        self.nodes, self.weights = displacement_measure(self.t, mobility, spacing, order)

    def beta(self, u_x, u_0):
        u_x = np.asarray(u_x, dtype=float)
        u_0 = np.asarray(u_0, dtype=float)
        shape = np.broadcast(u_x, u_0).shape
        ux = np.broadcast_to(u_x, shape)[..., None]
        u0 = np.broadcast_to(u_0, shape)[..., None]
        back = return_probability(self.nodes, ux, u0) @ self.weights if self.nodes.size else 0.0
        return np.clip(1.0 - back, 0.0, 1.0)

    def ratio(self, u_x, u_0):
        """lambda / lambda0 with the three-branch structure applied."""
        u_x = np.asarray(u_x, dtype=float)
        u_0 = np.asarray(u_0, dtype=float)
        if self.t == 0:
            return (u_x > u_0).astype(float) * np.ones(np.broadcast(u_x, u_0).shape)
        far = u_x >= u_0 + self.vt
        blocked = (u_x < np.abs(u_0 - self.vt)) & (self.t <= u_0 / self.mobility.v)
        b = self.beta(u_x, u_0)
        return np.where(far, 1.0, np.where(blocked, 0.0, b))


@lru_cache(maxsize=32)
def density_field(t: float, mobility: MobilityConfig) -> DensityField:
    return DensityField(t, mobility)


def density_profile(t: float, u_0: float, u_x_grid, cfg: NetworkConfig,
                    mobility: MobilityConfig) -> DensityProfile:
    """Tabulate lambda(t; u_x, u_0) / lambda0 over an increasing grid."""
    grid = np.asarray(u_x_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("u_x grid must be a non-empty, strictly increasing 1-D sequence")
    if grid[0] < 0 or u_0 < 0:
        raise DomainError("distances must be non-negative")
    ratio = density_field(float(t), mobility).ratio(grid, float(u_0))
    return DensityProfile(float(t), float(u_0), grid, np.asarray(ratio, dtype=float))


def displaced_mass(t: float, u_0: float, cfg: NetworkConfig, mobility: MobilityConfig,
                   panel_width: float = 10.0, order: int = 8) -> float:
    """Expected number of drones missing from the plane: integral of
    (lambda0 - lambda) 2 pi u_x over u_x.  Should equal lambda0 pi u_0^2.

    The integrand is exactly zero beyond u_0 + v t, so a composite
    Gauss-Legendre rule on [0, u_0 + v t] suffices.
    """
    if t < 0 or u_0 < 0:
        raise DomainError("t and u_0 must be non-negative")
    top = u_0 + mobility.v * t
    if top == 0:
        return 0.0
    field = density_field(float(t), mobility)
    n_panels = max(1, math.ceil(top / panel_width))
    u, w = gauss_legendre_panels(0.0, top, n_panels, order)
    deficit = 1.0 - field.ratio(u, u_0)
    return cfg.lambda0 * float(np.sum(w * deficit * 2.0 * math.pi * u))
