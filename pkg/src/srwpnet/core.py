"""Network and mobility parameters, planar geometry, and PPP sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError
from .quadrature import DEFAULT_SPEC, QuadratureSpec  # noqa: F401  (re-exported)


@dataclass(frozen=True)
class NetworkConfig:
    """Static network parameters.

    The transmit power ``P`` is carried for completeness; it multiplies
    both signal and interference and cancels from every SIR-level
    quantity.
    """

    lambda0: float
    h: float
    alpha: float
    P: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.lambda0) and self.lambda0 > 0):
            raise DomainError(f"lambda0 must be positive, got {self.lambda0}")
        if not (math.isfinite(self.h) and self.h >= 0):
            raise DomainError(f"altitude h must be non-negative, got {self.h}")
        if not math.isfinite(self.alpha) or self.alpha <= 2:
            raise DivergenceError(
                f"path-loss exponent alpha={self.alpha} must exceed 2: the aggregate "
                "interference integral inside the average-rate expression diverges otherwise")
        if not (math.isfinite(self.P) and self.P > 0):
            raise DomainError(f"transmit power P must be positive, got {self.P}")


@dataclass(frozen=True)
class MobilityConfig:
    """Simplified random waypoint parameters: speed, hover time, flight length."""

    v: float
    w: float
    s: float

    def __post_init__(self):
        if not (math.isfinite(self.v) and self.v > 0):
            raise DomainError(f"speed v must be positive, got {self.v}")
        if not (math.isfinite(self.w) and self.w >= 0):
            raise DomainError(f"hover time w must be non-negative, got {self.w}")
        if not (math.isfinite(self.s) and self.s > 0):
            raise DomainError(f"flight distance s must be positive, got {self.s}")

    @property
    def flight_time(self) -> float:
        return self.s / self.v

    @property
    def cycle(self) -> float:
        """Duration of one hover plus one flight."""
        return self.w + self.s / self.v


@dataclass(frozen=True)
class PlanarPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"coordinates must be finite, got ({self.x}, {self.y})")

    def __sub__(self, other: "PlanarPoint") -> "PlanarPoint":
        return PlanarPoint(self.x - other.x, self.y - other.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def distance_3d(u_x, h):
    """Slant distance from a ground point to a drone at horizontal offset ``u_x``."""
    u = np.asarray(u_x, dtype=float)
    hh = np.asarray(h, dtype=float)
    if np.any(u < 0) or np.any(hh < 0):
        raise DomainError("horizontal distance and altitude must be non-negative")
    r = np.hypot(u, hh)
    return float(r) if r.ndim == 0 else r


def make_rng(seed: int | None = None) -> np.random.Generator:
    """Counter-based generator; ``Generator.spawn`` gives independent child streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def sample_ppp_array(lam: float, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on the disc of given radius as an (N, 2) array."""
    if lam < 0:
        raise DomainError(f"density must be non-negative, got {lam}")
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    n = rng.poisson(lam * math.pi * radius * radius)
    return uniform_disc(n, radius, rng)


def uniform_disc(n: int, radius: float, rng: np.random.Generator, inner: float = 0.0) -> np.ndarray:
    """``n`` i.i.d. uniform points on the annulus inner <= |x| <= radius."""
    rho = np.sqrt(inner * inner + (radius * radius - inner * inner) * rng.random(n))
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi)])


def sample_ppp(lam: float, radius: float, rng: np.random.Generator) -> list[PlanarPoint]:
    """Homogeneous PPP of density ``lam`` restricted to a disc centred at the origin."""
    pts = sample_ppp_array(lam, radius, rng)
    return [PlanarPoint(float(x), float(y)) for x, y in pts]


def wrap_angle(theta):
    """Map angles into [-pi, pi)."""
    out = np.mod(np.asarray(theta, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    return float(out) if out.ndim == 0 else out
