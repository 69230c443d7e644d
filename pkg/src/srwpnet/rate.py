"""Coverage probability and average rate of the typical user.

The average rate is E[log(1 + SIR)] in nats.  Writing it as the integral
of P[SIR > gamma] / (1 + gamma) over gamma, and conditioning on the
initial serving distance u_0, leaves a Poisson interference field whose
Laplace transform gives the conditional coverage in closed form up to a
single radial integral over the interferer distance u_x.

Three nested integrals are evaluated, innermost first: u_x (inside the
exponent), u_0 (against the nearest-neighbour law of a PPP), and gamma.
Each level is vectorised over the gamma values requested by the level
above, so a whole batch of outer nodes is handled in one pass.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import MobilityConfig, NetworkConfig
from .displacement import displacement_distribution
from .errors import DomainError
from .interference import density_field
from .quadrature import QuadratureSpec, gauss_legendre_panels, integrate_adaptive, integrate_semi_infinite

RATE_SPEC = QuadratureSpec(rel_tol=1e-6, abs_tol=1e-13, max_subdivisions=2000, tail_epsilon=1e-7)


class Model(enum.Enum):
    """Which drone serves the user: an independent mover or one that flies over."""

    UIM = "uim"
    UDM = "udm"


@dataclass(frozen=True)
class RateQuery:
    t: float
    cfg: NetworkConfig
    mobility: MobilityConfig
    quad: QuadratureSpec = RATE_SPEC
    model: Model = Model.UDM

    def __post_init__(self):
        if not self.t >= 0:
            raise DomainError(f"time must be non-negative, got {self.t}")


@dataclass(frozen=True)
class RateCurve:
    """Average rate (nats per channel use) over a time grid."""

    model: Model
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if any(r < 0 for _, r in self.points):
            raise DomainError("average rate cannot be negative")

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.points])

    @property
    def rates(self) -> np.ndarray:
        return np.array([r for _, r in self.points])


@dataclass
class _NearField:
    """Quadrature nodes and weighted density on [start, u_0 + v t] for one time.

    The density is tabulated once per u_0 and reused for every gamma the
    outer integrals ask about.  It does not depend on h or alpha, so the
    table is shared between altitudes.
    """

    t: float
    mobility: MobilityConfig
    panel_width: float
    order: int
    table: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __call__(self, u_0: float) -> tuple[np.ndarray, np.ndarray]:
        hit = self.table.get(u_0)
        if hit is not None:
            return hit
        vt = self.mobility.v * self.t
        start = abs(u_0 - vt) if self.t <= u_0 / self.mobility.v else 0.0
        top = u_0 + vt
        edges = sorted({start, top, *[p for p in (abs(u_0 - vt), *_kinks(self.t, u_0, self.mobility))
                                      if start < p < top]})
        xs, ws = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            n = max(1, math.ceil((b - a) / self.panel_width))
            x, w = gauss_legendre_panels(a, b, n, self.order)
            xs.append(x)
            ws.append(w)
        u = np.concatenate(xs)
        w = np.concatenate(ws) * density_field(self.t, self.mobility).ratio(u, u_0)
        with self.lock:
            self.table[u_0] = (u, w)
        return u, w


_NEAR: dict = {}
_NEAR_LOCK = threading.Lock()


def _near_field(t: float, mobility: MobilityConfig, panel_width: float = 5.0,
                order: int = 8) -> _NearField:
    key = (float(t), mobility, panel_width, order)
    with _NEAR_LOCK:
        m = _NEAR.get(key)
        if m is None:
            if len(_NEAR) > 64:
                _NEAR.clear()
            m = _NEAR[key] = _NearField(float(t), mobility, panel_width, order)
    return m


def _check_gamma(gamma) -> np.ndarray:
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(~(g > 0)):
        raise DomainError("SIR threshold gamma must be positive")
    return g


def _kinks(t: float, u_0: float, mobility: MobilityConfig) -> list[float]:
    """u_x values where the density has a kink: atoms and support edges of L(t) shifted by u_0."""
    dist = displacement_distribution(t, mobility)
    marks = [a for a, _ in dist.atoms]
    if dist.continuous_pdf is not None:
        marks += [*dist.support, *dist.breakpoints]
    return sorted({p for m in marks for p in (abs(m - u_0), m + u_0)})


def interference_exponent(gamma, t: float, u_0: float, cfg: NetworkConfig,
                          mobility: MobilityConfig | None, model: Model = Model.UDM,
                          spec: QuadratureSpec = RATE_SPEC) -> np.ndarray:
    """-log P[SIR > gamma | u_0] as an array over ``gamma``."""
    g = _check_gamma(gamma)
    if u_0 < 0:
        raise DomainError(f"serving distance must be non-negative, got {u_0}")
    h2 = cfg.h * cfg.h
    half_alpha = 0.5 * cfg.alpha
    if model is Model.UDM and t > 0:
        if mobility is None:
            raise DomainError("the serving-drone-follows model needs mobility parameters")
        vt = mobility.v * t
        serving = max(u_0 - vt, 0.0)
    else:
        vt = 0.0
        serving = u_0
    ref = serving * serving + h2
    if ref == 0:
        # Serving drone right above a user on the ground plane: no outage.
        return np.zeros_like(g)

    def kernel(u):
        q = ((u * u + h2) / ref) ** half_alpha
        return u[:, None] * g[None, :] / (g[None, :] + q[:, None])

    scale = max(u_0 + vt, cfg.h, 1.0)
    tail = integrate_semi_infinite(kernel, u_0 + vt, spec, scale=scale).value
    total = np.asarray(tail, dtype=float)
    if vt > 0:
        # The density near the user comes from a discrete displacement
        # measure and carries many tiny kinks; a fixed fine rule handles
        # it far better than bisection would.
        u, w = _near_field(t, mobility)(u_0)
        total = total + w @ kernel(u)
    return 2.0 * math.pi * cfg.lambda0 * total


def sir_ccdf_conditional(gamma, t: float, u_0: float, cfg: NetworkConfig,
                         mobility: MobilityConfig | None = None, model: Model = Model.UDM,
                         spec: QuadratureSpec = RATE_SPEC):
    """P[SIR(t) > gamma | initial serving distance u_0] under Rayleigh fading."""
    out = np.exp(-interference_exponent(gamma, t, u_0, cfg, mobility, model, spec))
    return float(out[0]) if np.ndim(gamma) == 0 else out


def coverage(gamma, t: float, cfg: NetworkConfig, mobility: MobilityConfig | None = None,
             model: Model = Model.UDM, spec: QuadratureSpec = RATE_SPEC):
    """P[SIR(t) > gamma] averaged over the serving distance."""
    g = _check_gamma(gamma)
    lam = cfg.lambda0
    vt = mobility.v * t if (model is Model.UDM and mobility is not None) else 0.0

    def integrand(u0s):
        w = 2.0 * math.pi * lam * u0s * np.exp(-math.pi * lam * u0s * u0s)
        rows = [w_i * np.exp(-interference_exponent(g, t, float(u), cfg, mobility, model, spec))
                if w_i > 0 else np.zeros_like(g) for u, w_i in zip(u0s, w)]
        return np.array(rows)

    scale = 1.0 / math.sqrt(math.pi * lam)
    if vt > 0:
        head = integrate_adaptive(integrand, 0.0, vt, spec).value
        rest = integrate_semi_infinite(integrand, vt, spec, scale=scale).value
        out = np.asarray(head) + np.asarray(rest)
    else:
        out = np.asarray(integrate_semi_infinite(integrand, 0.0, spec, scale=scale).value)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(gamma) == 0 else out


def _average_rate(t: float, cfg: NetworkConfig, mobility: MobilityConfig | None,
                  model: Model, spec: QuadratureSpec) -> float:
    def integrand(gs):
        return coverage(gs, t, cfg, mobility, model, spec) / (1.0 + gs)

    # The gamma integrand is finite at 0 and the first panel never touches it.
    return float(integrate_semi_infinite(integrand, 0.0, spec, scale=1.0).value)


def average_rate_udm(t: float, cfg: NetworkConfig, mobility: MobilityConfig,
                     quad: QuadratureSpec = RATE_SPEC) -> float:
    """Average rate in nats when the serving drone flies straight to the user."""
    if not t >= 0:
        raise DomainError(f"time must be non-negative, got {t}")
    return _average_rate(float(t), cfg, mobility, Model.UDM, quad)


def average_rate_uim(cfg: NetworkConfig, quad: QuadratureSpec = RATE_SPEC) -> float:
    """Average rate in nats when the serving drone moves like every other drone.

    The interferer field keeps its initial law, so there is no time argument.
    """
    return _average_rate(0.0, cfg, None, Model.UIM, quad)


def average_rate(q: RateQuery) -> float:
    if q.model is Model.UIM:
        return average_rate_uim(q.cfg, q.quad)
    return average_rate_udm(q.t, q.cfg, q.mobility, q.quad)


def rate_curve(model: Model, time_grid: Sequence[float], cfg: NetworkConfig,
               mobility: MobilityConfig, quad: QuadratureSpec = RATE_SPEC) -> RateCurve:
    """Average rate at each time of an increasing grid; constant for the independent model."""
    ts = [float(t) for t in time_grid]
    if not ts:
        raise DomainError("time grid must be non-empty")
    if any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] < 0:
        raise DomainError("time grid must be non-negative and strictly increasing")
    if model is Model.UIM:
        r = average_rate_uim(cfg, quad)
        return RateCurve(model, tuple((t, r) for t in ts))
    return RateCurve(model, tuple((t, average_rate_udm(t, cfg, mobility, quad)) for t in ts))
