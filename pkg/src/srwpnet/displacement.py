"""Distribution of the net displacement L(t) of an SRWP drone.

After ``n`` flights the net displacement Z_n is a point mass at ``s``
(n = 1), arcsine on [0, 2s] (n = 2), and approximated by a Rayleigh law
with scale s*sqrt(n/2) truncated to [0, n s] for n >= 3.  During the
(n+1)-th flight the displacement follows from the law of cosines with a
uniform turn angle; this module evaluates its cdf and pdf and assembles
the phase-dependent mixed law of L(t).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import MobilityConfig
from .errors import AtomicDistributionError, DomainError, PhaseError
from .mobility import Phase, phase_at
from .quadrature import (DEFAULT_SPEC, QuadratureSpec, gauss_legendre_panels,
                         integrate_singular)


class ZnKind(enum.Enum):
    POINT_MASS = "point_mass"
    ARCSINE = "arcsine"
    TRUNCATED_RAYLEIGH = "truncated_rayleigh"


@dataclass(frozen=True)
class ZnDistribution:
    """Law of the net displacement after ``n`` flights of length ``s``.

    ``n = 0`` is accepted as the degenerate point mass at the origin.
    """

    n: int
    s: float

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise DomainError(f"flight count must be a non-negative integer, got {self.n}")
        if not self.s > 0:
            raise DomainError(f"flight distance must be positive, got {self.s}")

    @property
    def kind(self) -> ZnKind:
        if self.n <= 1:
            return ZnKind.POINT_MASS
        if self.n == 2:
            return ZnKind.ARCSINE
        return ZnKind.TRUNCATED_RAYLEIGH

    @property
    def at(self) -> float:
        """Location of the point mass (n <= 1)."""
        if self.kind is not ZnKind.POINT_MASS:
            raise DomainError(f"Z_{self.n} is not a point mass")
        return self.n * self.s

    @property
    def scale(self) -> float:
        """Arcsine support length 2s (n = 2)."""
        return 2.0 * self.s

    @property
    def sigma(self) -> float:
        return self.s * math.sqrt(self.n / 2.0)

    @property
    def cutoff(self) -> float:
        """Upper end of the support, n s."""
        return self.n * self.s

    def atoms(self) -> list[tuple[float, float]]:
        if self.kind is ZnKind.POINT_MASS:
            return [(self.at, 1.0)]
        return []

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind is ZnKind.POINT_MASS:
            raise AtomicDistributionError(
                f"Z_{self.n} is a point mass at {self.at}; use atoms() instead of a pointwise density")
        if self.kind is ZnKind.ARCSINE:
            a = self.scale
            inside = (z >= 0) & (z < a)
            zz = np.where(inside, z, 0.0)
            out = np.where(inside, 2.0 / (math.pi * np.sqrt((a - zz) * (a + zz))), 0.0)
        else:
            n, s = self.n, self.s
            inside = (z >= 0) & (z <= self.cutoff)
            norm = n * s * s * (-math.expm1(-n))
            out = np.where(inside, 2.0 * z * np.exp(-z * z / (n * s * s)) / norm, 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind is ZnKind.POINT_MASS:
            out = (z >= self.at).astype(float)
        elif self.kind is ZnKind.ARCSINE:
            out = (2.0 / math.pi) * np.arcsin(np.clip(z / self.scale, 0.0, 1.0))
        else:
            n, s = self.n, self.s
            zc = np.clip(z, 0.0, self.cutoff)
            out = np.expm1(-zc * zc / (n * s * s)) / math.expm1(-n)
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out


def zn_pdf(n: int, s: float, z):
    """Density of Z_n; raises for the atomic case n = 1."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return ZnDistribution(n, s).pdf(z)


def zn_cdf(n: int, s: float, z):
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return ZnDistribution(n, s).cdf(z)


def _flight(t: float, mobility: MobilityConfig) -> Phase:
    ph = phase_at(mobility, t)
    if ph.hovering:
        raise PhaseError(f"drone is hovering at t={t}; use the Z_n distribution")
    return ph


def _turn_probability(z, d, l):
    """P[z^2 + d^2 - 2 z d cos(Phi) <= l^2] for a uniform turn angle Phi."""
    z = np.asarray(z, dtype=float)
    if d == 0:
        return (z <= l).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (z * z + d * d - l * l) / (2.0 * z * d)
    p = np.arccos(np.clip(c, -1.0, 1.0)) / math.pi
    return np.where(z == 0, float(d <= l), p)


def ln_cdf(l: float, t: float, mobility: MobilityConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """cdf of the displacement during a flight, conditioning on Z_n."""
    ph = _flight(t, mobility)
    if l < 0:
        return 0.0
    zd = ZnDistribution(ph.n, mobility.s)
    d = ph.d
    lo = abs(l - d)
    hi = min(l + d, zd.cutoff)
    total = float(zd.cdf(l - d)) if l >= d else 0.0
    if zd.kind is ZnKind.POINT_MASS:
        for a, m in zd.atoms():
            if lo < a < l + d:
                total += m * float(_turn_probability(a, d, l))
    elif lo < hi:
        top_gap = zd.cutoff - hi
        total += integrate_singular(
            lambda z, za, bz: _turn_probability(z, d, l) * _zn_pdf_with_gap(zd, z, top_gap + bz),
            lo, hi, spec, offsets=True).value
    return min(max(total, 0.0), 1.0)


def _cosine_law_kernel(z, d, l):
    """2 l / (pi sqrt((l^2 - (z-d)^2)((z+d)^2 - l^2))), zero outside the triangle range."""
    z = np.asarray(z, dtype=float)
    prod = (l - z + d) * (l + z - d) * (z + d - l) * (z + d + l)
    ok = prod > 0
    return np.where(ok, 2.0 * l / (math.pi * np.sqrt(np.where(ok, prod, 1.0))), 0.0)


def ln_pdf(l, t: float, mobility: MobilityConfig, spec: QuadratureSpec = DEFAULT_SPEC):
    """Density of the displacement during a flight (vectorised over ``l``)."""
    ph = _flight(t, mobility)
    zd = ZnDistribution(ph.n, mobility.s)
    ls = np.atleast_1d(np.asarray(l, dtype=float))
    out = np.array([_ln_pdf_one(float(x), ph.d, zd, spec) for x in ls])
    return float(out[0]) if np.ndim(l) == 0 else out.reshape(np.shape(l))


def _zn_pdf_with_gap(zd: ZnDistribution, z, gap):
    """Z_n density where ``gap`` = n s - z is supplied without cancellation."""
    if zd.kind is ZnKind.ARCSINE:
        top = zd.scale
        ok = (gap > 0) & (z >= 0)
        return np.where(ok, 2.0 / (math.pi * np.sqrt(np.where(ok, gap * (top + z), 1.0))), 0.0)
    return zd.pdf(z)


def _ln_pdf_one(l: float, d: float, zd: ZnDistribution, spec: QuadratureSpec) -> float:
    if l <= 0 or d == 0:
        return 0.0
    lo = abs(l - d)
    hi = min(l + d, zd.cutoff)
    if zd.kind is ZnKind.POINT_MASS:
        return sum(m * float(_cosine_law_kernel(a, d, l)) for a, m in zd.atoms() if lo < a < l + d)
    if lo >= hi:
        return 0.0
    # Linear factors of the kernel, each written as (constant + offset from an end).
    c1 = 0.0 if hi == l + d else l + d - hi
    c2 = 2.0 * max(l - d, 0.0)
    c3 = 2.0 * max(d - l, 0.0)
    top_gap = zd.cutoff - hi

    def integrand(z, za, bz):
        prod = (c1 + bz) * (c2 + za) * (c3 + za) * (z + d + l)
        ok = prod > 0
        kern = np.where(ok, 2.0 * l / (math.pi * np.sqrt(np.where(ok, prod, 1.0))), 0.0)
        return kern * _zn_pdf_with_gap(zd, z, top_gap + bz)

    return integrate_singular(integrand, lo, hi, spec, offsets=True).value


@dataclass(frozen=True)
class DisplacementDistribution:
    """Mixed law of L(t): point masses plus an absolutely continuous part.

    ``breakpoints`` lists where the continuous density may be singular or
    non-smooth (support ends included); integrators split there.
    """

    atoms: tuple[tuple[float, float], ...]
    continuous_pdf: Callable | None
    continuous_cdf: Callable | None
    phase: Phase
    valid_time: float
    support: tuple[float, float]
    breakpoints: tuple[float, ...] = ()
    # Optional f(l, l - lo, hi - l) over the whole support, accurate near both ends.
    offset_pdf: Callable | None = None

    @property
    def atom_mass(self) -> float:
        return sum(m for _, m in self.atoms)

    def pdf(self, l):
        if self.continuous_pdf is None:
            return np.zeros_like(np.asarray(l, dtype=float)) if np.ndim(l) else 0.0
        return self.continuous_pdf(l)

    def cdf(self, x: float) -> float:
        """F_L(x): zero for x < 0, otherwise all mass at or below x."""
        if x < 0:
            return 0.0
        total = sum(m for a, m in self.atoms if a <= x)
        if self.continuous_cdf is not None:
            total += float(self.continuous_cdf(x))
        return min(total, 1.0)

    def pieces(self, lo: float = 0.0, hi: float = math.inf) -> list[tuple[float, float]]:
        """Sub-intervals of [lo, hi] between breakpoints of the continuous part."""
        a = max(lo, self.support[0])
        b = min(hi, self.support[1])
        if self.continuous_pdf is None or not a < b:
            return []
        cuts = sorted({a, b, *[p for p in self.breakpoints if a < p < b]})
        return list(zip(cuts[:-1], cuts[1:]))

    def total_mass(self, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        mass = self.atom_mass
        if self.offset_pdf is not None:
            return mass + integrate_singular(self.offset_pdf, *self.support, spec, offsets=True).value
        for a, b in self.pieces():
            mass += integrate_singular(self.pdf, a, b, spec).value
        return mass

    def measure(self, spacing: float = 20.0, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
        """Discrete quadrature measure (nodes, weights) approximating the law.

        Atoms enter as nodes with their masses; each continuous piece gets a
        composite Gauss-Legendre rule in the sin^2 variable, with enough
        panels that no panel is wider than ``spacing`` metres.  Weights are
        rescaled so the total is exactly one.
        """
        nodes = [np.array([a for a, _ in self.atoms], dtype=float)]
        weights = [np.array([m for _, m in self.atoms], dtype=float)]
        cont_nodes, cont_w = [], []
        for a, b in self.pieces():
            n_panels = max(2, math.ceil(0.5 * math.pi * (b - a) / spacing))
            x, w = gauss_legendre_panels(a, b, n_panels, order, singular_ends=True)
            cont_nodes.append(x)
            cont_w.append(w * self.pdf(x))
        if cont_nodes:
            cx = np.concatenate(cont_nodes)
            cw = np.concatenate(cont_w)
            target = 1.0 - self.atom_mass
            cw = cw * (target / cw.sum())
            nodes.append(cx)
            weights.append(cw)
        return np.concatenate(nodes), np.concatenate(weights)


def displacement_distribution(t: float, mobility: MobilityConfig,
                              spec: QuadratureSpec = DEFAULT_SPEC) -> DisplacementDistribution:
    """Law of L(t), dispatched on the mobility phase at ``t``."""
    ph = phase_at(mobility, t)
    s = mobility.s
    if ph.hovering or ph.d == 0:
        # At the instant a flight starts the drone is still where it hovered.
        if ph.n <= 1:
            return DisplacementDistribution(((ph.n * s, 1.0),), None, None, ph, t, (ph.n * s, ph.n * s))
        zd = ZnDistribution(ph.n, s)
        return DisplacementDistribution((), zd.pdf, zd.cdf, ph, t, (0.0, zd.cutoff))
    d = ph.d
    if ph.n == 0:
        return DisplacementDistribution(((d, 1.0),), None, None, ph, t, (d, d))
    zd = ZnDistribution(ph.n, s)
    top = zd.cutoff
    if zd.kind is ZnKind.POINT_MASS:
        lo, hi = abs(s - d), s + d

        def one_flight(l, la, lb):
            # L^2 = s^2 + d^2 - 2 s d cos(Phi) with Phi uniform.
            return 2.0 * l / (math.pi * np.sqrt(la * (2.0 * lo + la) * lb * (2.0 * hi - lb)))

        return DisplacementDistribution(
            (), lambda l: ln_pdf(l, t, mobility, spec), lambda x: ln_cdf(x, t, mobility, spec),
            ph, t, (lo, hi), (), one_flight)
    support = (max(0.0, d - top), top + d)
    cuts = (d, abs(top - d))
    return DisplacementDistribution(
        (),
        lambda l: ln_pdf(l, t, mobility, spec),
        lambda x: ln_cdf(x, t, mobility, spec),
        ph, t, support, cuts,
    )


@lru_cache(maxsize=64)
def displacement_measure(t: float, mobility: MobilityConfig, spacing: float = 20.0,
                         order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Cached :meth:`DisplacementDistribution.measure` for time ``t``."""
    nodes, weights = displacement_distribution(t, mobility).measure(spacing, order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights
