"""Simplified random waypoint (SRWP) trajectories and their kinematics.

A drone hovers for ``w`` seconds, flies ``s`` metres at speed ``v`` along a
fresh uniform bearing, hovers again, and so on.  Everything here is exact
geometry; distributional approximations live in :mod:`srwpnet.displacement`.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import MobilityConfig, PlanarPoint, wrap_angle
from .errors import DomainError, UndefinedBearingError


class PhaseKind(enum.Enum):
    HOVER = "hover"
    FLIGHT = "flight"


@dataclass(frozen=True)
class Phase:
    """Where a drone is in its hover/flight cycle.

    ``n`` counts completed flights; ``d`` is the distance already covered
    in the current flight (``None`` while hovering).
    """

    n: int
    kind: PhaseKind
    d: float | None = None

    @property
    def hovering(self) -> bool:
        return self.kind is PhaseKind.HOVER


def phase_at(mobility: MobilityConfig, t: float) -> Phase:
    """Phase at time ``t``; a boundary instant belongs to the phase starting there."""
    if not t >= 0:
        raise DomainError(f"time must be non-negative, got {t}")
    cycle = mobility.cycle
    n = int(math.floor(t / cycle))
    tau = t - n * cycle
    if tau < 0:
        n -= 1
        tau += cycle
    elif tau >= cycle:
        n += 1
        tau -= cycle
    if tau < mobility.w:
        return Phase(n, PhaseKind.HOVER)
    d = mobility.v * (tau - mobility.w)
    if d >= mobility.s:
        return Phase(n + 1, PhaseKind.HOVER)
    return Phase(n, PhaseKind.FLIGHT, d)


def net_displacement(bearings: Sequence[float], s: float) -> float:
    """Straight-line distance covered after flights along ``bearings``."""
    if len(bearings) == 0:
        return 0.0
    th = np.asarray(bearings, dtype=float)
    return float(s * math.hypot(np.cos(th).sum(), np.sin(th).sum()))


def bearing_of_net(bearings: Sequence[float]) -> float:
    """Direction of the net displacement vector, in [-pi, pi)."""
    th = np.asarray(bearings, dtype=float)
    if th.size == 0:
        raise UndefinedBearingError("no completed flights: net displacement is zero")
    cx, cy = np.cos(th).sum(), np.sin(th).sum()
    if math.hypot(cx, cy) <= 1e-12 * th.size:
        raise UndefinedBearingError("net displacement is zero; its bearing is undefined")
    return wrap_angle(math.atan2(cy, cx))


@dataclass
class Trajectory:
    """One drone's SRWP path: an origin and a lazily drawn bearing sequence.

    Bearings are drawn from ``rng`` on first need and cached, so repeated
    queries see the same path.  A trajectory built with explicit
    ``bearings`` and no ``rng`` cannot be extended past them.
    """

    origin: PlanarPoint
    mobility: MobilityConfig
    rng: np.random.Generator | None = None
    bearings: list[float] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def bearings_upto(self, k: int) -> np.ndarray:
        if len(self.bearings) < k:
            with self._lock:
                missing = k - len(self.bearings)
                if missing > 0:
                    if self.rng is None:
                        raise DomainError(
                            f"trajectory has {len(self.bearings)} fixed bearings, {k} needed")
                    self.bearings.extend(self.rng.uniform(0.0, 2.0 * math.pi, missing).tolist())
        return np.asarray(self.bearings[:k], dtype=float)

    def _flights_for(self, t: float) -> tuple[Phase, np.ndarray]:
        ph = phase_at(self.mobility, t)
        k = ph.n if ph.hovering else ph.n + 1
        return ph, self.bearings_upto(k)


def position_at(traj: Trajectory, t: float) -> PlanarPoint:
    """Position in the drone plane at time ``t``, by summing flight vectors."""
    ph, th = traj._flights_for(t)
    s = traj.mobility.s
    done = th[:ph.n]
    x = traj.origin.x + s * np.cos(done).sum()
    y = traj.origin.y + s * np.sin(done).sum()
    if not ph.hovering:
        x += ph.d * math.cos(th[ph.n])
        y += ph.d * math.sin(th[ph.n])
    return PlanarPoint(float(x), float(y))


def displacement_at(traj: Trajectory, t: float) -> float:
    """Distance between the drone at time ``t`` and its initial position."""
    return (position_at(traj, t) - traj.origin).norm()


def flight_geometry(traj: Trajectory, t: float):
    """Net displacement, its bearing, and the turn angle into the current flight.

    Returns ``(phase, Z, psi, phi)``.  ``psi`` is ``None`` when nothing has
    been flown yet or the completed flights cancel out; ``phi`` (in
    [0, 2 pi)) is ``None`` while hovering or when ``psi`` is undefined.
    """
    ph, th = traj._flights_for(t)
    done = th[:ph.n]
    z = net_displacement(done, traj.mobility.s)
    try:
        psi = bearing_of_net(done)
    except UndefinedBearingError:
        psi = None
    phi = None
    if not ph.hovering and psi is not None:
        phi = float(np.mod(th[ph.n] - psi - math.pi, 2.0 * math.pi))
    return ph, z, psi, phi


def displacement_cosine_law(traj: Trajectory, t: float) -> float:
    """Displacement via the law of cosines on (Z_n, d, Phi_n).

    Independent of :func:`displacement_at`, which sums the flight vectors.
    """
    ph, z, psi, phi = flight_geometry(traj, t)
    if ph.hovering:
        return z
    if phi is None:
        return ph.d
    sq = z * z + ph.d * ph.d - 2.0 * z * ph.d * math.cos(phi)
    return math.sqrt(max(sq, 0.0))


@dataclass(frozen=True)
class ServingTrack:
    """Serving drone flying straight towards the user, then hovering above it."""

    u0: float
    v: float

    def __post_init__(self):
        if not self.u0 >= 0:
            raise DomainError(f"initial serving distance must be non-negative, got {self.u0}")
        if not self.v > 0:
            raise DomainError(f"speed must be positive, got {self.v}")

    @property
    def arrival_time(self) -> float:
        return self.u0 / self.v


def serving_distance_at(track: ServingTrack, t):
    """Horizontal serving distance ``max(u0 - v t, 0)``."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise DomainError("time must be non-negative")
    out = np.maximum(track.u0 - track.v * tt, 0.0)
    return float(out) if out.ndim == 0 else out


def sample_displacement_paths(n: int, times: Sequence[float], mobility: MobilityConfig,
                              rng: np.random.Generator) -> np.ndarray:
    """Displacement vectors of ``n`` independent drones at each time.

    Returns shape (n, len(times), 2).  Each drone uses one bearing
    sequence for all times, so the rows are genuine trajectories.
    """
    phases = [phase_at(mobility, float(t)) for t in times]
    k = max((p.n if p.hovering else p.n + 1) for p in phases) if phases else 0
    out = np.zeros((n, len(phases), 2))
    if k == 0 or n == 0:
        return out
    th = rng.uniform(0.0, 2.0 * math.pi, (n, k))
    c, s_ = np.cos(th), np.sin(th)
    cx = np.concatenate([np.zeros((n, 1)), np.cumsum(c, axis=1)], axis=1)
    cy = np.concatenate([np.zeros((n, 1)), np.cumsum(s_, axis=1)], axis=1)
    for j, p in enumerate(phases):
        out[:, j, 0] = mobility.s * cx[:, p.n]
        out[:, j, 1] = mobility.s * cy[:, p.n]
        if not p.hovering:
            out[:, j, 0] += p.d * c[:, p.n]
            out[:, j, 1] += p.d * s_[:, p.n]
    return out
