"""Monte Carlo simulation of the drone network.

Everything here is sampled directly from the mobility rules (bearings,
flights, hovers) and never calls the analytic density or rate code, so
it can serve as an independent check on both.

Randomness: the root seed is expanded with ``SeedSequence.spawn`` into
one stream per batch of trials.  Results depend only on the seed, the
configuration and the batch size, never on timing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from .core import MobilityConfig, NetworkConfig, make_rng, uniform_disc
from .displacement import zn_cdf
from .errors import DomainError
from .mobility import sample_displacement_paths
from .rate import Model


class MarginPolicy(enum.Enum):
    """How interference from beyond the simulated disc is accounted for.

    ``MEAN_FIELD`` counts drones inside the region where the simulated
    field is complete at time t and adds the mean interference of the
    homogeneous field outside it.  ``TRUNCATE`` only counts simulated
    drones, so an isolated serving drone gives an infinite SIR.
    """

    MEAN_FIELD = "mean-field"
    TRUNCATE = "truncate"


@dataclass(frozen=True)
class SimConfig:
    r_obs: float = 3000.0
    margin_policy: MarginPolicy = MarginPolicy.MEAN_FIELD
    trials: int = 10_000
    seed: int = 0
    time_grid: tuple[float, ...] = (0.0,)
    batch: int = 2000

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be at least 1, got {self.trials}")
        if not self.r_obs > 0:
            raise DomainError(f"observation radius must be positive, got {self.r_obs}")
        if self.batch < 1:
            raise DomainError(f"batch must be at least 1, got {self.batch}")
        if any(t < 0 for t in self.time_grid):
            raise DomainError("simulation times must be non-negative")
        object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))

    def r_sim(self, mobility: MobilityConfig) -> float:
        """Radius beyond which no drone can reach the observation disc in time."""
        t_max = max(self.time_grid, default=0.0)
        return self.r_obs + mobility.v * t_max + 10.0 * mobility.s


class SirSample(NamedTuple):
    t: float
    sir: float
    r0: float
    interference: float


class RateEstimate(NamedTuple):
    mean: float
    stderr: float
    n: int
    infinite: int
    resampled: int


@dataclass
class DensityHistogram:
    """Interferer density divided by lambda0, per annulus of u_x."""

    t: float
    u_0: float
    edges: np.ndarray
    ratio: np.ndarray
    stderr: np.ndarray
    expected: np.ndarray
    trials: int
    low_confidence: np.ndarray = field(init=False)

    def __post_init__(self):
        self.low_confidence = self.expected < 100


def batch_streams(seed: int, trials: int, batch: int):
    """(size, rng) pairs covering ``trials``, one independent stream per batch."""
    n_batches = -(-trials // batch)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    for i, ss in enumerate(children):
        size = min(batch, trials - i * batch)
        yield size, np.random.Generator(np.random.Philox(ss))


def _far_field(cfg: NetworkConfig, radius: float) -> float:
    """Mean interference from a homogeneous field beyond ``radius`` (unit power and fading)."""
    return (2.0 * math.pi * cfg.lambda0 * (radius * radius + cfg.h * cfg.h) ** (1.0 - 0.5 * cfg.alpha)
            / (cfg.alpha - 2.0))


class _Batch(NamedTuple):
    sir: np.ndarray       # (B, T), inf where interference is zero
    r0: np.ndarray        # (B, T)
    interference: np.ndarray
    resampled: int


def _simulate_batch(size: int, cfg: NetworkConfig, mobility: MobilityConfig, sim: SimConfig,
                    model: Model, rng: np.random.Generator) -> _Batch:
    times = np.asarray(sim.time_grid, dtype=float)
    r_sim = sim.r_sim(mobility)
    mean_n = cfg.lambda0 * math.pi * r_sim * r_sim
    counts = rng.poisson(mean_n, size)
    resampled = 0
    while np.any(counts == 0):
        # A realization with no drone has no server; redraw it.
        empty = counts == 0
        resampled += int(empty.sum())
        counts[empty] = rng.poisson(mean_n, int(empty.sum()))
    n_max = int(counts.max())
    total = int(counts.sum())
    start = uniform_disc(total, r_sim, rng)
    moves = sample_displacement_paths(total, times, mobility, rng)
    owner = np.repeat(np.arange(size), counts)
    slot = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    valid = np.zeros((size, n_max), dtype=bool)
    valid[owner, slot] = True

    x0 = np.zeros((size, n_max, 2))
    x0[owner, slot] = start
    r_init = np.where(valid, np.hypot(x0[..., 0], x0[..., 1]), np.inf)
    first = np.argmin(r_init, axis=1)
    u0 = r_init[np.arange(size), first]

    n_t = times.size
    h2 = cfg.h * cfg.h
    sir = np.empty((size, n_t))
    r0 = np.empty((size, n_t))
    interf = np.empty((size, n_t))
    rows = np.arange(size)
    for j, t in enumerate(times):
        pos = np.zeros((size, n_max, 2))
        pos[owner, slot] = start + moves[:, j, :]
        u = np.hypot(pos[..., 0], pos[..., 1])
        complete = r_sim - mobility.v * t
        counted = valid & (u <= complete) if sim.margin_policy is MarginPolicy.MEAN_FIELD else valid.copy()
        if model is Model.UDM:
            server = first
            serving_u = np.maximum(u0 - mobility.v * t, 0.0)
        else:
            server = np.argmin(np.where(valid, u, np.inf), axis=1)
            serving_u = u[rows, server]
        counted[rows, server] = False
        gain = rng.exponential(1.0, (size, n_max))
        path = np.where(counted, gain * (u * u + h2) ** (-0.5 * cfg.alpha), 0.0)
        total_i = path.sum(axis=1)
        if sim.margin_policy is MarginPolicy.MEAN_FIELD:
            total_i = total_i + _far_field(cfg, complete)
        d0 = serving_u * serving_u + h2
        signal = rng.exponential(1.0, size) * d0 ** (-0.5 * cfg.alpha)
        with np.errstate(divide="ignore"):
            sir[:, j] = np.where(total_i > 0, signal / np.where(total_i > 0, total_i, 1.0), np.inf)
        r0[:, j] = np.sqrt(d0)
        interf[:, j] = total_i
    return _Batch(sir, r0, interf, resampled)


def simulate_realization(cfg: NetworkConfig, mobility: MobilityConfig, sim: SimConfig,
                         model: Model, rng: np.random.Generator) -> list[SirSample]:
    """One network realization observed at every time of ``sim.time_grid``.

    Transmit power is left out: it scales signal and interference alike.
    An infinite ``sir`` marks a realization with no counted interferer.
    """
    b = _simulate_batch(1, cfg, mobility, sim, model, rng)
    return [SirSample(t, float(b.sir[0, j]), float(b.r0[0, j]), float(b.interference[0, j]))
            for j, t in enumerate(sim.time_grid)]


def simulate_sir(cfg: NetworkConfig, mobility: MobilityConfig, sim: SimConfig,
                 model: Model) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """SIR, serving distance and interference for all trials, shape (trials, len(time_grid))."""
    parts = [_simulate_batch(size, cfg, mobility, sim, model, rng)
             for size, rng in batch_streams(sim.seed, sim.trials, sim.batch)]
    return (np.concatenate([p.sir for p in parts]), np.concatenate([p.r0 for p in parts]),
            np.concatenate([p.interference for p in parts]), sum(p.resampled for p in parts))


def empirical_rates(model: Model, cfg: NetworkConfig, mobility: MobilityConfig,
                    sim: SimConfig) -> list[RateEstimate]:
    """Mean and standard error of log(1 + SIR) at each time of ``sim.time_grid``."""
    if sim.trials < 1000:
        raise DomainError(f"rate estimates need at least 1000 trials, got {sim.trials}")
    sir, _, _, resampled = simulate_sir(cfg, mobility, sim, model)
    out = []
    for j in range(sir.shape[1]):
        col = sir[:, j]
        finite = np.isfinite(col)
        vals = np.log1p(col[finite])
        n = int(vals.size)
        se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        out.append(RateEstimate(float(vals.mean()), se, n, int((~finite).sum()), resampled))
    return out


def empirical_rate(t: float, model: Model, cfg: NetworkConfig, mobility: MobilityConfig,
                   sim: SimConfig, rng: np.random.Generator | None = None) -> RateEstimate:
    """Mean and standard error of log(1 + SIR(t)).

    Streams come from ``sim.seed``; ``rng``, if given, only supplies that seed.
    """
    if rng is not None:
        sim = _with(sim, seed=int(rng.integers(2**63)))
    return empirical_rates(model, cfg, mobility, _with(sim, time_grid=(float(t),)))[0]


def empirical_coverage(gammas: Sequence[float], t: float, model: Model, cfg: NetworkConfig,
                       mobility: MobilityConfig, sim: SimConfig) -> tuple[np.ndarray, int]:
    """Fraction of trials with SIR(t) > gamma, for each gamma, and the trial count."""
    sir, _, _, _ = simulate_sir(cfg, mobility, _with(sim, time_grid=(float(t),)), model)
    col = sir[:, 0]
    return np.array([(col > g).mean() for g in gammas]), col.size


def _with(sim: SimConfig, **changes) -> SimConfig:
    kw = dict(r_obs=sim.r_obs, margin_policy=sim.margin_policy, trials=sim.trials,
              seed=sim.seed, time_grid=sim.time_grid, batch=sim.batch)
    kw.update(changes)
    return SimConfig(**kw)


def equal_area_edges(r_max: float, n_bins: int) -> np.ndarray:
    """Annulus edges on [0, r_max] with equal areas."""
    if n_bins < 1 or not r_max > 0:
        raise DomainError("need at least one bin and a positive radius")
    return r_max * np.sqrt(np.linspace(0.0, 1.0, n_bins + 1))


def empirical_density(times: Sequence[float], u_0: float, cfg: NetworkConfig,
                      mobility: MobilityConfig, sim: SimConfig,
                      edges: np.ndarray | None = None) -> list[DensityHistogram]:
    """Histogram of interferer density / lambda0 around the user at each time.

    Initial interferers are a PPP of density lambda0 on the annulus
    u_0 <= |x| <= r_obs + v t_max (no drone from further out can reach the
    observation disc), so the exclusion condition holds by construction.
    Each of ``sim.trials`` realizations moves all its drones; drones
    are counted per annulus and normalised by lambda0 * area * trials.
    """
    times = [float(t) for t in times]
    if edges is None:
        edges = equal_area_edges(sim.r_obs, 30)
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be strictly increasing with positive width")
    if u_0 < 0:
        raise DomainError("u_0 must be non-negative")
    reach = edges[-1] + mobility.v * max(times)
    if reach <= u_0:
        raise DomainError("observation region lies inside the exclusion disc")
    area = math.pi * (reach * reach - u_0 * u_0)
    counts = np.zeros((len(times), edges.size - 1))
    for size, rng in batch_streams(sim.seed, sim.trials, sim.batch):
        n = int(rng.poisson(cfg.lambda0 * area * size))
        start = uniform_disc(n, reach, rng, inner=u_0)
        moves = sample_displacement_paths(n, times, mobility, rng)
        for j in range(len(times)):
            p = start + moves[:, j, :]
            counts[j] += np.histogram(np.hypot(p[:, 0], p[:, 1]), bins=edges)[0]
    ring = math.pi * np.diff(edges ** 2)
    expected = cfg.lambda0 * ring * sim.trials
    out = []
    for j, t in enumerate(times):
        out.append(DensityHistogram(t, float(u_0), edges, counts[j] / expected,
                                    np.sqrt(counts[j]) / expected, expected, sim.trials))
    return out


class ChiSquareResult(NamedTuple):
    statistic: float
    pvalue: float


class KSResult(NamedTuple):
    statistic: float
    pvalue: float


def sample_psi(n: int, samples: int, rng: np.random.Generator, bearing_span: float = 2.0 * math.pi):
    """Bearing in [0, 2 pi) of the sum of ``n`` unit steps with bearings uniform on [0, span)."""
    th = rng.uniform(0.0, bearing_span, (samples, n))
    return np.mod(np.arctan2(np.sin(th).sum(axis=1), np.cos(th).sum(axis=1)), 2.0 * math.pi)


def test_psi_uniform(n: int, samples: int, rng: np.random.Generator,
                     bearing_span: float = 2.0 * math.pi, bins: int = 36) -> ChiSquareResult:
    """Chi-square test that the bearing of the net displacement is uniform."""
    if n < 2 or samples < 10_000:
        raise DomainError("need n >= 2 and at least 10^4 samples")
    psi = sample_psi(n, samples, rng, bearing_span)
    observed = np.histogram(psi, bins=bins, range=(0.0, 2.0 * math.pi))[0]
    res = stats.chisquare(observed)
    return ChiSquareResult(float(res.statistic), float(res.pvalue))


def sample_zn(n: int, samples: int, s: float, rng: np.random.Generator) -> np.ndarray:
    """Net displacement after ``n`` flights of length ``s``."""
    th = rng.uniform(0.0, 2.0 * math.pi, (samples, n))
    return s * np.hypot(np.cos(th).sum(axis=1), np.sin(th).sum(axis=1))


def test_zn_fit(n: int, samples: int, rng: np.random.Generator, s: float = 250.0) -> KSResult:
    """Kolmogorov-Smirnov comparison of simulated Z_n against :func:`zn_cdf`."""
    if n < 2:
        raise DomainError("need n >= 2")
    z = sample_zn(n, samples, s, rng)
    res = stats.kstest(z, lambda x: zn_cdf(n, s, x))
    return KSResult(float(res.statistic), float(res.pvalue))


# Keep pytest from collecting these when imported into a test module.
test_psi_uniform.__test__ = False
test_zn_fit.__test__ = False


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Stand-alone stream for one trial, for callers that run trials one by one."""
    return make_rng([seed, index])
