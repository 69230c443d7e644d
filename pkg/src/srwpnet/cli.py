"""``srwpnet`` command-line entry point.

Subcommands write CSV (density, rate, simulate) or JSON (validate) to
``--out`` or standard output.  Exit codes: 0 success, 1 a validation
check failed, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, with_seed
from .displacement import displacement_distribution
from .errors import DomainError, NumericalConsistencyError, QuadratureError
from .interference import DensityQuery, density_field, density_profile, displaced_mass, lambda1_direct, udm_density
from .montecarlo import (SimConfig, empirical_density, empirical_rates, simulate_sir, test_psi_uniform,
                         test_zn_fit)
from .quadrature import gauss_legendre_panels
from .rate import Model, average_rate_udm, average_rate_uim

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _num(x: float) -> str:
    return repr(float(x))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _bin_edges(grid: np.ndarray) -> np.ndarray:
    """Annuli centred on the grid points: edges at midpoints, ends mirrored."""
    mids = 0.5 * (grid[:-1] + grid[1:]) if grid.size > 1 else np.array([])
    half = 0.5 * (grid[1] - grid[0]) if grid.size > 1 else max(grid[0], 1.0) * 0.05
    lo = max(grid[0] - half, 0.0)
    hi_half = 0.5 * (grid[-1] - grid[-2]) if grid.size > 1 else half
    return np.concatenate([[lo], mids, [grid[-1] + hi_half]])


def cmd_density(cfg: RunConfig, mc: bool) -> str:
    run = cfg.run
    grid = np.asarray(run.u_x, dtype=float)
    header = ["t", "u_x", "lambda_ratio_analytic"]
    if mc:
        header += ["lambda_ratio_mc", "mc_stderr"]
        hists = empirical_density(run.times, run.u_0, cfg.network, cfg.mobility, cfg.sim,
                                  edges=_bin_edges(grid))
    rows = []
    for j, t in enumerate(run.times):
        prof = density_profile(t, run.u_0, grid, cfg.network, cfg.mobility)
        for i, (u, r) in enumerate(prof.rows()):
            row = [_num(t), _num(u), _num(r)]
            if mc:
                row += [_num(hists[j].ratio[i]), _num(hists[j].stderr[i])]
            rows.append(row)
    return _csv(header, rows)


def _models(choice: str) -> list[Model]:
    return [Model.UIM, Model.UDM] if choice == "both" else [Model(choice)]


def cmd_rate(cfg: RunConfig, units: str) -> str:
    scale = 1.0 / math.log(2.0) if units == "bits" else 1.0
    rows = []
    for model in _models(cfg.run.model):
        if model is Model.UIM:
            r = average_rate_uim(cfg.network, cfg.quad)
            values = [(t, r) for t in cfg.run.times]
        else:
            values = [(t, average_rate_udm(t, cfg.network, cfg.mobility, cfg.quad)) for t in cfg.run.times]
        rows += [[_num(t), model.value, _num(r * scale), units] for t, r in values]
    return _csv(["t", "model", "rate", "units"], rows)


def cmd_simulate(cfg: RunConfig) -> str:
    sim = replace(cfg.sim, time_grid=tuple(cfg.run.times))
    rows = []
    for model in _models(cfg.run.model):
        sir, r0, interf, _ = simulate_sir(cfg.network, cfg.mobility, sim, model)
        for k in range(sir.shape[0]):
            for j, t in enumerate(sim.time_grid):
                rows.append([k, _num(t), model.value, _num(sir[k, j]), _num(r0[k, j]), _num(interf[k, j])])
    return _csv(["trial", "t", "model", "sir", "r0", "interference"], rows)


def _check(name: str, statistic: float, threshold: float, passed: bool) -> dict:
    return {"test": name, "statistic": float(statistic), "threshold": float(threshold), "pass": bool(passed)}


def run_validation(cfg: RunConfig) -> list[dict]:
    """Statistical and cross-formulation checks; one record per check."""
    full = cfg.run.profile == "full"
    net, mob, u0 = cfg.network, cfg.mobility, cfg.run.u_0
    seeds = np.random.SeedSequence(cfg.sim.seed).spawn(8)

    def rng(i):
        return np.random.Generator(np.random.Philox(seeds[i]))

    def seed(i):
        return int(seeds[i].generate_state(1, np.uint64)[0] >> np.uint64(1))

    out = []
    for n in (2, 3, 5):
        res = test_psi_uniform(n, 100_000, rng(0))
        out.append(_check(f"bearing_uniformity_n{n}_pvalue", res.pvalue, 0.01, res.pvalue > 0.01))
    res = test_zn_fit(2, 100_000, rng(1), mob.s)
    out.append(_check("net_displacement_n2_ks_pvalue", res.pvalue, 0.01, res.pvalue > 0.01))
    for n, limit in ((3, 0.05), (50, 0.02)):
        res = test_zn_fit(n, 100_000, rng(1), mob.s)
        out.append(_check(f"net_displacement_n{n}_ks_distance", res.statistic, limit, res.statistic < limit))

    worst = 0.0
    for t in sorted(set(cfg.run.times) | {0.0, 10.0, 30.0, 60.0}):
        worst = max(worst, abs(displacement_distribution(t, mob).total_mass() - 1.0))
    out.append(_check("displacement_total_mass_error", worst, 1e-4, worst < 1e-4))

    for t in cfg.run.times:
        rel = abs(displaced_mass(t, u0, net, mob) / (net.lambda0 * math.pi * u0 * u0) - 1.0) if u0 > 0 else 0.0
        out.append(_check(f"excluded_mass_conservation_t{t:g}", rel, 0.01, rel < 0.01))

    worst = 0.0
    vt_points = [(0.5 * u0 / mob.v, 0.3 * u0), (0.5 * u0 / mob.v, u0), (0.5 * u0 / mob.v, 1.6 * u0)]
    for t in cfg.run.times:
        vt = mob.v * t
        vt_points += [(t, 0.5 * abs(u0 - vt)), (t, 0.5 * (abs(u0 - vt) + u0 + vt)), (t, u0 + vt + 10.0)]
    for t, ux in vt_points:
        lam = udm_density(DensityQuery(t, ux, u0), net, mob)
        worst = max(worst, abs(lam + lambda1_direct(t, ux, u0, net, mob) - net.lambda0) / net.lambda0)
    out.append(_check("excluded_density_complement_error", worst, 1e-3, worst < 1e-3))

    trials = 100_000 if full else 20_000
    sim = SimConfig(r_obs=3000.0, trials=trials, seed=seed(2), batch=cfg.sim.batch)
    for hist in empirical_density(cfg.run.times, u0, net, mob, sim):
        field = density_field(hist.t, mob)
        ok = ~hist.low_confidence
        analytic = []
        for a, b in zip(hist.edges[:-1], hist.edges[1:]):
            u, w = gauss_legendre_panels(a, b, 16, 8)
            analytic.append(np.sum(w * u * field.ratio(u, u0)) / np.sum(w * u))
        dev = float(np.max(np.abs(hist.ratio - np.array(analytic))[ok])) if ok.any() else 0.0
        out.append(_check(f"density_vs_simulation_t{hist.t:g}", dev, 0.03, dev < 0.03))

    rate_times = (0.0, 60.0, 120.0)
    sim = SimConfig(r_obs=3000.0, trials=trials, seed=seed(3), time_grid=rate_times, batch=cfg.sim.batch)
    uim = average_rate_uim(net, cfg.quad)
    uim_mc = empirical_rates(Model.UIM, net, mob, sim)
    rel = abs(uim_mc[0].mean / uim - 1.0)
    out.append(_check("rate_independent_vs_simulation", rel, 0.03, rel < 0.03))
    spread = max(abs(a.mean - b.mean) / math.hypot(a.stderr, b.stderr) for a in uim_mc for b in uim_mc)
    out.append(_check("rate_independent_time_invariance_sigmas", spread, 3.0, spread < 3.0))
    udm_mc = empirical_rates(Model.UDM, net, mob, replace(sim, seed=seed(4)))
    for t, est in zip(rate_times, udm_mc):
        r = average_rate_udm(t, net, mob, cfg.quad)
        rel = abs(est.mean / r - 1.0)
        out.append(_check(f"rate_follow_vs_simulation_t{t:g}", rel, 0.03, rel < 0.03))
        if t == 0.0:
            rel0 = abs(r / uim - 1.0)
            out.append(_check("rate_follow_at_zero_equals_independent", rel0, 1e-4, rel0 < 1e-4))
    return out


def cmd_validate(cfg: RunConfig) -> tuple[str, bool]:
    report = run_validation(cfg)
    return json.dumps(report, indent=2) + "\n", all(r["pass"] for r in report)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="srwpnet", description="Drone network density and rate under SRWP mobility.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=["density", "rate", "simulate", "validate"])
    p.add_argument("--config", required=True, help="INI configuration file")
    p.add_argument("--seed", type=int, default=None, help="override [sim] seed")
    p.add_argument("--mc", action="store_true", help="add Monte Carlo columns (density)")
    p.add_argument("--units", choices=["nats", "bits"], default=None, help="rate units (default from config)")
    p.add_argument("--out", default=None, help="output file (default: standard output)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = with_seed(load_config(args.config), args.seed)
    except ConfigError as exc:
        print(f"srwpnet: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = EXIT_OK
    try:
        if args.command == "density":
            text = cmd_density(cfg, args.mc or cfg.run.mc)
        elif args.command == "rate":
            text = cmd_rate(cfg, args.units or cfg.run.units)
        elif args.command == "simulate":
            text = cmd_simulate(cfg)
        else:
            text, ok = cmd_validate(cfg)
            code = EXIT_OK if ok else EXIT_FAILED
    except (QuadratureError, NumericalConsistencyError) as exc:
        print(f"srwpnet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"srwpnet: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
