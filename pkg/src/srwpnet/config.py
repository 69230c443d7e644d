"""Run configuration: a flat INI file with typed sections.

Example::

    [network]
    lambda0 = 1e-6
    h = 100
    alpha = 3

    [mobility]
    v = 12.5       ; 45 km/h
    w = 5
    s = 250

    [run]
    u_0 = 500
    times = 40, 70, 170, 300
    u_x = 0:3000:25

Ranges ``start:stop:step`` include ``stop`` when it falls on the grid.
Errors are reported with the offending line number.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .core import MobilityConfig, NetworkConfig
from .errors import SrwpError
from .montecarlo import MarginPolicy, SimConfig
from .quadrature import QuadratureSpec
from .rate import RATE_SPEC


class ConfigError(SrwpError, ValueError):
    """Malformed or invalid configuration file."""


_MODELS = ("uim", "udm", "both")
_UNITS = ("nats", "bits")
_PROFILES = ("fast", "full")


@dataclass(frozen=True)
class RunOptions:
    u_0: float = 500.0
    times: tuple[float, ...] = (40.0, 70.0, 170.0, 300.0)
    u_x: tuple[float, ...] = tuple(float(x) for x in np.arange(0.0, 3000.0 + 1e-9, 25.0))
    model: str = "both"
    units: str = "nats"
    mc: bool = False
    profile: str = "fast"


@dataclass(frozen=True)
class RunConfig:
    network: NetworkConfig = NetworkConfig(1e-6, 100.0, 3.0)
    mobility: MobilityConfig = MobilityConfig(12.5, 5.0, 250.0)
    sim: SimConfig = SimConfig()
    quad: QuadratureSpec = RATE_SPEC
    run: RunOptions = RunOptions()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, tuple):
        return ", ".join(_fmt(v) for v in x)
    if hasattr(x, "value"):
        return str(x.value)
    return str(x)


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        a, b, step = (float(p) for p in parts)
        if not step > 0 or b < a:
            raise ValueError(f"range needs stop >= start and a positive step, got {text!r}")
        n = int(np.floor((b - a) / step + 1e-9))
        return tuple(float(a + k * step) for k in range(n + 1))
    if not text:
        return ()
    return tuple(float(p) for p in text.split(","))


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(options):
    def parse(text: str) -> str:
        low = text.strip().lower()
        if low not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return low
    return parse


# section -> key -> parser
_SCHEMA = {
    "network": {"lambda0": float, "h": float, "alpha": float, "P": float},
    "mobility": {"v": float, "w": float, "s": float},
    "sim": {"r_obs": float, "margin_policy": MarginPolicy, "trials": int, "seed": int,
            "time_grid": _floats, "batch": int},
    "quad": {"rel_tol": float, "abs_tol": float, "max_subdivisions": int, "tail_epsilon": float},
    "run": {"u_0": float, "times": _floats, "u_x": _floats, "model": _choice(_MODELS),
            "units": _choice(_UNITS), "mc": _bool, "profile": _choice(_PROFILES)},
}


def _key_lines(text: str) -> dict:
    """(section, key) -> line number, for error messages."""
    out, section = {}, None
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"\s*([^=:;#\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            out[(section, m.group(1).strip())] = i
    return out


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Build a :class:`RunConfig` from INI text; missing keys keep their defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _key_lines(text)
    base = RunConfig()
    parsed: dict = {name: {} for name in _SCHEMA}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in cp.items(section):
            line = lines.get((section, key), "?")
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{source}, line {line}: unknown key {key!r} in [{section}]")
            try:
                parsed[section][key] = _SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigError(f"{source}, line {line}: [{section}] {key}: {exc}") from None

    def build(section, current):
        changes = parsed[section]
        if not changes:
            return current
        try:
            return replace(current, **changes)
        except (ValueError, ArithmeticError) as exc:
            # Point at the key the message names, else the first key set.
            named = [k for k in changes if re.search(rf"\b{re.escape(k)}\b", str(exc))]
            keys = named or list(changes)
            line = min(lines.get((section, k), 10**9) for k in keys)
            raise ConfigError(f"{source}, line {line}: [{section}] {exc}") from None

    cfg = RunConfig(
        network=build("network", base.network),
        mobility=build("mobility", base.mobility),
        sim=build("sim", base.sim),
        quad=build("quad", base.quad),
        run=build("run", base.run),
    )
    _check_run(cfg.run, source, lines)
    return cfg


def _check_run(run: RunOptions, source: str, lines: dict) -> None:
    for key in ("times", "u_x"):
        grid = getattr(run, key)
        line = lines.get(("run", key), "?")
        if not grid:
            raise ConfigError(f"{source}, line {line}: [run] {key} must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"{source}, line {line}: [run] {key} must be strictly increasing")
        if grid[0] < 0:
            raise ConfigError(f"{source}, line {line}: [run] {key} must be non-negative")
    if run.u_0 < 0:
        raise ConfigError(f"{source}, line {lines.get(('run', 'u_0'), '?')}: [run] u_0 must be non-negative")


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text, str(p))


def dump_config(cfg: RunConfig) -> str:
    """Serialise every field, so that ``parse_config(dump_config(c)) == c``."""
    out = []
    for section in _SCHEMA:
        obj = getattr(cfg, section)
        out.append(f"[{section}]")
        for f in fields(obj):
            if f.name in _SCHEMA[section]:
                out.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
        out.append("")
    return "\n".join(out)


def with_seed(cfg: RunConfig, seed: int | None) -> RunConfig:
    if seed is None:
        return cfg
    return replace(cfg, sim=replace(cfg.sim, seed=int(seed)))

