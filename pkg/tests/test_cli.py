import json
import math
from pathlib import Path

import pytest

from srwpnet.cli import main
from srwpnet.config import ConfigError, RunConfig, dump_config, parse_config

SMALL = """\
[network]
lambda0 = 1e-6
h = 100
alpha = 3

[mobility]
v = 12.5
w = 5
s = 250

[sim]
trials = 300
batch = 100
seed = 7

[run]
u_0 = 500
times = 0, 40
u_x = 0:1000:250
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(SMALL)
    return p


def test_config_round_trip():
    cfg = parse_config(SMALL)
    assert parse_config(dump_config(cfg)) == cfg
    assert parse_config(dump_config(RunConfig())) == RunConfig()


def test_config_ranges_include_stop():
    assert parse_config(SMALL).run.u_x == (0.0, 250.0, 500.0, 750.0, 1000.0)


@pytest.mark.parametrize("text, line", [
    ("[network]\nlambda0 = 1e-6\nh = 100\nalpha = 1.5\n", 4),
    ("[network]\nh = tall\n", 2),
    ("[mobility]\nv = 12.5\nspeed = 3\n", 3),
    ("[run]\n\ntimes = 10, 5\n", 3),
])
def test_config_errors_name_the_line(text, line):
    with pytest.raises(ConfigError, match=f"line {line}"):
        parse_config(text)


def test_density_csv(cfg_file, capsys):
    assert main(["density", "--config", str(cfg_file)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,u_x,lambda_ratio_analytic"
    assert len(lines) == 1 + 2 * 5
    assert lines[1] == "0.0,0.0,0.0"


def test_density_mc_is_byte_identical(cfg_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["density", "--config", str(cfg_file), "--mc", "--out", str(a)]) == 0
    assert main(["density", "--config", str(cfg_file), "--mc", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0].endswith("lambda_ratio_mc,mc_stderr")


def test_simulate_seed_override(cfg_file, tmp_path):
    outs = []
    for seed in ("1", "1", "2"):
        p = tmp_path / f"sim{len(outs)}.csv"
        assert main(["simulate", "--config", str(cfg_file), "--seed", seed, "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] != outs[2]


def test_rate_units(tmp_path, capsys):
    p = tmp_path / "r.ini"
    p.write_text(SMALL.replace("times = 0, 40", "times = 0").replace("[run]", "[run]\nmodel = uim"))
    assert main(["rate", "--config", str(p)]) == 0
    nats = float(capsys.readouterr().out.splitlines()[1].split(",")[2])
    assert main(["rate", "--config", str(p), "--units", "bits"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[-1] == "bits"
    assert float(row[2]) == pytest.approx(nats / math.log(2), rel=1e-12)


def test_divergent_exponent_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text(SMALL.replace("alpha = 3", "alpha = 1.5"))
    assert main(["rate", "--config", str(p)]) == 2
    assert "diverge" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(["density", "--config", str(tmp_path / "nope.ini")]) == 2
