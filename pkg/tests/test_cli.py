import csv
import io
import time

import pytest

from slopecoder.cli import main
from slopecoder.errors import ConfigError
from slopecoder.experiment import (ExperimentConfig, aggregate_csv, curves_csv, emit_energy_trace, parse_config,
                                   rows_to_csv, run_oracle_suite, sweep_rows, worker_count)

SMALL = """\
# smoke configuration
source = bsms:0.2
n = 300
k = 3
alphas = 2.0, 1.0
trials = 3
seed = 5
"""


def write(tmp_path, text, name="cfg.txt"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_config():
    cfg = parse_config(SMALL)
    assert cfg.source == "bsms:0.2" and cfg.n == 300 and cfg.alphas == [2.0, 1.0]
    assert cfg.slopes() == [2.0, 1.0]
    assert parse_config(cfg.to_text()).to_text() == cfg.to_text()


@pytest.mark.parametrize("text,message", [
    ("n = 10\nbogus = 1\n", "<config>:2: unknown key 'bogus'"),
    ("n = ten\n", "<config>:1: bad value for 'n'"),
    ("n = 10\nn = 11\n", "<config>:2: duplicate key 'n'"),
    ("just words\n", "<config>:1: expected 'key = value'"),
])
def test_config_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(text)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(n=5, k=8).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(alphas=[1.0, 2.0]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(alpha_step=0.07).validate()


def test_single_row_smoke(tmp_path):
    cfg = write(tmp_path, "source = bern:0.5\nn = 100\nk = 2\nalphas = 1.0\ntrials = 1\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "out" / "rows.csv")))
    assert len(rows) == 1
    assert set(rows[0]) >= {"seed", "alpha", "distortion", "rate_hk", "lz_rate", "energy", "iterations",
                            "converged", "wall_ms"}


def test_sweep_bytes_are_stable(tmp_path):
    cfg = parse_config(SMALL)
    one = rows_to_csv(sweep_rows(cfg, workers=1))
    two = rows_to_csv(sweep_rows(cfg, workers=2))
    assert one == two
    assert "\r" not in one
    # floats carry 9 significant digits
    first = next(csv.DictReader(io.StringIO(one)))
    assert len(first["rate_hk"].replace("0.", "").lstrip("0")) <= 9


def test_aggregate_recomputes_exactly(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--trials", "2"]) == 0
    rows = (tmp_path / "o" / "rows.csv").read_text()
    assert aggregate_csv(rows) == (tmp_path / "o" / "aggregate.csv").read_text()
    agg = list(csv.DictReader(io.StringIO(aggregate_csv(rows))))
    assert [a["alpha"] for a in agg] == ["2", "1"] and agg[0]["trials"] == "2"


def test_timing_column(tmp_path):
    cfg = parse_config(SMALL).with_overrides(timing="true", trials=1)
    rows = sweep_rows(cfg)
    assert all(r["wall_ms"] > 0 for r in rows)
    assert all(r["wall_ms"] is None for r in sweep_rows(parse_config(SMALL).with_overrides(trials=1)))


def test_flag_overrides(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--trials", "1",
                 "--alphas", "1.5"]) == 0
    rows = list(csv.DictReader(open(tmp_path / "o" / "rows.csv")))
    assert [r["alpha"] for r in rows] == ["1.5"]


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "n = 10\nfoo = 2\n")
    assert main(["sweep", "--config", str(cfg)]) == 2
    assert "cfg.txt:2: unknown key 'foo'" in capsys.readouterr().err


def test_oracle_command(tmp_path, capsys):
    start = time.perf_counter()
    assert main(["oracle", "--nmax", "4", "--kmax", "1", "--alphas", "0.25,0.5,1,2",
                 "--out", str(tmp_path / "o.csv")]) == 0
    assert time.perf_counter() - start < 1.0
    assert "PASS" in capsys.readouterr().out
    rows = list(csv.DictReader(open(tmp_path / "o.csv")))
    assert len(rows) == 16 * 4 + 16 * 4 * 2
    assert all(r["holds"] == "1" for r in rows)


def test_oracle_empty_alphas(capsys):
    assert main(["oracle", "--alphas", ""]) == 2
    assert "at least one slope" in capsys.readouterr().err


def test_oracle_suite_default_grid():
    result = run_oracle_suite(6, 1, [0.25, 0.5, 1, 2], conventions=())
    assert len(result.theorem1) == 256 and result.violations == 0


def test_trace_constant_source():
    cfg = ExperimentConfig(source="bern:0", n=200, k=3)
    text, res = emit_energy_trace(cfg, 1.6)
    lines = text.splitlines()
    assert lines[0] == "t,energy,energy_linear"
    assert len(lines) == 2 and res.iterations == 1


def test_trace_command(tmp_path):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "trace.csv"
    assert main(["trace", "--config", str(cfg), "--alpha", "1.6", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    energies = [float(r["energy_linear"]) for r in rows]
    assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))


def test_curves(tmp_path):
    text = curves_csv("bern:0.5", 0.1)
    assert text.splitlines()[:2] == ["D,R", "0,1"]
    out = tmp_path / "c.csv"
    assert main(["curves", "--source", "bsms:0.2", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1] == "0,0.721928095"


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SLOPECODER_THREADS", "1")
    assert worker_count(8) == 1
    monkeypatch.delenv("SLOPECODER_THREADS")
    assert worker_count(3) == 3
