import json

import numpy as np
import pytest

from conormal_lab import cli
from conormal_lab.cli import ExperimentConfig, b1_rows, fit_slope, main, parse_config, serialize_config
from conormal_lab.errors import ConfigError, StepUnderflow


def data_rows(path):
    return np.array([[float(v) for v in line.split()] for line in open(path) if not line.startswith("#")])


def test_config_round_trip():
    cfg = ExperimentConfig("reflect", alpha=1.2, h_inv_min=1100.0, h_inv_max=2000.0, points=90, jobs=3,
                           seed=(-0.2, 0.0, 0.6, 0.8), out="x.dat", conjectural=True)
    again = ExperimentConfig(**parse_config(serialize_config(cfg)))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_parse_config_errors():
    with pytest.raises(ConfigError):
        parse_config("nonsense line")
    with pytest.raises(ConfigError):
        parse_config("bogus = 1")
    with pytest.raises(ConfigError):
        parse_config("free = maybe")
    assert parse_config("# header\nh-inv-min = 5  # trailing\n") == {"h_inv_min": 5.0}


def test_h_specifications():
    assert ExperimentConfig("reflect", alpha=0.5, h=(0.1, 0.01)).validate().h_values() == [0.1, 0.01]
    hs = ExperimentConfig("reflect", alpha=0.5, h_inv_min=10, h_inv_max=20, points=3).h_values()
    assert hs == pytest.approx([0.1, 1 / 15, 0.05])
    hs = ExperimentConfig("reflect", alpha=0.5, h_log_min=1e-4, h_log_max=1e-2, points=3).h_values()
    assert hs == pytest.approx([1e-4, 1e-3, 1e-2])
    with pytest.raises(ConfigError):
        ExperimentConfig("reflect", alpha=0.5).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig("reflect", alpha=0.5, h=(0.1,), h_inv_min=3, h_inv_max=4, points=2).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig("reflect", alpha=0.5, h_inv_min=3).validate()


def test_exit_code_config_error(capsys):
    assert main(["reflect", "--alpha", "0.5"]) == 2
    assert main(["appendix-compare", "--alpha", "1.2", "--h", "0.01"]) == 2
    assert main(["reflect", "--config", "/nonexistent/file.cfg"]) == 2
    assert main(["reflect", "--alpha", "0.5", "--h", "0.1", "--out", "/nonexistent/dir/x.dat"]) == 2


def test_reflect_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.dat", tmp_path / "b.dat"
    args = ["reflect", "--alpha", "1.2", "--h-inv-min", "100", "--h-inv-max", "200", "--points", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    ta, tb = a.read_text().splitlines(), b.read_text().splitlines()
    # identical apart from the recorded out/jobs settings
    strip = lambda lines: [l for l in lines if not l.startswith(("# out", "# jobs"))]  # noqa: E731
    assert strip(ta) == strip(tb)
    rows = data_rows(a)
    assert rows.shape == (5, 2)
    assert np.all(np.diff(rows[:, 0]) > 0)
    assert any(l.startswith("# alpha = 1.2") for l in ta)
    out = capsys.readouterr().out
    assert "tail_mean" in out and "0.119897" in out


def test_reflect_byte_identical(tmp_path):
    a, b = tmp_path / "a.dat", tmp_path / "b.dat"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"alpha = 0.5\nh = 0.02 0.01\nout = {a}\n")
    assert main(["reflect", "--config", str(cfg)]) == 0
    first = a.read_bytes()
    assert main(["reflect", "--config", str(cfg)]) == 0
    assert a.read_bytes() == first
    assert main(["reflect", "--config", str(cfg), "--out", str(b)]) == 0
    assert data_rows(a).tolist() == data_rows(b).tolist()


def test_reflect_free(tmp_path, capsys):
    out = tmp_path / "f.dat"
    assert main(["reflect", "--free", "--alpha", "0.5", "--h", "0.01", "0.001", "--out", str(out)]) == 0
    rows = data_rows(out)
    h = 1 / rows[:, 0]
    assert np.all(rows[:, 1] < 1e-10 * h**-0.5)
    assert "free" in capsys.readouterr().out


def test_reflect_partial_failure(tmp_path, monkeypatch, capsys):
    real = cli.reflection_sweep

    def flaky(alpha, hs, cfg, **kw):
        res = real(alpha, hs, cfg, **kw)
        return [(r.h, StepUnderflow("forced")) if i < 2 else r for i, r in enumerate(res)]

    monkeypatch.setattr(cli, "reflection_sweep", flaky)
    out = tmp_path / "p.dat"
    code = main(["reflect", "--alpha", "0.5", "--h", "0.05", "0.04", "0.03", "0.02", "--out", str(out)])
    assert code == 1
    text = out.read_text()
    assert text.count("error=StepUnderflow") == 2
    assert data_rows(out).shape == (2, 2)


def test_appendix_compare(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["appendix-compare", "--alpha", "0.5", "--h", "0.01", "0.001", "--out", str(out)]) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0].split(",")[0] == "h"
    row = [float(v) for v in lines[2].split(",")]
    assert row[0] == 0.001
    assert row[4] <= 0.1
    assert "R_appendix" in capsys.readouterr().out


def test_appendix_compare_free(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["appendix-compare", "--free", "--h", "0.01", "--out", str(out)]) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    row = [float(v) for v in lines[1].split(",")]
    assert max(row[1:4]) <= 1e-10


def test_appendix_compare_conjectural(capsys):
    assert main(["appendix-compare", "--alpha", "1.2", "--h", "0.01", "--conjectural"]) == 0


def test_b1_check(tmp_path, capsys):
    out = tmp_path / "b.dat"
    assert main(["b1-check", "--alpha", "0.5", "--y-min", "0", "--y-max", "500", "--points", "6",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "fitted slope" in text
    rows = data_rows(out)
    assert rows[0, 0] == 0 and rows[0, 1] == 0
    assert b1_rows(0.5, [0.0]) == [(0.0, 0.0)]
    assert fit_slope([1, 10, 100], [1, 0.1, 0.01]) == pytest.approx(-1.0)


def test_ray_demos(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert main(["ray", "--spec", "transverse", "--depth", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    kinds = [n["branch_kind"] for n in doc["nodes"] if n["depth"] <= 1]
    assert sorted(kinds) == ["incident", "reflected", "transmitted"]
    assert main(["ray", "--spec", "glancing", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["nodes"]) == 1 and doc["nodes"][0]["status"] == "glancing_nonunique"
    assert main(["ray", "--spec", "tangency", "--alpha", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["nodes"]) == 1 and doc["nodes"][0]["status"] == "completed"
    assert main(["ray", "--spec", "nope"]) == 2
    assert main(["ray", "--spec", "transverse", "--seed", "1", "2"]) == 2


def test_classify(capsys):
    assert main(["classify", "--spec", "transverse"]) == 0
    assert "Hyperbolic" in capsys.readouterr().out
    assert main(["classify", "--spec", "transverse", "--tangential", "0", "1"]) == 0
    assert "Glancing" in capsys.readouterr().out
    assert main(["classify", "--spec", "transverse", "--tangential", "0", "1.5"]) == 0
    assert "Elliptic" in capsys.readouterr().out
    assert main(["classify", "--spec", "transverse", "--tangential", "0"]) == 2
