import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from corrzne.cli import ConfigError, main, parse_config, run, validate

ROOT = Path(__file__).resolve().parents[1]


def _write(tmp_path, text, name="exp.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("name", ["spectra", "zne_single", "method_comparison",
                                  "filter_response"])
def test_shipped_configs_validate(name):
    assert validate(ROOT / "configs" / f"{name}.ini") == []


def test_validate_reports_every_problem(tmp_path):
    p = _write(tmp_path, "[experiment]\nkind = method_comparison\n[scaling]\n"
                         "methods = global_fold, foo\nlambdas = 1,2,3\n[noise]\npresets = purple\n")
    errors = validate(p)
    text = "\n".join(errors)
    assert "seed" in text and "unknown scaling method" in text and "missing preset" in text
    assert "scale factor must be odd" in text
    assert any(f"{p}:4:" in e for e in errors)


def test_unknown_method_is_one_error(tmp_path):
    p = _write(tmp_path, "[experiment]\nkind = spectra\nseed = 1\n[scaling]\nmethods = zoom\n")
    assert len(validate(p)) == 1


def test_odd_lambda_rule(tmp_path):
    p = _write(tmp_path, "[experiment]\nkind=spectra\nseed=1\n[scaling]\n"
                         "methods=global_fold\nlambdas=1,2,3\n")
    (err,) = validate(p)
    assert "scale factor must be odd" in err and ":6:" in err


def test_malformed_config(tmp_path):
    with pytest.raises(ConfigError):
        parse_config("[experiment\nkind=spectra\n")
    p = _write(tmp_path, "[experiment]\nkind = teleport\nseed = x\n")
    assert main(["validate", str(p)]) == 2
    assert main(["run", str(p)]) == 2


def test_spectra_csv(tmp_path):
    p = _write(tmp_path, f"[experiment]\nkind = spectra\nseed = 1\n[output]\ndir = {tmp_path}/o\n")
    out = run(p)
    rows = _read(out / "spectra.csv")
    assert rows[0] == ["omega [rad/gate]", "S_white [rad^2]", "S_lowpass [rad^2]",
                       "S_pink [rad^2]", "S_brown [rad^2]"]
    assert len(rows) == 2049
    assert (out / "spectra.svg").read_text().startswith("<svg")
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 1 and set(man["outputs"]) >= {"spectra.csv", "spectra.svg"}


def test_zne_single_white(tmp_path):
    """Every method extrapolates a white-noise RB curve back to about one."""
    p = _write(tmp_path, "[experiment]\nkind = zne_single\nseed = 3\n[circuit]\nfamily = rb\n"
                         "n_qubits = 1\ndepth = 5\n[noise]\npresets = white\n"
                         f"[output]\ndir = {tmp_path}/z\n")
    out = run(p)
    rows = _read(out / "fits.csv")[1:]
    assert len(rows) == 5
    for r in rows:
        assert abs(float(r[5]) - 1.0) < 0.05, r
    assert "*</text>" in (out / "zne_white.svg").read_text()


def test_method_comparison_deterministic_over_threads(tmp_path):
    text = ("[experiment]\nkind = method_comparison\nseed = 3\n[circuit]\nfamily = qaoa\n"
            "n_circuits = 3\n[noise]\npresets = pink\n[scaling]\nmethods = global, local_fold\n"
            "lambdas = 1,3,5\n[simulation]\ntrajectories = 200\n")
    p = _write(tmp_path, text)
    a = run(p, out_dir=tmp_path / "a", threads=1)
    b = run(p, out_dir=tmp_path / "b", threads=3)
    for name in ("delta.csv", "curves.csv", "delta_pink.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = _read(a / "delta.csv")
    assert rows[0][:4] == ["spectrum", "method", "lambda [1]", "mean_delta [1]"]
    assert {r[1] for r in rows[1:]} == {"global_fold", "local_fold"}
    c = run(p, seed=4, out_dir=tmp_path / "c")
    assert (a / "curves.csv").read_bytes() != (c / "curves.csv").read_bytes()


def test_filter_response(tmp_path):
    out = run(ROOT / "configs" / "filter_response.ini", out_dir=tmp_path / "f")
    rows = np.array([[float(x) for x in r[1:]] for r in _read(out / "filter_functions.csv")[1:]])
    assert rows.shape == (5 * 3 * 2049, 3)
    assert rows[:, 2].max() == pytest.approx(1.0)


def test_console_entry_point(tmp_path):
    p = _write(tmp_path, "[experiment]\nkind = spectra\nseed = 2\n")
    res = subprocess.run([sys.executable, "-m", "corrzne.cli", "run", str(p), "--out-dir",
                          str(tmp_path / "s")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "s" / "spectra.csv").exists()
