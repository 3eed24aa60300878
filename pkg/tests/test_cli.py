import csv
import json
import subprocess
import sys

import pytest

from elastiq import cli, suites
from elastiq.suites import PropertyResult

SINGLE_MODE = [
    {"q": [0.3, 0.5, 0], "amp_re": [0.02, 0.01, 0.03], "amp_im": [0, 0.01, 0]},
    {"q": [-0.3, -0.5, 0], "amp_re": [0.02, 0.01, 0.03], "amp_im": [0, -0.01, 0]},
]
LEAKY = [
    {"q": [0.3, 0.5, 1], "amp_re": [0.02, 0.01, 0.03], "amp_im": [0, 0.01, 0]},
    {"q": [-0.3, -0.5, -1], "amp_re": [0.02, 0.01, 0.03], "amp_im": [0, -0.01, 0]},
]


def write_config(tmp_path, name="run.json", **overrides):
    cfg = {"material": {"lambda": 1.3, "mu": 0.1}, "q2_grid": [1], "q3_list": [0], "output_dir": "out"}
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def field_config(tmp_path, modes, **kw):
    (tmp_path / "field.json").write_text(json.dumps(modes))
    return write_config(tmp_path, field_file="field.json", **kw)


def test_dispersion_reference_row(tmp_path):
    assert cli.main(["dispersion", "--config", write_config(tmp_path)]) == 0
    rows = list(csv.reader((tmp_path / "out" / "dispersion.csv").open()))
    assert rows[0] == ["q2", "q3", "E_minus", "E_zero", "E_plus", "stable"]
    q2, q3, em, e0, ep, stable = rows[1]
    assert (float(q2), int(q3), stable) == (1.0, 0, "true")
    assert float(em) == pytest.approx(0.011791673069062065, abs=1e-15)
    assert float(e0) == 0.25
    assert float(ep) == pytest.approx(0.35335669860104868, abs=1e-15)


def test_dispersion_grid_order_and_unstable_flags(tmp_path):
    cfg = write_config(tmp_path, material={"lambda": 2, "mu": 1}, q2_grid=[1, 2], q3_list=[0, 1])
    assert cli.main(["dispersion", "--config", cfg]) == 0
    rows = list(csv.DictReader((tmp_path / "out" / "dispersion.csv").open()))
    assert [(r["q2"], r["q3"]) for r in rows] == [("1.0", "0"), ("1.0", "1"), ("2.0", "0"), ("2.0", "1")]
    assert all(r["stable"] == "false" for r in rows)


@pytest.mark.parametrize(
    "overrides",
    [{"q2_grid": []}, {"q3_list": []}, {"fd_step": 0}, {"fd_step": -1e-3}, {"bogus": 1}, {"q3_list": [0.5]}, {"truncation": -1}],
)
def test_config_errors_exit_2(tmp_path, overrides, capsys):
    assert cli.main(["dispersion", "--config", write_config(tmp_path, **overrides)]) == 2
    assert "config error" in capsys.readouterr().err


def test_unreadable_config_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["verify", "--config", str(bad), "--suite", "all"]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json"), "--suite", "all"]) == 2


def test_verify_with_zero_step_exit_2(tmp_path):
    assert cli.main(["verify", "--config", write_config(tmp_path, fd_step=0), "--suite", "all"]) == 2


def test_reduce_zero_field(tmp_path):
    assert cli.main(["reduce", "--config", field_config(tmp_path, [])]) == 0
    doc = json.loads((tmp_path / "out" / "reduction.json").read_text())
    for pt in doc["points"]:
        assert pt["g2"] == [[1.0, 0.0], [0.0, -1.0]]
        assert pt["A"] == [0.0, 0.0]
        assert pt["Phi"] == 1.0


def test_reduce_single_mode_field(tmp_path):
    assert cli.main(["reduce", "--single-mode", "--config", field_config(tmp_path, SINGLE_MODE)]) == 0
    doc = json.loads((tmp_path / "out" / "reduction.json").read_text())
    for pt in doc["points"]:
        assert pt["ricci3_norm"] <= 1e-5
        assert {"g2", "A", "Phi", "ricci3_norm", "maxwell_residual", "einstein_residual"} <= set(pt)


def test_reduce_leakage_exit_3(tmp_path, capsys):
    assert cli.main(["reduce", "--single-mode", "--config", field_config(tmp_path, LEAKY)]) == 3
    assert "ModeLeakage" in capsys.readouterr().err
    assert cli.main(["reduce", "--config", field_config(tmp_path, LEAKY)]) == 0


def test_reduce_signature_error_exit_3(tmp_path, capsys):
    # u^1 = 1.5 sin(x3): g~33 = 1 - 1.5^2 < 0 at the origin
    modes = [
        {"q": [0, 0, 1], "amp_re": [0, 0, 0], "amp_im": [-0.75, 0, 0]},
        {"q": [0, 0, -1], "amp_re": [0, 0, 0], "amp_im": [0.75, 0, 0]},
    ]
    cfg = field_config(tmp_path, modes, grid=[[0, 0, 0]])
    assert cli.main(["reduce", "--config", cfg]) == 3
    assert "SignatureError" in capsys.readouterr().err


@pytest.mark.parametrize("doc", ["{]", json.dumps([{"q": [0, 0]}]), json.dumps({"modes": []})])
def test_malformed_field_file_exit_2(tmp_path, doc):
    (tmp_path / "field.json").write_text(doc)
    cfg = write_config(tmp_path, field_file="field.json")
    assert cli.main(["reduce", "--config", cfg]) == 2


def test_reduce_needs_field_file(tmp_path):
    assert cli.main(["reduce", "--config", write_config(tmp_path)]) == 2


def test_verify_spinor_and_quantization(tmp_path):
    cfg = write_config(tmp_path)
    assert cli.main(["verify", "--config", cfg, "--suite", "spinor"]) == 0
    doc = json.loads((tmp_path / "out" / "verify_spinor.json").read_text())
    dirac = next(p for p in doc["suites"]["spinor"] if p["name"] == "dirac_on_shell_residual")
    assert doc["passed"] and dirac["worst"] < 1e-12 and dirac["samples"] == 100
    assert cli.main(["verify", "--config", cfg, "--suite", "quantization"]) == 0
    doc = json.loads((tmp_path / "out" / "verify_quantization.json").read_text())
    hier = next(p for p in doc["suites"]["quantization"] if p["name"].startswith("energy_hierarchy"))
    assert hier["ratio_zero_to_minus"] == pytest.approx(21.2, abs=0.01)


def test_verify_failure_exit_1(tmp_path, monkeypatch):
    monkeypatch.setitem(suites.REGISTRY, "spinor", lambda rng, h, lam: [PropertyResult("broken", 1, 1.0, 0.0)])
    cfg = write_config(tmp_path)
    assert cli.main(["verify", "--config", cfg, "--suite", "spinor"]) == 1
    doc = json.loads((tmp_path / "out" / "verify_spinor.json").read_text())
    assert doc["passed"] is False


def test_outputs_are_byte_identical(tmp_path):
    cfg = field_config(tmp_path, SINGLE_MODE, q2_grid=[0.5, 1, 2], q3_list=[0, 1, 2])
    runs = []
    for _ in range(2):
        assert cli.main(["dispersion", "--config", cfg]) == 0
        assert cli.main(["reduce", "--config", cfg]) == 0
        assert cli.main(["verify", "--config", cfg, "--suite", "all"]) == 0
        runs.append({p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()})
    assert runs[0] == runs[1]
    assert set(runs[0]) == {"dispersion.csv", "reduction.json", "verify_all.json"}


def test_threads_env(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, q2_grid=[0.5, 1, 2], q3_list=[0, 1])
    assert cli.main(["dispersion", "--config", cfg]) == 0
    serial = (tmp_path / "out" / "dispersion.csv").read_bytes()
    monkeypatch.setenv("ELASTIQ_THREADS", "3")
    assert cli.main(["dispersion", "--config", cfg]) == 0
    assert (tmp_path / "out" / "dispersion.csv").read_bytes() == serial
    monkeypatch.setenv("ELASTIQ_THREADS", "zero")
    assert cli.main(["dispersion", "--config", cfg]) == 2


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, q2_grid=[])
    proc = subprocess.run([sys.executable, "-m", "elastiq", "dispersion", "--config", cfg], capture_output=True, text=True)
    assert proc.returncode == 2
