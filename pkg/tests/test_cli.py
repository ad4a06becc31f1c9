import csv
import io
import json
import subprocess
import sys

import pytest

from floquet_thermometry.cli import main

FLAT = {"family": "nfbs_limit", "s": 1e-7, "omega_c": 100.0, "gamma": 1e-11}


def _write(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def cfg(tmp_path):
    return _write(tmp_path, {
        "spectrum": FLAT,
        "modulation": {"kind": "sinusoidal", "omega0": 1.0, "Delta": 0.9, "mu": 0.2},
        "sidebands": {"M": 3},
        "scan": {"T_min": 0.01, "T_max": 1.0, "count": 7},
        "temperatures": [0.025, 0.26],
    })


def test_sidebands(capsys, cfg):
    code, out, _ = _run(capsys, "sidebands", "--config", cfg)
    rows = _rows(out)
    assert code == 0
    assert rows[0] == ["m", "omega_m", "P_m", "deficit"]
    assert [int(r[0]) for r in rows[1:]] == list(range(-3, 4))
    assert sum(float(r[2]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-5)


def test_sidebands_without_modulation_amplitude(capsys, tmp_path):
    p = _write(tmp_path, {"spectrum": FLAT,
                          "modulation": {"kind": "sinusoidal", "omega0": 1.0, "Delta": 0.9, "mu": 0.0}})
    code, out, _ = _run(capsys, "sidebands", "--config", p)
    rows = _rows(out)
    assert code == 0 and len(rows) == 2
    assert rows[1][:3] == ["0", "1", "1"]


def test_pipulse_odd_orders(capsys, tmp_path):
    p = _write(tmp_path, {"spectrum": FLAT, "modulation": {"kind": "pipulse", "omega0": 1.0, "Delta": 0.9}})
    code, out, _ = _run(capsys, "sidebands", "--config", p, "--sidebands", "9")
    ms = [int(r[0]) for r in _rows(out)[1:]]
    assert code == 0
    assert ms == [-9, -7, -5, -3, -1, 1, 3, 5, 7, 9]


def test_steady_state_json(capsys, cfg):
    code, out, _ = _run(capsys, "steady-state", "--config", cfg, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["columns"][:2] == ["T", "boltzmann"]
    assert len(doc["rows"]) == 2
    assert doc["meta"]["sideband_cutoff"] == 3
    pops = doc["meta"]["populations"]["0.025000000000000001"]
    assert sum(pops) == pytest.approx(1.0, abs=1e-12)


def test_qfi_scan_to_file(capsys, cfg, tmp_path):
    out = tmp_path / "scan.csv"
    code, _, _ = _run(capsys, "qfi-scan", "--config", cfg, "--out", str(out))
    rows = _rows(out.read_text())
    assert code == 0
    assert rows[0] == ["T", "H", "H_m1", "H_0", "H_p1", "H_rem", "xi", "R"]
    assert len(rows) == 8


def test_scan_deterministic_across_workers(capsys, cfg):
    _, one, _ = _run(capsys, "qfi-scan", "--config", cfg)
    _, two, _ = _run(capsys, "qfi-scan", "--config", cfg, "--workers", "2")
    assert one == two


def test_error_bound(capsys, cfg):
    code, out, _ = _run(capsys, "error-bound", "--config", cfg)
    rows = _rows(out)
    assert code == 0
    T, H, xi, M = map(float, rows[1])
    assert xi == pytest.approx(1 / (T * H ** 0.5), rel=1e-15)
    assert M == 1


def test_lindblad_verify(capsys, tmp_path):
    p = _write(tmp_path, {"spectrum": FLAT,
                          "modulation": {"kind": "sinusoidal", "omega0": 1.0, "Delta": 0.9, "mu": 0.2},
                          "sidebands": {"M": 3},
                          "lindblad": {"T": 0.1, "N_max": 30, "checkpoints": 5}})
    code, out, err = _run(capsys, "lindblad-verify", "--config", p)
    assert code == 0 and "PASS" in err
    assert len(_rows(out)) == 6


def test_lindblad_failure_exit_code(capsys, tmp_path):
    p = _write(tmp_path, {"spectrum": FLAT,
                          "modulation": {"kind": "sinusoidal", "omega0": 1.0, "Delta": 0.9, "mu": 0.2},
                          "lindblad": {"T": 0.1, "N_max": 20, "t_final": 1e6}})
    code, _, err = _run(capsys, "lindblad-verify", "--config", p)
    assert code == 3 and "FAIL" in err


def test_optimize_json(capsys, tmp_path):
    p = _write(tmp_path, {"spectrum": FLAT, "design": {"targets": [0.025]}})
    code, out, _ = _run(capsys, "optimize", "--config", p, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["modulation"]["Delta"] == pytest.approx(0.9, rel=0.01)
    assert doc["meta"]["objective"] == "MaxQfiAtSingleT"


def test_regime_exit_code(capsys, tmp_path):
    p = _write(tmp_path, {"spectrum": {"family": "nfbs", "G0": 1e-3, "omega_min": 1e-6, "omega_c": 100},
                          "design": {"targets": [1e-5]}})
    code, _, err = _run(capsys, "optimize", "--config", p)
    assert code == 4 and "regime" in err


@pytest.mark.parametrize("doc", [
    None,
    {"modulation": {"kind": "sinusoidal", "omega0": 1.0, "Delta": 0.9, "mu": 0.2}},
    {"spectrum": {"family": "martian"}},
    {"spectrum": FLAT, "tolerances": {"method": "guess"}},
    {"spectrum": FLAT, "temperatures": [-1]},
])
def test_config_errors(capsys, tmp_path, doc):
    argv = ["qfi-scan", "--config", str(tmp_path / "missing.json")]
    if doc is not None:
        argv[2] = _write(tmp_path, doc)
    code, _, err = _run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_missing_modulation_is_config_error(capsys, tmp_path):
    code, _, _ = _run(capsys, "sidebands", "--config", _write(tmp_path, {"spectrum": FLAT}))
    assert code == 2


@pytest.mark.parametrize("fig,cols", [
    ("fig1", "xi_subohmic"),
    ("fig2", "xi_M3"),
])
def test_reproduce(capsys, fig, cols):
    code, out, _ = _run(capsys, "reproduce", fig)
    rows = _rows(out)
    assert code == 0 and cols in rows[0]
    assert len(rows) > 40


def test_entry_point(tmp_path, cfg):
    r = subprocess.run([sys.executable, "-m", "floquet_thermometry.cli", "sidebands", "--config", cfg,
                        "--format", "json"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["columns"][0] == "m"
