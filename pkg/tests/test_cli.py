import numpy as np
import pytest

from nematic2d import FlowState, TorusGrid
from nematic2d import presets
from nematic2d.cli import main
from nematic2d.config import parse_config
from nematic2d.io import read_ledger, read_ppm, read_snapshot, write_snapshot

BASE = """\
[grid]
n = 16

[coefficients]
mu1 = 0.5
mu2 = -1.5
mu3 = 0.5
mu4 = 1
mu5 = 1
mu6 = 0

[time]
dt = 1e-3
steps = 12
snapshot_every = 4
"""


@pytest.fixture
def config(tmp_path):
    def write(extra="", text=BASE):
        p = tmp_path / "run.ini"
        p.write_text(text + extra)
        return p
    return write


def test_run_writes_artifacts(tmp_path, config, capsys):
    out = tmp_path / "out"
    extra = ("[initial]\nseed = 3\n[diagnostics]\nconcentration_radii = 1.0\n"
             "phi_probes = 3, 3, 0.012, 0.1\nlocal_windows = 3, 3, 0.5, 1.0\n")
    assert main(["run", str(config(extra)), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["config.ini", "events.csv", "ledger.csv", "local_energy.csv", "phi.csv",
                     "snap_00000000.bin", "snap_00000004.bin", "snap_00000008.bin",
                     "snap_00000012.bin"]
    header, rows = read_ledger(out / "ledger.csv")
    assert rows.shape == (13, 9) and np.all(np.diff(rows[:, 1]) < 0)
    snap = read_snapshot(out / "snap_00000012.bin")
    assert snap.state.t == pytest.approx(0.012)
    saved = parse_config((out / "config.ini").read_text())
    assert saved == parse_config(config(extra).read_text())
    assert "E =" in capsys.readouterr().out
    assert (out / "phi.csv").read_text().splitlines()[1].split(",")[-1] != "nan"
    assert (out / "local_energy.csv").read_text().count("true") == 3


def test_final_snapshot_when_cadence_misses(tmp_path, config):
    out = tmp_path / "o"
    p = config(f"[output]\ndir = {out}\n", BASE.replace("steps = 12", "steps = 5"))
    assert main(["run", str(p)]) == 0
    assert sorted(p.name for p in out.glob("snap_*")) == ["snap_00000000.bin", "snap_00000004.bin",
                                                         "snap_00000005.bin"]


def test_bad_scan_radius_is_config_error(tmp_path, config):
    p = config("[diagnostics]\nconcentration_radii = 0.1\n")
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2


def test_config_error_exit_code(tmp_path, config, capsys):
    p = config(text=BASE.replace("mu4 = 1", "mu4 = 0"))
    assert main(["run", str(p), "--out", str(tmp_path / "x")]) == 2
    assert "mu4 > 0" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == 2


def test_allow_invalid_runs(tmp_path, config):
    p = config(text=BASE.replace("mu4 = 1", "mu4 = 0").replace("steps = 12", "steps = 2"))
    assert main(["run", str(p), "--allow-invalid", "--out", str(tmp_path / "x")]) == 0


def test_nan_abort_flushes_ledger(tmp_path, config, capsys):
    g = TorusGrid(16)
    st = presets.random_state(g, seed=1)
    st.u[0, 2, 2] = np.nan
    bad = tmp_path / "bad.bin"
    write_snapshot(st, bad, g)
    out = tmp_path / "out"
    p = config(f"[initial]\npreset = file\npath = {bad}\n")
    assert main(["run", str(p), "--out", str(out)]) == 3
    assert "abort" in capsys.readouterr().err
    _, rows = read_ledger(out / "ledger.csv")
    assert rows.shape[0] == 1


def test_cfl_abort(tmp_path, config):
    p = config("[initial]\npreset = taylor_green\namplitude = 1000\n")
    out = tmp_path / "out"
    assert main(["run", str(p), "--out", str(out)]) == 3
    assert (out / "ledger.csv").exists()


def test_file_preset_grid_mismatch(tmp_path, config):
    g = TorusGrid(32)
    snap = tmp_path / "s.bin"
    write_snapshot(presets.random_state(g), snap, g)
    p = config(f"[initial]\npreset = file\npath = {snap}\n")
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2


def test_validate(config, capsys):
    assert main(["validate", str(config())]) == 0
    assert "lambda1 = -2" in capsys.readouterr().out
    assert main(["validate", str(config(text=BASE.replace("mu6 = 0", "mu6 = 1")))]) == 2
    assert "parodi_ok            FAIL" in capsys.readouterr().out


def test_scan_phi_render(tmp_path, config, capsys):
    g = TorusGrid(128)
    L = g.length
    snap = tmp_path / "b.bin"
    from nematic2d.diagnostics import make_bubble
    write_snapshot(FlowState(np.zeros((2, 128, 128)), make_bubble(g, (L / 2, L / 2), L / 50, 1)),
                   snap, g)
    assert main(["scan", str(snap), "--radius", str(10 * L / 50), "--flag-tol", "0.05"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,cx,cy,r,local_energy,threshold" and len(lines) >= 2
    assert main(["scan", str(snap), "--radius", "1e-4"]) == 2

    img = tmp_path / "e.ppm"
    assert main(["render", str(snap), "--field", "energy_density", "--out", str(img)]) == 0
    assert read_ppm(img).shape == (128, 128, 3)
    assert main(["render", str(snap), "--field", "unit_violation", "--out", str(img)]) == 0
    assert main(["render", str(tmp_path / "nope.bin"), "--field", "speed", "--out", str(img)]) == 2

    out = tmp_path / "run"
    dense = config(text=BASE.replace("snapshot_every = 4", "snapshot_every = 1"))
    assert main(["run", str(dense), "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["phi", str(out), "--center", "1,2", "--t0", "0.012", "--r", "0.1"]) == 0
    value = float(capsys.readouterr().out)
    assert value > 0
    assert main(["phi", str(out), "--center", "1,2", "--t0", "0.5", "--r", "0.1"]) == 2
    assert main(["phi", str(tmp_path), "--center", "1,2", "--t0", "0.5", "--r", "0.1"]) == 2
