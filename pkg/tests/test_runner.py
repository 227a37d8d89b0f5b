import os

import numpy as np
import pytest

from dampedeuler.config import make_config, parse_config
from dampedeuler.diagnostics import CSV_COLUMNS
from dampedeuler.runner import (
    criterion_entries,
    read_csv,
    read_snapshot,
    read_summary,
    run_scenario,
    safe_fit,
    write_snapshot,
)
from dampedeuler.core import GasParams, Grid, to_conserved
from dampedeuler import scenarios


def test_equilibrium_summary(tmp_path):
    cfg = make_config(system="euler", n=16, t_end=0.2, output_stride=2)
    out = run_scenario(cfg, tmp_path)
    assert out.status == "ok"
    s = out.summary
    assert s["pbar"] == pytest.approx(1.0) and s["drift_max"] == 0.0
    assert s["bracket_violation"] == 0.0
    for name in ("l2_xi", "l2_v", "l2_phi"):
        assert s[f"fit_{name}_rate"] == 0.0
    written = read_summary(tmp_path / "summary.txt")
    assert written["status"] == "ok" and written["criterion"] == "applicable"
    assert float(written["k2"]) == s["k2"]


def test_csv_is_reproducible_and_has_exact_header(tmp_path):
    cfg = make_config(system="euler", n=32, t_end=0.1, output_stride=3,
                      profiles=[{"kind": "cosine_pressure", "eps": 0.05}])
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    a = (tmp_path / "a" / "timeseries.csv").read_bytes()
    assert a == (tmp_path / "b" / "timeseries.csv").read_bytes()
    assert a.decode().splitlines()[0] == ",".join(CSV_COLUMNS)
    columns, data = read_csv(tmp_path / "a" / "timeseries.csv")
    assert columns == list(CSV_COLUMNS)
    assert data[0, 0] == 0.0 and data[-1, 0] == pytest.approx(0.1)


def test_written_config_reproduces_scenario(tmp_path):
    cfg = make_config(system="diffusion", n=16, t_end=0.01,
                      profiles=[{"kind": "cosine_pressure", "eps": 0.1}])
    run_scenario(cfg, tmp_path)
    assert parse_config((tmp_path / "config.yaml").read_text()) == cfg


def test_snapshot_round_trip(tmp_path):
    g = Grid(dim=2, n=(6, 4), length=(1.0, 2.0), lower=(0.0, -1.0))
    x, y = g.mesh()
    state = to_conserved(1 + 0.1 * x, np.stack([y, -x]), 0.2 * y, g, t=0.75)
    path = tmp_path / "snap.bin"
    write_snapshot(path, state, GasParams())
    header, fields = read_snapshot(path)
    assert header["dims"] == [6, 4] and header["time"] == 0.75
    assert header["fields"] == ["rho", "u0", "u1", "S", "p"]
    np.testing.assert_allclose(fields["rho"], state.rho)
    np.testing.assert_allclose(fields["u1"], -x)
    np.testing.assert_allclose(fields["S"], 0.2 * y, atol=1e-15)


def test_snapshots_are_written_at_requested_times(tmp_path):
    cfg = make_config(system="euler", n=16, t_end=0.1,
                      profiles=[{"kind": "cosine_pressure", "eps": 0.05}])
    out = run_scenario(cfg, tmp_path, snapshot_times=[0.0, 0.05])
    snaps = sorted(f for f in os.listdir(tmp_path) if f.startswith("snap_"))
    assert snaps == ["snap_euler_0.05.bin", "snap_euler_0.bin"]
    assert len(out.files) == 5  # two snapshots plus three artifacts


def test_paired_run_writes_gap(tmp_path):
    cfg = scenarios.darcy_pair(n=16, a=10.0, t_end=0.05)
    out = run_scenario(cfg, tmp_path)
    assert out.gaps.shape[1] == 3
    assert out.gaps[0, 0] == 0.0
    assert "gap_max" in out.summary and "diffusion_drift_max" in out.summary
    assert (tmp_path / "gap.csv").read_text().splitlines()[0] == "t,gap_p,gap_u"


def test_singularity_is_a_status_not_an_error():
    cfg = make_config(system="euler", n=64, t_end=1.0, grad_max=50.0, length=2.0, lower=-1.0,
                      profiles=[{"kind": "momentum_pulse", "amplitude": -20.0, "radius": 0.3}])
    out = run_scenario(cfg)
    assert out.status == "singularity"
    assert out.summary["blowup_time"] < 1.0
    assert "gradient" in out.summary["blowup_reason"]


def test_criterion_entries():
    assert criterion_entries(make_config(system="diffusion"))["criterion"] == "not_applicable"
    # origin of the default unit domain is a corner; a wall-hugging pulse has no margin
    wall = make_config(system="euler", profiles=[{"kind": "momentum_pulse", "amplitude": 1.0,
                                                  "radius": 0.3, "center": 0.0}])
    assert criterion_entries(wall)["criterion"] == "not_applicable"
    pulse = scenarios.momentum_pulse(n=128, factor=1.05)
    entries = criterion_entries(pulse)
    assert entries["criterion"] == "applicable" and entries["predicts_blowup"] is True


def test_safe_fit_floor_and_failure():
    t = np.linspace(0, 1, 20)
    fit = safe_fit(t, np.full(20, 1e-20), floor=1e-15)
    assert fit.rate == 0.0 and fit.r_squared == 1.0
    bad = safe_fit(t[:3], np.ones(3))
    assert np.isnan(bad.rate)
