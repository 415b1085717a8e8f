"""Trajectory CSV contract: column order and bit-exact round-trip."""

import numpy as np
import pytest

from proxdyn.csvio import read_csv, table_from_trajectory, write_csv
from proxdyn.diagnostics import energy_q_series
from proxdyn.dynamics import IntegratorSettings, integrate
from proxdyn.errors import ValidationError
from proxdyn.runconfig import build_system, config_from_flat, preset_runs


def small_run(extra=None, preset="fig1", idx=0):
    flat = dict(preset_runs(preset)[idx])
    flat["system.horizon"] = "5"
    flat.update(extra or {})
    cfg, settings = build_system(config_from_flat(flat))
    return integrate(cfg, settings), cfg


@pytest.fixture(scope="module")
def run_pair(tmp_path_factory):
    traj, cfg = small_run()
    table = table_from_trajectory(traj)
    path = tmp_path_factory.mktemp("csv") / "trajectory.csv"
    write_csv(path, table)
    return table, read_csv(path), traj


def test_header_column_order(run_pair):
    table, _, _ = run_pair
    assert table.header() == [
        "t", "x_0", "xdot_0", "moreau_gap", "function_gap", "grad_norm",
        "prox_dist", "velocity_combo", "dist_to_xstar", "tikhonov_gap",
        "energy_q", "psi",
    ]


def test_roundtrip_bit_exact(run_pair):
    table, back, _ = run_pair
    assert back.ts.tobytes() == table.ts.tobytes()
    assert back.xs.tobytes() == table.xs.tobytes()
    assert back.xdots.tobytes() == table.xdots.tobytes()
    for name in table.scalars:
        assert back.scalars[name].tobytes() == table.scalars[name].tobytes(), name


def test_energy_column_uses_alpha_minus_one(run_pair):
    table, _, traj = run_pair
    expected = energy_q_series(traj, traj.cfg.alpha - 1.0)
    assert np.array_equal(table.scalars["energy_q"], expected)


def test_tikhonov_column_nan_when_unregularized(tmp_path):
    traj, _ = small_run({"schedule.eps_coeff": "0"})
    table = table_from_trajectory(traj)
    assert np.all(np.isnan(table.scalars["tikhonov_gap"]))
    path = tmp_path / "t.csv"
    write_csv(path, table)
    back = read_csv(path)
    # NaN must survive the text round-trip bit-exactly too
    assert back.scalars["tikhonov_gap"].tobytes() == table.scalars["tikhonov_gap"].tobytes()


def test_small_alpha_leaves_energy_undefined():
    traj, _ = small_run({"system.alpha": "2.5", "diagnostics.setting": "fast"})
    table = table_from_trajectory(traj)
    assert np.all(np.isnan(table.scalars["energy_q"]))
    assert np.all(np.isnan(table.scalars["psi"]))


def test_vector_state_columns(tmp_path):
    traj, _ = small_run({"objective.name": "l1_norm", "objective.dim": "2",
                         "system.x0": "3,-2", "system.xdot0": "0,0"})
    table = table_from_trajectory(traj)
    assert table.header()[1:5] == ["x_0", "x_1", "xdot_0", "xdot_1"]
    path = tmp_path / "v.csv"
    write_csv(path, table)
    back = read_csv(path)
    assert back.xs.shape == table.xs.shape
    assert back.xs.tobytes() == table.xs.tobytes()


def test_read_rejects_malformed(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValidationError):
        read_csv(empty)
    headers_only = tmp_path / "h.csv"
    headers_only.write_text("t,x_0\n")
    with pytest.raises(ValidationError):
        read_csv(headers_only)
    wrong = tmp_path / "w.csv"
    wrong.write_text("t,x_0,nope\n1,2,3\n")
    with pytest.raises(ValidationError):
        read_csv(wrong)
