"""Flat config parsing, presets and run execution."""

import numpy as np
import pytest

from proxdyn.errors import ValidationError
from proxdyn.runconfig import (PRESETS, build_system, config_from_flat, execute_run,
                               parse_config_text, parse_overrides, preset_runs,
                               run_from_flat)

MINIMAL = {
    "system.alpha": "10",
    "system.t0": "1.4",
    "system.horizon": "14",
    "system.x0": "10",
}


def test_parse_config_text_basics():
    text = """
    # a comment line
    label = demo
    system.alpha = 10   # trailing comment
    system.x0 = 1,2,3
    """
    flat = parse_config_text(text)
    assert flat == {"label": "demo", "system.alpha": "10", "system.x0": "1,2,3"}


@pytest.mark.parametrize("bad", ["just words", "= 3", "key =", "a = 1\na = 2"])
def test_parse_config_text_rejects(bad):
    with pytest.raises(ValidationError):
        parse_config_text(bad)


def test_parse_overrides():
    assert parse_overrides(["a.b=1", "c = x"]) == {"a.b": "1", "c": "x"}
    with pytest.raises(ValidationError):
        parse_overrides(["no-equals"])


def test_config_from_flat_types():
    flat = dict(MINIMAL)
    flat.update({"label": "demo", "system.x0": "1,2", "objective.name": "l1_norm",
                 "objective.dim": "2", "schedule.n": "1.5",
                 "integrator.sample_stride": "4"})
    rc = config_from_flat(flat)
    assert rc.label == "demo"
    assert rc.x0 == (1.0, 2.0)
    assert rc.xdot0 == (0.0, 0.0)
    assert rc.n == 1.5
    assert rc.sample_stride == 4


def test_config_from_flat_rejects_unknown_and_missing():
    with pytest.raises(ValidationError, match="unknown config keys"):
        config_from_flat(dict(MINIMAL, **{"system.gamma": "1"}))
    with pytest.raises(ValidationError, match="missing required"):
        config_from_flat({"system.alpha": "10"})
    with pytest.raises(ValidationError, match="expected a number"):
        config_from_flat(dict(MINIMAL, **{"system.alpha": "ten"}))
    with pytest.raises(ValidationError, match="expected one of"):
        config_from_flat(dict(MINIMAL, **{"objective.name": "mystery"}))


def test_build_system_validates():
    cfg, settings = build_system(config_from_flat(dict(MINIMAL)))
    assert cfg.alpha == 10.0
    assert settings.method == "rk45_adaptive"
    bad = dict(MINIMAL, **{"system.horizon": "1.0"})  # horizon <= t0
    with pytest.raises(ValidationError):
        build_system(config_from_flat(bad))


# preset fidelity: the figure experiments pin these parameters

def test_fast_rate_presets():
    runs = [config_from_flat(flat) for flat in preset_runs("fig1")]
    assert [rc.n for rc in runs] == [0.0, 1.0, 2.0]
    for rc in runs:
        assert rc.objective_name == "abs_plus_quad"
        assert (rc.alpha, rc.t0, rc.horizon) == (10.0, 1.4, 140.0)
        assert rc.x0 == (10.0,) and rc.xdot0 == (0.0,)
        assert (rc.b_coeff, rc.eps_coeff, rc.d) == (1.0, 1.0, 3.0)
        assert rc.rtol == 1e-8

    runs2 = [config_from_flat(flat) for flat in preset_runs("fig2")]
    assert [rc.lambda_value for rc in runs2] == [0.0, 1.0, 2.0]
    assert all(rc.lambda_form == "power" and rc.horizon == 7.0 for rc in runs2)
    assert all(rc.notes for rc in runs2)

    runs3 = [config_from_flat(flat) for flat in preset_runs("fig3")]
    assert [rc.d for rc in runs3] == [2.5, 3.0, 3.5]
    assert all(rc.n == 0.0 for rc in runs3)


def test_tikhonov_presets():
    runs = [config_from_flat(flat) for flat in preset_runs("fig4")]
    assert [rc.eps_coeff for rc in runs] == [0.0, 1.0]
    for rc in runs:
        assert rc.objective_name == "dist_to_interval"
        assert (rc.alpha, rc.beta, rc.n) == (6.0, 1.0, 0.7)
        assert (rc.t0, rc.horizon) == (1.4, 280.0)
        assert rc.lambda_form == "constant" and rc.lambda_value == 1.0
        assert any("assumption" in note for note in rc.notes)

    runs5 = [config_from_flat(flat) for flat in preset_runs("fig5")]
    assert all(rc.lambda_form == "bounded" and rc.lambda_value == 1.0 for rc in runs5)
    assert [rc.eps_coeff for rc in runs5] == [0.0, 1.0]

    runs6 = [config_from_flat(flat) for flat in preset_runs("fig6")]
    assert [rc.d for rc in runs6] == [1.1, 1.5, 1.9]
    assert all(rc.eps_coeff == 1.0 for rc in runs6)


def test_all_presets_build():
    for name in PRESETS:
        for flat in preset_runs(name):
            build_system(config_from_flat(flat))


def test_preset_runs_copies_and_rejects_unknown():
    a = preset_runs("fig1")
    a[0]["system.alpha"] = "99"
    assert preset_runs("fig1")[0]["system.alpha"] == "10"
    with pytest.raises(ValidationError, match="unknown preset"):
        preset_runs("fig9")


def test_execute_run_writes_artifacts(tmp_path):
    flat = dict(preset_runs("fig1")[0])
    flat["system.horizon"] = "10"
    summary = execute_run(config_from_flat(flat), tmp_path)
    run_dir = tmp_path / "n0"
    for fname in ("trajectory.csv", "summary.txt", "rates.svg", "trajectory.svg"):
        assert (run_dir / fname).exists(), fname
    text = summary.to_text()
    for section in ("conditions (fast)", "final state", "rate fits",
                    "energy descent", "strong convergence", "wall time"):
        assert section in text, section
    assert summary.condition_report.all_pass


def test_execute_run_svg_off(tmp_path):
    flat = dict(preset_runs("fig1")[0])
    flat.update({"system.horizon": "5", "label": "plain"})
    execute_run(config_from_flat(flat), tmp_path, svg=False)
    run_dir = tmp_path / "plain"
    assert (run_dir / "trajectory.csv").exists()
    assert not (run_dir / "rates.svg").exists()


def test_summary_flags_assumption_note(tmp_path):
    flat = dict(preset_runs("fig4")[0])
    flat["system.horizon"] = "10"
    summary = execute_run(config_from_flat(flat), tmp_path)
    assert "assumption" in summary.to_text()


def test_run_from_flat_roundtrip(tmp_path):
    flat = dict(MINIMAL, label="worker", **{"system.horizon": "5"})
    out = run_from_flat(flat, tmp_path, svg=False)
    assert out["label"] == "worker"
    assert (tmp_path / "worker" / "summary.txt").exists()
