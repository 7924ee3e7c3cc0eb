"""Config loading, report serialization, and the command line surface."""

import json

import numpy as np
import pytest

from bergerflow.cli import main
from bergerflow.config import ConfigError, ExperimentConfig, load_config
from bergerflow.reports import (
    ClaimVerdict,
    Report,
    judge,
    report_json,
    write_profile_csv,
    write_trajectory_csv,
)


def test_defaults_contract():
    cfg = load_config()
    assert cfg.bundle == "T1M"
    assert cfg.n == 4
    assert cfg.m == 4.0
    assert cfg.delta == 0.5
    assert cfg.step == 1e-3
    assert cfg.sigma_max == 20.0
    assert cfg.pmax == 8
    assert cfg.seed == 0


def test_empty_config_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("{}")
    assert load_config(str(path)) == ExperimentConfig()


def test_flag_overrides_beat_file_values(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"delta": 0.3, "n": 2}))
    cfg = load_config(str(path), {"delta": 0.9, "seed": None})
    assert cfg.delta == 0.9
    assert cfg.n == 2
    assert cfg.seed == 0


def test_vector_length_error_names_the_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n": 4, "xi": [1, 0, 0, 0, 0, 0]}))
    with pytest.raises(ConfigError, match="xi"):
        load_config(str(path))


def test_unknown_keys_are_listed(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"detla": 0.5, "bundel": "TM"}))
    with pytest.raises(ConfigError) as err:
        load_config(str(path))
    assert "detla" in str(err.value) and "bundel" in str(err.value)


def test_xi_dot_requires_xi():
    with pytest.raises(ConfigError, match="xi_dot"):
        load_config(None, {"xi_dot": (0.0,) * 8})


def test_out_of_range_values_rejected():
    with pytest.raises(ConfigError, match="step"):
        load_config(None, {"step": -1.0})
    with pytest.raises(ConfigError, match="bundle"):
        load_config(None, {"bundle": "SM"})
    with pytest.raises(ConfigError, match="pmax"):
        load_config(None, {"pmax": 1})


def test_malformed_file_is_a_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(str(path))
    missing = tmp_path / "missing.json"
    with pytest.raises(ConfigError):
        load_config(str(missing))


def test_judge_and_verdict_status():
    good = judge("connection.koszul", 1e-12, 1e-10)
    bad = judge("connection.koszul", 1e-8, 1e-10)
    assert good.status == "pass" and bad.status == "fail"
    low = judge("projection_curvature.divergence", 0.5, 1e-2, comparison=">=")
    assert low.status == "pass"
    with pytest.raises(ValueError):
        ClaimVerdict("not.a.claim", "pass")


def test_report_overall_and_exit_code():
    cfg = ExperimentConfig().echo()
    ok = Report("integrate", cfg, (judge("conservation.lifted_speed", 0.0, 1.0),))
    assert ok.overall == "pass" and ok.exit_code == 0
    mixed = Report(
        "integrate",
        cfg,
        (
            judge("conservation.lifted_speed", 0.0, 1.0),
            ClaimVerdict("conservation.fiber_speed", "informational", measured=0.2),
            ClaimVerdict("curvature.constancy", "inapplicable"),
        ),
    )
    assert mixed.overall == "pass"
    failing = Report(
        "integrate", cfg, (judge("conservation.lifted_speed", 2.0, 1.0),)
    )
    assert failing.overall == "fail" and failing.exit_code == 1


def test_report_json_key_order_is_stable():
    cfg = ExperimentConfig().echo()
    report = Report(
        "theorems",
        cfg,
        (judge("powers.span_even", 1e-12, 1e-10),),
        {"b": 1, "a": np.float64(2.0), "nested": {"z": np.arange(3)}},
    )
    text = report_json(report)
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"


def test_trajectory_csv_schema(tmp_path):
    from bergerflow.flow import FlowConfig, integrate, prepare_initial
    from bergerflow.space_form import BergerParams, SpaceFormModel

    model = SpaceFormModel(2, 4.0)
    params = BergerParams(0.5)
    state = prepare_initial(
        model,
        params,
        "T1M",
        np.array([1.0, 0.0, 0.0, 0.0]),
        np.array([0.0, 0.0, 0.5, 0.0]),
        u_dir=np.array([0.0, 1.0, 0.0, 0.0]),
    )
    traj = integrate(
        state, model, params, FlowConfig(bundle="T1M", step=1e-2, sigma_max=0.1)
    )
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, str(path))
    lines = path.read_text().splitlines()
    header = (
        "sigma,"
        + ",".join(f"u_{i}" for i in range(1, 5))
        + ","
        + ",".join(f"xi_{i}" for i in range(1, 5))
        + ","
        + ",".join(f"w_{i}" for i in range(1, 5))
        + ",c,mu,lambda,xi_norm,lifted_speed"
    )
    assert lines[0] == header
    assert len(lines) == traj.n_samples + 1


def test_profile_csv_schema(tmp_path):
    from bergerflow.flow import FlowConfig, integrate, random_initial_states, BundleState
    from bergerflow.frenet import curvature_profile
    from bergerflow.space_form import BergerParams, SpaceFormModel

    model = SpaceFormModel(4, 4.0)
    params = BergerParams(0.5)
    batch = random_initial_states(model, params, "T1M", 1, np.random.default_rng(0))
    state = BundleState(batch.u[0], batch.xi[0], batch.w[0])
    traj = integrate(
        state, model, params, FlowConfig(bundle="T1M", step=1e-2, sigma_max=0.5)
    )
    profile = curvature_profile(traj, model, params, 8)
    path = tmp_path / "profile.csv"
    write_profile_csv(profile, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "sigma," + ",".join(f"k_{i}" for i in range(1, 8)) + ",effective_rank"
    assert len(lines) == profile.sigmas.shape[0] + 1


def test_cli_verify_connection_runs(capsys):
    code = main(["verify-connection", "--samples", "3", "--n", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "connection.koszul" in out
    assert "overall: pass" in out
    assert "elapsed" in out


def test_cli_writes_outputs_and_is_deterministic(tmp_path, capsys):
    args = ["integrate", "--sigma-max", "0.5", "--seed", "11"]
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    capsys.readouterr()
    traj_a = (out_a / "trajectory.csv").read_bytes()
    traj_b = (out_b / "trajectory.csv").read_bytes()
    rep_a = (out_a / "integrate_report.json").read_bytes()
    rep_b = (out_b / "integrate_report.json").read_bytes()
    assert traj_a == traj_b
    assert rep_a == rep_b
    echo = json.loads(rep_a)["config"]
    assert echo["seed"] == 11 and echo["sigma_max"] == 0.5


def test_cli_flag_overrides_are_echoed(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"delta": 0.3, "sigma_max": 0.5}))
    out_dir = tmp_path / "out"
    code = main(
        [
            "integrate",
            "--config",
            str(cfg_path),
            "--delta",
            "0.9",
            "--out",
            str(out_dir),
        ]
    )
    capsys.readouterr()
    assert code == 0
    echo = json.loads((out_dir / "integrate_report.json").read_text())["config"]
    assert echo["delta"] == 0.9


def test_cli_usage_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert main(["integrate", "--config", str(bad)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["theorems", "--n", "-3"]) == 2


def test_cli_infeasible_speed_exits_one(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "xi": [1, 0, 0, 0, 0, 0, 0, 0],
                "xi_dot": [0, 3, 0, 0, 0, 0, 0, 0],
            }
        )
    )
    assert main(["integrate", "--config", str(cfg)]) == 1
    assert "lambda^2" in capsys.readouterr().err


def test_cli_full_bundle_curvatures_exits_zero(capsys):
    code = main(["curvatures", "--bundle", "TM", "--sigma-max", "0.5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "SKIP curvature.constancy" in out
