"""Config round trips, experiment artifacts, determinism and the CLI."""

import filecmp
import json
import os

import numpy as np
import pytest

from lmsmlab.bounds import BoundReport
from lmsmlab.cli import main as cli_main
from lmsmlab.harness import (
    ConvergenceTable,
    ExperimentConfig,
    fmt17,
    run_experiment,
    run_replicate,
    write_reports,
)

FAST = dict(
    alpha=1.5,
    hurst_name="constant",
    hurst_params=(0.8,),
    j_range=(4, 6),
    beta=0.25,
    delta=2.0**-11,
    t_tail=4.0,
    path_refine=2,
    v_nodes=8,
    replicates=2,
    seed=314,
)


def test_config_roundtrip_and_hash():
    cfg = ExperimentConfig(**FAST)
    d = cfg.to_dict()
    back = ExperimentConfig.from_dict(json.loads(json.dumps(d)))
    assert back == cfg
    assert back.config_hash() == cfg.config_hash()
    cfg2 = ExperimentConfig(**{**FAST, "seed": 315})
    assert cfg2.config_hash() != cfg.config_hash()


def test_fmt17_roundtrips():
    for x in (0.1, 2.0 ** -37 * 3.1415926, -1.7976931348623157e308, 1e-300):
        assert float(fmt17(x)) == x


def test_experiment_outputs_and_determinism(tmp_path):
    cfg = ExperimentConfig(**FAST)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_experiment(cfg, out_dir=str(out1))
    run_experiment(cfg, out_dir=str(out2))
    for f in ("records.csv", "table.csv"):
        assert filecmp.cmp(out1 / f, out2 / f, shallow=False)
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["config_hash"] == cfg.config_hash()
    assert manifest["config"]["delta"] == cfg.delta
    assert manifest["failed_replicates"] == {}


def test_targets_track_interval_minimum():
    cfg = ExperimentConfig(**{**FAST, "hurst_name": "linear", "hurst_params": (0.7, 0.15)})
    table = run_experiment(cfg, out_dir="/tmp/_lmsm_targets")
    for row in table.rows:
        assert row["target_hmin"] == pytest.approx(0.7, abs=1e-6)
    cfg2 = ExperimentConfig(**FAST)
    table2 = run_experiment(cfg2, out_dir="/tmp/_lmsm_targets2")
    for row in table2.rows:
        assert row["target_hmin"] == pytest.approx(0.8, abs=1e-12)


def test_replicates_are_order_independent():
    cfg = ExperimentConfig(**FAST)
    recs0 = run_replicate(cfg, 0)
    recs1 = run_replicate(cfg, 1)
    recs0_again = run_replicate(cfg, 0)
    assert recs0[0].v_j == recs0_again[0].v_j
    assert recs0[0].v_j != recs1[0].v_j


def test_local_mode_has_no_alpha_hat():
    cfg = ExperimentConfig(
        **{**FAST, "interval_mode": "local", "t0": 0.5, "j_range": (5, 6)}
    )
    recs = run_replicate(cfg, 0)
    assert all(rec.alpha_hat is None for rec in recs)
    assert all(rec.n_j >= 1 for rec in recs)


def test_table_row_lookup_and_csv_columns(tmp_path):
    cfg = ExperimentConfig(**FAST)
    table = run_experiment(cfg, out_dir=str(tmp_path))
    row = table.row(6)
    assert row["n_j"] == 64
    header = (tmp_path / "table.csv").read_text().splitlines()[0]
    assert header == ",".join(ConvergenceTable.COLUMNS)
    with pytest.raises(KeyError):
        table.row(99)


def test_cli_simulate_coeffs_estimate(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({**FAST, "hurst_params": [0.8], "j_range": [4, 6],
                                    "out_dir": str(tmp_path / "out")}))
    assert cli_main(["--config", str(cfg_path), "simulate"]) == 0
    assert cli_main(["--config", str(cfg_path), "coeffs"]) == 0
    assert cli_main(["--config", str(cfg_path), "estimate"]) == 0
    assert (tmp_path / "out" / "path.csv").exists()
    assert (tmp_path / "out" / "pyramid.csv").exists()
    capsys.readouterr()


def test_cli_seed_precedence(tmp_path, monkeypatch, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({**FAST, "hurst_params": [0.8], "j_range": [4],
                                    "out_dir": str(tmp_path / "o1")}))
    monkeypatch.setenv("LMSMLAB_SEED", "777")
    assert cli_main(["--config", str(cfg_path), "experiment"]) == 0
    manifest = json.loads((tmp_path / "o1" / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 777
    assert manifest["seed_env_override"] is True
    # explicit flag beats the environment
    assert cli_main(["--config", str(cfg_path), "--seed", "9", "--out",
                     str(tmp_path / "o2"), "experiment"]) == 0
    manifest2 = json.loads((tmp_path / "o2" / "manifest.json").read_text())
    assert manifest2["config"]["seed"] == 9
    capsys.readouterr()


def test_cli_verify_exit_status(tmp_path, monkeypatch, capsys):
    import lmsmlab.cli as cli_mod

    good = [BoundReport("a", "g", 1.0, -1.0, True, 0.1)]
    bad = good + [BoundReport("b", "g", 1.0, -1.0, False, 0.1)]
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({**FAST, "hurst_params": [0.8], "j_range": [4],
                                    "out_dir": str(tmp_path / "v")}))
    monkeypatch.setattr(cli_mod, "run_verification", lambda cfg: good)
    assert cli_main(["--config", str(cfg_path), "verify"]) == 0
    monkeypatch.setattr(cli_mod, "run_verification", lambda cfg: bad)
    assert cli_main(["--config", str(cfg_path), "verify"]) == 1
    capsys.readouterr()


def test_failure_policy_aborts_past_twenty_percent(tmp_path, monkeypatch):
    import lmsmlab.harness as hmod

    real_task = hmod._replicate_task

    def flaky(args):
        if args[1] == 0:
            raise RuntimeError("synthetic replicate failure")
        return real_task(args)

    monkeypatch.setattr(hmod, "_replicate_task", flaky)
    cfg = ExperimentConfig(**{**FAST, "replicates": 3})
    with pytest.raises(RuntimeError, match="replicates failed"):
        run_experiment(cfg, out_dir=str(tmp_path))
    # below the threshold the run completes and records the failure
    cfg_ok = ExperimentConfig(**{**FAST, "replicates": 6})
    table = run_experiment(cfg_ok, out_dir=str(tmp_path / "ok"))
    manifest = json.loads((tmp_path / "ok" / "manifest.json").read_text())
    assert list(manifest["failed_replicates"]) == ["0"]
    assert table.rows


def test_worker_count_does_not_change_results(tmp_path):
    cfg1 = ExperimentConfig(**{**FAST, "workers": 1})
    cfg2 = ExperimentConfig(**{**FAST, "workers": 2})
    run_experiment(cfg1, out_dir=str(tmp_path / "w1"))
    run_experiment(cfg2, out_dir=str(tmp_path / "w2"))
    for f in ("records.csv", "table.csv"):
        assert filecmp.cmp(tmp_path / "w1" / f, tmp_path / "w2" / f, shallow=False)


def test_write_reports_json(tmp_path):
    reports = [BoundReport("x", "grid", 2.0, -1.5, True, 0.2,
                           details={"arr": np.arange(3.0)})]
    fname = write_reports(reports, str(tmp_path))
    data = json.loads(open(fname).read())
    assert data[0]["name"] == "x" and data[0]["details"]["arr"] == [0.0, 1.0, 2.0]
