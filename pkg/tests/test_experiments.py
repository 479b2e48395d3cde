"""Harness tests: config validation, runners, persistence, CLI exit codes."""

import json
import math

import numpy as np
import pytest

from arrangelab import experiments
from arrangelab.errors import ConvergenceFailure, InvalidInput
from arrangelab.experiments import (
    ExperimentConfig,
    build_parser,
    cli_main,
    format_value,
    run_experiment,
    write_outputs,
)
from arrangelab.pencil import BORDERLINE, CONSISTENT, INCONSISTENT

from oracles import two_pass_stderr


def make_cfg(**kw):
    return ExperimentConfig.from_dict(kw)


# ---------------------------------------------------------------------------
# configuration


def test_config_rejects_unknown_keys():
    with pytest.raises(InvalidInput):
        make_cfg(experiment="conics", trials=5, tirals=5)


def test_config_missing_required_keys():
    with pytest.raises(InvalidInput):
        make_cfg(experiment="ekss-rp1", trials=10).validate()
    with pytest.raises(InvalidInput):
        make_cfg(experiment="region-counts", trials=5, N=2, rho=0.3, eps=0.1).validate()


def test_config_value_checks():
    good = dict(experiment="obstacle-graph", trials=2, N=2, rho=0.3)
    make_cfg(**good).validate()
    for bad in (
        dict(good, rho=0.0),
        dict(good, rho=math.pi),
        dict(good, seed=-1),
        dict(good, threads=0),
        dict(good, format="xml"),
        dict(good, trials=0),
        dict(good, s_sweep=[]),
        dict(good, s_sweep=[100, 0]),
        dict(good, experiment="no-such-thing"),
    ):
        with pytest.raises(InvalidInput):
            make_cfg(**bad).validate()


# ---------------------------------------------------------------------------
# trial runner plumbing


def test_run_trials_retry_and_exclusion():
    cfg = make_cfg(experiment="conics", trials=4, seed=9).validate()

    def worker(index, rng):
        if index == 0:
            return None, True, 0  # never succeeds
        return {"trial": index}, False, 0

    # trial 0 burns all retries and is excluded; the rest pass first try
    rows, flagged, excluded = experiments._run_trials(cfg, 4, worker)
    assert [r["trial"] for r in rows] == [1, 2, 3]
    assert excluded == 1
    assert flagged == experiments._MAX_RETRIES + 1


def test_run_trials_thread_count_is_immaterial():
    def worker(index, rng):
        return {"trial": index, "draw": float(rng.normal(3)[0])}, False, 0

    cfg1 = make_cfg(experiment="conics", trials=16, seed=5, threads=1).validate()
    cfg4 = make_cfg(experiment="conics", trials=16, seed=5, threads=4).validate()
    rows1, _, _ = experiments._run_trials(cfg1, 16, worker)
    rows4, _, _ = experiments._run_trials(cfg4, 16, worker)
    assert rows1 == rows4


# ---------------------------------------------------------------------------
# individual runners


def test_ekss_empty_degrees_reports_one():
    cfg = make_cfg(experiment="ekss-rp1", trials=40, degrees=[], seed=2).validate()
    res = run_experiment(cfg)
    assert res.record.estimate == 1.0
    assert res.record.stderr == 0.0
    assert all(r["b0"] == 1 and r["zeros"] == 0 for r in res.rows)


def test_ekss_zero_and_arc_columns_agree():
    cfg = make_cfg(experiment="ekss-rp1", trials=300, degrees=[2], seed=4).validate()
    res = run_experiment(cfg)
    assert all(r["b0"] == max(r["zeros"], 1) for r in res.rows)
    # a degree-2 Kostlan form misses the circle often enough to see both cases
    assert any(r["zeros"] == 0 for r in res.rows)
    assert any(r["zeros"] == 2 for r in res.rows)
    assert res.summary["mean_b0"] >= res.record.estimate


def test_stderr_matches_two_pass_recompute():
    cfg = make_cfg(experiment="conics", trials=250, seed=11).validate()
    res = run_experiment(cfg)
    counts = [r["count"] for r in res.rows]
    mean, se = two_pass_stderr(counts)
    assert abs(res.record.estimate - mean) <= 1e-12 * max(1.0, abs(mean))
    assert abs(res.record.stderr - se) <= 1e-12 * max(1.0, se)


def test_obstacle_graph_tiny_cap_is_one_component_plus_inside():
    cfg = make_cfg(
        experiment="obstacle-graph",
        trials=20,
        N=2,
        rho=0.01,
        s_sweep=[100],
        seed=6,
    ).validate()
    res = run_experiment(cfg)
    hits = sum(1 for r in res.rows if r["b0"] == 1 + r["s_p"])
    assert hits >= 18


def test_obstacle_graph_summary_shape():
    cfg = make_cfg(
        experiment="obstacle-graph",
        trials=4,
        N=2,
        rho=0.6,
        s_sweep=[60, 120],
        seed=7,
    ).validate()
    res = run_experiment(cfg)
    assert set(res.summary["per_s"]) == {"60", "120"}
    assert len(res.rows) == 8
    for r in res.rows:
        assert r["s"] in (60, 120)
        assert 0 <= r["s_p"] <= r["s"]
        assert r["b0"] >= 1


def test_quadrics_graph_rows_satisfy_component_identity():
    cfg = make_cfg(
        experiment="quadrics-graph", trials=3, s_sweep=[12, 24], seed=8
    ).validate()
    res = run_experiment(cfg)
    assert len(res.rows) == 6
    for r in res.rows:
        assert r["b0_gamma"] == r["b0_graph"] - r["definite_count"]
        assert r["b0_gamma"] >= 0


def test_pd_volume_definite_is_twice_pd():
    cfg = make_cfg(
        experiment="pd-volume", samples=200_000, m_max=2, seed=13
    ).validate()
    res = run_experiment(cfg)
    row = res.rows[0]
    se = math.sqrt(row["stderr_pd"] ** 2 * 4 + row["stderr_definite"] ** 2)
    assert abs(row["p_definite"] - 2.0 * row["p_pd"]) <= 3.0 * se


def test_pd_volume_matches_eigen_sign_rejection_oracle():
    cfg = make_cfg(
        experiment="pd-volume", samples=100_000, m_max=2, seed=13
    ).validate()
    row = run_experiment(cfg).rows[0]
    # independent dense-sampling estimate on a separately seeded stream
    gen = np.random.default_rng(977)
    n = 100_000
    a = gen.standard_normal((n, 2, 2))
    mats = np.empty_like(a)
    mats[:, 0, 0] = a[:, 0, 0]
    mats[:, 1, 1] = a[:, 1, 1]
    off = a[:, 0, 1] / math.sqrt(2.0)
    mats[:, 0, 1] = off
    mats[:, 1, 0] = off
    ev = np.linalg.eigvalsh(mats)
    p_ref = float(np.mean((ev[:, 0] > 0) | (ev[:, 1] < 0)))
    se = math.sqrt(2.0 * 0.3 * 0.7 / n)
    assert abs(row["p_definite"] - p_ref) <= 3.0 * se


def test_pd_volume_rows_cover_requested_range():
    cfg = make_cfg(experiment="pd-volume", samples=4000, m_max=4, seed=1).validate()
    res = run_experiment(cfg)
    assert [r["m"] for r in res.rows] == [2, 3, 4]
    assert all(r["n"] == r["m"] - 1 for r in res.rows)
    assert all(r["reference_rate"] == experiments.PD_DECAY_REFERENCE for r in res.rows)


def test_good_cone_fractions_are_probabilities():
    cfg = make_cfg(
        experiment="good-cone", trials=5, N=2, rho=0.5, samples=400, seed=3
    ).validate()
    res = run_experiment(cfg)
    assert res.record.trials == 5
    for r in res.rows:
        assert 0.0 <= r["fraction"] <= 1.0
        assert r["stderr"] >= 0.0


def test_coverage_rows_and_summary():
    cfg = make_cfg(
        experiment="coverage",
        trials=4,
        N=2,
        rho=0.4,
        eps=0.25,
        samples=150,
        seed=21,
    ).validate()
    res = run_experiment(cfg)
    assert len(res.rows) == 4
    assert all(r["draws"] >= 1 and r["timed_out"] == 0 for r in res.rows)
    assert res.summary["timed_out"] == 0
    assert res.record.trials == 4


def test_coverage_timeout_is_reported_not_fatal():
    cfg = make_cfg(
        experiment="coverage",
        trials=2,
        N=2,
        rho=0.4,
        eps=0.25,
        samples=150,
        seed=21,
    ).validate()
    saved = experiments._COVERAGE_MAX_DRAWS
    experiments._COVERAGE_MAX_DRAWS = 1
    try:
        res = run_experiment(cfg)
    finally:
        experiments._COVERAGE_MAX_DRAWS = saved
    assert all(r["timed_out"] == 1 and r["draws"] == 1 for r in res.rows)
    assert res.summary["timed_out"] == 2
    assert res.record.flagged_count == 2
    assert res.record.trials == 0  # no completed runs to average


def test_region_counts_zero_eps_has_empty_annulus():
    cfg = make_cfg(
        experiment="region-counts",
        trials=10,
        N=2,
        rho=0.5,
        eps=0.0,
        s=500,
        seed=17,
    ).validate()
    res = run_experiment(cfg)
    for r in res.rows:
        assert r["s_a"] == 0
        assert r["s_e"] + r["s_a"] + r["s_p"] == 500


def test_region_counts_audit_summary_is_coherent():
    cfg = make_cfg(
        experiment="region-counts",
        trials=50,
        N=2,
        rho=math.acos(0.8),
        eps=0.1,
        s=2000,
        seed=19,
    ).validate()
    summary = run_experiment(cfg).summary
    assert summary["hoeffding_bound"] == math.exp(
        -2.0 * summary["hoeffding_t"] ** 2 / 2000
    )
    assert summary["audit_pass"] == (
        summary["deviation_frequency"] <= summary["hoeffding_bound"]
    )


def test_calabi_audit_statuses_and_counts():
    cfg = make_cfg(experiment="calabi-audit", trials=40, m=3, seed=23).validate()
    res = run_experiment(cfg)
    statuses = {r["status"] for r in res.rows}
    assert statuses <= {CONSISTENT, INCONSISTENT, BORDERLINE}
    s = res.summary
    assert s["consistent"] + s["inconsistent"] + s["borderline"] == 40
    assert s["inconsistent"] == 0


# ---------------------------------------------------------------------------
# persistence


def test_format_value_conventions():
    assert format_value(True) == "1"
    assert format_value(False) == "0"
    assert format_value(np.int64(7)) == "7"
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(1.0 / 3.0)) == 1.0 / 3.0


def test_csv_reruns_are_byte_identical_across_threads(tmp_path):
    blobs = []
    for threads in (1, 1, 3):
        out = tmp_path / f"rc-{len(blobs)}.csv"
        cfg = make_cfg(
            experiment="region-counts",
            trials=20,
            N=2,
            rho=0.4,
            eps=0.1,
            s=300,
            seed=31,
            threads=threads,
            out=str(out),
        ).validate()
        write_outputs(cfg, run_experiment(cfg))
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]
    assert blobs[0].endswith(b"\n")
    assert b"\r" not in blobs[0]


def test_json_output_round_trips(tmp_path):
    out = tmp_path / "rows.json"
    cfg = make_cfg(
        experiment="conics", trials=15, seed=5, format="json", out=str(out)
    ).validate()
    res = run_experiment(cfg)
    write_outputs(cfg, res)
    loaded = json.loads(out.read_text())
    assert loaded == [
        {"trial": r["trial"], "count": r["count"]} for r in res.rows
    ]


def test_sidecar_metadata_contents(tmp_path):
    out = tmp_path / "ekss.csv"
    cfg = make_cfg(
        experiment="ekss-rp1", trials=25, degrees=[3], seed=8, out=str(out)
    ).validate()
    res = run_experiment(cfg)
    write_outputs(cfg, res)
    meta = json.loads((tmp_path / "ekss.csv.meta.json").read_text())
    assert meta["config"]["experiment"] == "ekss-rp1"
    assert meta["config"]["degrees"] == [3]
    assert meta["rows"] == len(res.rows)
    assert meta["numpy_version"] == np.__version__
    assert "wall_time" in meta["summary"]["record"]
    header = out.read_text().splitlines()[0]
    assert header == "trial,zeros,b0"


# ---------------------------------------------------------------------------
# command line


def test_cli_parses_int_lists():
    args = build_parser().parse_args(
        ["obstacle-graph", "--trials", "2", "--N", "2", "--rho", "0.3",
         "--s-sweep", "100,200"]
    )
    assert args.s_sweep == [100, 200]
    args = build_parser().parse_args(["ekss-rp1", "--degrees", ""])
    assert args.degrees == []


def test_cli_happy_path_writes_files(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code = cli_main(
        ["conics", "--trials", "20", "--seed", "3", "--out", str(out)]
    )
    assert code == 0
    assert out.exists() and (tmp_path / "run.csv.meta.json").exists()
    text = capsys.readouterr().out
    assert "estimate:" in text


def test_cli_config_file_with_flag_override(tmp_path):
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(
        json.dumps({"experiment": "conics", "trials": 40, "seed": 1})
    )
    out = tmp_path / "o.csv"
    code = cli_main(
        ["conics", "--config", str(cfg_path), "--trials", "10", "--out", str(out)]
    )
    assert code == 0
    meta = json.loads((tmp_path / "o.csv.meta.json").read_text())
    assert meta["config"]["trials"] == 10
    assert meta["config"]["seed"] == 1


def test_cli_exit_code_2_on_config_errors(tmp_path, capsys):
    assert cli_main(["conics", "--trials", "0"]) == 2
    assert cli_main(["ekss-rp1", "--trials", "5"]) == 2  # degrees missing
    assert cli_main(["conics", "--trials", "5", "--out", "/no/such/dir/x.csv"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli_main(["conics", "--config", str(bad)]) == 2
    mismatch = tmp_path / "mismatch.json"
    mismatch.write_text(json.dumps({"experiment": "pd-volume", "samples": 10}))
    assert cli_main(["conics", "--config", str(mismatch)]) == 2
    capsys.readouterr()


def test_cli_exit_code_2_on_unknown_subcommand(capsys):
    assert cli_main(["does-not-exist"]) == 2
    capsys.readouterr()


def test_cli_exit_code_3_on_numerical_failure(capsys):
    def exploding(cfg):
        raise ConvergenceFailure("stalled")

    saved = experiments._RUNNERS["conics"]
    experiments._RUNNERS["conics"] = exploding
    try:
        assert cli_main(["conics", "--trials", "5"]) == 3
    finally:
        experiments._RUNNERS["conics"] = saved
    capsys.readouterr()
