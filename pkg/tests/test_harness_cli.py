import csv
import json

import numpy as np
import pytest

from awqv import cli, harness
from awqv.errors import FormatError, InputError
from awqv.problem import MaxCutInstance, generate_regular, save_instance
from awqv.trace import RunTrace, StepRecord, read_jsonl


def _write(path, data):
    path.write_text(json.dumps(data))
    return path


def test_seed_derivation_is_frozen():
    assert harness.derive_seed(0, "reg3-n12", 0, "awqv-p2a-zy") == 596659785612765912
    assert harness.derive_seed(1, "s", 3, "gw") == 5794834957327039834


@pytest.mark.parametrize("tag, eta, iters", [("awqv-p2a", 0.05, 50), ("cqite-p1a", 0.10, 50),
                                             ("vqe-p2a", 0.05, 50), ("qiv-p2a", 0.05, 50)])
def test_method_defaults(tag, eta, iters):
    cfg = harness.resolve_method(tag)
    assert (cfg.eta, cfg.iters, cfg.mu, cfg.lam) == (eta, iters, 0.9, 1.0)


def test_weighted_default_mu():
    assert harness.resolve_method("awqv-p2a-zy", weighted=True).mu == 0.8


def test_method_overrides():
    cfg = harness.resolve_method({"method": "awqv", "ansatz": "P2A-ZY", "eta": 0.02, "lambda": 2.0})
    assert (cfg.tag, cfg.ansatz, cfg.eta, cfg.lam) == ("awqv-p2a-zy", "P2A-ZY", 0.02, 2.0)


@pytest.mark.parametrize("entry", ["lbfgs-p2a", "awqv-p3a", {"tag": "vqe-p2a", "bogus": 1}, {}])
def test_bad_method_entries(entry):
    with pytest.raises(InputError):
        harness.resolve_method(entry)


def test_single_run_config(tmp_path):
    g = tmp_path / "g.json"
    save_instance(generate_regular(6, 3, 1), g)
    cfg = harness.ExperimentConfig.from_dict(
        {"method": "awqv", "ansatz": "P2A-ZY", "eta": 0.05, "mu": 0.9, "lambda": 1,
         "iters": 5, "samples": 7, "seed": 3, "graph_path": str(g)})
    assert cfg.suite == "g" and cfg.seed == 3 and cfg.samples == 7
    (m,) = cfg.methods
    assert (m.tag, m.iters, m.samples) == ("awqv-p2a-zy", 5, 7)
    assert [i.n for i in harness.build_instances(cfg)] == [6]


@pytest.mark.parametrize("data", [{"family": {"model": "regular"}}, {"suite": "x"},
                                  {"suite": "x", "family": {"model": "grid"}, "methods": ["gw"]},
                                  {"suite": "x", "family": {"model": "er", "n": 4, "p": 0.5}}])
def test_bad_configs(data):
    with pytest.raises(FormatError):
        harness.ExperimentConfig.from_dict(data)


def test_unreadable_config(tmp_path):
    with pytest.raises(FormatError):
        harness.load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(FormatError):
        harness.load_config(bad)


def test_worker_precedence(monkeypatch):
    monkeypatch.delenv(harness.WORKERS_ENV, raising=False)
    assert harness.resolve_workers(None, 3) == 3
    monkeypatch.setenv(harness.WORKERS_ENV, "2")
    assert harness.resolve_workers(None, 3) == 2
    assert harness.resolve_workers(4, 3) == 4


def test_bookkeeping_contract(tmp_path):
    cfg = harness.ExperimentConfig.from_dict({
        "suite": "reg3-n12", "family": {"model": "regular", "n": 12, "d": 3, "count": 10},
        "methods": ["awqv-p2a-zy", "cqite-p2a-zy"], "seed": 0, "out": str(tmp_path / "res"),
        "figures": False})
    out = harness.run_suite(cfg, workers=1)
    assert len(list((out / "traces").glob("*.jsonl"))) == 20
    assert len(list(out.glob("*.csv"))) == 1
    assert (out / "summary.json").exists()
    rows = harness.read_metrics(out / "metrics.csv")
    assert len(rows) == 20 and all(r["status"] == "ok" for r in rows)
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["runs"]) == 20
    assert all(r["wall_time"] > 0 and r["iterations"] == 50 for r in summary["runs"])
    stats = summary["stats"]["awqv-p2a-zy"]
    pgs = [float(r["p_gs"]) for r in rows if r["method"] == "awqv-p2a-zy"]
    assert stats["mean_p_gs"] == pytest.approx(np.mean(pgs)) and stats["min_p_gs"] == min(pgs)


def _small_config(out, **extra):
    data = {"suite": "det", "family": {"model": "regular", "n": 6, "d": 3, "count": 2},
            "methods": ["awqv-p2a-zy", "qiv-p2a", "vqe-p2a", "cqite-p1a", "qite-p2a", "gw"],
            "seed": 5, "out": str(out), "figures": False}
    data.update(extra)
    return harness.ExperimentConfig.from_dict(data)


def test_rerun_is_byte_identical(tmp_path):
    a = harness.run_suite(_small_config(tmp_path / "a"), workers=1)
    b = harness.run_suite(_small_config(tmp_path / "b"), workers=2)
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    for f in (a / "graphs").iterdir():
        assert f.read_bytes() == (b / "graphs" / f.name).read_bytes()


def test_seed_changes_instances(tmp_path):
    a = harness.build_instances(_small_config(tmp_path, seed=1))
    b = harness.build_instances(_small_config(tmp_path, seed=2))
    assert [i.edges for i in a] != [i.edges for i in b]


def test_failed_run_is_recorded(tmp_path):
    big = tmp_path / "big.json"
    save_instance(MaxCutInstance(30, ((1, 2, 1.0),)), big)
    ok = tmp_path / "ok.json"
    save_instance(generate_regular(4, 3, 0), ok)
    cfg = harness.ExperimentConfig.from_dict({
        "suite": "mixed", "family": {"graphs": [str(big), str(ok)]}, "methods": ["gw"],
        "out": str(tmp_path / "res"), "figures": False})
    out = harness.run_suite(cfg)
    rows = harness.read_metrics(out / "metrics.csv")
    assert [r["status"] for r in rows] == ["error", "ok"]
    assert "CapacityError" in rows[0]["error"]


def _metrics_fixture(path, p_values):
    cfg = _small_config(path)
    cols = harness.csv_columns(cfg)
    rows = []
    for k, p in enumerate(p_values):
        row = {c: "" for c in cols}
        row.update(suite="det", instance=f"instance_{k:03d}", model="regular", n=6, degree=3,
                   method="awqv-p2a-zy", status="ok", p_gs=p)
        row.update({f"fail_M{M}": int(M < 1 / p) for M in cfg.failure_m})
        rows.append(row)
    path.mkdir(parents=True, exist_ok=True)
    harness.write_metrics(rows, cols, path / "metrics.csv")
    return path


def test_summarize_empty(tmp_path):
    out = _metrics_fixture(tmp_path / "r", [])
    tables = harness.summarize(out, figures=False)
    assert tables == {"pgs": [], "failures": []}
    assert (out / "summary_pgs.csv").read_text().strip() == ",".join(harness.PGS_COLUMNS)


def test_summarize_single(tmp_path):
    (row,) = harness.summarize(_metrics_fixture(tmp_path / "r", [0.9]), figures=False)["pgs"]
    assert row["mean_p_gs"] == row["min_p_gs"] == 0.9


def test_summarize_three_runs(tmp_path):
    out = _metrics_fixture(tmp_path / "r", [0.5, 0.25, 0.15])
    tables = harness.summarize(out, figures=False)
    (row,) = tables["pgs"]
    assert row["runs"] == 3
    assert row["mean_p_gs"] == pytest.approx(0.3)
    assert row["min_p_gs"] == 0.15
    fails = {f["M"]: f["failures"] for f in tables["failures"]}
    assert fails[5] == 1 and fails[10] == 0


def test_summarize_missing_columns(tmp_path):
    (tmp_path / "metrics.csv").write_text("instance,method\nx,y\n")
    with pytest.raises(FormatError):
        harness.summarize(tmp_path, figures=False)
    with pytest.raises(FormatError):
        harness.summarize(tmp_path / "nowhere", figures=False)


def test_trace_jsonl(tmp_path):
    tr = RunTrace("x")
    for s, e in enumerate([0.0, -2.0, -1.0]):
        tr.add(StepRecord(s, e, 0.1 * s), np.full(2, float(s)))
    tr.to_jsonl(tmp_path / "t.jsonl")
    rows = read_jsonl(tmp_path / "t.jsonl")
    assert [("theta" in r) for r in rows] == [False, True, True]
    assert set(rows[0]) >= {"step", "energy", "p_gs", "w", "delta", "theta_norm", "residual"}
    assert tr.best_energy == -2.0 and tr.best_step == 1
    (tmp_path / "bad.jsonl").write_text('{"step": 0}\n')
    with pytest.raises(FormatError):
        read_jsonl(tmp_path / "bad.jsonl")


def test_cli_end_to_end(tmp_path, capsys):
    assert cli.main(["gen", "--n", "6", "--count", "2", "--seed", "3", "--out", str(tmp_path / "g")]) == 0
    graphs = sorted((tmp_path / "g").glob("*.json"))
    assert len(graphs) == 2
    capsys.readouterr()

    assert cli.main(["spectrum", str(graphs[0])]) == 0
    spec = json.loads(capsys.readouterr().out)
    assert spec["max_cut"] == -spec["C_1"] and spec["num_optimal"] % 2 == 0

    assert cli.main(["gw", str(graphs[0]), "--samples", "50"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["relaxation"] >= report["best_cut"] - 1e-9
    assert set(report["failures"]) == {str(M) for M in harness.FAILURE_M}

    cfg = _write(tmp_path / "cfg.json", {
        "suite": "cli", "family": {"graphs": [str(g) for g in graphs]},
        "methods": ["awqv-p2a-zy", "gw"], "out": str(tmp_path / "res")})
    assert cli.main(["run", "--config", str(cfg), "--seed", "4", "--workers", "1"]) == 0
    assert "awqv-p2a-zy" in capsys.readouterr().out
    res = tmp_path / "res"
    assert {p.name for p in (res / "figures").iterdir()} == {
        "p_gs.png", "expected_alpha.png", "failures_vs_M.png", "traces.png"}
    assert json.loads((res / "summary.json").read_text())["seed"] == 4

    assert cli.main(["summarize", str(res), "--no-figures"]) == 0
    out = capsys.readouterr().out
    head = next(csv.reader(out.splitlines()))
    assert head == harness.PGS_COLUMNS


def test_cli_reports_errors(tmp_path, capsys):
    assert cli.main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    assert "error" in capsys.readouterr().err
