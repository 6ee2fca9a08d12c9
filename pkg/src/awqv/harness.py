"""Batch experiments: generate instances, run methods, write traces/CSV/summary.

Output layout of a suite directory::

    graphs/instance_000.json ...      one graph file per instance
    traces/instance_000__awqv-p2a-zy.jsonl ...
    metrics.csv                       one row per (instance, method)
    summary.json                      per-method p_gs stats, failure counts, timings
    summary_pgs.csv, summary_failures.csv, figures/*.png   (from ``summarize``)

Run seeds are ``sha256("global|suite|index|tag")`` truncated to 63 bits, so they
do not depend on run order or worker count.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import apply_ansatz, build_ansatz
from .awqv import awqv_run, qiv_run
from .errors import FormatError, InputError
from .gw import gw_solve, rounding_costs
from .metrics import (
    expected_best_alpha,
    failure_predicate_awqv,
    failure_predicate_gw,
    ground_state_probability,
)
from .optimize import vqe_run
from .problem import (
    MaxCutInstance,
    brute_force_spectrum,
    generate_er_weighted,
    generate_regular,
    hamiltonian_diagonal,
    index_to_bits,
    load_instance,
    save_instance,
)
from .qite import cqite_run, qite_run
from .statevec import plus_state, zero_plus_state

log = logging.getLogger(__name__)

WORKERS_ENV = "AWQV_WORKERS"
M_VALUES = (1, 2, 3, 5, 10)
FAILURE_M = tuple(range(5, 55, 5))

METHODS = ("awqv", "qiv", "vqe", "cqite", "qite")
ANSATZE = {"p1a": "P1A", "p2a": "P2A", "p2a-zy": "P2A-ZY", "p2a-xy": "P2A-XY"}

# learning rate / imaginary time step and iteration count per method tag
METHOD_DEFAULTS = {
    "vqe-p2a": (0.05, 50),
    "cqite-p1a": (0.10, 50),
    "cqite-p2a": (0.05, 50),
    "cqite-p2a-zy": (0.05, 50),
    "qite-p2a": (0.05, 50),
    "qiv-p2a": (0.05, 50),
    "awqv-p2a": (0.05, 50),
    "awqv-p2a-zy": (0.05, 50),
    "awqv-p2a-xy": (0.05, 50),
}


def derive_seed(global_seed: int, suite: str, index: int, tag: str) -> int:
    digest = hashlib.sha256(f"{global_seed}|{suite}|{index}|{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass
class MethodConfig:
    tag: str
    method: str
    ansatz: str | None = None
    eta: float = 0.05
    iters: int = 50
    mu: float = 0.9
    lam: float = 1.0
    samples: int = 10
    optimizer: str = "gd"
    init: str = "single-qite-step"
    init_state: str = "plus"
    grad_method: str = "adjoint"
    restarts: int = 10
    rank: int | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def resolve_method(entry, weighted: bool = False, samples: int = 10) -> MethodConfig:
    """Turn a tag such as ``"awqv-p2a-zy"`` or a dict with overrides into a config.

    Per-tag defaults from ``METHOD_DEFAULTS`` apply; weighted families default to ``mu = 0.8``.
    """
    if isinstance(entry, str):
        entry = {"tag": entry}
    entry = dict(entry)
    if "tag" not in entry:
        if "method" not in entry:
            raise InputError(f"method entry {entry!r} has neither 'tag' nor 'method'")
        entry["tag"] = entry["method"] + ("-" + entry["ansatz"].lower() if entry.get("ansatz") else "")
    tag = entry.pop("tag")
    if "lambda" in entry:
        entry["lam"] = entry.pop("lambda")
    if tag == "gw":
        cfg = MethodConfig(tag, "gw", samples=max(FAILURE_M))
    else:
        method, _, ansatz_key = tag.partition("-")
        if method not in METHODS or ansatz_key not in ANSATZE:
            raise InputError(f"unknown method tag {tag!r}")
        eta, iters = METHOD_DEFAULTS.get(tag, (0.05, 50))
        cfg = MethodConfig(tag, method, ANSATZE[ansatz_key], eta, iters,
                           mu=0.8 if weighted else 0.9, samples=samples)
        if tag == "cqite-p1a":
            cfg.init_state = "zero_plus"
    entry.pop("method", None)
    if "ansatz" in entry and entry["ansatz"] is not None:
        entry["ansatz"] = ANSATZE.get(entry["ansatz"].lower(), entry["ansatz"])
    for key, value in entry.items():
        if not hasattr(cfg, key):
            raise InputError(f"unknown option {key!r} for method {tag!r}")
        setattr(cfg, key, value)
    return cfg


@dataclass
class ExperimentConfig:
    suite: str
    family: dict
    methods: list[MethodConfig]
    seed: int = 0
    out: str = "results"
    workers: int = 1
    samples: int = 10
    figures: bool = True
    m_values: tuple[int, ...] = M_VALUES
    failure_m: tuple[int, ...] = FAILURE_M
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def weighted(self) -> bool:
        return self.family.get("model") == "er"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "graph_path" in data and "method" in data:
            # single-run config: one graph, one method
            run = {k: data.pop(k) for k in list(data)
                   if k in ("method", "ansatz", "eta", "mu", "lambda", "iters")}
            data.setdefault("suite", Path(data["graph_path"]).stem)
            data["family"] = {"graphs": [data.pop("graph_path")]}
            data["methods"] = [run]
        try:
            family = dict(data["family"])
            suite = str(data["suite"])
        except KeyError as exc:
            raise FormatError(f"config is missing {exc}") from exc
        model = family.get("model")
        if "graphs" not in family and model not in ("regular", "er"):
            raise FormatError(f"family needs 'graphs' or model regular|er, got {family!r}")
        samples = int(data.get("samples", 10))
        weighted = model == "er"
        methods = [resolve_method(m, weighted, samples) for m in data.get("methods", [])]
        if not methods:
            raise FormatError("config lists no methods")
        return cls(
            suite=suite, family=family, methods=methods, seed=int(data.get("seed", 0)),
            out=str(data.get("out", Path("results") / suite)),
            workers=int(data.get("workers", 1)), samples=samples,
            figures=bool(data.get("figures", True)),
            m_values=tuple(data.get("m_values", M_VALUES)),
            failure_m=tuple(data.get("failure_m", FAILURE_M)), raw=data,
        )


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def build_instances(config: ExperimentConfig) -> list[MaxCutInstance]:
    fam = config.family
    if "graphs" in fam:
        return [load_instance(p) for p in fam["graphs"]]
    count = int(fam.get("count", 1))
    out = []
    for k in range(count):
        seed = derive_seed(config.seed, config.suite, k, "graph")
        if fam["model"] == "regular":
            out.append(generate_regular(int(fam["n"]), int(fam["d"]), seed))
        else:
            out.append(generate_er_weighted(int(fam["n"]), float(fam["p"]), seed))
    return out


def _initial_state(name: str, n: int) -> np.ndarray:
    if name == "plus":
        return plus_state(n)
    if name == "zero_plus":
        return zero_plus_state(n)
    raise InputError(f"unknown initial state {name!r}")


def run_method(instance: MaxCutInstance, cfg: MethodConfig, seed: int, *,
               m_values=M_VALUES, failure_m=FAILURE_M, h=None, spectrum=None):
    """Run one method on one instance; returns ``(metric row, trace or None)``."""
    h = hamiltonian_diagonal(instance) if h is None else h
    spectrum = brute_force_spectrum(instance) if spectrum is None else spectrum
    row = {"method": cfg.tag, "n": instance.n, "ground_energy": spectrum.C1}

    if cfg.method == "gw":
        emb = gw_solve(instance, cfg.rank, cfg.restarts, seed=seed)
        costs, indices = rounding_costs(emb, instance, cfg.samples, seed + 1)
        k = int(np.argmin(costs))
        row.update(relaxation=emb.objective, best_cut=-float(costs[k]),
                   solution=index_to_bits(int(indices[k]), instance.n),
                   solution_cost=float(costs[k]))
        for M in failure_m:
            row[f"fail_M{M}"] = int(failure_predicate_gw(float(costs[:M].min()), spectrum))
        return row, None

    spec = build_ansatz(instance.n, cfg.ansatz)
    psi0 = _initial_state(cfg.init_state, instance.n)
    kw = dict(h_diag=h, spectrum=spectrum)
    if cfg.method == "awqv":
        _, trace = awqv_run(instance, spec, psi0, cfg.eta, cfg.mu, cfg.lam, cfg.iters,
                            cfg.samples, seed, grad_method=cfg.grad_method, **kw)
    elif cfg.method == "qiv":
        _, trace = qiv_run(instance, spec, psi0, cfg.eta, cfg.iters, cfg.samples, seed,
                           grad_method=cfg.grad_method, **kw)
    elif cfg.method == "vqe":
        trace = vqe_run(instance, spec, psi0, cfg.optimizer, cfg.eta, cfg.iters, cfg.init,
                        grad_method=cfg.grad_method, **kw)
    elif cfg.method == "cqite":
        trace = cqite_run(instance, spec, psi0, cfg.eta, cfg.iters, **kw)
    else:
        trace = qite_run(instance, spec, psi0, cfg.eta, cfg.iters, **kw)

    if trace.best_state is not None:
        psi = trace.best_state
    else:
        psi = apply_ansatz(spec, trace.best_theta, psi0)
    p_gs = ground_state_probability(psi, spectrum)
    row.update(p_gs=p_gs, final_p_gs=trace.final.p_gs, best_energy=trace.best_energy,
               best_step=trace.best_step, solution=trace.solution or "",
               solution_cost="" if trace.solution_cost is None else trace.solution_cost)
    for M in m_values:
        row[f"e_alpha_M{M}"] = expected_best_alpha(psi, spectrum, M)
    for M in failure_m:
        row[f"fail_M{M}"] = int(failure_predicate_awqv(p_gs, M))
    return row, trace


def csv_columns(config: ExperimentConfig) -> list[str]:
    return (
        ["suite", "instance", "model", "n", "degree", "p", "method", "status", "error",
         "ground_energy", "p_gs", "final_p_gs", "best_energy", "best_step",
         "solution", "solution_cost", "relaxation", "best_cut"]
        + [f"e_alpha_M{M}" for M in config.m_values]
        + [f"fail_M{M}" for M in config.failure_m]
    )


def _task(args):
    config, index, instance, cfg, trace_dir = args
    seed = derive_seed(config.seed, config.suite, index, cfg.tag)
    name = f"instance_{index:03d}"
    degrees = set(instance.degrees())
    base = {"suite": config.suite, "instance": name, "model": instance.model, "n": instance.n,
            "degree": degrees.pop() if len(degrees) == 1 and instance.model == "regular" else "",
            "p": config.family.get("p", "") if instance.model == "er" else "",
            "method": cfg.tag, "status": "ok", "error": ""}
    t0 = time.perf_counter()
    try:
        row, trace = run_method(instance, cfg, seed, m_values=config.m_values,
                                failure_m=config.failure_m)
        base.update(row)
        iterations = 0
        if trace is not None:
            trace.to_jsonl(Path(trace_dir) / f"{name}__{cfg.tag}.jsonl")
            iterations = trace.final.step
    except Exception as exc:  # one failed run must not abort the suite
        log.exception("run %s/%s failed", name, cfg.tag)
        base.update(status="error", error=f"{type(exc).__name__}: {exc}")
        iterations = 0
    timing = {"instance": name, "method": cfg.tag, "seed": seed, "status": base["status"],
              "wall_time": time.perf_counter() - t0, "iterations": iterations}
    return base, timing


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_metrics(rows: list[dict], columns: list[str], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _fmt(row.get(c, "")) for c in columns})


def resolve_workers(requested: int | None, config_workers: int = 1) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, config_workers)


def run_suite(config: ExperimentConfig, workers: int | None = None) -> Path:
    out = Path(config.out)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    instances = build_instances(config)
    for k, inst in enumerate(instances):
        save_instance(inst, out / "graphs" / f"instance_{k:03d}.json")

    tasks = [(config, k, inst, cfg, out / "traces")
             for k, inst in enumerate(instances) for cfg in config.methods]
    nworkers = resolve_workers(workers, config.workers)
    log.info("suite %s: %d runs on %d worker(s)", config.suite, len(tasks), nworkers)
    if nworkers == 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(nworkers) as pool:
            results = list(pool.map(_task, tasks))

    rows = [r for r, _ in results]
    timings = [t for _, t in results]
    write_metrics(rows, csv_columns(config), out / "metrics.csv")

    summary = {
        "suite": config.suite,
        "seed": config.seed,
        "family": config.family,
        "methods": {m.tag: m.to_dict() for m in config.methods},
        "stats": method_stats(rows, config.failure_m),
        "runs": timings,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if config.figures:
        from .plots import render_suite_figures
        render_suite_figures(out)
    return out


def method_stats(rows: list[dict], failure_m=FAILURE_M) -> dict:
    stats = {}
    for tag in dict.fromkeys(r["method"] for r in rows):
        ok = [r for r in rows if r["method"] == tag and r.get("status", "ok") == "ok"]
        pgs = [float(r["p_gs"]) for r in ok if r.get("p_gs", "") != ""]
        stats[tag] = {
            "runs": len(ok),
            "errors": sum(1 for r in rows if r["method"] == tag) - len(ok),
            "mean_p_gs": statistics.fmean(pgs) if pgs else None,
            "min_p_gs": min(pgs) if pgs else None,
            "failures": {str(M): sum(int(r[f"fail_M{M}"]) for r in ok) for M in failure_m},
        }
    return stats


PGS_COLUMNS = ["model", "n", "degree", "p", "method", "runs", "mean_p_gs", "min_p_gs"]
FAIL_COLUMNS = ["method", "M", "failures", "runs"]
_REQUIRED = {"instance", "method", "status", "p_gs", "model", "n", "degree", "p"}


def read_metrics(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"no metrics file at {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = _REQUIRED - set(reader.fieldnames or [])
        if missing:
            raise FormatError(f"{path} lacks columns {sorted(missing)}")
        return list(reader)


def summarize(results_dir, figures: bool = True) -> dict[str, list[dict]]:
    """Mean/min p_gs per (family group, method) and failure counts vs ``M``.

    Writes ``summary_pgs.csv`` and ``summary_failures.csv`` into the directory.
    """
    results_dir = Path(results_dir)
    rows = read_metrics(results_dir / "metrics.csv")
    fail_ms = sorted(int(c[len("fail_M"):]) for c in (rows[0].keys() if rows else [])
                     if c.startswith("fail_M"))

    groups: dict[tuple, list[float]] = {}
    for r in rows:
        if r["status"] != "ok" or r["p_gs"] == "":
            continue
        key = (r["model"], int(r["n"]), r["degree"], r["p"], r["method"])
        groups.setdefault(key, []).append(float(r["p_gs"]))
    pgs_table = [
        {"model": k[0], "n": k[1], "degree": k[2], "p": k[3], "method": k[4], "runs": len(v),
         "mean_p_gs": statistics.fmean(v), "min_p_gs": min(v)}
        for k, v in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]),
                                                          str(kv[0][3]), kv[0][4]))
    ]

    fail_table = []
    for tag in dict.fromkeys(r["method"] for r in rows):
        ok = [r for r in rows if r["method"] == tag and r["status"] == "ok"]
        for M in fail_ms:
            fail_table.append({"method": tag, "M": M, "runs": len(ok),
                               "failures": sum(int(r[f"fail_M{M}"]) for r in ok)})

    write_metrics(pgs_table, PGS_COLUMNS, results_dir / "summary_pgs.csv")
    write_metrics(fail_table, FAIL_COLUMNS, results_dir / "summary_failures.csv")
    if figures and rows:
        from .plots import render_suite_figures
        render_suite_figures(results_dir, rows=rows, failures=fail_table)
    return {"pgs": pgs_table, "failures": fail_table}
