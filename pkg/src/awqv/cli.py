"""Command-line entry point: ``awqv {gen,run,summarize,spectrum,gw}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import harness
from .errors import AWQVError
from .gw import gw_solve, rounding_costs
from .metrics import failure_predicate_gw
from .problem import (
    brute_force_spectrum,
    generate_er_weighted,
    generate_regular,
    index_to_bits,
    load_instance,
    save_instance,
)


def cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        seed = harness.derive_seed(args.seed, args.model, k, "graph")
        if args.model == "regular":
            inst = generate_regular(args.n, args.d, seed)
        else:
            inst = generate_er_weighted(args.n, args.p, seed)
        path = out / f"{args.model}_n{args.n}_{k:03d}.json"
        save_instance(inst, path)
        print(path)
    return 0


def cmd_run(args) -> int:
    config = harness.load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    if args.no_figures:
        config.figures = False
    out = harness.run_suite(config, workers=args.workers)
    stats = json.loads((out / "summary.json").read_text())["stats"]
    for tag, s in stats.items():
        mean = "-" if s["mean_p_gs"] is None else f"{s['mean_p_gs']:.3f}"
        low = "-" if s["min_p_gs"] is None else f"{s['min_p_gs']:.3f}"
        print(f"{tag:16s} runs={s['runs']:3d} errors={s['errors']} mean_p_gs={mean} min_p_gs={low}")
    print(f"results in {out}")
    return 0


def cmd_summarize(args) -> int:
    tables = harness.summarize(args.results, figures=not args.no_figures)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(harness.PGS_COLUMNS)
    for row in tables["pgs"]:
        writer.writerow([harness._fmt(row[c]) for c in harness.PGS_COLUMNS])
    print()
    writer.writerow(harness.FAIL_COLUMNS)
    for row in tables["failures"]:
        writer.writerow([row[c] for c in harness.FAIL_COLUMNS])
    return 0


def cmd_spectrum(args) -> int:
    inst = load_instance(args.graph)
    spec = brute_force_spectrum(inst)
    optimal = spec.optimal_bitstrings()
    report = {
        "n": inst.n,
        "edges": inst.num_edges,
        "K": spec.K,
        "C_1": spec.C1,
        "C_K": spec.CK,
        "max_cut": -spec.C1,
        "num_optimal": len(optimal),
        "optimal": optimal[: args.limit],
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_gw(args) -> int:
    inst = load_instance(args.graph)
    spec = brute_force_spectrum(inst)
    emb = gw_solve(inst, args.rank, args.restarts, seed=args.seed)
    costs, indices = rounding_costs(emb, inst, args.samples, args.seed + 1)
    k = int(costs.argmin())
    report = {
        "relaxation": emb.objective,
        "rank": emb.rank,
        "best_cut": -float(costs[k]),
        "solution": index_to_bits(int(indices[k]), inst.n),
        "max_cut": -spec.C1,
        "optimal": not failure_predicate_gw(float(costs[k]), spec),
        "failures": {str(M): failure_predicate_gw(float(costs[:M].min()), spec)
                     for M in harness.FAILURE_M if M <= args.samples},
    }
    print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="awqv", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate random graph files")
    p.add_argument("--model", choices=("regular", "er"), default="regular")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=3, help="degree (regular)")
    p.add_argument("--p", type=float, default=0.5, help="edge probability (er)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="graphs")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run an experiment suite from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help=f"overrides ${harness.WORKERS_ENV} and the config")
    p.add_argument("--out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("summarize", help="aggregate a results directory")
    p.add_argument("results")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("spectrum", help="brute-force the cost spectrum of one graph")
    p.add_argument("graph")
    p.add_argument("--limit", type=int, default=16, help="max optimal bitstrings to list")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("gw", help="Goemans-Williamson baseline on one graph")
    p.add_argument("graph")
    p.add_argument("--samples", type=int, default=50, help="number of hyperplane roundings M")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=int)
    p.add_argument("--restarts", type=int, default=10)
    p.set_defaults(func=cmd_gw)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except AWQVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
