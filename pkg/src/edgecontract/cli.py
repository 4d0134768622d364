"""Command-line front end.

Subcommands:
  contract-solve  print the solved menu, pooled baseline, and feasibility
  verify          run the oracle-equivalence and invariant suites
  simulate        one scenario, one benchmark, all repeats
  sweep           the configured server-count or task-count sweep
  assess-grid     dump the difficulty-label grid over realized score pairs
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .assessment import label1_region_is_monotone, label_grid
from .config import ScenarioConfig, default_config, load_config
from .contract import (
    expected_system_utility,
    grid_search_oracle,
    random_admissible_params,
    solve_contract,
    solve_pooled_contract,
    verify_feasibility,
)
from .errors import AdmissibilityError, ConfigError, EmptyFeasibleSet, InstanceTooLarge
from .harness import Benchmark, export_results, run_sweep

BENCHMARK_NAMES = [b.value for b in Benchmark]


def _load(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else default_config()
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    config.validate()
    return config


def _cmd_contract_solve(args) -> int:
    config = _load(args)
    params = config.contract
    menu = solve_contract(params)
    pooled = solve_pooled_contract(params)
    report = verify_feasibility(menu, params, tol=1e-9)
    if args.format == "json":
        payload = {
            "low": {"price": menu.low.price, "perf": menu.low.perf},
            "high": {"price": menu.high.price, "perf": menu.high.perf},
            "pooled": {"price": pooled.price, "perf": pooled.perf},
            "expected_system_utility": expected_system_utility(menu, params),
            "feasibility": {
                "ir_L": report.ir_L,
                "ir_H": report.ir_H,
                "ic_L": report.ic_L,
                "ic_H": report.ic_H,
                "feasible": report.feasible,
                "low_ir_binding": report.low_ir_binding,
                "high_ic_binding": report.high_ic_binding,
            },
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    print(f"low bundle:   price={menu.low.price:.6f}  perf={menu.low.perf:.6f}")
    print(f"high bundle:  price={menu.high.price:.6f}  perf={menu.high.perf:.6f}")
    print(f"pooled:       price={pooled.price:.6f}  perf={pooled.perf:.6f}")
    print(f"expected system utility: {expected_system_utility(menu, params):.6f}")
    print(
        "feasibility residuals: "
        f"IR_L={report.ir_L:.3e} IR_H={report.ir_H:.3e} "
        f"IC_L={report.ic_L:.3e} IC_H={report.ic_H:.3e}"
    )
    print(f"feasible: {report.feasible}")
    return 0


def _cmd_verify(args) -> int:
    config = _load(args)
    params = config.contract
    failures = 0

    def check(ok: bool, description: str) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {description}")
        failures += 0 if ok else 1

    menu = solve_contract(params)
    span = params.theta_H / (params.eta1 - params.eta3) + 0.25
    oracle = grid_search_oracle(
        params, (params.I_r1 + 1e-3, params.I_r1 + span), step=args.grid_step
    )
    d_low = abs(menu.low.perf - oracle.low.perf)
    d_high = abs(menu.high.perf - oracle.high.perf)
    d_util = expected_system_utility(menu, params) - expected_system_utility(oracle, params)
    check(
        d_low <= 10 * args.grid_step and d_high <= 10 * args.grid_step,
        f"grid oracle matches closed-form performances (|dI_L|={d_low:.2e}, |dI_H|={d_high:.2e})",
    )
    check(
        0.0 <= d_util <= 1e-3,
        f"closed form attains the grid optimum (utility gap {d_util:.2e})",
    )
    report = verify_feasibility(menu, params, tol=1e-9)
    check(
        report.feasible and report.low_ir_binding and report.high_ic_binding,
        "closed-form menu is feasible with the binding pattern",
    )

    rng = np.random.default_rng(config.seed)
    worst_ir = worst_ic = 0.0
    monotone = True
    rent_positive = True
    for _ in range(200):
        draw = random_admissible_params(rng)
        draw_menu = solve_contract(draw)
        draw_report = verify_feasibility(draw_menu, draw, tol=1e-8)
        worst_ir = max(worst_ir, abs(draw_report.ir_L))
        worst_ic = max(worst_ic, abs(draw_report.ic_H))
        rent_positive &= draw_report.ir_H > 0.0 and draw_report.ic_L >= 0.0
        monotone &= (
            draw_menu.high.perf > draw_menu.low.perf
            and draw_menu.high.price > draw_menu.low.price
        )
    check(
        worst_ir <= 1e-8 and worst_ic <= 1e-8,
        f"200 random draws: binding residuals within 1e-8 (worst {max(worst_ir, worst_ic):.2e})",
    )
    check(rent_positive, "200 random draws: positive high-type rent, slack IC_L")
    check(monotone, "200 random draws: screening monotonicity")
    return 1 if failures else 0


def _cmd_simulate(args) -> int:
    config = _load(args)
    benchmark = Benchmark(args.benchmark)
    result = run_sweep(
        config,
        axis="servers",
        values=[config.topology.num_servers],
        benchmarks=[benchmark],
        keep_ledgers=args.verbose,
    )
    paths = export_results(
        result, args.out, fmt=args.format, prefix=f"simulate_{benchmark.value}", verbose=args.verbose
    )
    for path in paths:
        print(path)
    return 0


def _cmd_sweep(args) -> int:
    config = _load(args)
    benchmarks = [args.benchmark] if args.benchmark else list(config.sweep.benchmarks)
    result = run_sweep(config, benchmarks=benchmarks, keep_ledgers=args.verbose)
    paths = export_results(
        result, args.out, fmt=args.format, prefix=f"sweep_{result.sweep_axis}", verbose=args.verbose
    )
    for path in paths:
        print(path)
    return 0


def _cmd_assess_grid(args) -> int:
    config = _load(args)
    scores, labels = label_grid(config.contract, n=args.grid_size)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        target = out / "assess_grid.json"
        payload = {
            "scores": [float(s) for s in scores],
            "labels": [[int(v) for v in row] for row in labels],
            "monotone": label1_region_is_monotone(labels),
        }
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        target = out / "assess_grid.csv"
        with open(target, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("score_low", "score_high", "label"))
            for i, s_low in enumerate(scores):
                for j, s_high in enumerate(scores):
                    writer.writerow((float(s_low), float(s_high), int(labels[i, j])))
    print(target)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgecontract",
        description="Contract-priced task offloading simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("contract-solve", help="solve and print the contract menu")
    solve.add_argument("--config", help="scenario config file")
    solve.add_argument("--seed", type=int, help="override the base seed")
    solve.add_argument("--format", choices=("text", "json"), default="text")
    solve.set_defaults(func=_cmd_contract_solve)

    verify = sub.add_parser("verify", help="run oracle-equivalence and invariant suites")
    verify.add_argument("--config", help="scenario config file")
    verify.add_argument("--seed", type=int, help="override the base seed")
    verify.add_argument("--grid-step", type=float, default=1e-4)
    verify.set_defaults(func=_cmd_verify)

    simulate = sub.add_parser("simulate", help="run one scenario for one benchmark")
    simulate.add_argument("--config", help="scenario config file")
    simulate.add_argument("--seed", type=int, help="override the base seed")
    simulate.add_argument("--benchmark", choices=BENCHMARK_NAMES, required=True)
    simulate.add_argument("--out", default="results")
    simulate.add_argument("--format", choices=("csv", "json"), default="csv")
    simulate.add_argument("--verbose", action="store_true", help="keep per-task ledgers (json)")
    simulate.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser("sweep", help="run the configured sweep")
    sweep.add_argument("--config", help="scenario config file")
    sweep.add_argument("--seed", type=int, help="override the base seed")
    sweep.add_argument("--benchmark", choices=BENCHMARK_NAMES, help="restrict to one benchmark")
    sweep.add_argument("--out", default="results")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--verbose", action="store_true", help="keep per-task ledgers (json)")
    sweep.set_defaults(func=_cmd_sweep)

    grid = sub.add_parser("assess-grid", help="dump the difficulty-label grid")
    grid.add_argument("--config", help="scenario config file")
    grid.add_argument("--out", default="results")
    grid.add_argument("--format", choices=("csv", "json"), default="csv")
    grid.add_argument("--grid-size", type=int, default=100)
    grid.set_defaults(func=_cmd_assess_grid)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, AdmissibilityError, EmptyFeasibleSet, InstanceTooLarge, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
