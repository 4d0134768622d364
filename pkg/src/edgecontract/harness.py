"""End-to-end experiment orchestration.

One run: build the topology, sample tasks, label them (except for the
no-contract baseline), allocate to feasible servers, settle payments, and
summarize.  Sweeps repeat that over a server-count or task-count axis for
several benchmarks with paired seeds, so benchmark deltas are not noise.

Seeding: repeat ``i`` of a scenario uses seed ``base_seed + i`` and derives
three independent streams from it (topology, tasks, assessment noise), so
every benchmark sees the same topology and task population.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .allocator import AllocMetrics, AllocationMatrix, TaskOutcome, allocate_bruteforce, allocate_greedy, completion_metrics
from .assessment import (
    AssessorKind,
    DifficultyLabel,
    LiveVlmClient,
    load_replay_labels,
    noisy_human_assess,
    oracle_assess_or_high,
    resolve_endpoint,
)
from .config import ScenarioConfig, config_to_dict, with_sweep_value
from .contract import (
    DEFAULT_UTILITY_FLOOR,
    ContractBundle,
    ContractMenu,
    ContractParams,
    solve_contract,
    solve_pooled_contract,
    teleoperator_utility,
)
from .errors import ConfigError, MalformedResponse, MissingLabel, TransportError
from .netsim import build_topology
from .tasks import AigcTask, LOW_TYPE, generate_tasks

log = logging.getLogger(__name__)

METRIC_COLUMNS = (
    "completion_rate",
    "mean_response_s",
    "objective",
    "mean_teleop_utility",
    "mean_edge_utility",
)


class Benchmark(str, Enum):
    NO_CONTRACT = "no_contract"
    HUMAN_CONTRACT = "human_contract"
    ORACLE_CONTRACT = "oracle_contract"
    VLM_CONTRACT = "vlm_contract"


@dataclass(frozen=True)
class SweepRecord:
    """One (benchmark, sweep point, repeat) measurement."""

    benchmark: str
    sweep_axis: str
    sweep_value: int
    repeat: int
    seed: int
    metrics: AllocMetrics


@dataclass
class ScenarioResult:
    """All measurements of a sweep, plus the config that produced them."""

    config: ScenarioConfig
    sweep_axis: str
    sweep_values: list[int]
    benchmarks: list[str]
    repeats: int
    records: list[SweepRecord]
    ledgers: list[dict] | None = None  # per-task rows, verbose runs only


def repeat_seed(base_seed: int, repeat_index: int) -> int:
    return base_seed + repeat_index


def _streams(seed: int):
    return (
        np.random.default_rng([seed, 0]),  # topology
        np.random.default_rng([seed, 1]),  # tasks
        np.random.default_rng([seed, 2]),  # assessment noise
    )


def assign_labels(
    tasks: list[AigcTask],
    config: ScenarioConfig,
    benchmark: Benchmark,
    rng,
) -> None:
    """Fill ``assessed`` on every task according to the benchmark's source.

    The no-contract baseline skips assessment entirely.  Label sources that
    can fail for a single task (replay miss, live transport or protocol
    errors, scores at the log threshold) fall back to label 2 and log the
    event, so affected tasks can be excluded in later analysis.
    """
    params = config.contract
    if benchmark is Benchmark.NO_CONTRACT:
        return
    if benchmark is Benchmark.ORACLE_CONTRACT:
        for task in tasks:
            task.assessed = oracle_assess_or_high(task.realized, params)
        return
    if benchmark is Benchmark.HUMAN_CONTRACT:
        for task in tasks:
            truth = oracle_assess_or_high(task.realized, params)
            task.assessed = noisy_human_assess(truth, config.assessor.epsilon, rng)
        return
    if benchmark is Benchmark.VLM_CONTRACT:
        settings = config.assessor
        if settings.replay_file:
            labels = load_replay_labels(settings.replay_file)
            for task in tasks:
                label = labels.get(task.id)
                if label is None:
                    log.warning("task %d: no recorded label; defaulting to high difficulty", task.id)
                    label = DifficultyLabel.HIGH
                task.assessed = label
            return
        client = LiveVlmClient(endpoint=resolve_endpoint(AssessorKind.live(settings.endpoint)))
        if settings.prompt_template:
            client.prompt = Path(settings.prompt_template).read_text(encoding="utf-8")
        for task in tasks:
            try:
                task.assessed = client.assess(f"task-{task.id}")
            except (TransportError, MalformedResponse, MissingLabel) as exc:
                log.warning("task %d: %s; defaulting to high difficulty", task.id, exc)
                task.assessed = DifficultyLabel.HIGH
        return
    raise ConfigError(f"unknown benchmark {benchmark!r}")


def settle_payments(
    outcomes: dict[int, TaskOutcome],
    tasks: list[AigcTask],
    menu: ContractMenu,
    pooled: ContractBundle,
    benchmark: Benchmark,
    params: ContractParams,
    floor: float = DEFAULT_UTILITY_FLOOR,
) -> dict[int, TaskOutcome]:
    """Settle every task at its selected bundle.

    The buyer's realized utility uses its latent-type valuation and the
    score actually obtained on the assigned model class.  A buyer whose
    realized utility would be negative withholds payment: it keeps the
    gross utility, and the server still bears the model cost of the bundle
    it provisioned.
    """
    by_id = {t.id: t for t in tasks}
    for outcome in outcomes.values():
        task = by_id[outcome.task_id]
        theta = params.theta_L if task.latent_type == LOW_TYPE else params.theta_H
        if benchmark is Benchmark.NO_CONTRACT:
            bundle = pooled
        else:
            bundle = menu.low if task.assessed == DifficultyLabel.LOW else menu.high
        realized = teleoperator_utility(theta, outcome.realized_score, bundle.price, params, floor)
        if realized < 0.0:
            outcome.payment = 0.0
            outcome.teleop_utility = teleoperator_utility(
                theta, outcome.realized_score, 0.0, params, floor
            )
            outcome.edge_utility = -params.eta1 * bundle.perf
        else:
            outcome.payment = bundle.price
            outcome.teleop_utility = realized
            outcome.edge_utility = bundle.price - params.eta1 * bundle.perf
    return outcomes


def run_scenario_detailed(
    config: ScenarioConfig,
    benchmark: Benchmark,
    repeat_index: int,
) -> tuple[AllocMetrics, list[AigcTask], AllocationMatrix, dict[int, TaskOutcome]]:
    """One full pipeline pass; deterministic given (config.seed, repeat_index)."""
    seed = repeat_seed(config.seed, repeat_index)
    rng_topo, rng_tasks, rng_assess = _streams(seed)
    topo = build_topology(
        config.topology,
        beta_L=config.contract.beta_L,
        compute_demand=config.perf.compute_demand,
        rng=rng_topo,
    )
    tasks = generate_tasks(
        config.num_tasks,
        config.perf,
        config.contract,
        rng_tasks,
        num_gateways=config.topology.num_gateways,
    )
    menu = solve_contract(config.contract)
    pooled = solve_pooled_contract(config.contract)
    assign_labels(tasks, config, benchmark, rng_assess)

    if benchmark is Benchmark.NO_CONTRACT:
        all_ids = topo.server_ids()
        feasible = {t.id: all_ids for t in tasks}
    else:
        feasible = None
    solver = allocate_greedy if config.solver == "greedy" else allocate_bruteforce
    alloc, outcomes = solver(tasks, topo, config.deadline, config.weights, feasible=feasible)
    settle_payments(outcomes, tasks, menu, pooled, benchmark, config.contract)
    metrics = completion_metrics(
        outcomes, config.deadline, config.weights, edge_constant=config.contract.delta_C
    )
    return metrics, tasks, alloc, outcomes


def run_scenario(config: ScenarioConfig, benchmark: Benchmark, repeat_index: int) -> AllocMetrics:
    metrics, _, _, _ = run_scenario_detailed(config, benchmark, repeat_index)
    return metrics


def _ledger_rows(
    benchmark: Benchmark,
    axis: str,
    value: int,
    repeat: int,
    tasks: list[AigcTask],
    outcomes: dict[int, TaskOutcome],
) -> dict:
    by_id = {t.id: t for t in tasks}
    rows = []
    for task_id in sorted(outcomes):
        o = outcomes[task_id]
        t = by_id[task_id]
        rows.append(
            {
                "task_id": task_id,
                "latent_type": t.latent_type,
                "assessed": int(t.assessed) if t.assessed is not None else None,
                "gateway_id": t.gateway_id,
                "server_id": o.server_id,
                "t_transmit": o.t_transmit,
                "t_queue": o.t_queue,
                "t_compute": o.t_compute,
                "t_total": o.t_total,
                "on_time": int(o.on_time),
                "realized_score": o.realized_score,
                "payment": o.payment,
                "teleop_utility": o.teleop_utility,
                "edge_utility": o.edge_utility,
            }
        )
    return {
        "benchmark": benchmark.value,
        "sweep_axis": axis,
        "sweep_value": value,
        "repeat": repeat,
        "tasks": rows,
    }


def run_sweep(
    config: ScenarioConfig,
    axis: str | None = None,
    values=None,
    benchmarks=None,
    keep_ledgers: bool = False,
) -> ScenarioResult:
    """Repeats x sweep points x benchmarks, with paired seeds across benchmarks."""
    config.validate()
    axis = axis if axis is not None else config.sweep.axis
    values = list(values) if values is not None else list(config.sweep.values)
    names = benchmarks if benchmarks is not None else config.sweep.benchmarks
    bench_list = [b if isinstance(b, Benchmark) else Benchmark(b) for b in names]
    if not values:
        raise ConfigError("sweep needs at least one value")

    records: list[SweepRecord] = []
    ledgers: list[dict] | None = [] if keep_ledgers else None
    for bench in bench_list:
        for value in values:
            point_config = with_sweep_value(config, axis, value)
            for repeat in range(config.repeats):
                metrics, tasks, _, outcomes = run_scenario_detailed(point_config, bench, repeat)
                records.append(
                    SweepRecord(
                        benchmark=bench.value,
                        sweep_axis=axis,
                        sweep_value=value,
                        repeat=repeat,
                        seed=repeat_seed(config.seed, repeat),
                        metrics=metrics,
                    )
                )
                if keep_ledgers:
                    ledgers.append(_ledger_rows(bench, axis, value, repeat, tasks, outcomes))
    return ScenarioResult(
        config=config,
        sweep_axis=axis,
        sweep_values=values,
        benchmarks=[b.value for b in bench_list],
        repeats=config.repeats,
        records=records,
        ledgers=ledgers,
    )


def _metric_values(metrics: AllocMetrics) -> tuple[float, ...]:
    return (
        metrics.completion_rate,
        metrics.mean_response,
        metrics.objective,
        metrics.mean_teleop_utility,
        metrics.mean_edge_utility,
    )


@dataclass(frozen=True)
class AggregatePoint:
    """Mean and sample standard deviation over the repeats of one point."""

    benchmark: str
    sweep_axis: str
    sweep_value: int
    repeats: int
    means: dict[str, float]
    stds: dict[str, float]
    teleop_gain_vs_no_contract_pct: float | None


def aggregate_result(result: ScenarioResult) -> list[AggregatePoint]:
    """Per-point aggregates, plus each contract benchmark's teleoperator
    utility gain over the no-contract baseline at the same point."""
    grouped: dict[tuple[str, int], list[AllocMetrics]] = {}
    for record in result.records:
        grouped.setdefault((record.benchmark, record.sweep_value), []).append(record.metrics)

    def mean_teleop(benchmark: str, value: int) -> float | None:
        rows = grouped.get((benchmark, value))
        if not rows:
            return None
        return sum(m.mean_teleop_utility for m in rows) / len(rows)

    points: list[AggregatePoint] = []
    for benchmark in result.benchmarks:
        for value in result.sweep_values:
            rows = grouped.get((benchmark, value), [])
            if not rows:
                continue
            stacked = np.array([_metric_values(m) for m in rows], dtype=float)
            means = stacked.mean(axis=0)
            stds = stacked.std(axis=0, ddof=1) if len(rows) > 1 else np.zeros(stacked.shape[1])
            gain = None
            if benchmark != Benchmark.NO_CONTRACT.value:
                baseline = mean_teleop(Benchmark.NO_CONTRACT.value, value)
                if baseline is not None and baseline != 0.0:
                    own = float(means[3])
                    gain = (own - baseline) / abs(baseline) * 100.0
            points.append(
                AggregatePoint(
                    benchmark=benchmark,
                    sweep_axis=result.sweep_axis,
                    sweep_value=value,
                    repeats=len(rows),
                    means=dict(zip(METRIC_COLUMNS, (float(x) for x in means))),
                    stds=dict(zip(METRIC_COLUMNS, (float(x) for x in stds))),
                    teleop_gain_vs_no_contract_pct=gain,
                )
            )
    return points


def result_to_dict(result: ScenarioResult, verbose: bool = False) -> dict:
    """Plain-dict form of a result, identical across identical runs."""
    payload = {
        "schema": "sweep-result-v1",
        "config": config_to_dict(result.config),
        "sweep_axis": result.sweep_axis,
        "sweep_values": result.sweep_values,
        "benchmarks": result.benchmarks,
        "repeats": result.repeats,
        "records": [
            {
                "benchmark": r.benchmark,
                "sweep_axis": r.sweep_axis,
                "sweep_value": r.sweep_value,
                "repeat": r.repeat,
                "seed": r.seed,
                "completion_rate": r.metrics.completion_rate,
                "mean_response_s": r.metrics.mean_response,
                "objective": r.metrics.objective,
                "mean_teleop_utility": r.metrics.mean_teleop_utility,
                "mean_edge_utility": r.metrics.mean_edge_utility,
            }
            for r in result.records
        ],
        "aggregates": [
            {
                "benchmark": p.benchmark,
                "sweep_axis": p.sweep_axis,
                "sweep_value": p.sweep_value,
                "repeats": p.repeats,
                "means": p.means,
                "stds": p.stds,
                "teleop_gain_vs_no_contract_pct": p.teleop_gain_vs_no_contract_pct,
            }
            for p in aggregate_result(result)
        ],
    }
    if verbose and result.ledgers is not None:
        payload["ledgers"] = result.ledgers
    return payload


def export_results(
    result: ScenarioResult,
    out_dir,
    fmt: str = "csv",
    prefix: str = "results",
    verbose: bool = False,
) -> list[Path]:
    """Write result files and return their paths.

    csv: one detail row per (benchmark, sweep value, repeat), plus a
    plot-ready aggregate file with means and standard deviations per point.
    json: the full nested result, including the config echo and, in verbose
    mode, per-task ledgers.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown export format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        if fmt == "csv":
            detail = out / f"{prefix}.csv"
            with open(detail, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(("benchmark", "sweep_axis", "sweep_value", "repeat", "seed") + METRIC_COLUMNS)
                for r in result.records:
                    writer.writerow(
                        (
                            r.benchmark,
                            r.sweep_axis,
                            r.sweep_value,
                            r.repeat,
                            r.seed,
                            r.metrics.completion_rate,
                            r.metrics.mean_response,
                            r.metrics.objective,
                            r.metrics.mean_teleop_utility,
                            r.metrics.mean_edge_utility,
                        )
                    )
            written.append(detail)

            aggregate = out / f"{prefix}_aggregate.csv"
            with open(aggregate, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                header = ["benchmark", "sweep_axis", "sweep_value", "repeats"]
                for column in METRIC_COLUMNS:
                    header += [f"{column}_mean", f"{column}_std"]
                header.append("teleop_gain_vs_no_contract_pct")
                writer.writerow(header)
                for p in aggregate_result(result):
                    row = [p.benchmark, p.sweep_axis, p.sweep_value, p.repeats]
                    for column in METRIC_COLUMNS:
                        row += [p.means[column], p.stds[column]]
                    gain = p.teleop_gain_vs_no_contract_pct
                    row.append("" if gain is None else gain)
                    writer.writerow(row)
            written.append(aggregate)
        else:
            target = out / f"{prefix}.json"
            with open(target, "w", encoding="utf-8") as fh:
                json.dump(result_to_dict(result, verbose=verbose), fh, indent=2, sort_keys=True)
                fh.write("\n")
            written.append(target)
    except OSError as exc:
        raise OSError(f"export to {out} failed: {exc}") from exc
    return written
