"""Scenario configuration: dataclasses, defaults, and the INI file format.

A scenario file is a structured key-value text file with sections
[contract], [perf], [topology], [allocator], [assessor], and [sweep].
Every key is optional; omitted keys keep the defaults below, which match
the simulation parameter table the experiments are calibrated to.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

from .contract import ContractParams
from .errors import ConfigError
from .netsim import TopologyConfig
from .tasks import PerfModelConfig, validate_perf_config

DEFAULT_CONTRACT = ContractParams(
    theta_L=1.0,
    theta_H=math.sqrt(2.0),
    beta_L=0.4,
    beta_H=0.6,
    eta1=5.0,
    eta2=250.0,
    eta3=1.0,
    I_r1=1.3,
    I_r2=1.4,
    delta_C=10.0,
)

SERVER_SWEEP_VALUES = (20, 25, 30, 35, 40)
TASK_SWEEP_VALUES = (100, 150, 200, 250, 300)


@dataclass(frozen=True)
class AssessorSettings:
    """Knobs for the benchmark-specific label sources."""

    epsilon: float = 0.1               # human flip probability
    price_variant: str = "corrected"   # comparator price variant
    replay_file: str | None = None     # recorded labels for the vlm benchmark
    endpoint: str | None = None        # live endpoint (else VLM_ENDPOINT env)
    prompt_template: str | None = None  # file with the live prompt text


@dataclass(frozen=True)
class SweepSettings:
    axis: str = "servers"  # "servers" or "tasks"
    values: tuple[int, ...] = SERVER_SWEEP_VALUES
    benchmarks: tuple[str, ...] = ("no_contract", "human_contract", "oracle_contract")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one experiment needs, seed included."""

    contract: ContractParams = DEFAULT_CONTRACT
    perf: PerfModelConfig = PerfModelConfig()
    topology: TopologyConfig = TopologyConfig()
    num_tasks: int = 200
    assessor: AssessorSettings = AssessorSettings()
    sweep: SweepSettings = SweepSettings()
    deadline: float = 1.0
    zeta1: float = 1.0
    zeta2: float | None = None  # None -> 1 / deadline
    solver: str = "greedy"      # "greedy" or "bruteforce"
    repeats: int = 30
    seed: int = 42

    @property
    def weights(self) -> tuple[float, float]:
        zeta2 = self.zeta2 if self.zeta2 is not None else 1.0 / self.deadline
        return (self.zeta1, zeta2)

    def validate(self) -> None:
        self.contract.validate()
        validate_perf_config(self.perf, self.contract)
        if self.num_tasks < 1:
            raise ConfigError("num_tasks must be at least 1")
        if self.topology.num_servers < 1 or self.topology.num_gateways < 1:
            raise ConfigError("topology needs at least one server and one gateway")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.deadline <= 0.0:
            raise ConfigError("deadline must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.solver not in ("greedy", "bruteforce"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.sweep.axis not in ("servers", "tasks"):
            raise ConfigError(f"unknown sweep axis {self.sweep.axis!r}")


def default_config() -> ScenarioConfig:
    return ScenarioConfig()


def _pair(text: str) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"expected 'low, high', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(p.strip()) for p in text.split(",") if p.strip())


def _str_tuple(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _get(parser: configparser.ConfigParser, section: str, key: str, cast, default):
    if not parser.has_section(section):
        return default
    raw = parser.get(section, key, fallback=None)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    """Read a scenario file; missing sections or keys keep their defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read scenario config {path}")
    base = default_config()

    contract = ContractParams(
        theta_L=_get(parser, "contract", "theta_L", float, base.contract.theta_L),
        theta_H=_get(parser, "contract", "theta_H", float, base.contract.theta_H),
        beta_L=_get(parser, "contract", "beta_L", float, base.contract.beta_L),
        beta_H=_get(parser, "contract", "beta_H", float, base.contract.beta_H),
        eta1=_get(parser, "contract", "eta1", float, base.contract.eta1),
        eta2=_get(parser, "contract", "eta2", float, base.contract.eta2),
        eta3=_get(parser, "contract", "eta3", float, base.contract.eta3),
        I_r1=_get(parser, "contract", "I_r1", float, base.contract.I_r1),
        I_r2=_get(parser, "contract", "I_r2", float, base.contract.I_r2),
        delta_C=_get(parser, "contract", "delta_C", float, base.contract.delta_C),
    )
    perf = PerfModelConfig(
        score_low_easy=_get(parser, "perf", "score_low_easy", _pair, base.perf.score_low_easy),
        score_low_hard=_get(parser, "perf", "score_low_hard", _pair, base.perf.score_low_hard),
        score_high=_get(parser, "perf", "score_high", _pair, base.perf.score_high),
        payload_bits=_get(parser, "perf", "payload_bits", float, base.perf.payload_bits),
        compute_demand=_get(parser, "perf", "compute_demand", float, base.perf.compute_demand),
        seed=_get(parser, "perf", "seed", int, base.perf.seed),
    )
    topology = TopologyConfig(
        num_servers=_get(parser, "topology", "num_servers", int, base.topology.num_servers),
        num_gateways=_get(parser, "topology", "num_gateways", int, base.topology.num_gateways),
        compute_time_range=_get(
            parser, "topology", "compute_time_range", _pair, base.topology.compute_time_range
        ),
        prop_delay_range=_get(
            parser, "topology", "prop_delay_range", _pair, base.topology.prop_delay_range
        ),
        bandwidth_range=_get(
            parser, "topology", "bandwidth_range", _pair, base.topology.bandwidth_range
        ),
        small_fraction=_get(parser, "topology", "small_fraction", float, base.topology.small_fraction),
    )
    assessor = AssessorSettings(
        epsilon=_get(parser, "assessor", "epsilon", float, base.assessor.epsilon),
        price_variant=_get(parser, "assessor", "price_variant", str, base.assessor.price_variant),
        replay_file=_get(parser, "assessor", "replay_file", str, base.assessor.replay_file),
        endpoint=_get(parser, "assessor", "endpoint", str, base.assessor.endpoint),
        prompt_template=_get(
            parser, "assessor", "prompt_template", str, base.assessor.prompt_template
        ),
    )
    sweep = SweepSettings(
        axis=_get(parser, "sweep", "axis", str, base.sweep.axis),
        values=_get(parser, "sweep", "values", _int_tuple, base.sweep.values),
        benchmarks=_get(parser, "sweep", "benchmarks", _str_tuple, base.sweep.benchmarks),
    )
    config = ScenarioConfig(
        contract=contract,
        perf=perf,
        topology=topology,
        num_tasks=_get(parser, "topology", "num_tasks", int, base.num_tasks),
        assessor=assessor,
        sweep=sweep,
        deadline=_get(parser, "allocator", "deadline", float, base.deadline),
        zeta1=_get(parser, "allocator", "zeta1", float, base.zeta1),
        zeta2=_get(parser, "allocator", "zeta2", float, base.zeta2),
        solver=_get(parser, "allocator", "solver", str, base.solver),
        repeats=_get(parser, "sweep", "repeats", int, base.repeats),
        seed=_get(parser, "sweep", "seed", int, base.seed),
    )
    config.validate()
    return config


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)  # shortest round-trip representation
    return str(value)


def dump_config(config: ScenarioConfig, path) -> None:
    """Write a scenario file that load_config reads back exactly."""
    parser = configparser.ConfigParser()
    parser["contract"] = {
        name: _fmt(getattr(config.contract, name))
        for name in (
            "theta_L", "theta_H", "beta_L", "beta_H",
            "eta1", "eta2", "eta3", "I_r1", "I_r2", "delta_C",
        )
    }
    parser["perf"] = {
        "score_low_easy": _fmt(config.perf.score_low_easy),
        "score_low_hard": _fmt(config.perf.score_low_hard),
        "score_high": _fmt(config.perf.score_high),
        "payload_bits": _fmt(config.perf.payload_bits),
        "compute_demand": _fmt(config.perf.compute_demand),
        "seed": _fmt(config.perf.seed),
    }
    parser["topology"] = {
        "num_tasks": _fmt(config.num_tasks),
        "num_servers": _fmt(config.topology.num_servers),
        "num_gateways": _fmt(config.topology.num_gateways),
        "compute_time_range": _fmt(config.topology.compute_time_range),
        "prop_delay_range": _fmt(config.topology.prop_delay_range),
        "bandwidth_range": _fmt(config.topology.bandwidth_range),
        "small_fraction": _fmt(config.topology.small_fraction),
    }
    parser["allocator"] = {
        "deadline": _fmt(config.deadline),
        "zeta1": _fmt(config.zeta1),
        "zeta2": _fmt(config.zeta2),
        "solver": config.solver,
    }
    parser["assessor"] = {
        "epsilon": _fmt(config.assessor.epsilon),
        "price_variant": config.assessor.price_variant,
        "replay_file": _fmt(config.assessor.replay_file),
        "endpoint": _fmt(config.assessor.endpoint),
        "prompt_template": _fmt(config.assessor.prompt_template),
    }
    parser["sweep"] = {
        "axis": config.sweep.axis,
        "values": _fmt(config.sweep.values),
        "benchmarks": _fmt(config.sweep.benchmarks),
        "repeats": _fmt(config.repeats),
        "seed": _fmt(config.seed),
    }
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def with_sweep_value(config: ScenarioConfig, axis: str, value: int) -> ScenarioConfig:
    """A copy of the config with one sweep point applied."""
    if axis == "servers":
        return replace(config, topology=replace(config.topology, num_servers=value))
    if axis == "tasks":
        return replace(config, num_tasks=value)
    raise ConfigError(f"unknown sweep axis {axis!r}")


def config_to_dict(config: ScenarioConfig) -> dict:
    """Nested plain-dict echo of a config, for result files."""
    return {
        "contract": {
            name: getattr(config.contract, name)
            for name in (
                "theta_L", "theta_H", "beta_L", "beta_H",
                "eta1", "eta2", "eta3", "I_r1", "I_r2", "delta_C",
            )
        },
        "perf": {
            "score_low_easy": list(config.perf.score_low_easy),
            "score_low_hard": list(config.perf.score_low_hard),
            "score_high": list(config.perf.score_high),
            "payload_bits": config.perf.payload_bits,
            "compute_demand": config.perf.compute_demand,
            "seed": config.perf.seed,
        },
        "topology": {
            "num_tasks": config.num_tasks,
            "num_servers": config.topology.num_servers,
            "num_gateways": config.topology.num_gateways,
            "compute_time_range": list(config.topology.compute_time_range),
            "prop_delay_range": list(config.topology.prop_delay_range),
            "bandwidth_range": list(config.topology.bandwidth_range),
            "small_fraction": config.topology.small_fraction,
        },
        "allocator": {
            "deadline": config.deadline,
            "zeta1": config.zeta1,
            "zeta2": config.zeta2,
            "solver": config.solver,
        },
        "assessor": {
            "epsilon": config.assessor.epsilon,
            "price_variant": config.assessor.price_variant,
            "replay_file": config.assessor.replay_file,
            "endpoint": config.assessor.endpoint,
            "prompt_template": config.assessor.prompt_template,
        },
        "sweep": {
            "axis": config.sweep.axis,
            "values": list(config.sweep.values),
            "benchmarks": list(config.sweep.benchmarks),
            "repeats": config.repeats,
            "seed": config.seed,
        },
    }
