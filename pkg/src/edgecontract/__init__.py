"""Deterministic simulator and pricing library for contract-based task
offloading to edge servers under hidden task difficulty."""

from .allocator import (
    AllocMetrics,
    AllocationMatrix,
    TaskOutcome,
    allocate_bruteforce,
    allocate_greedy,
    completion_metrics,
    queuing_time,
)
from .assessment import (
    AssessorKind,
    DifficultyLabel,
    RealizedPerformance,
    agreement_rate,
    label1_region_is_monotone,
    label_grid,
    load_replay_labels,
    noisy_human_assess,
    oracle_assess,
    oracle_assess_or_high,
    oracle_threshold,
    realized_comparison_assess,
    vlm_assess,
)
from .config import (
    AssessorSettings,
    ScenarioConfig,
    SweepSettings,
    default_config,
    dump_config,
    load_config,
)
from .contract import (
    DEFAULT_UTILITY_FLOOR,
    ContractBundle,
    ContractMenu,
    ContractParams,
    FeasibilityReport,
    edge_utility,
    expected_system_utility,
    grid_search_oracle,
    random_admissible_params,
    solve_contract,
    solve_pooled_contract,
    teleoperator_utility,
    verify_feasibility,
)
from .errors import (
    AdmissibilityError,
    ConfigError,
    DomainError,
    EmptyFeasibleSet,
    InstanceTooLarge,
    MalformedResponse,
    MissingLabel,
    TransportError,
)
from .harness import (
    Benchmark,
    ScenarioResult,
    SweepRecord,
    aggregate_result,
    export_results,
    run_scenario,
    run_sweep,
    settle_payments,
)
from .netsim import (
    EdgeServer,
    Link,
    Topology,
    TopologyConfig,
    build_topology,
    computation_time,
    transmission_time,
)
from .tasks import AigcTask, PerfModelConfig, generate_tasks, realized_scores, sample_task

__version__ = "0.1.0"
