"""Task-to-server assignment with FIFO queuing and completion metrics.

All tasks of a batch are released at once.  A task's response time is
transmission + queue backlog at assignment + its own compute; the backlog
is the plain sum of compute times already enqueued on the chosen server.
The greedy solver assigns tasks in id order to the server that currently
finishes them earliest; the brute-force solver enumerates every feasible
assignment matrix and is the verification oracle for the greedy one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .assessment import DifficultyLabel
from .errors import EmptyFeasibleSet, InstanceTooLarge
from .netsim import LARGE, SMALL, EdgeServer, Topology, computation_time, transmission_time
from .tasks import AigcTask

BRUTE_FORCE_GUARD = 1_000_000


@dataclass(frozen=True)
class AllocationMatrix:
    """The chosen assignment: exactly one server per task."""

    assignment: dict[int, int]  # task_id -> server_id


@dataclass
class TaskOutcome:
    """Per-task timing and settlement results."""

    task_id: int
    server_id: int
    t_transmit: float
    t_compute: float
    t_queue: float
    t_total: float
    on_time: bool
    realized_score: float  # score on the assigned server's model class
    payment: float = 0.0
    teleop_utility: float = 0.0
    edge_utility: float = 0.0


@dataclass(frozen=True)
class AllocMetrics:
    """Batch-level summary of an allocation run."""

    completion_rate: float
    mean_response: float
    objective: float
    mean_teleop_utility: float
    mean_edge_utility: float


def required_class(label: DifficultyLabel) -> str:
    return SMALL if label == DifficultyLabel.LOW else LARGE


def feasible_server_ids(task: AigcTask, topo: Topology) -> list[int]:
    """Servers hosting the model class the task's label calls for."""
    if task.assessed is None:
        raise ValueError(f"task {task.id} has no difficulty label")
    cls = required_class(task.assessed)
    return [s.id for s in topo.servers if s.model_class == cls]


def queuing_time(server: EdgeServer, pending: Iterable[AigcTask]) -> float:
    """FIFO backlog: total compute time of the tasks already enqueued."""
    return sum(task.compute_demand / server.capacity for task in pending)


def _feasible_map(
    tasks: Sequence[AigcTask],
    topo: Topology,
    feasible: Mapping[int, Sequence[int]] | None,
) -> dict[int, list[int]]:
    if feasible is not None:
        return {t.id: sorted(feasible[t.id]) for t in tasks}
    return {t.id: feasible_server_ids(t, topo) for t in tasks}


def _realized_on(task: AigcTask, server: EdgeServer) -> float:
    return task.realized.score_low if server.model_class == SMALL else task.realized.score_high


def allocate_greedy(
    tasks: Sequence[AigcTask],
    topo: Topology,
    deadline: float,
    weights: tuple[float, float] = (1.0, 1.0),
    feasible: Mapping[int, Sequence[int]] | None = None,
) -> tuple[AllocationMatrix, dict[int, TaskOutcome]]:
    """Myopic list scheduling over the feasible servers.

    Tasks are processed in id order; each goes to the feasible server with
    the smallest estimated response (transmission + current backlog +
    compute), ties to the lowest server id.  ``weights`` is accepted for
    signature parity with the brute-force solver; the greedy rule itself is
    time-based.
    """
    by_id = {s.id: s for s in topo.servers}
    for server in topo.servers:
        server.queue.clear()
    feasible_ids = _feasible_map(tasks, topo, feasible)
    backlog = {s.id: 0.0 for s in topo.servers}
    trans_cache: dict[tuple[int, int, float], float] = {}

    assignment: dict[int, int] = {}
    outcomes: dict[int, TaskOutcome] = {}
    for task in sorted(tasks, key=lambda t: t.id):
        candidates = feasible_ids[task.id]
        if not candidates:
            raise EmptyFeasibleSet(f"task {task.id}: no server hosts the required model class")
        best_id = None
        best_est = math.inf
        best_parts = (0.0, 0.0, 0.0)
        for sid in candidates:
            server = by_id[sid]
            key = (task.gateway_id, sid, task.payload_bits)
            t_tx = trans_cache.get(key)
            if t_tx is None:
                t_tx = transmission_time(task, topo.route(task.gateway_id, sid))
                trans_cache[key] = t_tx
            t_cp = computation_time(task, server)
            estimate = t_tx + t_cp + backlog[sid]
            if estimate < best_est:
                best_est = estimate
                best_id = sid
                best_parts = (t_tx, t_cp, backlog[sid])
        t_tx, t_cp, t_q = best_parts
        t_total = t_tx + t_cp + t_q
        server = by_id[best_id]
        outcomes[task.id] = TaskOutcome(
            task_id=task.id,
            server_id=best_id,
            t_transmit=t_tx,
            t_compute=t_cp,
            t_queue=t_q,
            t_total=t_total,
            on_time=t_total < deadline,
            realized_score=_realized_on(task, server),
        )
        assignment[task.id] = best_id
        server.queue.append(task.id)
        backlog[best_id] += t_cp
    return AllocationMatrix(assignment=assignment), outcomes


def allocate_bruteforce(
    tasks: Sequence[AigcTask],
    topo: Topology,
    deadline: float,
    weights: tuple[float, float] = (1.0, 1.0),
    feasible: Mapping[int, Sequence[int]] | None = None,
    guard: int = BRUTE_FORCE_GUARD,
) -> tuple[AllocationMatrix, dict[int, TaskOutcome]]:
    """Enumerate every feasible assignment and keep the objective minimizer.

    FIFO order within a server follows task id order.  Ties keep the first
    minimizer in lexicographic (server id) enumeration order, so results
    are deterministic.  Raises InstanceTooLarge beyond ``guard`` candidate
    assignments.
    """
    ordered = sorted(tasks, key=lambda t: t.id)
    by_id = {s.id: s for s in topo.servers}
    feasible_ids = _feasible_map(ordered, topo, feasible)
    choices = []
    for task in ordered:
        candidates = feasible_ids[task.id]
        if not candidates:
            raise EmptyFeasibleSet(f"task {task.id}: no server hosts the required model class")
        choices.append(candidates)
    total = math.prod(len(c) for c in choices)
    if total > guard:
        raise InstanceTooLarge(f"{total} candidate assignments exceed the guard of {guard}")

    zeta1, zeta2 = weights
    n = len(ordered)
    # precompute per-task times on every candidate server
    t_tx = [
        {
            sid: transmission_time(task, topo.route(task.gateway_id, sid))
            for sid in choices[k]
        }
        for k, task in enumerate(ordered)
    ]
    t_cp = [
        {sid: computation_time(task, by_id[sid]) for sid in choices[k]}
        for k, task in enumerate(ordered)
    ]

    best_obj = math.inf
    best_combo = None
    for combo in itertools.product(*choices):
        backlog: dict[int, float] = {}
        on_time = 0
        total_response = 0.0
        for k in range(n):
            sid = combo[k]
            queued = backlog.get(sid, 0.0)
            response = t_tx[k][sid] + t_cp[k][sid] + queued
            backlog[sid] = queued + t_cp[k][sid]
            on_time += response < deadline
            total_response += response
        objective = zeta1 * (1.0 - on_time / n) + zeta2 * (total_response / n)
        if objective < best_obj:
            best_obj = objective
            best_combo = combo
    assert best_combo is not None

    for server in topo.servers:
        server.queue.clear()
    assignment: dict[int, int] = {}
    outcomes: dict[int, TaskOutcome] = {}
    backlog = {s.id: 0.0 for s in topo.servers}
    for k, task in enumerate(ordered):
        sid = best_combo[k]
        server = by_id[sid]
        t_q = backlog[sid]
        t_total = t_tx[k][sid] + t_cp[k][sid] + t_q
        outcomes[task.id] = TaskOutcome(
            task_id=task.id,
            server_id=sid,
            t_transmit=t_tx[k][sid],
            t_compute=t_cp[k][sid],
            t_queue=t_q,
            t_total=t_total,
            on_time=t_total < deadline,
            realized_score=_realized_on(task, server),
        )
        assignment[task.id] = sid
        server.queue.append(task.id)
        backlog[sid] += t_cp[k][sid]
    return AllocationMatrix(assignment=assignment), outcomes


def completion_metrics(
    outcomes: Mapping[int, TaskOutcome] | Sequence[TaskOutcome],
    deadline: float,
    weights: tuple[float, float] = (1.0, 1.0),
    edge_constant: float = 0.0,
) -> AllocMetrics:
    """Aggregate a batch: completion rate, mean response, objective, utilities.

    A task counts as on time only when strictly under the deadline.
    ``edge_constant`` is the per-run compensation added once to the mean
    edge utility.
    """
    if isinstance(outcomes, Mapping):
        rows = [outcomes[k] for k in sorted(outcomes)]
    else:
        rows = sorted(outcomes, key=lambda o: o.task_id)
    if not rows:
        raise ValueError("completion_metrics needs at least one outcome")
    n = len(rows)
    zeta1, zeta2 = weights
    completion = sum(1 for o in rows if o.t_total < deadline) / n
    mean_response = sum(o.t_total for o in rows) / n
    return AllocMetrics(
        completion_rate=completion,
        mean_response=mean_response,
        objective=zeta1 * (1.0 - completion) + zeta2 * mean_response,
        mean_teleop_utility=sum(o.teleop_utility for o in rows) / n,
        mean_edge_utility=sum(o.edge_utility for o in rows) / n + edge_constant,
    )
