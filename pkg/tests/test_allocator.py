"""Allocation tests: FIFO fixtures, greedy vs brute force, metric identities."""

import numpy as np
import pytest

from edgecontract import (
    AigcTask,
    DifficultyLabel,
    EmptyFeasibleSet,
    InstanceTooLarge,
    PerfModelConfig,
    RealizedPerformance,
    TopologyConfig,
    allocate_bruteforce,
    allocate_greedy,
    build_topology,
    completion_metrics,
    generate_tasks,
    queuing_time,
)
from edgecontract.config import DEFAULT_CONTRACT
from edgecontract.netsim import LARGE, SMALL, EdgeServer, Link, Topology

PARAMS = DEFAULT_CONTRACT


def make_task(task_id, gateway=0, payload=1_000_000.0, demand=1.0, label=DifficultyLabel.HIGH):
    task = AigcTask(
        id=task_id,
        latent_type="H",
        realized=RealizedPerformance(1.35, 1.65),
        gateway_id=gateway,
        payload_bits=payload,
        compute_demand=demand,
    )
    task.assessed = label
    return task


def make_topology(servers, links):
    gateways = sorted({g for g, _ in links})
    return Topology(
        gateways=gateways,
        servers=servers,
        links={key: Link(key[0], key[1], prop, bw) for key, (prop, bw) in links.items()},
    )


def single_server_topology(compute_time=0.2, prop=0.002, bandwidth=10e6):
    server = EdgeServer(id=0, model_class=LARGE, capacity=1.0 / compute_time)
    return make_topology([server], {(0, 0): (prop, bandwidth)})


class TestQueuingTime:
    def test_idle_server(self):
        server = EdgeServer(id=0, model_class=LARGE, capacity=5.0)
        assert queuing_time(server, []) == 0.0

    def test_backlog_adds_up(self):
        server = EdgeServer(id=0, model_class=LARGE, capacity=5.0)
        pending = [make_task(0), make_task(1)]
        assert queuing_time(server, pending) == pytest.approx(0.4, abs=1e-15)

    def test_calibrated_compute_time(self):
        server = EdgeServer(id=0, model_class=LARGE, capacity=1.0 / 0.28326)
        assert queuing_time(server, [make_task(0)]) == pytest.approx(0.28326, abs=1e-12)


class TestGreedy:
    def test_picks_faster_server(self):
        servers = [
            EdgeServer(id=0, model_class=LARGE, capacity=1.0 / 0.3),
            EdgeServer(id=1, model_class=LARGE, capacity=1.0 / 0.2),
        ]
        links = {(0, 0): (0.002, 10e6), (0, 1): (0.002, 10e6)}
        topo = make_topology(servers, links)
        alloc, outcomes = allocate_greedy([make_task(0)], topo, deadline=1.0)
        assert alloc.assignment == {0: 1}
        assert outcomes[0].t_compute == pytest.approx(0.2, abs=1e-12)

    def test_three_task_fifo_fixture(self):
        # one server, compute 0.2 s, transmission 0.204 s: totals
        # 0.404 / 0.604 / 0.804 and everyone meets a 1 s deadline
        topo = single_server_topology()
        tasks = [make_task(i) for i in range(3)]
        _, outcomes = allocate_greedy(tasks, topo, deadline=1.0, weights=(1.0, 1.0))
        totals = [outcomes[i].t_total for i in range(3)]
        assert totals == pytest.approx([0.404, 0.604, 0.804], abs=1e-12)
        queues = [outcomes[i].t_queue for i in range(3)]
        assert queues == pytest.approx([0.0, 0.2, 0.4], abs=1e-12)
        metrics = completion_metrics(outcomes, deadline=1.0, weights=(1.0, 1.0))
        assert metrics.completion_rate == 1.0
        assert topo.servers[0].queue == [0, 1, 2]

    def test_decomposition_is_exact(self):
        topo = build_topology(TopologyConfig(num_servers=6, num_gateways=2), 0.5, 1.0, np.random.default_rng(3))
        tasks = generate_tasks(40, PerfModelConfig(), PARAMS, np.random.default_rng(4), num_gateways=2)
        for task in tasks:
            task.assessed = DifficultyLabel.LOW if task.id % 2 else DifficultyLabel.HIGH
        _, outcomes = allocate_greedy(tasks, topo, deadline=1.0)
        for outcome in outcomes.values():
            assert outcome.t_total == outcome.t_transmit + outcome.t_compute + outcome.t_queue
            assert outcome.on_time == (outcome.t_total < 1.0)

    def test_label_routes_to_model_class(self):
        topo = build_topology(TopologyConfig(num_servers=4, num_gateways=1, small_fraction=0.5), 0.4, 1.0, np.random.default_rng(1))
        tasks = [make_task(0, label=DifficultyLabel.LOW), make_task(1, label=DifficultyLabel.HIGH)]
        by_id = {s.id: s for s in topo.servers}
        alloc, _ = allocate_greedy(tasks, topo, deadline=1.0)
        assert by_id[alloc.assignment[0]].model_class == SMALL
        assert by_id[alloc.assignment[1]].model_class == LARGE

    def test_missing_class_raises(self):
        topo = build_topology(TopologyConfig(num_servers=2, small_fraction=0.0), 0.4, 1.0, np.random.default_rng(1))
        with pytest.raises(EmptyFeasibleSet):
            allocate_greedy([make_task(0, label=DifficultyLabel.LOW)], topo, deadline=1.0)

    def test_unassessed_task_rejected(self):
        topo = single_server_topology()
        task = AigcTask(
            id=0, latent_type="L", realized=RealizedPerformance(1.5, 1.6),
            gateway_id=0, payload_bits=0.0, compute_demand=1.0,
        )
        with pytest.raises(ValueError):
            allocate_greedy([task], topo, deadline=1.0)


def adversarial_instance():
    """Two equal servers; gateway 1 reaches server 1 only over a slow link.

    Greedy's tie-break parks the first task on server 0, forcing a later
    gateway-1 task into a deadline miss that an exchange would avoid.
    """
    servers = [
        EdgeServer(id=0, model_class=LARGE, capacity=5.0),
        EdgeServer(id=1, model_class=LARGE, capacity=5.0),
    ]
    links = {
        (0, 0): (0.0, 10e6),
        (0, 1): (0.0, 10e6),
        (1, 0): (0.0, 10e6),
        (1, 1): (0.15, 10e6),  # round trip costs 0.3 s
    }
    topo = make_topology(servers, links)
    tasks = [
        make_task(0, gateway=0, payload=0.0),
        make_task(1, gateway=1, payload=0.0),
        make_task(2, gateway=0, payload=0.0),
        make_task(3, gateway=1, payload=0.0),
    ]
    return topo, tasks


class TestBruteForce:
    def test_single_task_matches_greedy(self):
        topo = build_topology(TopologyConfig(num_servers=3, num_gateways=2, small_fraction=0.4), 0.4, 1.0, np.random.default_rng(2))
        tasks = [make_task(0, gateway=1)]
        greedy_alloc, greedy_out = allocate_greedy(tasks, topo, deadline=1.0)
        brute_alloc, brute_out = allocate_bruteforce(tasks, topo, deadline=1.0)
        assert greedy_alloc == brute_alloc
        assert greedy_out[0].t_total == brute_out[0].t_total

    def test_symmetric_instance_matches_greedy(self):
        servers = [
            EdgeServer(id=0, model_class=LARGE, capacity=5.0),
            EdgeServer(id=1, model_class=LARGE, capacity=5.0),
        ]
        links = {(0, 0): (0.002, 10e6), (0, 1): (0.002, 10e6)}
        topo = make_topology(servers, links)
        tasks = [make_task(i) for i in range(3)]
        weights = (1.0, 1.0)
        _, greedy_out = allocate_greedy(tasks, topo, deadline=1.0, weights=weights)
        _, brute_out = allocate_bruteforce(tasks, topo, deadline=1.0, weights=weights)
        greedy_obj = completion_metrics(greedy_out, 1.0, weights).objective
        brute_obj = completion_metrics(brute_out, 1.0, weights).objective
        # same response-time multiset; summation order may differ by 1 ulp
        assert greedy_obj == pytest.approx(brute_obj, abs=1e-12)

    def test_adversarial_instance_beats_greedy(self):
        topo, tasks = adversarial_instance()
        weights = (1.0, 1.0)
        deadline = 0.55
        _, greedy_out = allocate_greedy(tasks, topo, deadline, weights)
        _, brute_out = allocate_bruteforce(tasks, topo, deadline, weights)
        greedy_obj = completion_metrics(greedy_out, deadline, weights).objective
        brute_obj = completion_metrics(brute_out, deadline, weights).objective
        assert brute_obj == pytest.approx(0.3, abs=1e-12)
        assert greedy_obj == pytest.approx(0.6, abs=1e-12)
        assert brute_obj < greedy_obj

    def test_guard(self):
        topo = build_topology(TopologyConfig(num_servers=3, small_fraction=0.4), 0.4, 1.0, np.random.default_rng(2))
        tasks = [make_task(i) for i in range(4)]
        with pytest.raises(InstanceTooLarge):
            allocate_bruteforce(tasks, topo, deadline=1.0, guard=8)

    def test_random_instances_never_beat_brute_force(self):
        rng = np.random.default_rng(31)
        for trial in range(25):
            n_servers = int(rng.integers(2, 4))
            n_tasks = int(rng.integers(1, 7))
            n_gateways = int(rng.integers(1, 3))
            topo = build_topology(
                TopologyConfig(num_servers=n_servers, num_gateways=n_gateways, small_fraction=0.5),
                0.5, 1.0, rng,
            )
            tasks = generate_tasks(n_tasks, PerfModelConfig(), PARAMS, rng, num_gateways=n_gateways)
            for task in tasks:
                task.assessed = DifficultyLabel(int(rng.integers(1, 3)))
            weights = (1.0, 1.0)
            _, greedy_out = allocate_greedy(tasks, topo, deadline=1.0, weights=weights)
            brute_alloc, brute_out = allocate_bruteforce(tasks, topo, deadline=1.0, weights=weights)
            greedy_obj = completion_metrics(greedy_out, 1.0, weights).objective
            brute_obj = completion_metrics(brute_out, 1.0, weights).objective
            assert greedy_obj >= brute_obj - 1e-12
            # every task assigned exactly once, to its feasible class
            assert sorted(brute_alloc.assignment) == sorted(t.id for t in tasks)
            by_id = {s.id: s for s in topo.servers}
            for task in tasks:
                server = by_id[brute_alloc.assignment[task.id]]
                expected = SMALL if task.assessed == DifficultyLabel.LOW else LARGE
                assert server.model_class == expected


class TestCompletionMetrics:
    def test_uniform_batch(self):
        topo = single_server_topology(compute_time=0.9 - 0.204)
        _, outcomes = allocate_greedy([make_task(0)], topo, deadline=1.0)
        metrics = completion_metrics(outcomes, deadline=1.0, weights=(1.0, 1.0))
        assert metrics.completion_rate == 1.0
        assert metrics.mean_response == pytest.approx(0.9, abs=1e-12)

    def test_deadline_boundary_is_strict(self):
        topo = single_server_topology()
        _, outcomes = allocate_greedy([make_task(0)], topo, deadline=1.0)
        exact = outcomes[0].t_total
        metrics = completion_metrics(outcomes, deadline=exact, weights=(1.0, 1.0))
        assert metrics.completion_rate == 0.0
        metrics = completion_metrics(outcomes, deadline=exact + 1e-12, weights=(1.0, 1.0))
        assert metrics.completion_rate == 1.0

    def test_all_late(self):
        topo = single_server_topology()
        _, outcomes = allocate_greedy([make_task(i) for i in range(3)], topo, deadline=0.1)
        metrics = completion_metrics(outcomes, deadline=0.1, weights=(2.0, 0.5))
        assert metrics.completion_rate == 0.0
        assert metrics.objective == pytest.approx(2.0 + 0.5 * metrics.mean_response, abs=1e-15)

    def test_edge_constant_added_once(self):
        topo = single_server_topology()
        _, outcomes = allocate_greedy([make_task(i) for i in range(2)], topo, deadline=1.0)
        for outcome in outcomes.values():
            outcome.edge_utility = 1.0
        metrics = completion_metrics(outcomes, deadline=1.0, weights=(1.0, 1.0), edge_constant=10.0)
        assert metrics.mean_edge_utility == pytest.approx(11.0, abs=1e-15)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            completion_metrics({}, deadline=1.0, weights=(1.0, 1.0))
