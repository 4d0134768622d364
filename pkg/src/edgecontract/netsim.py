"""Gateway / edge-server topology and per-task timing.

Gateways are wired to every server by one direct link with a drawn
propagation delay and bandwidth.  Server speeds are drawn so that one
task's compute lands in a configured per-task time range.  A configurable
share of the servers hosts the small-dataset model; the rest host the
large one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .tasks import AigcTask

SMALL = "small"
LARGE = "large"


@dataclass(frozen=True)
class Link:
    from_id: int       # gateway
    to_id: int         # server
    prop_delay: float  # seconds
    bandwidth: float   # bits per second


@dataclass
class EdgeServer:
    id: int
    model_class: str  # SMALL or LARGE, fixed for a run
    capacity: float   # compute units per second
    queue: list[int] = field(default_factory=list)  # task ids, FIFO


@dataclass
class Topology:
    gateways: list[int]
    servers: list[EdgeServer]
    links: dict[tuple[int, int], Link]  # (gateway_id, server_id) -> Link

    def route(self, gateway_id: int, server_id: int) -> list[Link]:
        """The link sequence from a gateway to a server (one direct hop)."""
        return [self.links[(gateway_id, server_id)]]

    def server_ids(self) -> list[int]:
        return [s.id for s in self.servers]

    def servers_of_class(self, model_class: str) -> list[EdgeServer]:
        return [s for s in self.servers if s.model_class == model_class]


@dataclass(frozen=True)
class TopologyConfig:
    """Counts and draw ranges for the network build."""

    num_servers: int = 30
    num_gateways: int = 5
    compute_time_range: tuple[float, float] = (0.11737, 0.28326)  # s per task
    prop_delay_range: tuple[float, float] = (0.001, 0.003)        # s
    bandwidth_range: tuple[float, float] = (5e6, 100e6)           # bits/s
    small_fraction: float | None = None  # None -> use the contract's beta_L


def build_topology(config: TopologyConfig, beta_L: float, compute_demand: float, rng) -> Topology:
    """Draw a topology; reproducible under a fixed generator.

    Draw order is fixed: all server compute times first, then per
    (gateway, server) pair the propagation delay and bandwidth.  The first
    round(small_fraction * M) servers host the small-dataset model.
    """
    if config.num_servers < 1 or config.num_gateways < 1:
        raise ConfigError("need at least one server and one gateway")
    lo, hi = config.compute_time_range
    if not 0.0 < lo <= hi:
        raise ConfigError("compute_time_range must be positive and ordered")
    if compute_demand <= 0.0:
        raise ConfigError("compute_demand must be positive to size capacities")

    fraction = config.small_fraction if config.small_fraction is not None else beta_L
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError("small_fraction must lie in [0, 1]")
    n_small = int(math.floor(fraction * config.num_servers + 0.5))  # round half up

    compute_times = rng.uniform(lo, hi, size=config.num_servers)
    servers = [
        EdgeServer(
            id=m,
            model_class=SMALL if m < n_small else LARGE,
            capacity=float(compute_demand / compute_times[m]),
        )
        for m in range(config.num_servers)
    ]

    links: dict[tuple[int, int], Link] = {}
    for g in range(config.num_gateways):
        for s in range(config.num_servers):
            prop = float(rng.uniform(*config.prop_delay_range))
            bandwidth = float(rng.uniform(*config.bandwidth_range))
            links[(g, s)] = Link(from_id=g, to_id=s, prop_delay=prop, bandwidth=bandwidth)

    return Topology(gateways=list(range(config.num_gateways)), servers=servers, links=links)


def transmission_time(task: AigcTask, route: list[Link]) -> float:
    """Round-trip wire time over the route: sum of 2*(prop + payload/bandwidth)."""
    return sum(2.0 * (link.prop_delay + task.payload_bits / link.bandwidth) for link in route)


def computation_time(task: AigcTask, server: EdgeServer) -> float:
    """Work divided by server speed."""
    return task.compute_demand / server.capacity
