"""Classical shortest-path baseline and route comparison."""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass
from typing import Literal

from .errors import DomainError
from .network import EntangledLink, EntangledPath, NodeId, QuantumNetwork
from .router import RoutingParams, run_routing

Weight = Literal["hop", "inverse-throughput"]


def edge_weight(link: EntangledLink, weight: Weight) -> float:
    if weight == "hop":
        return 1.0
    if weight == "inverse-throughput":
        return math.inf if link.throughput == 0 else 1.0 / link.throughput
    raise DomainError(f"unknown weight {weight!r}")


def baseline_shortest_path(
    net: QuantumNetwork, source: NodeId, target: NodeId, weight: Weight = "hop"
) -> EntangledPath | None:
    """Dijkstra under the chosen edge weight.

    Equal-cost paths are broken by the lexicographic order of their node
    sequences; ``None`` when the target is unreachable.
    """
    for node in (source, target):
        if node not in net.nodes:
            raise DomainError(f"unknown node {node!r}")
    heap: list[tuple[float, tuple[NodeId, ...], tuple]] = [(0.0, (source,), ())]
    settled: set[NodeId] = set()
    while heap:
        dist, nodes, links = heapq.heappop(heap)
        here = nodes[-1]
        if here in settled:
            continue
        settled.add(here)
        if here == target:
            return EntangledPath(0, nodes, links)
        for link in net.incident(here):
            nxt = link.other(here)
            w = edge_weight(link, weight)
            if nxt in settled or math.isinf(w):
                continue
            heapq.heappush(heap, (dist + w, nodes + (nxt,), links + (link.key,)))
    return None


@dataclass(frozen=True)
class CompareReport:
    gradient_path: tuple[NodeId, ...] | None
    baseline_path: tuple[NodeId, ...] | None
    overlap: float
    gradient_score: float
    baseline_score: float
    visits: int
    budget: int
    weight: str

    @property
    def within_budget(self) -> bool:
        return self.visits <= self.budget

    def to_dict(self) -> dict:
        d = asdict(self)
        d["within_budget"] = self.within_budget
        return d


def link_overlap(a: EntangledPath | None, b: EntangledPath | None) -> float:
    """Jaccard overlap of the two paths' link sets; 0 when either is missing."""
    if a is None or b is None:
        return 0.0
    la, lb = set(a.links), set(b.links)
    if not la and not lb:
        return 1.0
    return len(la & lb) / len(la | lb)


def compare_routes(
    net: QuantumNetwork,
    source: NodeId,
    target: NodeId,
    params: RoutingParams = RoutingParams(),
    seed: int = 0,
    weight: Weight = "hop",
) -> CompareReport:
    """Gradient route against the classical baseline.

    Both routes are scored by the endpoint path gradient; a baseline path no
    thread completed received no gradient and scores 0.
    """
    result = run_routing(net, source, target, params, seed)
    base = baseline_shortest_path(net, source, target, weight)
    gradient_score = 0.0
    if result.path is not None:
        gradient_score = result.paths[result.path.id].gradient_a
    baseline_score = 0.0
    if base is not None:
        for summary in result.paths:
            if summary.links == base.links:
                baseline_score = summary.gradient_a
    return CompareReport(
        gradient_path=result.path.nodes if result.path else None,
        baseline_path=base.nodes if base else None,
        overlap=link_overlap(result.path, base),
        gradient_score=gradient_score,
        baseline_score=baseline_score,
        visits=result.visits,
        budget=result.budget,
        weight=weight,
    )
