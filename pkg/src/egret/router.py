"""Decentralized multi-thread entanglement-gradient routing.

Threads move in barrier-synchronized rounds.  During a round every active
thread reads the shared state and picks its next link; at the barrier the
moves are applied in thread-id order (utility update, gradient reinforcement
at the new node, decay of the node's other links).  Decisions never mutate
shared state, so they may run on any number of workers with bit-identical
results.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Literal, Sequence, TypeVar

import numpy as np

from .errors import ConfigError, DegenerateDistributionError, DomainError, SingularityError
from .gradient import (
    Direction,
    GradientTable,
    SelectionParams,
    link_selection_probability,
    reinforced,
    update_gradients,
    update_utility,
)
from .network import EntangledLink, EntangledPath, LinkKey, NodeId, QuantumNetwork, throughput_deviation
from .paths import (
    ArrivalRates,
    MeanEstimator,
    PathGradientState,
    RunningMean,
    bottleneck_throughput,
    make_estimator,
    mean_path_gradient,
    score_paths,
    select_optimal_path,
)

log = logging.getLogger(__name__)

K = TypeVar("K", bound=Hashable)

PsiForm = Literal["eq36", "eq44"]


# --- per-step quantities ----------------------------------------------------


def path_signal(gradients: Sequence[float], theta_threshold: float) -> float:
    """Sum of the log-ratios of successive gradients whose magnitude exceeds the threshold."""
    if len(gradients) < 2:
        raise DomainError("path signal needs at least two gradients")
    if theta_threshold < 0:
        raise DomainError(f"threshold must be >= 0, got {theta_threshold}")
    if any(not g > 0 for g in gradients):
        raise DomainError(f"gradients must be strictly positive, got {list(gradients)}")
    total = 0.0
    for prev, cur in zip(gradients, gradients[1:]):
        sigma = math.log(cur / prev)
        if abs(sigma) > theta_threshold:
            total += sigma
    return total


def mean_path_signal(signals: Sequence[float]) -> float:
    if len(signals) == 0:
        raise DomainError("no path signals to average")
    return math.fsum(signals) / len(signals)


def distance(pr_link: float, mean_n: float, mean_z: float, form: PsiForm = "eq36") -> float:
    """Probability-weighted gap between the mean gradients at the two ends of a link.

    ``eq36`` divides by the link probability; ``eq44`` multiplies by it.
    """
    if not 0 <= pr_link <= 1:
        raise DomainError(f"link probability must lie in [0, 1], got {pr_link}")
    gap = abs(mean_n - mean_z)
    if form == "eq44":
        return pr_link * gap
    if form != "eq36":
        raise ConfigError(f"unknown psi form {form!r}")
    if pr_link == 0:
        raise SingularityError("distance undefined for a zero-probability link")
    return gap / pr_link


def inverse_gradient(gradient: float) -> float:
    if gradient == 0:
        raise SingularityError("inverse gradient of a zero gradient")
    if gradient < 0:
        raise DomainError(f"gradient must be > 0, got {gradient}")
    return 1.0 / gradient


def thread_step_distribution(
    candidates: Sequence[tuple[K, float, float]],
    visited: set | frozenset,
    c1: float,
    c2: float,
) -> list[float]:
    """Step probabilities aligned with ``candidates`` (``(node, theta, psi)`` triples).

    Visited nodes get exactly 0; the rest share ``theta**c1 * psi**c2``.
    Raises :class:`DegenerateDistributionError` when nothing is admissible.
    """
    logs: list[float | None] = []
    for node, theta, psi in candidates:
        if node in visited:
            logs.append(None)
            continue
        if not (theta > 0 and psi > 0 and math.isfinite(theta) and math.isfinite(psi)):
            raise DomainError(f"candidate {node!r} needs finite theta > 0 and psi > 0, got {theta}, {psi}")
        logs.append(c1 * math.log(theta) + c2 * math.log(psi))
    live = [l for l in logs if l is not None]
    if not live:
        raise DegenerateDistributionError("no unvisited candidate")
    top = max(live)
    raw = [0.0 if l is None else math.exp(l - top) for l in logs]
    total = math.fsum(raw)
    return [r / total for r in raw]


def select_weights(mean_signal: float, signal_threshold: float) -> tuple[float, float]:
    """(C1, C2): explore on the inverse gradient at or below the threshold, else exploit distance."""
    if mean_signal <= signal_threshold:
        return 1.0, 0.0
    return 0.0, 1.0


# --- configuration and results ----------------------------------------------


@dataclass(frozen=True)
class RoutingParams:
    threads: int = 32
    thread_limit: int = 8
    c1: float | None = None
    c2: float | None = None
    theta_threshold: float = 0.0
    signal_threshold: float = 0.0
    selection: SelectionParams = field(default_factory=SelectionParams)
    tau: float | None = None  # gradient decay; None uses each node's own rate
    psi_form: PsiForm = "eq36"
    psi_min: float = 1e-9
    initial_gradient: float = 0.0
    stop_at_target: bool = True
    mean_estimator: str = "running"
    expected_throughput: float | None = None  # None: running mean of completed paths
    score_iterations: int = 200
    throughput_noise: float = 0.0
    workers: int = 1

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError(f"thread count must be >= 1, got {self.threads}")
        if self.thread_limit < 1:
            raise ConfigError(f"thread limit must be >= 1, got {self.thread_limit}")
        if (self.c1 is None) != (self.c2 is None):
            raise ConfigError("set both C1 and C2 or neither")
        if self.c1 is not None and (self.c1 < 0 or self.c2 < 0):
            raise ConfigError(f"weights must be >= 0, got {self.c1}, {self.c2}")
        if self.theta_threshold < 0:
            raise ConfigError("sigma threshold must be >= 0")
        if self.tau is not None and self.tau < 0:
            raise ConfigError("tau must be >= 0")
        if self.psi_form not in ("eq36", "eq44"):
            raise ConfigError(f"psi form must be eq36 or eq44, got {self.psi_form!r}")
        if self.psi_min <= 0:
            raise ConfigError("psi floor must be > 0")
        if self.initial_gradient < 0:
            raise ConfigError("initial gradient must be >= 0")
        if self.mean_estimator not in ("running", "exponential"):
            raise ConfigError(f"unknown mean estimator {self.mean_estimator!r}")
        if self.expected_throughput is not None and self.expected_throughput < 0:
            raise ConfigError("expected throughput must be >= 0")
        if self.score_iterations < 0 or self.throughput_noise < 0 or self.workers < 1:
            raise ConfigError("score iterations, noise and workers out of range")


@dataclass
class ThreadState:
    id: int
    current: NodeId
    visited: set[NodeId]
    trace: list[NodeId]
    links: list[LinkKey]
    gradients: list[float]  # gradient written at each arrival
    rng: np.random.Generator = field(repr=False, compare=False)
    status: str = "active"  # active | reached-target | exhausted | stuck
    reached_at: int | None = None  # trace index of the target, if reached


@dataclass(frozen=True)
class ThreadTrace:
    id: int
    nodes: tuple[NodeId, ...]
    links: tuple[LinkKey, ...]
    gradients: tuple[float, ...]
    status: str


@dataclass(frozen=True)
class PathSummary:
    id: int
    nodes: tuple[NodeId, ...]
    links: tuple[LinkKey, ...]
    completions: int
    mean_a: float
    mean_b: float
    signal: float
    throughput: float
    expected_throughput: float
    gradient_a: float
    gradient_b: float

    @property
    def deviation(self) -> float:
        return abs(self.expected_throughput - self.throughput)


@dataclass(frozen=True)
class RouteResult:
    source: NodeId
    target: NodeId
    path: EntangledPath | None
    paths: tuple[PathSummary, ...]
    threads: tuple[ThreadTrace, ...]
    visits: int
    budget: int
    rounds: int

    def summary_for(self, nodes: Sequence[NodeId]) -> PathSummary | None:
        nodes = tuple(nodes)
        for p in self.paths:
            if p.nodes == nodes:
                return p
        return None


# --- the episode --------------------------------------------------------------


@dataclass
class _Move:
    thread: int
    link: EntangledLink | None  # None: no admissible candidate


@dataclass
class _PathRecord:
    id: int
    nodes: tuple[NodeId, ...]
    links: tuple[LinkKey, ...]
    mean_a: MeanEstimator
    mean_b: MeanEstimator
    signals: list[float] = field(default_factory=list)


class _Episode:
    def __init__(self, net: QuantumNetwork, source: NodeId, target: NodeId, params: RoutingParams, seed: int):
        self.net = net
        self.source = source
        self.target = target
        self.params = params
        self.utility = {k: l.utility for k, l in net.links.items()}
        self.throughputs = {k: l.throughput for k, l in net.links.items()}
        self.tables = {
            n: GradientTable(n, tuple(l.key for l in net.incident(n)), params.initial_gradient) for n in net.nodes
        }
        self.received: dict[NodeId, MeanEstimator] = {n: RunningMean() for n in net.nodes}
        self.records: dict[tuple[LinkKey, ...], _PathRecord] = {}
        self.completed_throughputs = RunningMean()
        self.noise_rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        self.threads = [
            ThreadState(
                id=i,
                current=source,
                visited={source},
                trace=[source],
                links=[],
                gradients=[],
                rng=np.random.default_rng(np.random.SeedSequence([seed, 0, i])),
            )
            for i in range(params.threads)
        ]
        if params.thread_limit == 1:
            for t in self.threads:
                t.status = "exhausted"
        self._refresh_deviations()

    # shared-state reads ---------------------------------------------------

    def _refresh_deviations(self):
        self.deviations = {
            n: {l.key: throughput_deviation(self.net, n, l, self.throughputs) for l in self.net.incident(n)}
            for n in self.net.nodes
        }

    def decay(self, node: NodeId) -> float:
        return self.params.tau if self.params.tau is not None else self.net.nodes[node].tau

    def prospective(self, node: NodeId, link: LinkKey, anchor: NodeId, direction: Direction) -> float:
        """Gradient ``node`` would hold for ``link`` if a thread arrived on it now."""
        g = self.tables[node].value(anchor, link, direction)
        lam_prime = update_utility(self.utility[link], self.throughputs[link])
        return reinforced(g, self.decay(node), self.deviations[node][link], lam_prime)

    def link_probabilities(self, node: NodeId) -> dict[LinkKey, float]:
        grads = [
            (l.key, self.prospective(node, l.key, self.target, Direction.TOWARD_DESTINATION))
            for l in self.net.incident(node)
        ]
        return link_selection_probability(grads, self.params.selection)

    def mean_gradient(self, node: NodeId, other: NodeId, endpoint: str) -> float:
        a, b = (node, other) if endpoint == "A" else (other, node)
        rates = ArrivalRates(self.net.nodes[a].kappa, self.net.nodes[b].kappa)
        return mean_path_gradient(rates, self.net.nodes[node].tau, self.received[node].value, endpoint)

    def weights(self, thread: ThreadState) -> tuple[float, float]:
        p = self.params
        if p.c1 is not None:
            return p.c1, p.c2
        if len(thread.gradients) < 2:
            signal = 0.0
        else:
            signal = path_signal(thread.gradients, p.theta_threshold)
        return select_weights(mean_path_signal([signal]), p.signal_threshold)

    def decide(self, thread: ThreadState) -> _Move:
        n = thread.current
        pr = self.link_probabilities(n)
        options: list[tuple[EntangledLink, float, float]] = []
        for link in self.net.incident(n):
            z = link.other(n)
            if z in thread.visited:
                continue
            try:
                theta = inverse_gradient(self.prospective(z, link.key, self.source, Direction.TOWARD_SOURCE))
                psi = distance(
                    pr[link.key],
                    self.mean_gradient(n, z, "A"),
                    self.mean_gradient(z, n, "B"),
                    self.params.psi_form,
                )
            except SingularityError:
                continue
            options.append((link, theta, max(psi, self.params.psi_min)))
        if not options:
            return _Move(thread.id, None)
        c1, c2 = self.weights(thread)
        probs = thread_step_distribution(
            [(i, theta, psi) for i, (_, theta, psi) in enumerate(options)], frozenset(), c1, c2
        )
        u = thread.rng.random()
        acc = 0.0
        choice = len(options) - 1
        for i, p in enumerate(probs):
            acc += p
            if u < acc:
                choice = i
                break
        return _Move(thread.id, options[choice][0])

    # barrier writes -------------------------------------------------------

    def traverse(self, node: NodeId, link: EntangledLink, anchor: NodeId, direction: Direction) -> float:
        table = update_gradients(
            self.tables[node],
            link.key,
            self.decay(node),
            self.deviations[node],
            self.utility[link.key],
            anchor=anchor,
            direction=direction,
        )
        self.tables[node] = table
        value = table.value(anchor, link.key, direction)
        self.received[node].update(value)
        return value

    def apply(self, move: _Move):
        t = self.threads[move.thread]
        if move.link is None:
            t.status = "stuck"
            return
        link = move.link
        z = link.other(t.current)
        self.utility[link.key] = update_utility(self.utility[link.key], self.throughputs[link.key])
        g = self.traverse(z, link, self.source, Direction.TOWARD_SOURCE)
        t.current = z
        t.visited.add(z)
        t.trace.append(z)
        t.links.append(link.key)
        t.gradients.append(g)
        if z == self.target and t.reached_at is None:
            t.reached_at = len(t.trace) - 1
            self.complete(t)
            if self.params.stop_at_target:
                t.status = "reached-target"
                return
        if len(t.visited) >= self.params.thread_limit:
            t.status = "exhausted"

    def complete(self, t: ThreadState):
        """Replay the finished trace backwards and record what each endpoint received."""
        end = t.reached_at
        nodes = tuple(t.trace[: end + 1])
        links = tuple(t.links[:end])
        back = []
        for i in range(len(links), 0, -1):
            link = self.net.links[links[i - 1]]
            back.append(self.traverse(nodes[i - 1], link, self.target, Direction.TOWARD_DESTINATION))
        forward = t.gradients[:end]
        record = self.records.get(links)
        if record is None:
            record = _PathRecord(
                len(self.records),
                nodes,
                links,
                make_estimator(self.params.mean_estimator),
                make_estimator(self.params.mean_estimator),
            )
            self.records[links] = record
        record.mean_a.update(_series_gradient(back))
        record.mean_b.update(_series_gradient(forward))
        record.signals.append(path_signal(forward, self.params.theta_threshold) if len(forward) >= 2 else 0.0)
        self.completed_throughputs.update(self.path_throughput(links))

    def path_throughput(self, links: Sequence[LinkKey]) -> float:
        return bottleneck_throughput([self.throughputs[k] for k in links])

    def perturb(self):
        """Multiplicative Gaussian noise on every link throughput, clipped at zero."""
        sigma = self.params.throughput_noise
        for key in sorted(self.net.links):
            base = self.net.links[key].throughput
            self.throughputs[key] = max(0.0, base * (1.0 + sigma * self.noise_rng.standard_normal()))
        self._refresh_deviations()

    # driver ---------------------------------------------------------------

    def run(self) -> RouteResult:
        rounds = 0
        pool = ThreadPoolExecutor(self.params.workers) if self.params.workers > 1 else None
        try:
            while True:
                active = [t for t in self.threads if t.status == "active"]
                if not active:
                    break
                rounds += 1
                if self.params.throughput_noise > 0:
                    self.perturb()
                moves = list(pool.map(self.decide, active)) if pool else [self.decide(t) for t in active]
                for move in moves:  # already in thread-id order
                    self.apply(move)
        finally:
            if pool:
                pool.shutdown()
        return self.result(rounds)

    def result(self, rounds: int) -> RouteResult:
        records = sorted(self.records.values(), key=lambda r: r.id)
        expected = self.params.expected_throughput
        if expected is None:
            expected = self.completed_throughputs.value
        states = [
            PathGradientState(
                r.id,
                self.params.initial_gradient,
                self.params.initial_gradient,
                r.mean_a.value,
                r.mean_b.value,
                self.path_throughput(r.links),
                expected,
            )
            for r in records
        ]
        path = None
        if states:
            rates = ArrivalRates(self.net.nodes[self.source].kappa, self.net.nodes[self.target].kappa)
            states = score_paths(
                states,
                rates,
                self.net.nodes[self.source].tau,
                self.net.nodes[self.target].tau,
                self.params.selection,
                self.params.score_iterations,
            )
            best = records[select_optimal_path([s.gradient_a for s in states])]
            path = EntangledPath(best.id, best.nodes, best.links)
        summaries = tuple(
            PathSummary(
                r.id,
                r.nodes,
                r.links,
                len(r.signals),
                s.mean_a,
                s.mean_b,
                mean_path_signal(r.signals),
                s.throughput,
                s.expected_throughput,
                s.gradient_a,
                s.gradient_b,
            )
            for r, s in zip(records, states)
        )
        traces = tuple(
            ThreadTrace(t.id, tuple(t.trace), tuple(t.links), tuple(t.gradients), t.status) for t in self.threads
        )
        visits = sum(len(t.visited) for t in self.threads)
        budget = len(self.net.nodes) * self.params.threads * self.params.thread_limit
        if visits > budget:
            raise AssertionError(f"visit count {visits} exceeds budget {budget}")
        return RouteResult(self.source, self.target, path, summaries, traces, visits, budget, rounds)


def _series_gradient(gradients: Sequence[float]) -> float:
    """Gradient delivered over a chain of links: reciprocal of the summed inverse gradients."""
    return 1.0 / math.fsum(1.0 / g for g in gradients)


def validate_endpoints(net: QuantumNetwork, source: NodeId, target: NodeId) -> None:
    for name, node in (("source", source), ("target", target)):
        if node not in net.nodes:
            raise DomainError(f"{name} {node!r} is not in the network")
    if source == target:
        raise DomainError("source and target must differ")
    for n in net.nodes.values():
        if n.tau <= 0:
            raise DomainError(f"node {n.id} has decay rate {n.tau}; mean gradients need tau > 0")
    for l in net.links.values():
        if net.nodes[l.u].kappa + net.nodes[l.v].kappa <= 0:
            raise DomainError(f"link {l.key} joins two nodes with zero observation rate")


def run_routing(
    net: QuantumNetwork,
    source: NodeId,
    target: NodeId,
    params: RoutingParams = RoutingParams(),
    seed: int = 0,
) -> RouteResult:
    """Run every thread to completion and return the highest-gradient path found.

    A result without a path (no thread reached the target) is not an error.
    """
    validate_endpoints(net, source, target)
    if seed < 0:
        raise ConfigError(f"seed must be >= 0, got {seed}")
    result = _Episode(net, source, target, params, seed).run()
    log.debug(
        "routing %s->%s: %d paths, %d visits / budget %d, %d rounds",
        source, target, len(result.paths), result.visits, result.budget, result.rounds,
    )
    return result
