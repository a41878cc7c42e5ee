"""Entangled quantum network: nodes, leveled links and synthetic generation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, DomainError

NodeId = str
LinkKey = tuple[str, str, int]


@dataclass(frozen=True)
class QuantumNode:
    id: NodeId
    kappa: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if not self.kappa >= 0:
            raise DomainError(f"node {self.id}: observation rate must be >= 0, got {self.kappa}")
        if not self.tau >= 0:
            raise DomainError(f"node {self.id}: decay rate must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class EntangledLink:
    """Undirected entangled link of a given level.

    ``utility`` is the initial entanglement utility of the link; the router
    evolves its own copy and never mutates the network.
    """

    u: NodeId
    v: NodeId
    level: int = 1
    throughput: float = 1.0
    fidelity: float = 1.0
    utility: float = 1.0

    def __post_init__(self):
        if self.u == self.v:
            raise DomainError(f"self-loop on node {self.u}")
        if self.u > self.v:
            # canonical orientation so that equal links compare equal
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)
        if int(self.level) != self.level or self.level < 1:
            raise DomainError(f"link level must be an integer >= 1, got {self.level}")
        if not self.throughput >= 0:
            raise DomainError(f"link throughput must be >= 0, got {self.throughput}")
        if not 0 <= self.fidelity <= 1:
            raise DomainError(f"link fidelity must lie in [0, 1], got {self.fidelity}")
        if not self.utility >= 0:
            raise DomainError(f"link utility must be >= 0, got {self.utility}")

    @property
    def key(self) -> LinkKey:
        return (self.u, self.v, self.level)

    @property
    def hop_distance(self) -> int:
        return hop_distance(self.level)

    def other(self, node: NodeId) -> NodeId:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise DomainError(f"link {self.key} is not incident to node {node}")

    def touches(self, node: NodeId) -> bool:
        return node == self.u or node == self.v


class QuantumNetwork:
    """Immutable graph of repeater nodes and entangled links.

    Several links of different level may join the same node pair; each is a
    separate candidate edge for routing.
    """

    def __init__(self, nodes: Iterable[QuantumNode], links: Iterable[EntangledLink]):
        self.nodes: dict[NodeId, QuantumNode] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise ConfigError(f"duplicate node {node.id}")
            self.nodes[node.id] = node
        self.links: dict[LinkKey, EntangledLink] = {}
        adjacency: dict[NodeId, list[EntangledLink]] = {n: [] for n in self.nodes}
        for link in links:
            for end in (link.u, link.v):
                if end not in self.nodes:
                    raise ConfigError(f"link {link.key} references unknown node {end}")
            if link.key in self.links:
                raise ConfigError(f"duplicate link {link.key}")
            self.links[link.key] = link
            adjacency[link.u].append(link)
            adjacency[link.v].append(link)
        self._adjacency = {
            n: tuple(sorted(ls, key=lambda l: (l.other(n), l.level))) for n, ls in adjacency.items()
        }

    def __repr__(self):
        return f"QuantumNetwork({len(self.nodes)} nodes, {len(self.links)} links)"

    def __eq__(self, other):
        if not isinstance(other, QuantumNetwork):
            return NotImplemented
        return self.nodes == other.nodes and self.links == other.links

    def node_ids(self) -> list[NodeId]:
        return sorted(self.nodes)

    def incident(self, node: NodeId) -> tuple[EntangledLink, ...]:
        """Links touching ``node``, ordered by (neighbor id, level)."""
        try:
            return self._adjacency[node]
        except KeyError:
            raise DomainError(f"unknown node {node}") from None

    def neighbors(self, node: NodeId) -> list[NodeId]:
        return sorted({l.other(node) for l in self.incident(node)})

    def link(self, u: NodeId, v: NodeId, level: int | None = None) -> EntangledLink:
        candidates = [l for l in self.incident(u) if l.other(u) == v]
        if level is not None:
            candidates = [l for l in candidates if l.level == level]
        if not candidates:
            raise DomainError(f"no link between {u} and {v}" + (f" at level {level}" if level else ""))
        return candidates[0]

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for m in self.neighbors(n):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return len(seen) == len(self.nodes)


@dataclass(frozen=True)
class EntangledPath:
    id: int
    nodes: tuple[NodeId, ...]
    links: tuple[LinkKey, ...]

    def __post_init__(self):
        if len(self.nodes) < 1 or len(self.links) != len(self.nodes) - 1:
            raise DomainError("path needs one link between each pair of consecutive nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise DomainError(f"path revisits a node: {self.nodes}")
        for (a, b), (u, v, _) in zip(zip(self.nodes, self.nodes[1:]), self.links):
            if {a, b} != {u, v}:
                raise DomainError(f"link {(u, v)} does not join {a} and {b}")

    @property
    def hops(self) -> int:
        return len(self.links)


def hop_distance(level: int) -> int:
    """Number of repeater hops spanned by a link of the given level."""
    if int(level) != level or level < 1:
        raise DomainError(f"level must be an integer >= 1, got {level}")
    return 1 << (int(level) - 1)


def mean_neighbor_throughput(net: QuantumNetwork, y: NodeId, throughputs: Mapping[LinkKey, float] | None = None) -> float:
    links = net.incident(y)
    if not links:
        raise DomainError(f"node {y} has no links")
    bf = _throughput_getter(throughputs)
    # exact rational mean, correctly rounded: equal throughputs give a zero deviation
    return float(sum(Fraction(bf(l)) for l in links) / len(links))


def throughput_deviation(
    net: QuantumNetwork,
    y: NodeId,
    link: EntangledLink,
    throughputs: Mapping[LinkKey, float] | None = None,
) -> float:
    """Absolute gap between ``link``'s throughput and the mean over y's links.

    ``throughputs`` optionally overrides per-link values (used when the
    harness perturbs throughputs between rounds).
    """
    if not link.touches(y) or link.key not in net.links:
        raise DomainError(f"link {link.key} is not incident to node {y}")
    bf = _throughput_getter(throughputs)
    return abs(mean_neighbor_throughput(net, y, throughputs) - bf(link))


def _throughput_getter(throughputs):
    if throughputs is None:
        return lambda l: l.throughput
    return lambda l: throughputs.get(l.key, l.throughput)


# --- generation -------------------------------------------------------------


@dataclass(frozen=True)
class GenerationSpec:
    nodes: int
    links: int
    throughput: tuple[float, float] = (1.0, 10.0)
    fidelity: tuple[float, float] = (0.9, 1.0)
    kappa: tuple[float, float] = (1.0, 4.0)
    tau: tuple[float, float] = (0.5, 2.0)
    levels: Mapping[int, float] = field(default_factory=lambda: {1: 1.0})
    utility: float = 1.0

    def validate(self):
        if self.nodes < 2:
            raise ConfigError(f"need at least 2 nodes, got {self.nodes}")
        max_links = self.nodes * (self.nodes - 1) // 2
        if not self.nodes - 1 <= self.links <= max_links:
            raise ConfigError(
                f"{self.nodes} nodes need between {self.nodes - 1} and {max_links} links, got {self.links}"
            )
        for name in ("throughput", "fidelity", "kappa", "tau"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi:
                raise ConfigError(f"invalid {name} range ({lo}, {hi})")
        if self.fidelity[1] > 1:
            raise ConfigError("fidelity range must lie within [0, 1]")
        if not self.levels or any(l < 1 or w < 0 for l, w in self.levels.items()) or sum(self.levels.values()) <= 0:
            raise ConfigError(f"invalid level distribution {dict(self.levels)}")


def node_names(count: int) -> list[NodeId]:
    width = len(str(count - 1))
    return [f"n{i:0{width}d}" for i in range(count)]


def generate_network(spec: GenerationSpec, seed: int) -> QuantumNetwork:
    """Random connected network, a pure function of ``(spec, seed)``.

    A uniformly random labelled spanning tree (Pruefer decoding) guarantees
    connectivity; the remaining links are drawn uniformly from unused pairs.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    names = node_names(spec.nodes)
    pairs = _random_tree(spec.nodes, rng)
    used = set(pairs)
    free = [p for p in itertools.combinations(range(spec.nodes), 2) if p not in used]
    extra = spec.links - len(pairs)
    if extra:
        picks = rng.choice(len(free), size=extra, replace=False)
        pairs += [free[i] for i in sorted(picks)]

    levels = sorted(spec.levels)
    weights = np.array([spec.levels[l] for l in levels], dtype=float)
    weights /= weights.sum()
    nodes = [
        QuantumNode(name, float(rng.uniform(*spec.kappa)), float(rng.uniform(*spec.tau))) for name in names
    ]
    links = []
    for a, b in pairs:
        links.append(
            EntangledLink(
                names[a],
                names[b],
                level=int(levels[rng.choice(len(levels), p=weights)]),
                throughput=float(rng.uniform(*spec.throughput)),
                fidelity=float(rng.uniform(*spec.fidelity)),
                utility=spec.utility,
            )
        )
    return QuantumNetwork(nodes, links)


def _random_tree(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    if n == 2:
        return [(0, 1)]
    prufer = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for x in prufer:
        degree[x] += 1
    edges = []
    for x in prufer:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return edges


# --- file format ------------------------------------------------------------


def parse_network(text: str) -> QuantumNetwork:
    """Parse the line-oriented network format.

    ``node <id> <kappa> <tau>`` and ``link <u> <v> <level> <throughput>
    <fidelity> [utility]``; blank lines and ``#`` comments are ignored.
    """
    nodes, links = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "node" and len(parts) == 4:
                nodes.append(QuantumNode(parts[1], float(parts[2]), float(parts[3])))
            elif parts[0] == "link" and len(parts) in (6, 7):
                level = float(parts[3])
                if level != int(level):
                    raise ConfigError(f"non-integer level {parts[3]}")
                extra = {"utility": float(parts[6])} if len(parts) == 7 else {}
                links.append(
                    EntangledLink(parts[1], parts[2], int(level), float(parts[4]), float(parts[5]), **extra)
                )
            else:
                raise ConfigError(f"unrecognised record {parts[0]!r} with {len(parts)} fields")
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return QuantumNetwork(nodes, links)


def format_network(net: QuantumNetwork) -> str:
    lines = [f"# {len(net.nodes)} nodes, {len(net.links)} links"]
    for nid in net.node_ids():
        n = net.nodes[nid]
        lines.append(f"node {n.id} {n.kappa!r} {n.tau!r}")
    for key in sorted(net.links):
        l = net.links[key]
        rec = f"link {l.u} {l.v} {l.level} {l.throughput!r} {l.fidelity!r}"
        if l.utility != 1.0:
            rec += f" {l.utility!r}"
        lines.append(rec)
    return "\n".join(lines) + "\n"


def load_network(path: str | Path) -> QuantumNetwork:
    return parse_network(Path(path).read_text())


def save_network(net: QuantumNetwork, path: str | Path) -> None:
    Path(path).write_text(format_network(net))
