"""Figure sweeps and batch routing runs emitted as CSV tables."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, TextIO

from .baseline import baseline_shortest_path, link_overlap
from .config import Settings, generation_spec, routing_params
from .errors import ConfigError, DomainError
from .fidelity import correlation_measurement, entanglement_fidelity
from .network import QuantumNetwork, generate_network, load_network
from .paths import ArrivalRates, decay_rate_from_threshold, mean_path_gradient
from .rates import cutoff_rate, peak_mean_gradient, response
from .router import run_routing, thread_step_distribution

log = logging.getLogger(__name__)

EXPERIMENTS = ("fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7", "route", "sweep")
STOCHASTIC = ("route", "sweep")


@dataclass
class CsvTable:
    header: list[str]
    rows: list[list[float]] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def add(self, row: Iterable[float]) -> None:
        row = list(row)
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} cells, header has {len(self.header)}")
        if not all(math.isfinite(x) for x in row):
            self.errors.append(f"non-finite row {row}")
            return
        self.rows.append(row)

    def column(self, name: str) -> list[float]:
        i = self.header.index(name)
        return [r[i] for r in self.rows]

    def write(self, stream: TextIO) -> None:
        for c in self.comments:
            stream.write(f"# {c}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_fmt(x) for x in row])

    def to_text(self) -> str:
        buf = io.StringIO()
        self.write(buf)
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            self.write(fh)


def _fmt(x: float) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int) or (isinstance(x, float) and x.is_integer() and abs(x) < 2**53):
        return str(int(x))
    return repr(float(x))


def read_csv(text: str) -> CsvTable:
    comments = [l[1:].strip() for l in text.splitlines() if l.startswith("#")]
    body = [l for l in text.splitlines() if l and not l.startswith("#")]
    reader = csv.reader(body)
    header = next(reader)
    rows = [[float(x) for x in r] for r in reader]
    return CsvTable(header, rows, comments)


@dataclass
class ExperimentConfig:
    experiment: str
    settings: Settings = field(default_factory=Settings)
    seed: int | None = 0
    out: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.experiment in STOCHASTIC and self.seed is None:
            raise ConfigError(f"experiment {self.experiment} needs a seed")
        if self.seed is not None and self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


def _sweep(table: CsvTable, label: str, fn: Callable[[], list[float]]) -> None:
    """Add one row, recording (not raising) domain errors from the inner operation."""
    try:
        table.add(fn())
    except DomainError as exc:
        table.errors.append(f"{label}: {exc}")


def _fig3a(s: Settings) -> CsvTable:
    threshold = s.number("partial", 1.0)
    expected = s.number("expected", 2.0)
    t = CsvTable(["phi", "tau"], comments=[f"threshold={threshold!r} expected_gradient={expected!r}"])
    for phi in s.values("phi", "log(0, 8, 9)"):
        _sweep(t, f"phi={phi}", lambda: [phi, decay_rate_from_threshold(threshold, expected, phi)])
    return t


def _fig3b(s: Settings) -> CsvTable:
    kappa_ab, kappa_b, mu = s.number("kappa_ab", 4.0), s.number("kappa_b", 2.0), s.number("mu", 1.0)
    if not 0 <= kappa_b <= kappa_ab:
        raise ConfigError(f"need 0 <= kappa_b <= kappa_ab, got {kappa_b}, {kappa_ab}")
    rates = ArrivalRates(kappa_ab - kappa_b, kappa_b)
    t = CsvTable(["tau_a", "mean_gradient"], comments=[f"kappa_ab={kappa_ab!r} kappa_b={kappa_b!r} mu={mu!r}"])
    for tau in s.values("tau_a", "lin(0.1, 10, 100)"):
        _sweep(t, f"tau_a={tau}", lambda: [tau, mean_path_gradient(rates, tau, mu, "A")])
    return t


def _fig4(s: Settings) -> CsvTable:
    nus = s.values("nu", "lin(-pi, pi, 101)")
    mus = s.values("mu", "lin(0, 10, 101)")
    if len(nus) != len(mus):
        raise ConfigError(f"nu and mu sweeps must have equal length, got {len(nus)} and {len(mus)}")
    t = CsvTable(["gamma", "nu", "rho", "mu", "mean_gradient"])
    for gamma in s.values("gamma", "0.1, 0.5, 0.8, 0.9"):
        for nu, mu in zip(nus, mus):
            _sweep(t, f"gamma={gamma} nu={nu}", lambda: [gamma, nu, response(gamma, nu), mu, peak_mean_gradient(mu, gamma)])
    return t


def _fig5(s: Settings) -> CsvTable:
    pi = s.number("pi", 0.5)
    t = CsvTable(["kappa", "tau", "cutoff"], comments=[f"pi={pi!r}"])
    for kappa in s.values("kappa", "log(4, 8, 5)"):
        for tau in s.values("tau", "log(0, 8, 33)"):
            _sweep(t, f"kappa={kappa} tau={tau}", lambda: [kappa, tau, cutoff_rate(kappa, tau, pi)])
    return t


def _fig6(s: Settings) -> CsvTable:
    psi = s.number("psi", 5.0)
    competitors = s.integer("competitors", 4)
    comp_theta = s.number("competitor_theta", 1.0)
    comp_psi = s.number("competitor_psi", 1.0)
    if competitors < 0:
        raise ConfigError("competitor count must be >= 0")
    t = CsvTable(
        ["theta", "c1", "c2", "probability"],
        comments=[
            f"probed candidate psi={psi!r}; {competitors} competitors at theta={comp_theta!r} psi={comp_psi!r}",
        ],
    )
    for theta in s.values("theta", "0.5, 0.2"):
        for c1 in s.values("c1", "lin(0, 1, 11)"):
            for c2 in s.values("c2", "lin(0, 1, 11)"):
                cands = [("z", theta, psi)] + [(f"k{i}", comp_theta, comp_psi) for i in range(competitors)]
                _sweep(t, f"theta={theta} c1={c1} c2={c2}", lambda: [theta, c1, c2, thread_step_distribution(cands, set(), c1, c2)[0]])
    return t


def _fig7(s: Settings) -> CsvTable:
    t = CsvTable(["p_err", "level", "m", "fidelity"])
    for p in s.values("p_err", "lin(0, 0.025, 26)"):
        for level in s.values("level", "lin(1, 10, 10)"):
            if level != int(level):
                raise ConfigError(f"level must be an integer, got {level}")
            _sweep(t, f"p_err={p} level={level}", lambda: [p, int(level), correlation_measurement(p, int(level)), entanglement_fidelity(p, int(level))])
    return t


def network_from(s: Settings, seed: int) -> QuantumNetwork:
    path = s.text("network")
    if path:
        return load_network(path)
    return generate_network(generation_spec(s), seed)


def _endpoints(s: Settings, net: QuantumNetwork) -> tuple[str, str]:
    ids = net.node_ids()
    return s.text("source", ids[0]), s.text("target", ids[-1])


def _route(s: Settings, seed: int) -> CsvTable:
    net = network_from(s, seed)
    source, target = _endpoints(s, net)
    result = run_routing(net, source, target, routing_params(s), seed)
    winner = result.path.id if result.path else -1
    t = CsvTable(
        ["path_id", "hops", "completions", "mean_a", "mean_b", "signal", "throughput", "deviation", "gradient_a", "gradient_b", "winner"],
        comments=[
            f"source={source} target={target} seed={seed}",
            f"visits={result.visits} budget={result.budget} rounds={result.rounds}",
            "winning path: " + (" ".join(result.path.nodes) if result.path else "none"),
        ],
    )
    for p in result.paths:
        t.add([p.id, len(p.links), p.completions, p.mean_a, p.mean_b, p.signal, p.throughput, p.deviation, p.gradient_a, p.gradient_b, int(p.id == winner)])
    return t


def _sweep_runs(s: Settings, seed: int) -> CsvTable:
    runs = s.integer("runs", 10)
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    params = routing_params(s)
    spec = generation_spec(s)
    t = CsvTable(
        ["run", "nodes", "links", "found", "hops", "score", "paths", "visits", "budget", "baseline_hops", "overlap"],
        comments=[f"seed={seed} runs={runs} threads={params.threads} thread_limit={params.thread_limit}"],
    )
    for i in range(runs):
        net = generate_network(spec, seed + i)
        source, target = _endpoints(s, net)
        result = run_routing(net, source, target, params, seed + i)
        base = baseline_shortest_path(net, source, target, "hop")
        found = result.path is not None
        t.add([
            i,
            len(net.nodes),
            len(net.links),
            int(found),
            result.path.hops if found else 0,
            result.paths[result.path.id].gradient_a if found else 0.0,
            len(result.paths),
            result.visits,
            result.budget,
            base.hops if base else 0,
            link_overlap(result.path, base),
        ])
    return t


def run_experiment(config: ExperimentConfig) -> CsvTable:
    s = config.settings
    builders = {"fig3a": _fig3a, "fig3b": _fig3b, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6, "fig7": _fig7}
    if config.experiment in builders:
        table = builders[config.experiment](s)
    elif config.experiment == "route":
        table = _route(s, config.seed)
    else:
        table = _sweep_runs(s, config.seed)
    table.comments.insert(0, f"experiment={config.experiment}")
    for err in table.errors:
        log.warning("%s: excluded %s", config.experiment, err)
    if not table.rows and config.experiment not in STOCHASTIC:
        raise ConfigError(f"experiment {config.experiment} produced no valid rows")
    if config.out:
        table.save(config.out)
    return table
