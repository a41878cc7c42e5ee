"""``egret`` command line: gen | route | experiment | compare.

Exit codes: 0 success, 1 domain or configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .baseline import compare_routes
from .config import Settings, generation_spec, load_config, routing_params
from .errors import ConfigError, EgretError
from .experiments import EXPERIMENTS, ExperimentConfig, network_from, run_experiment
from .network import format_network, generate_network
from .router import run_routing

log = logging.getLogger("egret")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value settings file (flags override it)")
    p.add_argument("--seed", type=int, help="single source of randomness (default 0)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--threads", type=int, help="number of search threads t")
    p.add_argument("--thread-limit", dest="thread_limit", type=int, help="per-thread node budget")
    p.add_argument("--tau", type=float, help="gradient decay rate (default: each node's own)")
    p.add_argument("--chi", type=float, help="selection tuning exponent")
    p.add_argument("--partial", type=float, help="selection threshold offset")
    p.add_argument("--xi", type=float, help="source-gradient weight")
    p.add_argument("--theta-threshold", dest="theta_threshold", type=float, help="log-ratio gate of the path signal")
    p.add_argument("--signal-threshold", dest="signal_threshold", type=float, help="explore/exploit switch threshold")
    p.add_argument("--pi", type=float, help="peak fraction for cutoff rates")
    p.add_argument("--psi-form", dest="psi_form", choices=("eq36", "eq44"), help="distance variant")
    p.add_argument("--workers", type=int, help="physical worker threads (results do not depend on it)")
    p.add_argument("--network", help="network file; generated when omitted")
    p.add_argument("--nodes", type=int, help="generated node count")
    p.add_argument("--links", type=int, help="generated link count")
    p.add_argument("--source", help="source node id")
    p.add_argument("--target", help="target node id")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="egret", description="Entanglement-gradient routing simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="generate a random connected network")
    sub.add_parser("route", parents=[common], help="run the multi-thread router once")
    exp = sub.add_parser("experiment", parents=[common], help="emit a figure sweep or batch run as CSV")
    exp.add_argument("experiment", nargs="?", choices=EXPERIMENTS, help="experiment id (or 'experiment' in --config)")
    cmp = sub.add_parser("compare", parents=[common], help="gradient route against the Dijkstra baseline")
    cmp.add_argument("--weight", choices=("hop", "inverse-throughput"), help="baseline edge weight")
    return parser


_NOT_SETTINGS = {"command", "config", "verbose"}


def _settings(args: argparse.Namespace) -> Settings:
    file_layer = load_config(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in _NOT_SETTINGS}
    return Settings(file_layer, flags)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(s: Settings) -> None:
    net = generate_network(generation_spec(s), s.integer("seed", 0))
    _emit(format_network(net), s.text("out"))


def _cmd_route(s: Settings) -> None:
    seed = s.integer("seed", 0)
    net = network_from(s, seed)
    ids = net.node_ids()
    source, target = s.text("source", ids[0]), s.text("target", ids[-1])
    result = run_routing(net, source, target, routing_params(s), seed)
    report = {
        "source": source,
        "target": target,
        "path": list(result.path.nodes) if result.path else None,
        "visits": result.visits,
        "budget": result.budget,
        "rounds": result.rounds,
        "paths": [
            {"id": p.id, "nodes": list(p.nodes), "completions": p.completions, "gradient_a": p.gradient_a}
            for p in result.paths
        ],
    }
    _emit(json.dumps(report, indent=2) + "\n", s.text("out"))


def _cmd_experiment(s: Settings) -> None:
    experiment = s.text("experiment")
    if experiment is None:
        raise ConfigError("no experiment id given")
    cfg = ExperimentConfig(experiment, s, s.integer("seed", 0), s.text("out"))
    table = run_experiment(cfg)
    if not cfg.out:
        table.write(sys.stdout)
    if table.errors:
        log.warning("%d rows excluded by domain errors", len(table.errors))


def _cmd_compare(s: Settings) -> None:
    seed = s.integer("seed", 0)
    net = network_from(s, seed)
    ids = net.node_ids()
    report = compare_routes(
        net,
        s.text("source", ids[0]),
        s.text("target", ids[-1]),
        routing_params(s),
        seed,
        s.text("weight", "hop"),
    )
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", s.text("out"))


COMMANDS = {"gen": _cmd_gen, "route": _cmd_route, "experiment": _cmd_experiment, "compare": _cmd_compare}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; a bad flag is a configuration error here
        return 1 if exc.code == 2 else int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](_settings(args))
    except EgretError as exc:
        print(f"egret: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"egret: I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
