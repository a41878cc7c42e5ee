"""``key = value`` configuration files and typed settings."""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError
from .gradient import SelectionParams
from .network import GenerationSpec
from .router import RoutingParams

_RANGE = re.compile(r"^(lin|log)\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)$")


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def _number(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    # allow simple multiples of pi such as "-pi" or "2*pi"
    m = re.fullmatch(r"(-?[\d.]*)\s*\*?\s*pi", text)
    if m:
        coeff = {"": 1.0, "-": -1.0}.get(m.group(1))
        return (float(m.group(1)) if coeff is None else coeff) * math.pi
    raise ConfigError(f"not a number: {text!r}")


def parse_values(text: str) -> list[float]:
    """A comma list, ``lin(start, stop, n)`` or ``log(exp_start, exp_stop, n)``."""
    text = text.strip()
    m = _RANGE.match(text)
    if m:
        kind, a, b, n = m.groups()
        count = int(_number(n))
        if count < 1:
            raise ConfigError(f"range {text!r} is empty")
        start, stop = _number(a), _number(b)
        i = np.arange(count)
        span = max(count - 1, 1)
        # integer-weighted interpolation: integer grids stay integral and 0 lands
        # exactly on symmetric ranges; endpoints are pinned
        points = (start * (span - i) + stop * i) / span
        points[0] = start
        if count > 1:
            points[-1] = stop
        return [float(x) for x in (points if kind == "lin" else 10.0**points)]
    values = [_number(part) for part in text.split(",") if part.strip()]
    if not values:
        raise ConfigError(f"empty value list {text!r}")
    return values


class Settings:
    """Defaults overlaid by a config file overlaid by command-line flags."""

    def __init__(self, *layers: Mapping[str, Any]):
        self.raw: dict[str, Any] = {}
        for layer in layers:
            self.raw.update({k.replace("-", "_"): v for k, v in layer.items() if v is not None})

    def __contains__(self, key):
        return key in self.raw

    def text(self, key: str, default: str | None = None) -> str | None:
        value = self.raw.get(key, default)
        return None if value is None else str(value)

    def number(self, key: str, default: float | None = None) -> float | None:
        value = self.raw.get(key, default)
        if value is None or isinstance(value, (int, float)):
            return value
        return _number(value)

    def integer(self, key: str, default: int | None = None) -> int | None:
        value = self.number(key, default)
        if value is None:
            return None
        if value != int(value):
            raise ConfigError(f"{key} must be an integer, got {value}")
        return int(value)

    def flag(self, key: str, default: bool) -> bool:
        value = self.raw.get(key, default)
        if isinstance(value, bool):
            return value
        text = str(value).lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {value!r}")

    def values(self, key: str, default: str) -> list[float]:
        value = self.raw.get(key, default)
        if isinstance(value, (list, tuple)):
            return [float(v) for v in value]
        if isinstance(value, (int, float)):
            return [float(value)]
        return parse_values(value)


def routing_params(s: Settings) -> RoutingParams:
    try:
        return RoutingParams(
            threads=s.integer("threads", 32),
            thread_limit=s.integer("thread_limit", 8),
            c1=s.number("c1"),
            c2=s.number("c2"),
            theta_threshold=s.number("theta_threshold", 0.0),
            signal_threshold=s.number("signal_threshold", 0.0),
            selection=SelectionParams(s.number("partial", 1.0), s.number("chi", 1.0), s.number("xi", 0.0)),
            tau=s.number("tau"),
            psi_form=s.text("psi_form", "eq36"),
            psi_min=s.number("psi_min", 1e-9),
            initial_gradient=s.number("initial_gradient", 0.0),
            stop_at_target=s.flag("stop_at_target", True),
            mean_estimator=s.text("mean_estimator", "running"),
            expected_throughput=s.number("expected_throughput"),
            score_iterations=s.integer("score_iterations", 200),
            throughput_noise=s.number("throughput_noise", 0.0),
            workers=s.integer("workers", 1),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def generation_spec(s: Settings) -> GenerationSpec:
    def pair(key, default):
        values = s.values(key, default)
        if len(values) != 2:
            raise ConfigError(f"{key} needs exactly two values, got {values}")
        return (values[0], values[1])

    levels_text = s.text("levels", "1")
    levels = {int(l): 1.0 for l in parse_values(levels_text)}
    return GenerationSpec(
        nodes=s.integer("nodes", 8),
        links=s.integer("links", 12),
        throughput=pair("throughput_range", "1, 10"),
        fidelity=pair("fidelity_range", "0.9, 1"),
        kappa=pair("kappa_range", "1, 4"),
        tau=pair("tau_range", "0.5, 2"),
        levels=levels,
        utility=s.number("utility", 1.0),
    )
