"""Path entanglement gradients at the two endpoints of a route."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Literal, Protocol, Sequence

from .errors import DivergenceError, DomainError
from .gradient import SelectionParams, link_selection_probability

Endpoint = Literal["A", "B"]


@dataclass(frozen=True)
class ArrivalRates:
    kappa_a: float
    kappa_b: float

    def __post_init__(self):
        if self.kappa_a < 0 or self.kappa_b < 0:
            raise DomainError(f"arrival rates must be >= 0, got {self.kappa_a}, {self.kappa_b}")

    @property
    def kappa_ab(self) -> float:
        return self.kappa_a + self.kappa_b

    def other(self, endpoint: Endpoint) -> float:
        """Rate of the opposite endpoint (kappa_B for A, kappa_A for B)."""
        return self.kappa_b if endpoint == "A" else self.kappa_a


@dataclass(frozen=True)
class PathGradientState:
    path_id: int
    gradient_a: float = 0.0
    gradient_b: float = 0.0
    mean_a: float = 0.0
    mean_b: float = 0.0
    throughput: float = 0.0
    expected_throughput: float = 0.0

    def __post_init__(self):
        for name in ("gradient_a", "gradient_b", "mean_a", "mean_b", "throughput", "expected_throughput"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def deviation(self) -> float:
        """Gap between the expected and current path throughput."""
        return abs(self.expected_throughput - self.throughput)


def _endpoint_fields(endpoint: Endpoint) -> tuple[str, str, str]:
    if endpoint == "A":
        return "gradient_a", "mean_a", "gradient_b"
    if endpoint == "B":
        return "gradient_b", "mean_b", "gradient_a"
    raise DomainError(f"endpoint must be 'A' or 'B', got {endpoint!r}")


def usage_probabilities(states: Sequence[PathGradientState], endpoint: Endpoint, params: SelectionParams) -> list[float]:
    """Probability that the given endpoint uses each path."""
    own, _, _ = _endpoint_fields(endpoint)
    probs = link_selection_probability([(i, getattr(s, own)) for i, s in enumerate(states)], params)
    return [probs[i] for i in range(len(states))]


def update_endpoint_gradient(
    states: Sequence[PathGradientState],
    rates: ArrivalRates,
    tau: float,
    endpoint: Endpoint,
    params: SelectionParams = SelectionParams(),
    usage: Sequence[float] | None = None,
) -> list[PathGradientState]:
    """One update of every path's gradient at ``endpoint``.

    Each path keeps ``kappa_AB / (kappa_AB + tau)`` of its gradient and gains
    ``kappa_other / kappa_AB * Pr_other(path) * mu(path)``, where
    ``Pr_other`` is the opposite endpoint's usage probability.  ``usage``
    overrides that probability (e.g. unit probability for the mean).
    """
    if not states:
        raise DomainError("no paths")
    if rates.kappa_ab <= 0:
        raise DomainError("total observation rate must be > 0")
    if tau < 0:
        raise DomainError(f"decay rate must be >= 0, got {tau}")
    own, mean, _ = _endpoint_fields(endpoint)
    if usage is None:
        usage = usage_probabilities(states, "B" if endpoint == "A" else "A", params)
    elif len(usage) != len(states):
        raise DomainError("one usage probability per path required")
    keep = rates.kappa_ab / (rates.kappa_ab + tau)
    gain = rates.other(endpoint) / rates.kappa_ab
    return [
        replace(s, **{own: keep * getattr(s, own) + gain * pr * getattr(s, mean)})
        for s, pr in zip(states, usage)
    ]


def mean_path_gradient(rates: ArrivalRates, tau: float, mu: float, endpoint: Endpoint = "A") -> float:
    """Fixed point of the endpoint recursion when the path is used with probability one."""
    _endpoint_fields(endpoint)
    if tau == 0:
        raise DivergenceError("mean path gradient diverges at tau = 0")
    if tau < 0 or mu < 0:
        raise DomainError(f"tau and mu must be >= 0, got {tau}, {mu}")
    if rates.kappa_ab <= 0:
        raise DomainError("total observation rate must be > 0")
    k = rates.kappa_ab
    return (k + tau) * rates.other(endpoint) / (k * tau) * mu


def select_optimal_path(gradients: Sequence[float]) -> int:
    """Index of the largest gradient; the lowest index wins ties."""
    if len(gradients) == 0:
        raise DomainError("no paths to select from")
    best = 0
    for i, g in enumerate(gradients):
        if g > gradients[best]:
            best = i
    return best


def decay_rate_from_threshold(threshold: float, expected: float, deviation: float) -> float:
    """Decay rate ``-ln(threshold / (expected * deviation))``.

    Grows logarithmically with the throughput deviation.
    """
    if threshold <= 0 or expected <= 0 or deviation <= 0:
        raise DomainError(f"arguments must be > 0, got {threshold}, {expected}, {deviation}")
    return -math.log(threshold / (expected * deviation))


def optimal_decay_estimator(y: float | Decimal, deviation: float) -> float:
    """Decay rate ``-ln(y) / deviation`` recovered from an observed decay ``y``.

    ``y`` may be a :class:`~decimal.Decimal` when ``exp(-tau * deviation)``
    would underflow a float.
    """
    if not 0 < y <= 1:
        raise DomainError(f"observed correlation must lie in (0, 1], got {y}")
    if deviation <= 0:
        raise DomainError(f"deviation must be > 0, got {deviation}")
    log = float(y.ln()) if isinstance(y, Decimal) else math.log(y)
    return -log / deviation


def threshold_at_optimal_decay(kappa_ab: float, tau: float, mu: float, deviation: float) -> float:
    if tau == 0:
        raise DivergenceError("threshold diverges at tau = 0")
    if kappa_ab <= 0 or tau < 0 or mu < 0 or deviation < 0:
        raise DomainError(f"invalid arguments {kappa_ab}, {tau}, {mu}, {deviation}")
    return (kappa_ab + tau) / (2 * tau) * mu * math.exp(-tau * deviation)


def bottleneck_throughput(throughputs: Sequence[float]) -> float:
    """Default path throughput: the weakest link along the path."""
    if not throughputs:
        raise DomainError("empty path has no throughput")
    return min(throughputs)


# --- online estimation of mu ------------------------------------------------


class MeanEstimator(Protocol):
    def update(self, value: float) -> None: ...

    @property
    def value(self) -> float: ...


@dataclass
class RunningMean:
    """Arithmetic mean of every delivered gradient value."""

    count: int = 0
    total: float = 0.0

    def update(self, value: float) -> None:
        self.count += 1
        self.total += value

    @property
    def value(self) -> float:
        return self.total / self.count if self.count else 0.0


@dataclass
class ExponentialMean:
    """Exponentially weighted mean; ``weight`` is the share of the newest sample."""

    weight: float = 0.5
    _value: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 < self.weight <= 1:
            raise DomainError(f"weight must lie in (0, 1], got {self.weight}")

    def update(self, value: float) -> None:
        self._value = value if self._value is None else (1 - self.weight) * self._value + self.weight * value

    @property
    def value(self) -> float:
        return 0.0 if self._value is None else self._value


def make_estimator(kind: str) -> MeanEstimator:
    if kind == "running":
        return RunningMean()
    if kind == "exponential":
        return ExponentialMean()
    raise DomainError(f"unknown mean estimator {kind!r}")


def score_paths(
    states: Sequence[PathGradientState],
    rates: ArrivalRates,
    tau_a: float,
    tau_b: float,
    params: SelectionParams,
    iterations: int,
) -> list[PathGradientState]:
    """Iterate the coupled A/B endpoint updates ``iterations`` times.

    Both endpoints update simultaneously from the previous iterate.
    """
    if iterations < 0:
        raise DomainError(f"iterations must be >= 0, got {iterations}")
    current = list(states)
    for _ in range(iterations):
        at_a = update_endpoint_gradient(current, rates, tau_a, "A", params)
        at_b = update_endpoint_gradient(current, rates, tau_b, "B", params)
        current = [replace(a, gradient_b=b.gradient_b) for a, b in zip(at_a, at_b)]
    return current
