"""Link utilities, link entanglement gradients and selection distributions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Mapping, Sequence, TypeVar

from .errors import DegenerateDistributionError, DomainError, SingularityError
from .network import LinkKey, NodeId

K = TypeVar("K", bound=Hashable)


def update_utility(lam: float, throughput: float) -> float:
    """One traversal of a link: ``lam -> lam / (1 + throughput * lam)``.

    The throughput acts as a cost added to ``1/lam``, so the result lies in
    ``[0, lam]`` and zero is a fixed point.
    """
    if lam < 0 or throughput < 0:
        raise DomainError(f"utility and throughput must be >= 0, got {lam}, {throughput}")
    return lam / (1.0 + throughput * lam)


def decayed(gradient: float, tau: float, deviation: float) -> float:
    return gradient * math.exp(-tau * deviation)


def reinforced(gradient: float, tau: float, deviation: float, lam_prime: float) -> float:
    """Gradient of the link just traversed: decayed value plus the fresh utility."""
    return decayed(gradient, tau, deviation) + lam_prime


class Direction(enum.Enum):
    TOWARD_SOURCE = "source"
    TOWARD_DESTINATION = "destination"


@dataclass
class GradientTable:
    """Gradients held at ``owner``, one per (anchor, incident link, direction).

    Links rather than neighbor ids key the entries so that two links of
    different level to the same neighbor stay distinct.  Missing entries read
    as ``initial``.
    """

    owner: NodeId
    links: tuple[LinkKey, ...]
    initial: float = 0.0
    entries: dict[tuple[NodeId, LinkKey, Direction], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.initial < 0:
            raise DomainError(f"initial gradient must be >= 0, got {self.initial}")

    def value(self, anchor: NodeId, link: LinkKey, direction: Direction) -> float:
        if link not in self.links:
            raise DomainError(f"link {link} is not incident to {self.owner}")
        return self.entries.get((anchor, link, direction), self.initial)

    def values(self, anchor: NodeId, direction: Direction) -> dict[LinkKey, float]:
        return {l: self.entries.get((anchor, l, direction), self.initial) for l in self.links}


def update_gradients(
    table: GradientTable,
    arrived_from: LinkKey,
    tau: float,
    deviations: Mapping[LinkKey, float],
    lam_prime: float,
    *,
    anchor: NodeId,
    direction: Direction = Direction.TOWARD_SOURCE,
) -> GradientTable:
    """Reinforce the link a thread arrived on and decay every other link.

    ``deviations`` maps each incident link to its throughput deviation at the
    owner; ``lam_prime`` is the traversed link's already-updated utility.
    Returns a new table; the input is left untouched.
    """
    if arrived_from not in table.links:
        raise DomainError(f"{arrived_from} is not a link of node {table.owner}")
    if tau < 0 or lam_prime < 0:
        raise DomainError(f"tau and utility must be >= 0, got {tau}, {lam_prime}")
    entries = dict(table.entries)
    for link, g in table.values(anchor, direction).items():
        dev = deviations[link]
        if link == arrived_from:
            entries[(anchor, link, direction)] = reinforced(g, tau, dev, lam_prime)
        else:
            entries[(anchor, link, direction)] = decayed(g, tau, dev)
    return replace(table, entries=entries)


# --- stochastic utility model -----------------------------------------------


@dataclass(frozen=True)
class UtilityKernel:
    """Discrete exponential filter whose impulse response is ``exp(-decay*k)``."""

    decay: float
    estimate: float = 0.0
    last_round: int = 0

    def __post_init__(self):
        if self.decay < 0 or self.estimate < 0:
            raise DomainError(f"decay and estimate must be >= 0, got {self.decay}, {self.estimate}")


def kernel_estimate(kernel: UtilityKernel, sample: float, elapsed_rounds: int) -> UtilityKernel:
    if sample < 0:
        raise DomainError(f"utility sample must be >= 0, got {sample}")
    if elapsed_rounds < 0:
        raise DomainError(f"elapsed rounds must be >= 0, got {elapsed_rounds}")
    estimate = kernel.estimate * math.exp(-kernel.decay * elapsed_rounds) + sample
    return replace(kernel, estimate=estimate, last_round=kernel.last_round + elapsed_rounds)


def correlation(tau: float, lag: float) -> float:
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    return math.exp(-tau * abs(lag))


# --- selection distributions ------------------------------------------------


@dataclass(frozen=True)
class SelectionParams:
    """``partial`` offsets every gradient, ``chi`` sharpens, ``xi`` weights the source side."""

    partial: float = 1.0
    chi: float = 1.0
    xi: float = 0.0

    def __post_init__(self):
        for name in ("partial", "chi", "xi"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")


def power_normalize(weights: Iterable[tuple[K, float]], exponent: float) -> dict[K, float]:
    """Normalize ``base ** exponent`` over the candidates, in log space.

    Zero bases get zero mass for positive exponents; ``0 ** 0`` counts as 1.
    """
    items = list(weights)
    if not items:
        raise DomainError("no candidates")
    if all(base == 0 for _, base in items):
        raise DegenerateDistributionError("every candidate has zero weight")
    logs = []
    for key, base in items:
        if base < 0 or math.isnan(base):
            raise DomainError(f"negative selection weight {base} for {key!r}")
        if exponent == 0:
            logs.append(0.0)
        elif base == 0:
            logs.append(-math.inf)
        else:
            logs.append(exponent * math.log(base))
    top = max(logs)
    if top == -math.inf:
        raise DegenerateDistributionError("every candidate has zero weight")
    raw = [math.exp(l - top) for l in logs]
    total = math.fsum(raw)
    return {key: r / total for (key, _), r in zip(items, raw)}


def link_selection_probability(gradients: Sequence[tuple[K, float]], params: SelectionParams) -> dict[K, float]:
    """Probability of each candidate link toward the destination.

    ``gradients`` holds the prospective (already reinforced/decayed)
    gradients; the same values enter numerator and denominator.
    """
    for key, g in gradients:
        if g < 0:
            raise DomainError(f"gradient for {key!r} is negative: {g}")
    return power_normalize(((k, g + params.partial) for k, g in gradients), params.chi)


def source_selection_probability(gradients: Sequence[tuple[K, float]], params: SelectionParams) -> dict[K, float]:
    """Same law as :func:`link_selection_probability`, over toward-source gradients."""
    return link_selection_probability(gradients, params)


def normalized_selection_distribution(
    forward: Mapping[K, float],
    backward: Mapping[Hashable, float],
    xi: float,
    pairing: Mapping[K, Hashable] | None = None,
) -> dict[K, float]:
    """Combine the destination-side and source-side link probabilities.

    Candidate ``z`` gets ``forward[z] * backward[pairing[z]] ** -xi``,
    normalized over all candidates.  Without ``pairing`` each forward
    candidate is paired with the backward entry of the same key.
    """
    if xi < 0:
        raise DomainError(f"xi must be >= 0, got {xi}")
    if not forward:
        raise DomainError("no forward candidates")
    pairs = []
    for z, pf in forward.items():
        x = pairing[z] if pairing is not None else z
        try:
            pb = backward[x]
        except KeyError:
            raise DomainError(f"forward candidate {z!r} has no backward partner {x!r}") from None
        if not (0 <= pf <= 1 and 0 <= pb <= 1):
            raise DomainError(f"component probabilities must lie in [0, 1]: {pf}, {pb}")
        if pb == 0 and xi > 0:
            raise SingularityError(f"backward probability of {x!r} is zero with xi={xi}")
        pairs.append((z, pf * pb ** -xi if xi else pf))
    total = math.fsum(w for _, w in pairs)
    if total == 0:
        raise DegenerateDistributionError("forward distribution has no mass")
    return {z: w / total for z, w in pairs}
