"""End-to-end fidelity, correlation measurement and key-leakage bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .network import hop_distance


@dataclass(frozen=True)
class ErrorModel:
    """Per-node error: logical error ``q`` plus residual error ``residual``."""

    q: float = 0.0
    residual: float = 0.0

    def __post_init__(self):
        if not (0 <= self.q <= 1 and 0 <= self.residual <= 1):
            raise DomainError(f"error probabilities must lie in [0, 1], got {self.q}, {self.residual}")
        if self.q + self.residual > 1:
            raise DomainError(f"total error {self.q + self.residual} exceeds 1")

    @property
    def p_err(self) -> float:
        return self.q + self.residual


def _check(p_err: float, level: int) -> int:
    if not 0 <= p_err <= 1:
        raise DomainError(f"error probability must lie in [0, 1], got {p_err}")
    return hop_distance(level)


def entanglement_fidelity(p_err: float, level: int) -> float:
    d = _check(p_err, level)
    return (1 - p_err) ** (2 * d)


def correlation_measurement(p_err: float, level: int) -> float:
    """Closed form ``(1 - p_err) ** (d + 1)``.

    Kept as published even though it is not exactly ``sqrt(F)``.
    """
    d = _check(p_err, level)
    return (1 - p_err) ** (d + 1)


def success_probabilities(p_err: float, level: int) -> tuple[float, float, float]:
    """(recovery success over intermediate nodes, correction success, their product)."""
    d = _check(p_err, level)
    recovery = (1 - p_err) ** (2 * (d - 1))
    correction = (1 - p_err) ** 2
    return recovery, correction, recovery * correction


def leakage_bound(fidelity: float) -> tuple[float, float, float]:
    """Security parameter ``s``, ``c`` and the bound ``2**-c + 2**(-2s)``.

    The unknown constant in the second exponent is taken as 1. Bounds above 1
    are vacuous and returned unchanged.
    """
    if not 0 < fidelity < 1:
        raise DomainError(f"fidelity must lie in (0, 1), got {fidelity}")
    s = -math.log2(1 - fidelity)
    c = s - math.log2(2 + s + 1 / math.log(2))
    return s, c, 2.0 ** -c + 2.0 ** (-2 * s)
