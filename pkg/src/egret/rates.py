"""Frequency response of gradient reception and the cutoff observation rate."""

from __future__ import annotations

import math

from .errors import DivergenceError, DomainError


def gain(kappa: float, tau: float) -> float:
    """``kappa / (kappa + tau)``; strictly below 1 whenever ``tau > 0``."""
    if kappa < 0 or tau < 0:
        raise DomainError(f"kappa and tau must be >= 0, got {kappa}, {tau}")
    if kappa + tau == 0:
        raise DomainError("gain undefined for kappa = tau = 0")
    return kappa / (kappa + tau)


def _check_gain(gamma: float) -> None:
    if not 0 <= gamma < 1:
        raise DomainError(f"gain must lie in [0, 1), got {gamma}")


def response(gamma: float, nu: float) -> float:
    _check_gain(gamma)
    # 1 + g^2 - 2g cos(nu) rewritten to avoid cancellation near g -> 1, nu -> 0
    half = math.sin(nu / 2.0)
    return 1.0 / math.sqrt((1.0 - gamma) ** 2 + 4.0 * gamma * half * half)


def node_response(kappa: float, tau: float, nu: float) -> float:
    """Response at a node, with ``nu`` restricted to ``[-2pi/kappa, 2pi/kappa]``."""
    if kappa <= 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    bound = 2 * math.pi / kappa
    if abs(nu) > bound:
        raise DomainError(f"nu={nu} outside [-{bound}, {bound}]")
    return response(gain(kappa, tau), nu)


def peak(gamma: float) -> float:
    if gamma >= 1:
        raise DivergenceError(f"response peak diverges for gain {gamma} >= 1")
    _check_gain(gamma)
    return 1.0 / (1.0 - gamma)


def peak_mean_gradient(mu: float, gamma: float) -> float:
    if mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    return mu * peak(gamma)


def cutoff_argument(kappa: float, tau: float, pi: float) -> float:
    base = kappa * kappa + kappa * tau
    return (base - (tau * tau + pi * pi * tau * tau) / (2 * pi * pi)) / base


def cutoff_rate(kappa: float, tau: float, pi: float) -> float:
    """Observation rate above which received gradients stop adapting.

    Raises instead of clamping when the arccos argument leaves [-1, 1].
    """
    if kappa <= 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    if not 0 < pi <= 1:
        raise DomainError(f"peak fraction must lie in (0, 1], got {pi}")
    # gap = 1 - argument, formed directly so arguments near 1 keep full precision
    gap = tau * tau * (1 + pi * pi) / (2 * pi * pi * kappa * (kappa + tau))
    if not 0 <= gap <= 2:
        arg = cutoff_argument(kappa, tau, pi)
        raise DomainError(f"arccos argument {arg!r} outside [-1, 1] for kappa={kappa}, tau={tau}, pi={pi}")
    return kappa / math.pi * math.asin(math.sqrt(gap / 2))
