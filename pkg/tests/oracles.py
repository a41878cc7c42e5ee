"""Independent reference computations used by the tests.

Nothing here imports egret's numerical code; each oracle re-derives its value
from the defining formula with a different tool (mpmath, networkx, numpy
vector algebra or plain enumeration).
"""

from __future__ import annotations

import mpmath
import networkx as nx
import numpy as np

mpmath.mp.dps = 50


def decay_rate(threshold, expected, deviation):
    # ln(E*phi/threshold), written as a sum of logs
    return float(mpmath.log(expected) + mpmath.log(deviation) - mpmath.log(threshold))


def mean_gradient(kappa_ab, kappa_other, tau, mu):
    k, o, t, m = (mpmath.mpf(x) for x in (kappa_ab, kappa_other, tau, mu))
    return float(m * o / t + m * o / k)


def cutoff(kappa, tau, pi):
    k, t, p = (mpmath.mpf(x) for x in (kappa, tau, pi))
    arg = 1 - (t**2 * (1 + p**2)) / (2 * p**2 * k * (k + t))
    return float(k / (2 * mpmath.pi) * mpmath.acos(arg))


def power(base, exponent):
    return float(mpmath.power(mpmath.mpf(base), exponent))


def leakage(fidelity):
    f = mpmath.mpf(fidelity)
    s = -mpmath.log(1 - f, 2)
    c = s - mpmath.log(2 + s + 1 / mpmath.log(2), 2)
    return float(s), float(c), float(mpmath.power(2, -c) + mpmath.power(2, -2 * s))


def response_complex(gamma, nu):
    return abs(1 / (1 - gamma * np.exp(-1j * nu)))


def impulse_autocorrelation(decay, lag, length=64):
    """Normalised autocorrelation of the filter's impulse response exp(-decay*k)."""
    h = np.exp(-decay * np.arange(length))
    return float(np.dot(h[: length - lag], h[lag:]) / np.dot(h, h))


def multigraph(net):
    g = nx.MultiGraph()
    g.add_nodes_from(net.nodes)
    for key, link in net.links.items():
        g.add_edge(link.u, link.v, key=key)
    return g


def simple_paths(net, source, target):
    """Every simple path as a tuple of link keys."""
    return [tuple(e[2] for e in p) for p in nx.all_simple_edge_paths(multigraph(net), source, target)]


def endpoint_scores(mu_a, mu_b, kappa_a, kappa_b, tau_a, tau_b, partial, chi, start, iterations):
    """Vectorised simultaneous iteration of the coupled endpoint recursions."""
    mu_a, mu_b = np.asarray(mu_a, float), np.asarray(mu_b, float)
    k = kappa_a + kappa_b
    ga = np.full(mu_a.shape, float(start))
    gb = ga.copy()
    for _ in range(iterations):
        wa = (ga + partial) ** chi
        wb = (gb + partial) ** chi
        pa, pb = wa / wa.sum(), wb / wb.sum()
        ga, gb = k / (k + tau_a) * ga + kappa_b / k * pb * mu_a, k / (k + tau_b) * gb + kappa_a / k * pa * mu_b
    return ga, gb


def min_cost_path(net, source, target, cost):
    """Cheapest simple path by enumeration; ties go to the smaller node sequence."""
    best = None
    g = multigraph(net)
    for p in nx.all_simple_edge_paths(g, source, target):
        keys = [e[2] for e in p]
        total = sum(cost(net.links[k]) for k in keys)
        nodes = (source,) + tuple(e[1] for e in p)
        cand = (total, nodes, tuple(keys))
        if best is None or cand[:2] < best[:2]:
            best = cand
    return best


def oracle_winner(net, source, target, result, params):
    """Exhaustive check of a routing result.

    Returns ``(eligible, match)``: eligible when every simple path was
    completed by some thread; match when the router's winner is the argmax of
    the independently iterated endpoint scores over all simple paths.
    """
    every = simple_paths(net, source, target)
    measured = {p.links: p for p in result.paths}
    if not every or any(p not in measured for p in every):
        return False, False
    # first-completion order decides ties, as path ids do
    every.sort(key=lambda p: measured[p].id)
    a, b = net.nodes[source], net.nodes[target]
    ga, _ = endpoint_scores(
        [measured[p].mean_a for p in every],
        [measured[p].mean_b for p in every],
        a.kappa,
        b.kappa,
        a.tau,
        b.tau,
        params.selection.partial,
        params.selection.chi,
        params.initial_gradient,
        params.score_iterations,
    )
    best = every[int(np.argmax(ga))]
    return True, result.path is not None and result.path.links == best
