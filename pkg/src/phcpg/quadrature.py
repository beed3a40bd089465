"""Gauss-Legendre quadrature rules on the unit interval.

Rules are generated once, cached, and immutable afterwards, so a single
instance can be shared between concurrent solves.
"""

import functools
from dataclasses import dataclass

import numpy as np

MAX_NODES = 64


@dataclass(frozen=True)
class QuadratureRule:
    """An s-point rule on [0, 1] with positive weights that sum to one.

    ``nodes`` are strictly increasing points in the open unit interval and
    ``weights`` the matching positive weights.  A rule with s nodes produced
    by :func:`gauss_legendre_unit` integrates polynomials of degree up to
    2s - 1 exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=float)).copy()
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float)).copy()
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size == 0:
            raise ValueError("a quadrature rule needs at least one node")
        if np.any(nodes <= 0.0) or np.any(nodes >= 1.0):
            raise ValueError("nodes must lie in the open interval (0, 1)")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be strictly positive")
        if abs(float(weights.sum()) - 1.0) > 1e-14:
            raise ValueError("weights must sum to one")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def s(self) -> int:
        """Number of nodes."""
        return self.nodes.size


def _legendre_and_derivative(n, x):
    """Values of the Legendre polynomial P_n and its derivative on [-1, 1]."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(2, n + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@functools.lru_cache(maxsize=None)
def gauss_legendre_unit(s: int) -> QuadratureRule:
    """Return the unique s-point Gauss-Legendre rule on [0, 1].

    Nodes are found by Newton iteration on P_s starting from Chebyshev
    points, weights through the derivative formula; both are symmetrized
    to remove rounding asymmetries.  Supported range is 1 <= s <= 64.
    """
    if s < 1:
        raise ValueError(f"node count must be at least 1, got {s}")
    if s > MAX_NODES:
        raise ValueError(f"node count must be at most {MAX_NODES}, got {s}")
    if s == 1:
        return QuadratureRule(np.array([0.5]), np.array([1.0]))

    # Chebyshev initial guesses, ascending in (-1, 1).
    i = np.arange(s)
    x = -np.cos((2 * i + 1) * np.pi / (2 * s))
    for _ in range(100):
        p, dp = _legendre_and_derivative(s, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    x = 0.5 * (x - x[::-1])
    _, dp = _legendre_and_derivative(s, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w)


def map_nodes(rule: QuadratureRule, t_start: float, t_end: float) -> np.ndarray:
    """Affinely map the rule's unit nodes onto the interval [t_start, t_end]."""
    if not t_end > t_start:
        raise ValueError(f"degenerate interval [{t_start}, {t_end}]")
    return t_start + (t_end - t_start) * rule.nodes


def apply(rule: QuadratureRule, t_start: float, t_end: float, samples) -> float:
    """Quadrature of an integrand sampled at the mapped nodes.

    ``samples[j]`` must be the integrand value at ``map_nodes(...)[j]``;
    the result is ``(t_end - t_start) * sum_j weights[j] * samples[j]``.
    """
    if not t_end > t_start:
        raise ValueError(f"degenerate interval [{t_start}, {t_end}]")
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (rule.s,):
        raise ValueError(
            f"expected {rule.s} samples for a {rule.s}-node rule, got shape {samples.shape}"
        )
    return float((t_end - t_start) * np.dot(rule.weights, samples))
