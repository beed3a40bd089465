"""Quadrature-approximated local L2 projection onto lower-degree polynomials.

The projection is always computed per subinterval; in the orthonormal basis
its coefficients are plain weighted sums of samples, so no mass-matrix solve
in time is ever needed.  When the sampled function is a polynomial of degree
d with d + target_degree <= 2 s - 1 for an s-node Gauss rule, the result is
the exact L2 projection.
"""

import numpy as np

from .basis import SegmentPoly, eval_segment, orthonormal_legendre_values
from .phsystem import DomainEvaluationError, PHSystem
from .quadrature import QuadratureRule, map_nodes


def project_sampled(t_start: float, t_end: float, target_degree: int,
                    rule: QuadratureRule, samples) -> SegmentPoly:
    """Project sampled data onto polynomials of degree ``target_degree``.

    ``samples`` has shape (dim, s) with column l holding the function value
    at the l-th mapped node of ``rule`` on [t_start, t_end].  Coefficient j
    of the result is the quadrature approximation of the inner product of
    the function with the j-th orthonormal basis polynomial.
    """
    if target_degree < 0:
        raise ValueError(f"target degree must be nonnegative, got {target_degree}")
    if not t_end > t_start:
        raise ValueError(f"degenerate interval [{t_start}, {t_end}]")
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != rule.s:
        raise ValueError(
            f"samples must have one column per node: expected {rule.s}, got {samples.shape[1]}"
        )
    basis = orthonormal_legendre_values(target_degree, rule.nodes)
    coeffs = np.sqrt(t_end - t_start) * samples @ (rule.weights[:, None] * basis.T)
    return SegmentPoly(t_start, t_end, coeffs)


def project_eta_of_segment(z_seg: SegmentPoly, system: PHSystem,
                           rule_pi: QuadratureRule) -> SegmentPoly:
    """Approximate projection of eta(z_seg) onto degree z_seg.degree - 1.

    Samples eta at the mapped nodes of ``rule_pi`` and projects the samples;
    this is the quantity entering both the solver residual and the energy
    diagnostics.
    """
    if z_seg.degree < 1:
        raise ValueError("z_seg must have degree at least 1")
    times = map_nodes(rule_pi, z_seg.t_start, z_seg.t_end)
    states = eval_segment(z_seg, times)
    samples = np.empty_like(states)
    for l in range(rule_pi.s):
        samples[:, l] = _eval_eta(system, states[:, l], times[l])
    return project_sampled(z_seg.t_start, z_seg.t_end, z_seg.degree - 1,
                           rule_pi, samples)


def _eval_eta(system, state, t):
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            value = np.asarray(system.eta(state), dtype=float)
    except DomainEvaluationError:
        raise
    except Exception as exc:
        raise DomainEvaluationError(
            f"eta evaluation failed at quadrature node t={t}: {exc}"
        ) from exc
    if not np.all(np.isfinite(value)):
        raise DomainEvaluationError(
            f"eta returned non-finite values at quadrature node t={t}"
        )
    return value
