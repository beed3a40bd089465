"""Orthonormal shifted Legendre basis algebra on time subintervals.

A vector-valued polynomial on [a, b] with width tau = b - a is stored by its
coefficients in the basis

    L_j(t) = tau**-0.5 * Lhat_j((t - a) / tau),    j = 0, ..., degree,

where Lhat_j(x) = sqrt(2j + 1) * P_j(2x - 1) are the L2-orthonormal Legendre
polynomials on the unit interval.  In this basis, inner products over [a, b]
are plain coefficient dot products, which keeps the solver's exact terms
exact and conditions well up to degree 12.
"""

from dataclasses import dataclass

import numpy as np

_EPS = float(np.finfo(float).eps)


def orthonormal_legendre_values(degree: int, points) -> np.ndarray:
    """Evaluate the orthonormal Legendre polynomials Lhat_0..Lhat_degree on [0, 1].

    Returns the (degree + 1, n) matrix with entry (j, l) = Lhat_j(points[l]).
    Points outside the unit interval are rejected.
    """
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if pts.ndim != 1:
        raise ValueError("points must be one-dimensional")
    if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
        raise ValueError("points must lie within [0, 1]")
    u = 2.0 * pts - 1.0
    values = np.empty((degree + 1, pts.size))
    values[0] = 1.0
    if degree >= 1:
        values[1] = u
    for j in range(1, degree):
        values[j + 1] = ((2 * j + 1) * u * values[j] - j * values[j - 1]) / (j + 1)
    values *= np.sqrt(2.0 * np.arange(degree + 1) + 1.0)[:, None]
    return values


@dataclass(frozen=True)
class SegmentPoly:
    """A vector polynomial on one subinterval in the orthonormal basis.

    ``coeffs`` has shape (dim, degree + 1); column j multiplies the
    interval-scaled basis function L_j.
    """

    t_start: float
    t_end: float
    coeffs: np.ndarray

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"degenerate interval [{self.t_start}, {self.t_end}]")
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float)).copy()
        if coeffs.ndim != 2 or coeffs.shape[1] < 1:
            raise ValueError("coeffs must have shape (dim, degree + 1)")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def width(self) -> float:
        return self.t_end - self.t_start


def eval_segment(p: SegmentPoly, t) -> np.ndarray:
    """Evaluate a segment at time(s) t inside its interval.

    Membership is checked with a slack of four machine epsilons times the
    interval width to absorb grid rounding.  Returns shape (dim,) for scalar
    t and (dim, n) for an array of times.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    tol = 4.0 * _EPS * p.width
    if times.size and (times.min() < p.t_start - tol or times.max() > p.t_end + tol):
        raise ValueError(
            f"time outside segment interval [{p.t_start}, {p.t_end}]"
        )
    x = np.clip((times - p.t_start) / p.width, 0.0, 1.0)
    values = p.coeffs @ (orthonormal_legendre_values(p.degree, x) / np.sqrt(p.width))
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return values[:, 0]
    return values


def derivative_segment(p: SegmentPoly) -> SegmentPoly:
    """Exact derivative of a segment, one degree lower (zero for constants)."""
    k = p.degree
    if k == 0:
        return SegmentPoly(p.t_start, p.t_end, np.zeros((p.dim, 1)))
    sq = np.sqrt(2.0 * np.arange(k + 1) + 1.0)
    dcoef = np.empty((p.dim, k))
    for i in range(k):
        js = np.arange(i + 1, k + 1, 2)
        dcoef[:, i] = 2.0 * sq[i] * (p.coeffs[:, js] * sq[js]).sum(axis=1) / p.width
    return SegmentPoly(p.t_start, p.t_end, dcoef)


def _antiderivative_coeffs(dcoef: np.ndarray, z_left: np.ndarray, width: float) -> np.ndarray:
    """Coefficients of the antiderivative of ``dcoef`` matching ``z_left`` at t_start.

    Uses the Legendre antiderivative recurrence
    int P_j = (P_{j+1} - P_{j-1}) / (2j + 1) mapped to the subinterval.
    ``dcoef`` has shape (dim, k); the result has shape (dim, k + 1).
    """
    dim, k = dcoef.shape
    bracket = np.zeros((dim, k + 1))
    bracket[:, 0] = dcoef[:, 0]
    bracket[:, 1] = dcoef[:, 0]
    if k > 1:
        scaled = dcoef[:, 1:] / np.sqrt(2.0 * np.arange(1, k) + 1.0)
        bracket[:, 2:] += scaled
        bracket[:, : k - 1] -= scaled
    coeffs = 0.5 * width * bracket / np.sqrt(2.0 * np.arange(k + 1) + 1.0)
    coeffs[:, 0] += np.sqrt(width) * z_left
    return coeffs


def antiderivative_from_left(d: SegmentPoly, z_left) -> SegmentPoly:
    """The unique segment q with q' = d and q(t_start) = z_left."""
    z_left = np.asarray(z_left, dtype=float)
    if z_left.shape != (d.dim,):
        raise ValueError(f"z_left must have shape ({d.dim},), got {z_left.shape}")
    return SegmentPoly(
        d.t_start, d.t_end, _antiderivative_coeffs(d.coeffs, z_left, d.width)
    )
