"""Continuous Petrov-Galerkin time stepper.

Per subinterval the unknowns are the k derivative coefficients of the trial
polynomial per state component; the state itself is reconstructed by exact
antidifferentiation from the left endpoint value, so continuity and the
initial condition hold structurally.  The time-derivative term of the local
equations is evaluated exactly through basis orthonormality, while the
nonlinear terms are integrated with an s_q-node Gauss rule applied to the
projected gradient samples.
"""

from dataclasses import dataclass, field

import numpy as np

from .basis import (SegmentPoly, _antiderivative_coeffs,
                    orthonormal_legendre_values)
from .phsystem import DomainEvaluationError, PHSystem, SolverConfig
from .quadrature import gauss_legendre_unit


class SolverError(Exception):
    """Base class for solver failures."""


class SingularJacobian(SolverError):
    """The Newton linear solve failed (singular or non-finite Jacobian)."""


class NonConvergence(SolverError):
    """Newton exhausted its iteration budget.

    Carries the best iterate seen so far; when raised from
    :func:`integrate`, ``step_index`` and the partial trajectory computed up
    to the failing step are attached.
    """

    def __init__(self, message, best_coefficients, residual_norm, iterations,
                 step_index=None, partial=None):
        super().__init__(message)
        self.best_coefficients = best_coefficients
        self.residual_norm = residual_norm
        self.iterations = iterations
        self.step_index = step_index
        self.partial = partial


@dataclass(frozen=True)
class TimePartition:
    """Strictly increasing grid points generating the time subintervals."""

    points: np.ndarray

    def __post_init__(self):
        points = np.atleast_1d(np.asarray(self.points, dtype=float)).copy()
        if points.ndim != 1 or points.size < 2:
            raise ValueError("a partition needs at least two grid points")
        if np.any(np.diff(points) <= 0.0):
            raise ValueError("grid points must be strictly increasing")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def uniform(cls, t_end: float, num_steps: int, t_start: float = 0.0):
        if num_steps < 1:
            raise ValueError("num_steps must be at least 1")
        if not t_end > t_start:
            raise ValueError("t_end must exceed t_start")
        return cls(np.linspace(t_start, t_end, num_steps + 1))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def tau_max(self) -> float:
        return float(np.max(self.widths))

    @property
    def num_steps(self) -> int:
        return self.points.size - 1

    @property
    def t_start(self) -> float:
        return float(self.points[0])

    @property
    def t_end(self) -> float:
        return float(self.points[-1])


@dataclass
class CpgSolution:
    """Continuous piecewise-polynomial trajectory with per-step solver stats."""

    partition: TimePartition
    segments: list = field(default_factory=list)
    newton_iters: np.ndarray = None
    residual_norms: np.ndarray = None
    config: SolverConfig = None

    @property
    def degree(self) -> int:
        return self.segments[0].degree

    @property
    def dim(self) -> int:
        return self.segments[0].dim


class _StepOperator:
    """Precomputed quadrature/basis tables shared by all steps of one solve."""

    def __init__(self, system: PHSystem, config: SolverConfig):
        self.system = system
        self.config = config
        k = config.k
        self.rule_q = gauss_legendre_unit(config.s_q)
        self.rule_pi = gauss_legendre_unit(config.s_pi)
        # Trial basis at projection nodes, test basis at both node sets.
        self.trial_at_pi = orthonormal_legendre_values(k, self.rule_pi.nodes)
        test_at_pi = orthonormal_legendre_values(k - 1, self.rule_pi.nodes)
        self.test_at_q = orthonormal_legendre_values(k - 1, self.rule_q.nodes)
        self.proj_weights = (self.rule_pi.weights * test_at_pi).T   # (s_pi, k)
        self.quad_weights = (self.rule_q.weights * self.test_at_q).T  # (s_q, k)

    def residual(self, t_start: float, tau: float, z_left: np.ndarray,
                 d: np.ndarray) -> np.ndarray:
        """Local residual as a (dim, k) array for derivative coefficients d."""
        system = self.system
        sqrt_tau = np.sqrt(tau)
        z_coeffs = _antiderivative_coeffs(d, z_left, tau)
        z_nodes = z_coeffs @ (self.trial_at_pi / sqrt_tau)
        times_pi = t_start + tau * self.rule_pi.nodes
        eta_nodes = np.empty_like(z_nodes)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            l = 0
            try:
                for l in range(self.rule_pi.s):
                    eta_nodes[:, l] = system.eta(z_nodes[:, l])
            except DomainEvaluationError:
                raise
            except Exception as exc:
                raise DomainEvaluationError(
                    f"eta evaluation failed at quadrature node t={times_pi[l]}: {exc}"
                ) from exc
        if not np.isfinite(eta_nodes).all():
            bad = np.flatnonzero(~np.isfinite(eta_nodes).all(axis=0))[0]
            raise DomainEvaluationError(
                f"eta returned non-finite values at quadrature node t={times_pi[bad]}"
            )
        v_coeffs = sqrt_tau * eta_nodes @ self.proj_weights
        v_nodes = v_coeffs @ (self.test_at_q / sqrt_tau)
        times_q = t_start + tau * self.rule_q.nodes
        forces = np.empty_like(v_nodes)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            l = 0
            try:
                for l in range(self.rule_q.s):
                    v = v_nodes[:, l]
                    forces[:, l] = (system.j_apply(v) - system.r_apply(v)
                                    + system.b_apply(times_q[l], v))
            except DomainEvaluationError:
                raise
            except Exception as exc:
                raise DomainEvaluationError(
                    f"right-hand side evaluation failed at quadrature node "
                    f"t={times_q[l]}: {exc}"
                ) from exc
        if not np.isfinite(forces).all():
            bad = np.flatnonzero(~np.isfinite(forces).all(axis=0))[0]
            raise DomainEvaluationError(
                f"right-hand side returned non-finite values at quadrature node "
                f"t={times_q[bad]}"
            )
        quad = sqrt_tau * forces @ self.quad_weights
        lhs = d if system.mass is None else system.mass @ d
        return lhs - quad

    def fd_jacobian(self, t_start, tau, z_left, d, res0):
        n = d.size
        dim, k = d.shape
        jac = np.empty((n, n))
        flat = d.ravel()
        base = res0.ravel()
        for col in range(n):
            h = self.config.fd_step * (1.0 + abs(flat[col]))
            pert = flat.copy()
            pert[col] += h
            res = self.residual(t_start, tau, z_left, pert.reshape(dim, k))
            jac[:, col] = (res.ravel() - base) / h
        return jac


def assemble_local_residual(system: PHSystem, t_start: float, t_end: float,
                            z_left, d, config: SolverConfig) -> np.ndarray:
    """Residual of the local cPG equations, flattened to length dim * k.

    ``d`` holds the derivative coefficients of the trial polynomial in the
    degree-(k-1) orthonormal basis, shaped (dim, k); ``z_left`` is the
    continuity value at t_start.  A root of this residual solves the local
    time step.
    """
    z_left = np.asarray(z_left, dtype=float)
    d = np.asarray(d, dtype=float)
    if d.shape != (system.dim, config.k):
        raise ValueError(f"d must have shape ({system.dim}, {config.k}), got {d.shape}")
    if not t_end > t_start:
        raise ValueError(f"degenerate interval [{t_start}, {t_end}]")
    op = _StepOperator(system, config)
    return op.residual(t_start, t_end - t_start, z_left, d).ravel()


def _newton(op: _StepOperator, t_start, tau, z_left, config, d0):
    d = d0.copy()
    res = op.residual(t_start, tau, z_left, d)
    norm = float(np.max(np.abs(res)))
    best_d, best_norm = d.copy(), norm
    iters = 0
    while norm > config.newton_tol:
        if iters >= config.newton_max_iter:
            raise NonConvergence(
                f"Newton did not reach tolerance {config.newton_tol:.1e} in "
                f"{config.newton_max_iter} iterations (best residual {best_norm:.3e})",
                best_coefficients=best_d, residual_norm=best_norm, iterations=iters,
            )
        if config.jacobian_mode == "user":
            jac = np.asarray(
                config.user_jacobian(op.system, t_start, t_start + tau, z_left, d),
                dtype=float,
            )
        else:
            jac = op.fd_jacobian(t_start, tau, z_left, d, res)
        try:
            delta = np.linalg.solve(jac, -res.ravel())
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(f"Newton linear solve failed: {exc}") from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("Newton update is non-finite")
        d = d + delta.reshape(d.shape)
        res = op.residual(t_start, tau, z_left, d)
        norm = float(np.max(np.abs(res)))
        iters += 1
        if norm < best_norm:
            best_d, best_norm = d.copy(), norm
    return d, iters, norm


def newton_step_solve(system: PHSystem, t_start: float, t_end: float, z_left,
                      config: SolverConfig, initial=None):
    """Solve one local step; returns (d, iterations, final residual norm)."""
    z_left = np.asarray(z_left, dtype=float)
    op = _StepOperator(system, config)
    if initial is None:
        initial = np.zeros((system.dim, config.k))
    else:
        initial = np.asarray(initial, dtype=float)
        if initial.shape != (system.dim, config.k):
            raise ValueError("initial guess has wrong shape")
    return _newton(op, t_start, t_end - t_start, z_left, config, initial)


def _segment_end_value(segment: SegmentPoly) -> np.ndarray:
    # Lhat_j(1) = sqrt(2j + 1), so the end value is a plain weighted row sum.
    weights = np.sqrt(2.0 * np.arange(segment.degree + 1) + 1.0)
    return segment.coeffs @ weights / np.sqrt(segment.width)


def integrate(system: PHSystem, z0, partition: TimePartition,
              config: SolverConfig) -> CpgSolution:
    """March the cPG scheme across the partition starting from z0.

    The Newton start value is the zero derivative (a constant trajectory) on
    the first step and the previous step's coefficients afterwards.  On
    non-convergence the error carries the failing step index and the partial
    trajectory.
    """
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (system.dim,):
        raise ValueError(f"z0 must have shape ({system.dim},), got {z0.shape}")
    if not np.all(np.isfinite(z0)):
        raise ValueError("z0 must be finite")
    op = _StepOperator(system, config)
    points = partition.points
    segments = []
    iter_counts = np.zeros(partition.num_steps, dtype=int)
    res_norms = np.zeros(partition.num_steps)
    z_left = z0.copy()
    d = np.zeros((system.dim, config.k))
    for i in range(partition.num_steps):
        t_start, t_end = points[i], points[i + 1]
        tau = t_end - t_start
        try:
            d, iters, norm = _newton(op, t_start, tau, z_left, config, d)
        except NonConvergence as exc:
            partial = CpgSolution(partition, segments,
                                  iter_counts[:i].copy(), res_norms[:i].copy(), config)
            raise NonConvergence(
                f"step {i} (t in [{t_start}, {t_end}]) failed: {exc}",
                best_coefficients=exc.best_coefficients,
                residual_norm=exc.residual_norm, iterations=exc.iterations,
                step_index=i, partial=partial,
            ) from exc
        segment = SegmentPoly(t_start, t_end,
                              _antiderivative_coeffs(d, z_left, tau))
        segments.append(segment)
        iter_counts[i] = iters
        res_norms[i] = norm
        z_left = _segment_end_value(segment)
    solution = CpgSolution(partition, segments, iter_counts, res_norms, config)
    _check_solution_invariants(solution, z0)
    return solution


def _segment_start_value(segment: SegmentPoly) -> np.ndarray:
    # Lhat_j(0) = (-1)^j sqrt(2j + 1).
    j = np.arange(segment.degree + 1)
    weights = ((-1.0) ** j) * np.sqrt(2.0 * j + 1.0)
    return segment.coeffs @ weights / np.sqrt(segment.width)


def _check_solution_invariants(sol: CpgSolution, z0: np.ndarray):
    """Continuity across grid points and the exact initial condition."""
    first = eval_solution(sol, sol.partition.t_start)
    scale = 1.0 + float(np.max(np.abs(z0)))
    if np.max(np.abs(first - z0)) > 1e-12 * scale:
        raise SolverError("trajectory does not match the initial datum")
    for left, right in zip(sol.segments[:-1], sol.segments[1:]):
        end_val = _segment_end_value(left)
        start_val = _segment_start_value(right)
        gap = np.max(np.abs(end_val - start_val))
        if gap > 1e-12 * (1.0 + np.max(np.abs(end_val))):
            raise SolverError(
                f"continuity violated at t={right.t_start} (gap {gap:.3e})"
            )


def eval_solution(sol: CpgSolution, t):
    """Dense evaluation of the trajectory at time(s) t.

    Interior grid points resolve to the left segment (right-closed
    convention); t_start resolves to the first segment.  Returns shape
    (dim,) for scalar input and (dim, n) for arrays.
    """
    points = sol.partition.points
    times = np.atleast_1d(np.asarray(t, dtype=float))
    span = sol.partition.t_end - sol.partition.t_start
    tol = 4.0 * np.finfo(float).eps * span
    if times.size and (times.min() < points[0] - tol or times.max() > points[-1] + tol):
        raise ValueError(
            f"time outside the solution interval [{points[0]}, {points[-1]}]"
        )
    clipped = np.clip(times, points[0], points[-1])
    index = np.clip(np.searchsorted(points, clipped, side="left") - 1,
                    0, len(sol.segments) - 1)
    values = np.empty((sol.dim, times.size))
    for seg_idx in np.unique(index):
        mask = index == seg_idx
        seg = sol.segments[seg_idx]
        x = np.clip((clipped[mask] - seg.t_start) / seg.width, 0.0, 1.0)
        basis = orthonormal_legendre_values(seg.degree, x) / np.sqrt(seg.width)
        values[:, mask] = seg.coeffs @ basis
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return values[:, 0]
    return values
