"""Behavioral contract for finite-dimensional port-Hamiltonian systems.

A system bundles the energy `hamiltonian`, its gradient map `eta`, the
conservative map J, the dissipative map R, the supply map B, and an optional
constant symmetric positive-definite mass matrix M.  The governing equation is

    M z'(t) = J(eta(z)) - R(eta(z)) + B(t, eta(z)),

with M = Id when no mass matrix is present.  `eta` must satisfy
M eta(z) = grad hamiltonian(z), so models with a mass matrix hand over the
gradient in its "mass-divided" closed form and the solver never inverts M.
"""

import abc
from dataclasses import dataclass
from typing import Callable

import numpy as np

_EPS = float(np.finfo(float).eps)


class DomainEvaluationError(RuntimeError):
    """A model map failed or produced non-finite values at an evaluation point."""


class PHSystem(abc.ABC):
    """Base class for port-Hamiltonian right-hand sides.

    Implementations must be immutable after construction so one instance can
    serve many concurrent solves, and ``b_apply`` must be a pure function of
    (t, v).  Required structural properties (checked by the conformance
    suite, not enforced per call): <J(v), v> = 0 and <R(v), v> >= 0 for all v.
    """

    def __init__(self, dim: int, mass=None):
        if dim < 1:
            raise ValueError(f"system dimension must be positive, got {dim}")
        self._dim = int(dim)
        if mass is not None:
            mass = np.asarray(mass, dtype=float).copy()
            if mass.shape != (dim, dim):
                raise ValueError(f"mass matrix must be {dim}x{dim}, got {mass.shape}")
            if np.max(np.abs(mass - mass.T)) > 1e-13 * max(1.0, np.max(np.abs(mass))):
                raise ValueError("mass matrix must be symmetric")
            try:
                np.linalg.cholesky(mass)
            except np.linalg.LinAlgError as exc:
                raise ValueError("mass matrix must be positive definite") from exc
            mass.setflags(write=False)
        self._mass = mass

    @property
    def dim(self) -> int:
        """State dimension."""
        return self._dim

    @property
    def mass(self):
        """Constant SPD mass matrix, or None for the identity."""
        return self._mass

    @abc.abstractmethod
    def hamiltonian(self, z) -> float:
        """Energy of the state z."""

    @abc.abstractmethod
    def eta(self, z) -> np.ndarray:
        """Gradient map; equals M^{-1} grad hamiltonian(z) in closed form."""

    @abc.abstractmethod
    def j_apply(self, v) -> np.ndarray:
        """Conservative map J evaluated at v."""

    @abc.abstractmethod
    def r_apply(self, v) -> np.ndarray:
        """Dissipative map R evaluated at v."""

    @abc.abstractmethod
    def b_apply(self, t, v) -> np.ndarray:
        """Supply map B evaluated at time t and v."""


@dataclass(frozen=True)
class SolverConfig:
    """Discretization and Newton parameters for one cPG solve.

    ``k``: polynomial degree of the trial space (>= 1).
    ``s_q``: Gauss node count of the right-hand-side quadrature.
    ``s_pi``: Gauss node count used to approximate the local L2 projection.
    ``fd_step`` scales the forward-difference Jacobian columns as
    fd_step * (1 + |x_i|) per component.  ``jacobian_mode`` is "fd" or
    "user"; in user mode ``user_jacobian(system, t_start, t_end, z_left, d)``
    must return the (dim*k, dim*k) residual Jacobian.
    """

    k: int
    s_q: int
    s_pi: int
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    fd_step: float = float(np.sqrt(_EPS))
    jacobian_mode: str = "fd"
    user_jacobian: Callable | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"polynomial degree k must be >= 1, got {self.k}")
        if self.s_q < 1:
            raise ValueError(f"s_q must be >= 1, got {self.s_q}")
        if self.s_pi < 1:
            raise ValueError(f"s_pi must be >= 1, got {self.s_pi}")
        if not self.newton_tol > 0.0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")
        if not self.fd_step > 0.0:
            raise ValueError("fd_step must be positive")
        if self.jacobian_mode not in ("fd", "user"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")
        if self.jacobian_mode == "user" and self.user_jacobian is None:
            raise ValueError("jacobian_mode 'user' requires a user_jacobian callable")


def rhs(system: PHSystem, t: float, v) -> np.ndarray:
    """The bundled right-hand side J(v) - R(v) + B(t, v)."""
    v = np.asarray(v, dtype=float)
    return system.j_apply(v) - system.r_apply(v) + system.b_apply(t, v)


def check_gradient(system: PHSystem, z, h: float = 1e-5) -> float:
    """Compare M eta(z) with the central finite-difference gradient of H.

    Returns the maximal componentwise deviation relative to
    max(1, ||grad||_inf); small values certify that eta is consistent with
    the Hamiltonian.
    """
    z = np.asarray(z, dtype=float)
    grad = np.empty(system.dim)
    for i in range(system.dim):
        step = np.zeros(system.dim)
        step[i] = h
        grad[i] = (system.hamiltonian(z + step) - system.hamiltonian(z - step)) / (2.0 * h)
    if not np.all(np.isfinite(grad)):
        raise DomainEvaluationError("hamiltonian returned non-finite values near z")
    lhs = np.asarray(system.eta(z), dtype=float)
    if system.mass is not None:
        lhs = system.mass @ lhs
    scale = max(1.0, float(np.max(np.abs(grad))))
    return float(np.max(np.abs(lhs - grad))) / scale


def conformance_report(system: PHSystem, n_probes: int = 100, seed: int = 0,
                       probe_scale: float = 1.0, grad_step: float = 1e-5) -> dict:
    """Probe the structural contract with random states and directions.

    Returns worst-case metrics over ``n_probes`` draws:

    - ``j_orthogonality``: max |<J(v), v>| / (1 + |J(v)| |v|)
    - ``r_dissipativity``: min <R(v), v> / (1 + |v|^2)
    - ``gradient_deviation``: max deviation from :func:`check_gradient`
    - ``mass_symmetric`` / ``mass_spd``: mass-matrix checks (True without M)
    """
    rng = np.random.default_rng(seed)
    j_worst = 0.0
    r_worst = np.inf
    grad_worst = 0.0
    for _ in range(n_probes):
        v = probe_scale * rng.standard_normal(system.dim)
        jv = np.asarray(system.j_apply(v), dtype=float)
        rv = np.asarray(system.r_apply(v), dtype=float)
        j_worst = max(
            j_worst,
            abs(float(jv @ v)) / (1.0 + np.linalg.norm(jv) * np.linalg.norm(v)),
        )
        r_worst = min(r_worst, float(rv @ v) / (1.0 + float(v @ v)))
        z = probe_scale * rng.standard_normal(system.dim)
        grad_worst = max(grad_worst, check_gradient(system, z, h=grad_step))
    mass_symmetric = True
    mass_spd = True
    if system.mass is not None:
        mass = system.mass
        mass_symmetric = bool(
            np.max(np.abs(mass - mass.T)) <= 1e-13 * max(1.0, np.max(np.abs(mass)))
        )
        try:
            np.linalg.cholesky(mass)
        except np.linalg.LinAlgError:
            mass_spd = False
    return {
        "j_orthogonality": j_worst,
        "r_dissipativity": r_worst,
        "gradient_deviation": grad_worst,
        "mass_symmetric": mass_symmetric,
        "mass_spd": mass_spd,
    }


def assert_conformant(system: PHSystem, n_probes: int = 100, seed: int = 0,
                      probe_scale: float = 1.0, grad_tol: float = 1e-6) -> dict:
    """Run :func:`conformance_report` and raise if any contract is violated."""
    report = conformance_report(system, n_probes=n_probes, seed=seed,
                                probe_scale=probe_scale)
    if report["j_orthogonality"] > 1e-12:
        raise AssertionError(
            f"J is not conservative: worst <J(v),v> ratio {report['j_orthogonality']:.3e}"
        )
    if report["r_dissipativity"] < -1e-12:
        raise AssertionError(
            f"R is not dissipative: worst <R(v),v> ratio {report['r_dissipativity']:.3e}"
        )
    if report["gradient_deviation"] > grad_tol:
        raise AssertionError(
            f"eta is inconsistent with the Hamiltonian: deviation {report['gradient_deviation']:.3e}"
        )
    if not (report["mass_symmetric"] and report["mass_spd"]):
        raise AssertionError("mass matrix is not symmetric positive definite")
    return report
