"""Forced reference solutions, error norms, and empirical convergence orders.

Given a system and a prescribed trajectory z(t) with analytic derivative,
replacing the supply map by

    Bbar(t) = M z'(t) - J(eta(z(t))) + R(eta(z(t)))

turns z into an exact solution of the system, so time-discretization errors
can be measured directly.  J and R are untouched, hence the wrapped system
keeps the full structural contract with its own supply.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .phsystem import PHSystem, SolverConfig
from .solver import CpgSolution, TimePartition, eval_solution, integrate


@dataclass(frozen=True)
class ManufacturedCase:
    """A base system together with an exact trajectory and its derivative."""

    system: PHSystem
    z_exact: object
    dz_exact: object


class _ForcedSystem(PHSystem):
    """The base system with its supply replaced by the forcing of the case."""

    def __init__(self, case: ManufacturedCase):
        base = case.system
        super().__init__(dim=base.dim,
                         mass=None if base.mass is None else np.asarray(base.mass))
        self.base = base
        self.case = case
        self.initial_state = np.asarray(case.z_exact(0.0), dtype=float)
        self._memo = {}

    def hamiltonian(self, z):
        return self.base.hamiltonian(z)

    def eta(self, z):
        return self.base.eta(z)

    def j_apply(self, v):
        return self.base.j_apply(v)

    def r_apply(self, v):
        return self.base.r_apply(v)

    def b_apply(self, t, v):
        # Independent of v; memoized since the stepper revisits the same
        # quadrature times many times while differencing the residual.
        forcing = self._memo.get(t)
        if forcing is None:
            z = np.asarray(self.case.z_exact(t), dtype=float)
            dz = np.asarray(self.case.dz_exact(t), dtype=float)
            eta = self.base.eta(z)
            lhs = dz if self.mass is None else self.mass @ dz
            forcing = lhs - self.base.j_apply(eta) + self.base.r_apply(eta)
            if len(self._memo) > 4096:
                self._memo.clear()
            self._memo[t] = forcing
        return forcing


def wrap_manufactured(case: ManufacturedCase) -> _ForcedSystem:
    """System with supply replaced so that ``case.z_exact`` solves it exactly.

    The returned system carries the matching initial datum as
    ``initial_state``.
    """
    return _ForcedSystem(case)


def check_case_derivative(case: ManufacturedCase, times) -> float:
    """Worst deviation of dz_exact from central differences of z_exact."""
    worst = 0.0
    h = 1e-6
    for t in np.atleast_1d(times):
        fd = (np.asarray(case.z_exact(t + h)) - np.asarray(case.z_exact(t - h))) / (2 * h)
        dz = np.asarray(case.dz_exact(t))
        worst = max(worst, float(np.max(np.abs(fd - dz))) / max(1.0, float(np.max(np.abs(dz)))))
    return worst


def _vector_norm(errors: np.ndarray, mass) -> np.ndarray:
    # errors has shape (dim, n); returns per-column Euclidean or M-weighted norms.
    if mass is None:
        return np.sqrt(np.sum(errors * errors, axis=0))
    return np.sqrt(np.sum(errors * (mass @ errors), axis=0))


def sampling_grid(t_start: float, t_end: float, tau_ref: float) -> np.ndarray:
    """Uniform grid with step tau_ref that always includes the right endpoint."""
    if not tau_ref > 0.0:
        raise ValueError("tau_ref must be positive")
    count = int(math.floor((t_end - t_start) / tau_ref + 1e-9))
    times = t_start + tau_ref * np.arange(count + 1)
    if times[-1] > t_end:
        times[-1] = t_end
    elif t_end - times[-1] > 1e-12 * (t_end - t_start):
        times = np.append(times, t_end)
    return times


def linf_error(sol: CpgSolution, z_exact, tau_ref: float = 1.25e-4,
               mass=None) -> float:
    """Max-in-time error against z_exact on a uniform sampling grid.

    The vector norm is Euclidean, or M-weighted when ``mass`` is given
    (the natural norm for systems carrying a mass matrix).
    """
    times = sampling_grid(sol.partition.t_start, sol.partition.t_end, tau_ref)
    approx = eval_solution(sol, times)
    exact = np.column_stack([np.asarray(z_exact(t), dtype=float) for t in times])
    return float(np.max(_vector_norm(exact - approx, mass)))


def nodal_error(sol: CpgSolution, z_exact, mass=None) -> float:
    """Max error over the time grid points only."""
    times = sol.partition.points
    approx = eval_solution(sol, times)
    exact = np.column_stack([np.asarray(z_exact(t), dtype=float) for t in times])
    return float(np.max(_vector_norm(exact - approx, mass)))


def eoc(taus, errors):
    """Pairwise empirical orders log(e_{i-1}/e_i) / log(tau_{i-1}/tau_i).

    The first entry is always None; pairs involving a nonpositive error
    (below the floating-point floor) yield None instead of a rate.
    """
    taus = [float(t) for t in taus]
    errors = [float(e) for e in errors]
    if len(taus) != len(errors) or len(taus) < 2:
        raise ValueError("need matching tau/error lists of length at least 2")
    if any(t <= 0.0 for t in taus) or any(t1 >= t0 for t0, t1 in zip(taus, taus[1:])):
        raise ValueError("taus must be positive and strictly decreasing")
    rates = [None]
    for (t0, t1, e0, e1) in zip(taus, taus[1:], errors, errors[1:]):
        if e0 <= 0.0 or e1 <= 0.0:
            rates.append(None)
        else:
            rates.append(math.log(e0 / e1) / math.log(t0 / t1))
    return rates


@dataclass(frozen=True)
class ConvergenceRecord:
    """One row of a step-size refinement study."""

    tau: float
    err_inf: float
    err_nodal: float
    eoc_inf: float | None = None
    eoc_nodal: float | None = None


def convergence_study(case: ManufacturedCase, k: int, s_q: int, s_pi: int,
                      taus, t_end: float, tau_ref: float = 1.25e-4,
                      newton_tol: float = 1e-12, newton_max_iter: int = 50,
                      t_start: float = 0.0, workers: int = 1):
    """Run the forced system over a decreasing tau sweep and tabulate errors.

    Each requested tau is rounded to divide the interval exactly.  The error
    norm is M-weighted whenever the base system carries a mass matrix.
    Returns a list of :class:`ConvergenceRecord` ordered by decreasing tau.
    """
    taus = [float(t) for t in taus]
    if any(t1 >= t0 for t0, t1 in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly decreasing")
    system = wrap_manufactured(case)
    mass = system.mass

    def run_one(tau):
        steps = max(1, round((t_end - t_start) / tau))
        partition = TimePartition.uniform(t_end, steps, t_start=t_start)
        config = SolverConfig(k=k, s_q=s_q, s_pi=s_pi, newton_tol=newton_tol,
                              newton_max_iter=newton_max_iter)
        sol = integrate(system, system.initial_state, partition, config)
        return (linf_error(sol, case.z_exact, tau_ref=tau_ref, mass=mass),
                nodal_error(sol, case.z_exact, mass=mass))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, taus))
    else:
        results = [run_one(tau) for tau in taus]
    inf_errors = [r[0] for r in results]
    nodal_errors = [r[1] for r in results]
    rates_inf = eoc(taus, inf_errors)
    rates_nodal = eoc(taus, nodal_errors)
    return [
        ConvergenceRecord(tau=taus[i], err_inf=inf_errors[i],
                          err_nodal=nodal_errors[i], eoc_inf=rates_inf[i],
                          eoc_nodal=rates_nodal[i])
        for i in range(len(taus))
    ]
