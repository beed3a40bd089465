"""Energy accounting for computed trajectories.

The per-step balance error compares Hamiltonian increments at the grid
points against the quadrature of dissipation and supply evaluated on the
projected gradient, exactly as the solver saw it (same projection rule).
"""

from dataclasses import dataclass

import numpy as np

from .phsystem import PHSystem
from .projection import project_eta_of_segment
from .quadrature import gauss_legendre_unit
from .solver import CpgSolution, eval_solution
from .basis import eval_segment

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class EnergyReport:
    """Per-step energy audit of a trajectory.

    ``times`` and ``hamiltonians`` cover all grid points (length m + 1);
    ``dissipation``, ``supply`` and ``balance_error`` cover the m steps.
    ``denominator`` is the normalization used for the relative balance
    error: the largest Hamiltonian increment, floored to avoid 0/0 on
    exactly conservative runs.
    """

    times: np.ndarray
    hamiltonians: np.ndarray
    dissipation: np.ndarray
    supply: np.ndarray
    balance_error: np.ndarray
    denominator: float

    @property
    def max_balance_error(self) -> float:
        return float(np.max(self.balance_error))


def energy_balance_report(system: PHSystem, sol: CpgSolution,
                          config=None) -> EnergyReport:
    """Recompute the discrete energy balance of a finished solve.

    For each step the report carries Q_i[<R(v), v>] and Q_i[<B(., v), v>]
    with v the projected gradient, plus the relative balance error: the
    absolute mismatch between the Hamiltonian increment and supply minus
    dissipation, normalized by the largest increment.  The projection uses
    the same rule as the solve; passing a config with different
    discretization parameters is rejected.
    """
    if config is None:
        config = sol.config
    stored = sol.config
    if (config.k, config.s_q, config.s_pi) != (stored.k, stored.s_q, stored.s_pi):
        raise ValueError(
            "config mismatch: report must use the discretization the solution "
            f"was computed with (k={stored.k}, s_q={stored.s_q}, s_pi={stored.s_pi})"
        )
    rule_q = gauss_legendre_unit(config.s_q)
    rule_pi = gauss_legendre_unit(config.s_pi)
    points = sol.partition.points
    num_steps = sol.partition.num_steps
    hamiltonians = np.array(
        [float(system.hamiltonian(eval_solution(sol, t))) for t in points]
    )
    dissipation = np.zeros(num_steps)
    supply = np.zeros(num_steps)
    for i, segment in enumerate(sol.segments):
        tau = segment.width
        v_seg = project_eta_of_segment(segment, system, rule_pi)
        times_q = segment.t_start + tau * rule_q.nodes
        v_nodes = eval_segment(v_seg, times_q)
        diss = 0.0
        supp = 0.0
        for l in range(rule_q.s):
            v = v_nodes[:, l]
            diss += rule_q.weights[l] * float(np.asarray(system.r_apply(v)) @ v)
            supp += rule_q.weights[l] * float(np.asarray(system.b_apply(times_q[l], v)) @ v)
        dissipation[i] = tau * diss
        supply[i] = tau * supp
    increments = np.diff(hamiltonians)
    scale = 1.0 + float(np.max(np.abs(hamiltonians)))
    denominator = max(float(np.max(np.abs(increments))) if num_steps else 0.0,
                      1e3 * _EPS * scale)
    numerator = np.abs(increments + dissipation - supply)
    return EnergyReport(
        times=points.copy(),
        hamiltonians=hamiltonians,
        dissipation=dissipation,
        supply=supply,
        balance_error=numerator / denominator,
        denominator=denominator,
    )


def hamiltonian_trace(system: PHSystem, sol: CpgSolution, sample_times):
    """Hamiltonian along the trajectory at the given times.

    Returns (times, values) as arrays; times must lie in the solution
    interval.
    """
    times = np.atleast_1d(np.asarray(sample_times, dtype=float))
    states = eval_solution(sol, times)
    values = np.array([float(system.hamiltonian(states[:, i]))
                       for i in range(times.size)])
    return times, values


def power_balance_residual(system: PHSystem, z_fn, t: float,
                           h_fd: float = 1e-5) -> float:
    """Pointwise power-balance defect of a trajectory t -> z(t).

    Central-differences dH/dt and adds <R(eta), eta> - <B(t, eta), eta>;
    near zero along exact solutions.  This is a model-verification
    diagnostic, not part of the scheme.
    """
    h_plus = float(system.hamiltonian(np.asarray(z_fn(t + h_fd), dtype=float)))
    h_minus = float(system.hamiltonian(np.asarray(z_fn(t - h_fd), dtype=float)))
    if not (np.isfinite(h_plus) and np.isfinite(h_minus)):
        raise ValueError("hamiltonian is not finite near t")
    dh = (h_plus - h_minus) / (2.0 * h_fd)
    v = np.asarray(system.eta(np.asarray(z_fn(t), dtype=float)), dtype=float)
    return float(dh + np.asarray(system.r_apply(v)) @ v
                 - np.asarray(system.b_apply(t, v)) @ v)
