"""Small systems and oracles shared across the test modules."""

import math

import numpy as np

from phcpg.basis import orthonormal_legendre_values, _antiderivative_coeffs
from phcpg.phsystem import PHSystem
from phcpg.quadrature import gauss_legendre_unit


class ZeroSystem(PHSystem):
    """J = R = B = 0; trajectories are constant."""

    def __init__(self, dim=3):
        super().__init__(dim=dim)

    def hamiltonian(self, z):
        return 0.5 * float(z @ z)

    def eta(self, z):
        return np.asarray(z, dtype=float).copy()

    def j_apply(self, v):
        return np.zeros(self.dim)

    def r_apply(self, v):
        return np.zeros(self.dim)

    def b_apply(self, t, v):
        return np.zeros(self.dim)


class ScalarDecay(PHSystem):
    """z' = -z as a pure-dissipation system (H = z^2/2, R = id)."""

    def __init__(self):
        super().__init__(dim=1)

    def hamiltonian(self, z):
        return 0.5 * float(z @ z)

    def eta(self, z):
        return np.asarray(z, dtype=float).copy()

    def j_apply(self, v):
        return np.zeros(1)

    def r_apply(self, v):
        return np.asarray(v, dtype=float).copy()

    def b_apply(self, t, v):
        return np.zeros(1)


class LinearOscillator(PHSystem):
    """Constant skew coupling with quadratic energy: z' = J z."""

    def __init__(self, coupling=None, forcing=None):
        super().__init__(dim=2)
        self.coupling = np.array([[0.0, 1.0], [-1.0, 0.0]]) if coupling is None \
            else np.asarray(coupling, dtype=float)
        self.forcing = forcing

    def hamiltonian(self, z):
        return 0.5 * float(z @ z)

    def eta(self, z):
        return np.asarray(z, dtype=float).copy()

    def j_apply(self, v):
        return self.coupling @ v

    def r_apply(self, v):
        return np.zeros(2)

    def b_apply(self, t, v):
        if self.forcing is None:
            return np.zeros(2)
        return np.asarray(self.forcing(t), dtype=float)


class LinearDamped(PHSystem):
    """Constant skew J and constant PSD R with quadratic energy."""

    def __init__(self, skew, sym_psd, forcing=None):
        skew = np.asarray(skew, dtype=float)
        super().__init__(dim=skew.shape[0])
        self.skew = skew
        self.sym = np.asarray(sym_psd, dtype=float)
        self.forcing = forcing

    def hamiltonian(self, z):
        return 0.5 * float(z @ z)

    def eta(self, z):
        return np.asarray(z, dtype=float).copy()

    def j_apply(self, v):
        return self.skew @ v

    def r_apply(self, v):
        return self.sym @ v

    def b_apply(self, t, v):
        if self.forcing is None:
            return np.zeros(self.dim)
        return np.asarray(self.forcing(t), dtype=float)


def implicit_midpoint_linear(matrix, z0, tau, num_steps):
    """Nodal iterates of the implicit midpoint rule for z' = A z."""
    dim = len(z0)
    step = np.linalg.solve(np.eye(dim) - 0.5 * tau * matrix,
                           np.eye(dim) + 0.5 * tau * matrix)
    states = [np.asarray(z0, dtype=float)]
    for _ in range(num_steps):
        states.append(step @ states[-1])
    return states


def cpg_no_projection_linear(matrix, forcing, z0, points, k, s_q):
    """Standard cPG nodal values for z' = A z + f(t), without any projection.

    Assembles the affine local equations by sampling the trial polynomial
    itself (instead of its projected gradient) at the quadrature nodes and
    solves them directly; serves as the projection-cancellation oracle for
    linear systems with quadratic energy.
    """
    matrix = np.asarray(matrix, dtype=float)
    dim = matrix.shape[0]
    rule = gauss_legendre_unit(s_q)
    trial = orthonormal_legendre_values(k, rule.nodes)
    test = orthonormal_legendre_values(k - 1, rule.nodes)
    weighted_test = (rule.weights * test).T

    def local_residual(t_start, tau, z_left, d):
        z_coeffs = _antiderivative_coeffs(d, z_left, tau)
        z_nodes = z_coeffs @ (trial / math.sqrt(tau))
        times = t_start + tau * rule.nodes
        force = matrix @ z_nodes
        for l, t in enumerate(times):
            force[:, l] += forcing(t)
        return d - math.sqrt(tau) * force @ weighted_test

    states = [np.asarray(z0, dtype=float)]
    n = dim * k
    for i in range(len(points) - 1):
        t_start = points[i]
        tau = points[i + 1] - t_start
        z_left = states[-1]
        base = local_residual(t_start, tau, z_left, np.zeros((dim, k))).ravel()
        columns = np.empty((n, n))
        for col in range(n):
            probe = np.zeros(n)
            probe[col] = 1.0
            columns[:, col] = local_residual(
                t_start, tau, z_left, probe.reshape(dim, k)).ravel() - base
        d = np.linalg.solve(columns, -base).reshape(dim, k)
        coeffs = _antiderivative_coeffs(d, z_left, tau)
        end_weights = np.sqrt(2.0 * np.arange(k + 1) + 1.0)
        states.append(coeffs @ end_weights / math.sqrt(tau))
    return states


def final_eoc(taus, errors, floor=1e-11):
    """EOC of the last adjacent pair of rows whose errors exceed the floor."""
    rows = [(t, e) for t, e in zip(taus, errors) if e > floor]
    if len(rows) < 2:
        raise AssertionError(f"not enough rows above the {floor} floor: {rows}")
    (t0, e0), (t1, e1) = rows[-2], rows[-1]
    return math.log(e0 / e1) / math.log(t0 / t1)
