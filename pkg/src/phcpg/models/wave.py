"""Quasilinear 1d wave system, semi-discretized with mixed finite elements.

The density is approximated by piecewise constants on the N + 1 cells of
[0, ell] (N interior grid points, cell width h = ell / (N + 1)) and the
velocity by continuous piecewise linears on the N + 2 nodes, giving state
dimension 2N + 3.  With w = (w1, w2) the governing system is

    C_h w' = J v - R(v) + B(t),        v = eta(w) = (w1 + w1^3, w2),

where C_h = blockdiag(h Id, h M) with the unit-scaled P1 mass matrix M, the
coupling acts through the forward-difference stencil D as
J v = (-D v2, D^T v1), and the velocity block dissipates through
gamma R_F(v2) + nu R_nu with the P1 stiffness matrix R_nu and the P1 mass
matrix R_F weighted by psi(v) = (1 + v^2) / sqrt(1 + v^2), assembled per
cell with Gauss quadrature.  Pressure boundary data g0, gl enter the first
and last velocity equations with opposite signs.  The energy is

    H(w) = w^T C_h w / 2 + (w1^2, 0)^T C_h (w1^2, 0) / 4

with componentwise squares, so grad H = C_h eta(w).
"""

from dataclasses import dataclass

import numpy as np

from ..phsystem import PHSystem
from ..quadrature import gauss_legendre_unit


@dataclass(frozen=True)
class WaveParams:
    """Spatial resolution and physics of the semi-discrete wave system.

    ``n_interior`` counts interior grid points; ``gamma`` scales friction,
    ``nu`` viscosity.  ``rf_quad_nodes`` is the per-cell Gauss node count
    used to assemble the weighted friction mass matrix.
    """

    n_interior: int
    ell: float = 10.0
    gamma: float = 0.0
    nu: float = 0.0
    rf_quad_nodes: int = 10

    def __post_init__(self):
        if self.n_interior < 1:
            raise ValueError(f"need at least one interior point, got {self.n_interior}")
        if not self.ell > 0.0:
            raise ValueError("domain length must be positive")
        if self.gamma < 0.0 or self.nu < 0.0:
            raise ValueError("friction and viscosity coefficients must be nonnegative")
        if self.rf_quad_nodes < 1:
            raise ValueError("rf_quad_nodes must be at least 1")

    @property
    def h(self) -> float:
        return self.ell / (self.n_interior + 1)

    @property
    def n_cells(self) -> int:
        return self.n_interior + 1

    @property
    def n_nodes(self) -> int:
        return self.n_interior + 2

    @property
    def dim(self) -> int:
        return 2 * self.n_interior + 3

    @property
    def cell_midpoints(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h

    @property
    def grid_nodes(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h


def p1_mass_diagonals(n_nodes: int):
    """Unit-scaled P1 mass matrix diagonals (multiply by h for spacing h)."""
    diag = np.full(n_nodes, 2.0 / 3.0)
    diag[0] = diag[-1] = 1.0 / 3.0
    off = np.full(n_nodes - 1, 1.0 / 6.0)
    return diag, off


def p1_stiffness_diagonals(n_nodes: int, h: float):
    """P1 stiffness matrix diagonals for uniform spacing h."""
    diag = np.full(n_nodes, 2.0 / h)
    diag[0] = diag[-1] = 1.0 / h
    off = np.full(n_nodes - 1, -1.0 / h)
    return diag, off


def tridiagonal_dense(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    """Dense symmetric tridiagonal matrix from its diagonals."""
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _tridiag_matvec(diag, off, x):
    out = diag * x
    out[:-1] += off * x[1:]
    out[1:] += off * x[:-1]
    return out


class DampedWaveSystem(PHSystem):
    def __init__(self, params: WaveParams, g0, gl):
        h = params.h
        mass_diag, mass_off = p1_mass_diagonals(params.n_nodes)
        mass = np.zeros((params.dim, params.dim))
        mass[: params.n_cells, : params.n_cells] = h * np.eye(params.n_cells)
        mass[params.n_cells:, params.n_cells:] = h * tridiagonal_dense(mass_diag, mass_off)
        super().__init__(dim=params.dim, mass=mass)
        self.params = params
        self.g0 = g0
        self.gl = gl
        self._h = h
        self._split = params.n_cells
        self._mass_diag = h * mass_diag
        self._mass_off = h * mass_off
        self._stiff_diag, self._stiff_off = p1_stiffness_diagonals(params.n_nodes, h)
        rule = gauss_legendre_unit(params.rf_quad_nodes)
        self._fric_nodes = rule.nodes
        self._fric_weights = rule.weights
        # Per-cell quadrature of psi * phi_a * phi_b needs the hat-function
        # products at the cell-local nodes.
        left = 1.0 - rule.nodes
        right = rule.nodes
        self._fric_ll = rule.weights * left * left
        self._fric_lr = rule.weights * left * right
        self._fric_rr = rule.weights * right * right

    def _split_state(self, w):
        return w[: self._split], w[self._split:]

    def hamiltonian(self, w):
        w1, w2 = self._split_state(w)
        quartic = 0.5 * float(w1 @ w1) + 0.25 * float(np.sum(w1 ** 4))
        kinetic = 0.5 * float(w2 @ _tridiag_matvec(self._mass_diag, self._mass_off, w2))
        return self._h * quartic + kinetic

    def eta(self, w):
        w1, w2 = self._split_state(w)
        return np.concatenate([w1 + w1 ** 3, w2])

    def j_apply(self, v):
        v1, v2 = self._split_state(v)
        lower = np.zeros(self.params.n_nodes)
        lower[:-1] -= v1
        lower[1:] += v1
        return np.concatenate([-np.diff(v2), lower])

    def _friction_diagonals(self, v2):
        # Linear interpolant of v2 at the cell-local quadrature nodes.
        values = (v2[:-1, None] * (1.0 - self._fric_nodes)
                  + v2[1:, None] * self._fric_nodes)
        psi = np.sqrt(1.0 + values * values)
        cell_ll = self._h * psi @ self._fric_ll
        cell_lr = self._h * psi @ self._fric_lr
        cell_rr = self._h * psi @ self._fric_rr
        diag = np.zeros(self.params.n_nodes)
        diag[:-1] += cell_ll
        diag[1:] += cell_rr
        return diag, cell_lr

    def friction_matrix(self, v2) -> np.ndarray:
        """Dense weighted P1 mass matrix R_F(v2), mainly for diagnostics."""
        diag, off = self._friction_diagonals(np.asarray(v2, dtype=float))
        return tridiagonal_dense(diag, off)

    def r_apply(self, v):
        v1, v2 = self._split_state(v)
        out2 = np.zeros(self.params.n_nodes)
        if self.params.gamma > 0.0:
            diag, off = self._friction_diagonals(v2)
            out2 += self.params.gamma * _tridiag_matvec(diag, off, v2)
        if self.params.nu > 0.0:
            out2 += self.params.nu * _tridiag_matvec(self._stiff_diag, self._stiff_off, v2)
        return np.concatenate([np.zeros(self.params.n_cells), out2])

    def b_apply(self, t, v):
        out = np.zeros(self.dim)
        out[self._split] = self.g0(t)
        out[-1] = -self.gl(t)
        return out


def make_damped_wave(params: WaveParams, g0, gl) -> DampedWaveSystem:
    """Build the semi-discrete wave system with pressure boundary data g0, gl."""
    return DampedWaveSystem(params, g0, gl)


def wave_state_from_profiles(params: WaveParams, rho_fn, v_fn) -> np.ndarray:
    """Sample spatial profiles into a state vector.

    Density values are taken at the cell midpoints, velocity values at the
    grid nodes; both callables must accept numpy arrays.
    """
    w1 = np.asarray(rho_fn(params.cell_midpoints), dtype=float)
    w2 = np.asarray(v_fn(params.grid_nodes), dtype=float)
    return np.concatenate([w1, w2])


def wave_sine_trajectory(params: WaveParams):
    """Reference trajectory rho(t, x) = v(t, x) = sin(t) sin(x).

    Returns (z_exact, dz_exact) sampled through the midpoint/grid-node
    convention of :func:`wave_state_from_profiles`.
    """
    profile = np.concatenate([np.sin(params.cell_midpoints),
                              np.sin(params.grid_nodes)])

    def z_exact(t):
        return np.sin(t) * profile

    def dz_exact(t):
        return np.cos(t) * profile

    return z_exact, dz_exact


def wave_initial_bump_state(params: WaveParams) -> np.ndarray:
    """Initial data rho0 = 1 + sin(pi x / ell) / 2, v0 = (4x / ell - 2)^3."""
    return wave_state_from_profiles(
        params,
        lambda x: 1.0 + 0.5 * np.sin(np.pi * x / params.ell),
        lambda x: (4.0 * x / params.ell - 2.0) ** 3,
    )
