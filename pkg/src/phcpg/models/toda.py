"""Damped Toda lattice: a chain of particles coupled by exponential springs.

State z = (q, p) with displacements q and momenta p of N particles.  The
energy is

    H(z) = sum_k p_k^2 / 2 + sum_{k<N} exp(q_k - q_{k+1}) + exp(q_N) - q_1 - N,

smooth and strictly convex, with the canonical symplectic coupling between
the blocks, diagonal damping on the momenta and a scalar control entering
the first momentum equation.
"""

from dataclasses import dataclass

import numpy as np

from ..phsystem import PHSystem


@dataclass(frozen=True)
class TodaParams:
    """Particle count and per-particle damping coefficients.

    ``gamma`` may be a scalar (applied to every particle) or a length-N
    sequence of nonnegative damping parameters.
    """

    n_particles: int
    gamma: np.ndarray = 0.0

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError(f"need at least one particle, got {self.n_particles}")
        gamma = np.broadcast_to(
            np.asarray(self.gamma, dtype=float), (self.n_particles,)
        ).copy()
        if np.any(gamma < 0.0):
            raise ValueError("damping coefficients must be nonnegative")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)

    @property
    def dim(self) -> int:
        return 2 * self.n_particles


class TodaLattice(PHSystem):
    def __init__(self, params: TodaParams, control):
        super().__init__(dim=params.dim)
        self.params = params
        self.control = control
        self._n = params.n_particles

    def hamiltonian(self, z):
        n = self._n
        q, p = z[:n], z[n:]
        springs = float(np.sum(np.exp(q[:-1] - q[1:]))) if n > 1 else 0.0
        return 0.5 * float(p @ p) + springs + float(np.exp(q[-1])) - float(q[0]) - n

    def eta(self, z):
        n = self._n
        q, p = z[:n], z[n:]
        grad_q = np.zeros(n)
        if n > 1:
            bond = np.exp(q[:-1] - q[1:])
            grad_q[:-1] += bond
            grad_q[1:] -= bond
        grad_q[-1] += np.exp(q[-1])
        grad_q[0] -= 1.0
        return np.concatenate([grad_q, p])

    def j_apply(self, v):
        n = self._n
        return np.concatenate([v[n:], -v[:n]])

    def r_apply(self, v):
        n = self._n
        return np.concatenate([np.zeros(n), self.params.gamma * v[n:]])

    def b_apply(self, t, v):
        out = np.zeros(self.dim)
        out[self._n] = self.control(t)
        return out


def make_toda(params: TodaParams, u) -> TodaLattice:
    """Build the lattice with scalar control ``u(t)`` driving the first momentum."""
    return TodaLattice(params, u)


def toda_sin_cos_trajectory(params: TodaParams):
    """Reference trajectory q_i(t) = sin(t), p_i(t) = cos(t) for every particle.

    Returns (z_exact, dz_exact) for use in forced-solution error studies.
    """
    n = params.n_particles

    def z_exact(t):
        return np.concatenate([np.full(n, np.sin(t)), np.full(n, np.cos(t))])

    def dz_exact(t):
        return np.concatenate([np.full(n, np.cos(t)), np.full(n, -np.sin(t))])

    return z_exact, dz_exact
