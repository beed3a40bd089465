"""Rigid body spinning around its center of mass.

State z holds the three angular momenta; the quadratic energy is
H(z) = z^T Q z / 2 with Q = diag(1/I_1, 1/I_2, 1/I_3).  The conservative map
acts as the cross product of the momentum with the angular velocity; since
eta(z) = Qz is invertible, it is realized directly on gradient values as
J(v) = (Q^{-1} v) x v.  No dissipation; a scalar control applies torque
along a fixed axis.
"""

from dataclasses import dataclass

import numpy as np

from ..phsystem import PHSystem


@dataclass(frozen=True)
class RigidBodyParams:
    inertias: np.ndarray = (1.0, 1.0, 1.0)
    torque_axis: np.ndarray = (1.0, 1.0, 1.0)

    def __post_init__(self):
        inertias = np.asarray(self.inertias, dtype=float).copy()
        axis = np.asarray(self.torque_axis, dtype=float).copy()
        if inertias.shape != (3,) or axis.shape != (3,):
            raise ValueError("inertias and torque_axis must have three components")
        if np.any(inertias <= 0.0):
            raise ValueError("principal moments of inertia must be positive")
        inertias.setflags(write=False)
        axis.setflags(write=False)
        object.__setattr__(self, "inertias", inertias)
        object.__setattr__(self, "torque_axis", axis)


class SpinningRigidBody(PHSystem):
    def __init__(self, params: RigidBodyParams, control):
        super().__init__(dim=3)
        self.params = params
        self.control = control

    def hamiltonian(self, z):
        return 0.5 * float(np.sum(z * z / self.params.inertias))

    def eta(self, z):
        return z / self.params.inertias

    def j_apply(self, v):
        return np.cross(self.params.inertias * v, v)

    def r_apply(self, v):
        return np.zeros(3)

    def b_apply(self, t, v):
        return self.params.torque_axis * self.control(t)


def make_rigid_body(params: RigidBodyParams, u) -> SpinningRigidBody:
    """Build the rigid body with scalar torque control ``u(t)``."""
    return SpinningRigidBody(params, u)


def rigid_body_reference_trajectory():
    """Smooth reference momenta (sin t, sin(2t) cos^2 t + 0.5, cos t).

    Returns (z_exact, dz_exact) for forced-solution error studies.
    """

    def z_exact(t):
        return np.array([
            np.sin(t),
            np.sin(2.0 * t) * np.cos(t) ** 2 + 0.5,
            np.cos(t),
        ])

    def dz_exact(t):
        return np.array([
            np.cos(t),
            2.0 * np.cos(2.0 * t) * np.cos(t) ** 2 - np.sin(2.0 * t) ** 2,
            -np.sin(t),
        ])

    return z_exact, dz_exact
