"""Built-in port-Hamiltonian benchmark systems."""

from .toda import TodaParams, make_toda, toda_sin_cos_trajectory
from .rigid_body import (RigidBodyParams, make_rigid_body,
                         rigid_body_reference_trajectory)
from .wave import (WaveParams, make_damped_wave, wave_initial_bump_state,
                   wave_sine_trajectory, wave_state_from_profiles)

__all__ = [
    "TodaParams",
    "make_toda",
    "toda_sin_cos_trajectory",
    "RigidBodyParams",
    "make_rigid_body",
    "rigid_body_reference_trajectory",
    "WaveParams",
    "make_damped_wave",
    "wave_state_from_profiles",
    "wave_sine_trajectory",
    "wave_initial_bump_state",
]
