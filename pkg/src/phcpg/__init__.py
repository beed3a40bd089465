"""Energy-consistent continuous Petrov-Galerkin time integration for
port-Hamiltonian systems.

The trial space consists of continuous piecewise polynomials of degree k in
time, tested against discontinuous polynomials of degree k - 1.  The
gradient of the Hamiltonian is passed through a per-subinterval L2
projection (approximated by Gauss quadrature) before it enters the
right-hand side, which makes the Hamiltonian increments at the grid points
track dissipation and supply exactly, up to quadrature of the projection.
"""

from .quadrature import QuadratureRule, gauss_legendre_unit, map_nodes
from .quadrature import apply as apply_quadrature
from .basis import (SegmentPoly, antiderivative_from_left, derivative_segment,
                    eval_segment, orthonormal_legendre_values)
from .projection import project_eta_of_segment, project_sampled
from .phsystem import (DomainEvaluationError, PHSystem, SolverConfig,
                       assert_conformant, check_gradient, conformance_report,
                       rhs)
from .solver import (CpgSolution, NonConvergence, SingularJacobian,
                     SolverError, TimePartition, assemble_local_residual,
                     eval_solution, integrate, newton_step_solve)
from .energy import (EnergyReport, energy_balance_report, hamiltonian_trace,
                     power_balance_residual)
from .manufactured import (ConvergenceRecord, ManufacturedCase,
                           convergence_study, eoc, linf_error, nodal_error,
                           wrap_manufactured)
from .experiments import (ConfigError, ExperimentConfig, PRESETS, preset_runs,
                          run_experiment, run_preset)
from . import models

__version__ = "0.1.0"

__all__ = [
    "QuadratureRule", "gauss_legendre_unit", "map_nodes", "apply_quadrature",
    "SegmentPoly", "orthonormal_legendre_values", "eval_segment",
    "derivative_segment", "antiderivative_from_left",
    "project_sampled", "project_eta_of_segment",
    "PHSystem", "SolverConfig", "DomainEvaluationError", "rhs",
    "check_gradient", "conformance_report", "assert_conformant",
    "TimePartition", "CpgSolution", "SolverError", "SingularJacobian",
    "NonConvergence", "assemble_local_residual", "newton_step_solve",
    "integrate", "eval_solution",
    "EnergyReport", "energy_balance_report", "hamiltonian_trace",
    "power_balance_residual",
    "ManufacturedCase", "wrap_manufactured", "linf_error", "nodal_error",
    "eoc", "ConvergenceRecord", "convergence_study",
    "ExperimentConfig", "ConfigError", "PRESETS", "preset_runs",
    "run_experiment", "run_preset",
    "models",
]
