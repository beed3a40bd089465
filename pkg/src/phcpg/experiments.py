"""Experiment configurations, built-in presets, and the run pipeline.

A configuration is a plain JSON document (``config_version`` 1) holding the
model, mode, discretization, and output choices; the CLI layers flag
overrides on top.  Outputs are deterministic given a configuration: the
pipeline contains no randomness and no timestamps, so rerunning a config
reproduces files byte for byte.
"""

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import models
from .energy import energy_balance_report
from .manufactured import ManufacturedCase, convergence_study, sampling_grid
from .phsystem import SolverConfig
from .solver import TimePartition, eval_solution, integrate

MODES = ("converge", "converge_nodal", "energy", "run")
MODELS = ("toda", "rigid_body", "wave")
FORMATS = ("csv", "json")
CONFIG_VERSION = 1

SIGNALS = {
    "sin_2t": lambda t: math.sin(2.0 * t),
    "one_minus_sin": lambda t: 1.0 - math.sin(t),
    "zero": lambda t: 0.0,
}

DEFAULT_CONTROL = {"toda": "sin_2t", "rigid_body": "sin_2t", "wave": "one_minus_sin"}

DEFAULT_MODEL_PARAMS = {
    "toda": {"n_particles": 5, "gamma": 0.1},
    "rigid_body": {"inertias": [1.0, 1.0, 1.0], "torque_axis": [1.0, 1.0, 1.0]},
    "wave": {"n_interior": 10, "ell": 10.0, "gamma": 0.1, "nu": 0.0,
             "rf_quad_nodes": 10},
}


class ConfigError(ValueError):
    """An experiment configuration failed validation."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment table."""

    model: str
    mode: str
    k: int
    tau: tuple
    s_q: int | None = None
    s_pi: int | None = None
    t_end: float = 5.0
    tau_ref: float = 1.25e-4
    model_params: dict = field(default_factory=dict)
    control: str | None = None
    z0: tuple | None = None
    newton_tol: float | None = None
    newton_max_iter: int | None = None
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    config_version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.config_version != CONFIG_VERSION:
            raise ConfigError(
                f"field 'config_version': expected {CONFIG_VERSION}, got {self.config_version}"
            )
        if self.model not in MODELS:
            raise ConfigError(f"field 'model': unknown model {self.model!r}")
        if self.mode not in MODES:
            raise ConfigError(f"field 'mode': unknown mode {self.mode!r}")
        if self.k < 1:
            raise ConfigError(f"field 'k': must be >= 1, got {self.k}")
        taus = tuple(float(t) for t in (self.tau if isinstance(self.tau, (list, tuple))
                                        else [self.tau]))
        if not taus or any(t <= 0.0 for t in taus):
            raise ConfigError("field 'tau': needs positive step size(s)")
        if self.mode in ("energy", "run") and len(taus) != 1:
            raise ConfigError(f"field 'tau': mode {self.mode!r} takes a single step size")
        if self.mode in ("converge", "converge_nodal"):
            if len(taus) < 2:
                raise ConfigError("field 'tau': convergence modes need at least two step sizes")
            if any(t1 >= t0 for t0, t1 in zip(taus, taus[1:])):
                raise ConfigError("field 'tau': step sizes must be strictly decreasing")
        object.__setattr__(self, "tau", taus)
        if not self.t_end > 0.0:
            raise ConfigError("field 't_end': must be positive")
        if not self.tau_ref > 0.0:
            raise ConfigError("field 'tau_ref': must be positive")
        if self.s_q is not None and self.s_q < 1:
            raise ConfigError("field 's_q': must be >= 1")
        if self.s_pi is not None and self.s_pi < 1:
            raise ConfigError("field 's_pi': must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"field 'format': unknown format {self.format!r}")
        if self.workers < 1:
            raise ConfigError("field 'workers': must be >= 1")
        control = self.control if self.control is not None else DEFAULT_CONTROL[self.model]
        if control not in SIGNALS:
            raise ConfigError(
                f"field 'control': unknown signal {control!r} (have {sorted(SIGNALS)})"
            )
        object.__setattr__(self, "control", control)
        params = dict(DEFAULT_MODEL_PARAMS[self.model])
        unknown = set(self.model_params) - set(params)
        if unknown:
            raise ConfigError(
                f"field 'model_params': unknown keys {sorted(unknown)} for model {self.model!r}"
            )
        params.update(self.model_params)
        object.__setattr__(self, "model_params", params)
        if self.z0 is not None:
            object.__setattr__(self, "z0", tuple(float(x) for x in self.z0))
        if self.newton_tol is not None and not self.newton_tol > 0.0:
            raise ConfigError("field 'newton_tol': must be positive")
        if self.newton_max_iter is not None and self.newton_max_iter < 1:
            raise ConfigError("field 'newton_max_iter': must be >= 1")

    @property
    def resolved_s_q(self) -> int:
        return self.s_q if self.s_q is not None else self.k

    @property
    def resolved_s_pi(self) -> int:
        # General default; the wave presets override this with 2k, which
        # makes the projection quadrature exact for the cubic pressure law.
        return self.s_pi if self.s_pi is not None else max(self.k, 3)

    def solver_config(self) -> SolverConfig:
        tol = self.newton_tol if self.newton_tol is not None else 1e-12
        max_iter = self.newton_max_iter if self.newton_max_iter is not None else 50
        return SolverConfig(k=self.k, s_q=self.resolved_s_q,
                            s_pi=self.resolved_s_pi, newton_tol=tol,
                            newton_max_iter=max_iter)

    def to_dict(self) -> dict:
        return {
            "config_version": self.config_version,
            "model": self.model,
            "mode": self.mode,
            "k": self.k,
            "s_q": self.s_q,
            "s_pi": self.s_pi,
            "tau": list(self.tau),
            "t_end": self.t_end,
            "tau_ref": self.tau_ref,
            "model_params": dict(self.model_params),
            "control": self.control,
            "z0": None if self.z0 is None else list(self.z0),
            "newton_tol": self.newton_tol,
            "newton_max_iter": self.newton_max_iter,
            "out": self.out,
            "format": self.format,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "model" not in data or "mode" not in data or "k" not in data or "tau" not in data:
            raise ConfigError("config requires at least 'model', 'mode', 'k', and 'tau'")
        return cls(**data)

    def to_file(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        try:
            return cls.from_dict(data)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def build_system(config: ExperimentConfig):
    """Instantiate the configured model; returns (system, default z0)."""
    params = config.model_params
    signal = SIGNALS[config.control]
    if config.model == "toda":
        p = models.TodaParams(n_particles=int(params["n_particles"]),
                              gamma=params["gamma"])
        system = models.make_toda(p, signal)
        z0 = np.zeros(p.dim)
    elif config.model == "rigid_body":
        p = models.RigidBodyParams(inertias=params["inertias"],
                                   torque_axis=params["torque_axis"])
        system = models.make_rigid_body(p, signal)
        z0 = np.array([0.0, 0.5, 1.0])
    else:
        p = models.WaveParams(n_interior=int(params["n_interior"]),
                              ell=float(params["ell"]),
                              gamma=float(params["gamma"]),
                              nu=float(params["nu"]),
                              rf_quad_nodes=int(params["rf_quad_nodes"]))
        system = models.make_damped_wave(p, signal, signal)
        z0 = models.wave_initial_bump_state(p)
    if config.z0 is not None:
        z0 = np.asarray(config.z0, dtype=float)
        if z0.shape != (system.dim,):
            raise ConfigError(
                f"field 'z0': expected {system.dim} components, got {z0.size}"
            )
    return system, z0


def build_case(config: ExperimentConfig) -> ManufacturedCase:
    """The model's reference trajectory for convergence studies."""
    system, _ = build_system(config)
    if config.model == "toda":
        z_exact, dz_exact = models.toda_sin_cos_trajectory(system.params)
    elif config.model == "rigid_body":
        z_exact, dz_exact = models.rigid_body_reference_trajectory()
    else:
        z_exact, dz_exact = models.wave_sine_trajectory(system.params)
    return ManufacturedCase(system=system, z_exact=z_exact, dz_exact=dz_exact)


CONVERGE_COLUMNS = ["tau", "err_inf", "eoc_inf", "err_nodal", "eoc_nodal"]
ENERGY_COLUMNS = ["i", "t_i", "H", "dissipation", "supply", "E"]


def execute(config: ExperimentConfig):
    """Run the configured experiment; returns (columns, rows)."""
    if config.mode in ("converge", "converge_nodal"):
        case = build_case(config)
        tol = config.newton_tol if config.newton_tol is not None else 1e-12
        max_iter = config.newton_max_iter if config.newton_max_iter is not None else 50
        records = convergence_study(
            case, k=config.k, s_q=config.resolved_s_q, s_pi=config.resolved_s_pi,
            taus=list(config.tau), t_end=config.t_end, tau_ref=config.tau_ref,
            newton_tol=tol, newton_max_iter=max_iter, workers=config.workers,
        )
        rows = [[r.tau, r.err_inf, r.eoc_inf, r.err_nodal, r.eoc_nodal]
                for r in records]
        return CONVERGE_COLUMNS, rows
    system, z0 = build_system(config)
    tau = config.tau[0]
    steps = max(1, round(config.t_end / tau))
    partition = TimePartition.uniform(config.t_end, steps)
    solver_config = config.solver_config()
    solution = integrate(system, z0, partition, solver_config)
    if config.mode == "energy":
        report = energy_balance_report(system, solution)
        rows = [[0, report.times[0], report.hamiltonians[0], None, None, None]]
        for i in range(partition.num_steps):
            rows.append([i + 1, report.times[i + 1], report.hamiltonians[i + 1],
                         report.dissipation[i], report.supply[i],
                         report.balance_error[i]])
        return ENERGY_COLUMNS, rows
    # run mode: sampled trajectory
    times = sampling_grid(0.0, config.t_end, config.tau_ref)
    states = eval_solution(solution, times)
    columns = ["t"] + [f"z{j}" for j in range(system.dim)] + ["H"]
    rows = []
    for idx, t in enumerate(times):
        state = states[:, idx]
        rows.append([t, *state.tolist(), system.hamiltonian(state)])
    return columns, rows


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_output(config: ExperimentConfig, columns, rows, path) -> Path:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    if config.format == "csv":
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
    else:
        payload = {
            "metadata": {"config": config.to_dict(), "columns": columns},
            "rows": [[None if v is None else (int(v) if isinstance(v, (int, np.integer)) else float(v))
                      for v in row] for row in rows],
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def run_experiment(config: ExperimentConfig, out=None) -> Path:
    """Execute a config and write its table; returns the output path."""
    target = out if out is not None else config.out
    if target is None:
        raise ConfigError("field 'out': no output path given")
    columns, rows = execute(config)
    return write_output(config, columns, rows, target)


# --- Built-in presets: convergence, sensitivity, and energy-balance runs --

_TAU_SWEEP = tuple(0.25 / 2 ** j for j in range(5))
_ENERGY_TOL = 1e-14  # tight Newton stops keep balance errors at rounding level


def _toda_base(mode, k, s_q, s_pi, **kw):
    return ExperimentConfig(model="toda", mode=mode, k=k, s_q=s_q, s_pi=s_pi,
                            tau=kw.pop("tau", _TAU_SWEEP), t_end=5.0, **kw)


def _preset_toda_degree(mode):
    return [(f"k{k}", _toda_base(mode, k, k, k)) for k in (1, 2, 3, 4)]


def _preset_toda_quadrature():
    return [(f"sq{s}", _toda_base("converge", 3, s, 3)) for s in (1, 2, 3, 4, 5)]


def _preset_toda_projection():
    return [(f"spi{s}", _toda_base("converge", 3, 3, s)) for s in (1, 2, 3, 4, 5)]


def _preset_toda_energy():
    runs = []
    for k in (1, 2, 3, 4):
        for s_pi in (1, 2, 3, 4):
            runs.append((f"k{k}_spi{s_pi}",
                         _toda_base("energy", k, k, s_pi, tau=(1e-2,),
                                    newton_tol=_ENERGY_TOL)))
    return runs


def _rigid_base(mode, k, s_q, s_pi, **kw):
    return ExperimentConfig(model="rigid_body", mode=mode, k=k, s_q=s_q,
                            s_pi=s_pi, tau=kw.pop("tau", _TAU_SWEEP),
                            t_end=5.0, **kw)


def _preset_rigid_energy():
    runs = []
    for k in (1, 2, 3, 4):
        for s_pi in (1, 2, 3, 4):
            runs.append((f"k{k}_spi{s_pi}",
                         _rigid_base("energy", k, k, s_pi, tau=(1e-2,),
                                     z0=(0.0, 0.5, 1.0), newton_tol=_ENERGY_TOL)))
    return runs


def _preset_rigid_degree(mode):
    return [(f"k{k}", _rigid_base(mode, k, k, k)) for k in (1, 2, 3, 4)]


def _wave_base(mode, k, nu, **kw):
    params = {"nu": float(nu)}
    params.update(kw.pop("model_params", {}))
    return ExperimentConfig(model="wave", mode=mode, k=k,
                            s_q=kw.pop("s_q", k), s_pi=kw.pop("s_pi", 2 * k),
                            tau=kw.pop("tau", _TAU_SWEEP), t_end=5.0,
                            model_params=params, **kw)


def _preset_wave_degree(mode, nu):
    return [(f"k{k}", _wave_base(mode, k, nu)) for k in (2, 4, 6)]


def _preset_wave_mesh(nu):
    return [(f"N{n}", _wave_base("converge", 4, nu, model_params={"n_interior": n}))
            for n in (8, 16, 32, 64)]


def _preset_wave_energy(nu):
    return [(f"k{k}", _wave_base("energy", k, nu, tau=(1e-2,),
                                 newton_tol=_ENERGY_TOL))
            for k in (1, 2, 3, 4)]


PRESETS = {
    "toda_varying_degree": lambda: _preset_toda_degree("converge"),
    "toda_varying_degree_different_sampling": lambda: _preset_toda_degree("converge_nodal"),
    "toda_varying_quadrature": _preset_toda_quadrature,
    "toda_varying_projection": _preset_toda_projection,
    "toda_energybalance": _preset_toda_energy,
    "rigid_body_energybalance": _preset_rigid_energy,
    "rigid_body_varying_degree": lambda: _preset_rigid_degree("converge"),
    "rigid_body_varying_degree_different_sampling": lambda: _preset_rigid_degree("converge_nodal"),
    "damped_wave_nu0_varying_degree": lambda: _preset_wave_degree("converge", 0),
    "damped_wave_nu1_varying_degree": lambda: _preset_wave_degree("converge", 1),
    "damped_wave_nu0_varying_degree_different_sampling":
        lambda: _preset_wave_degree("converge_nodal", 0),
    "damped_wave_nu1_varying_degree_different_sampling":
        lambda: _preset_wave_degree("converge_nodal", 1),
    "damped_wave_nu0_varying_discretization": lambda: _preset_wave_mesh(0),
    "damped_wave_nu1_varying_discretization": lambda: _preset_wave_mesh(1),
    "damped_wave_nu0_energybalance": lambda: _preset_wave_energy(0),
    "damped_wave_nu1_energybalance": lambda: _preset_wave_energy(1),
}


def preset_runs(name: str):
    """Expand a preset into its (suffix, config) runs."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return PRESETS[name]()


def run_preset(name: str, out_dir, fmt: str = "csv", overrides: dict | None = None):
    """Run every configuration of a preset; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for suffix, config in preset_runs(name):
        if overrides:
            config = replace(config, **overrides)
        config = replace(config, format=fmt)
        target = out_dir / f"{name}_{suffix}.{fmt}"
        paths.append(run_experiment(config, out=target))
    return paths
