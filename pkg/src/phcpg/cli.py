"""Command-line experiment runner.

One subcommand per mode (``converge``, ``converge-nodal``, ``energy``,
``run``) plus ``list-presets``.  Settings are resolved in order: built-in
defaults, then ``--config`` file or ``--preset``, then explicit flags.

Exit codes: 0 success, 1 configuration error, 2 solver non-convergence.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import (ConfigError, ExperimentConfig, PRESETS, preset_runs,
                          run_experiment)
from .solver import NonConvergence


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors surface as config errors (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _float_list(text):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _add_common(parser):
    parser.add_argument("--preset", help="name of a built-in figure preset")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--model", choices=("toda", "rigid_body", "wave"))
    parser.add_argument("--k", type=int, help="polynomial degree")
    parser.add_argument("--sq", type=int, help="quadrature node count s_Q")
    parser.add_argument("--spi", type=int, help="projection node count s_Pi")
    parser.add_argument("--tau", type=_float_list,
                        help="comma-separated step size(s)")
    parser.add_argument("--T", type=float, dest="t_end", help="final time")
    parser.add_argument("--tau-ref", type=float, help="error sampling step")
    parser.add_argument("--out", help="output file (directory for presets)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--control", help="named control/boundary signal")
    parser.add_argument("--z0", type=_float_list, help="initial state override")
    parser.add_argument("--newton-tol", type=float)
    parser.add_argument("--newton-max-iter", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--N", type=int,
                        help="particle count (toda) or interior points (wave)")
    parser.add_argument("--gamma", type=float, help="damping/friction coefficient")
    parser.add_argument("--nu", type=float, help="wave viscosity")
    parser.add_argument("--ell", type=float, help="wave domain length")
    parser.add_argument("--inertias", type=_float_list)
    parser.add_argument("--axis", type=_float_list, help="torque axis")


_MODE_BY_COMMAND = {
    "converge": "converge",
    "converge-nodal": "converge_nodal",
    "energy": "energy",
    "run": "run",
}


def build_parser():
    parser = _Parser(
        prog="phcpg",
        description="Energy-consistent cPG experiments for port-Hamiltonian systems",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list-presets", help="print the built-in preset names")
    for command in _MODE_BY_COMMAND:
        p = sub.add_parser(command, help=f"run a {command.replace('-', '_')} experiment")
        _add_common(p)
    return parser


def _model_param_overrides(args, model):
    overrides = {}
    if args.N is not None:
        overrides["n_particles" if model == "toda" else "n_interior"] = args.N
    if args.gamma is not None:
        overrides["gamma"] = args.gamma
    if args.nu is not None:
        overrides["nu"] = args.nu
    if args.ell is not None:
        overrides["ell"] = args.ell
    if args.inertias is not None:
        overrides["inertias"] = args.inertias
    if args.axis is not None:
        overrides["torque_axis"] = args.axis
    return overrides


def _apply_flags(config, args, mode):
    if config.mode != mode:
        raise ConfigError(
            f"loaded config has mode {config.mode!r} but subcommand expects {mode!r}"
        )
    updates = {}
    for flag, name in (("k", "k"), ("sq", "s_q"), ("spi", "s_pi"),
                       ("t_end", "t_end"), ("tau_ref", "tau_ref"),
                       ("format", "format"), ("control", "control"),
                       ("newton_tol", "newton_tol"),
                       ("newton_max_iter", "newton_max_iter"),
                       ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            updates[name] = value
    if args.tau is not None:
        updates["tau"] = tuple(args.tau)
    if args.z0 is not None:
        updates["z0"] = tuple(args.z0)
    model = args.model if args.model is not None else config.model
    params = dict(config.model_params) if model == config.model else {}
    params.update(_model_param_overrides(args, model))
    if model != config.model:
        updates["model"] = model
        updates["model_params"] = params
        updates["control"] = None if args.control is None else args.control
        updates["z0"] = None if args.z0 is None else tuple(args.z0)
    elif params != config.model_params:
        updates["model_params"] = params
    return replace(config, **updates) if updates else config


def _fresh_config(args, mode):
    if args.model is None:
        raise ConfigError("field 'model': required (or use --preset/--config)")
    if args.k is None:
        raise ConfigError("field 'k': required (or use --preset/--config)")
    if args.tau is None:
        raise ConfigError("field 'tau': required (or use --preset/--config)")
    return ExperimentConfig(
        model=args.model, mode=mode, k=args.k, tau=tuple(args.tau),
        s_q=args.sq, s_pi=args.spi,
        t_end=args.t_end if args.t_end is not None else 5.0,
        tau_ref=args.tau_ref if args.tau_ref is not None else 1.25e-4,
        model_params=_model_param_overrides(args, args.model),
        control=args.control,
        z0=None if args.z0 is None else tuple(args.z0),
        newton_tol=args.newton_tol,
        newton_max_iter=args.newton_max_iter,
        format=args.format if args.format is not None else "csv",
        workers=args.workers if args.workers is not None else 1,
    )


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.command == "list-presets":
            for name in sorted(PRESETS):
                print(name)
            return 0
        mode = _MODE_BY_COMMAND[args.command]
        if args.preset is not None and args.config is not None:
            raise ConfigError("--preset and --config are mutually exclusive")
        if args.preset is not None:
            runs = preset_runs(args.preset)
            if args.out is None:
                raise ConfigError("field 'out': required with --preset")
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            written = []
            for suffix, config in runs:
                config = _apply_flags(config, args, mode)
                fmt = config.format
                target = out_dir / f"{args.preset}_{suffix}.{fmt}"
                written.append(run_experiment(config, out=target))
            for path in written:
                print(path)
            return 0
        if args.config is not None:
            config = ExperimentConfig.from_file(args.config)
            config = _apply_flags(config, args, mode)
        else:
            config = _fresh_config(args, mode)
        out = args.out if args.out is not None else config.out
        if out is None:
            raise ConfigError("field 'out': required")
        path = run_experiment(config, out=out)
        print(path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NonConvergence as exc:
        print(f"solver did not converge at step {exc.step_index}: {exc}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
