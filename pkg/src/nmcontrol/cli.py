"""Command-line interface.

Subcommands:
  simulate  one free or pulse-driven trajectory -> CSV of t, populations,
            concurrence
  nm        one BLP evaluation -> value on stdout + distance trajectory CSV
  optimize  one parameter point, one addressing mode -> optimal pulse CSV
  sweep     full randomized experiment -> records CSV + summary

Every subcommand accepts ``--config <path>`` (flat key=value text, same keys
as the sweep config) with command-line flags taking precedence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .blp import blp_measure, distance_trajectory
from .cavity import CavityParams, integrate_cavity
from .linalg import concurrence_wootters
from .optimize import (CavityControlProblem, SpinStarControlProblem,
                       optimize_problem)
from .spinstar import build_operators, concurrence_trajectory, \
    propagate_spinstar, SpinStarParams
from .sweep import (check_summary, format_summary, load_config, run_sweep)


def _add_common(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--model", choices=["cavity", "spinstar"])
    p.add_argument("--T", type=float, help="horizon")
    p.add_argument("--gamma0", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--omega0", type=float)
    p.add_argument("--segments", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seeds", type=int)
    p.add_argument("--bounds", type=float)
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--method", choices=["nelder-mead", "lbfgs"])
    p.add_argument("--max-evals", dest="max_evals", type=int)
    p.add_argument("--out", help="output CSV path")


def _add_point(p):
    p.add_argument("--alpha1", type=float, default=0.5)
    p.add_argument("--alpha2", type=float, default=0.1)
    p.add_argument("--A", type=float, default=0.1, help="spin-star coupling")
    p.add_argument("--n-spins", dest="n_spins", type=int, default=4)


def _config_from_args(args):
    overrides = {
        k: getattr(args, k, None)
        for k in ("model", "T", "gamma0", "lam", "omega0", "segments", "steps",
                  "seeds", "bounds", "master_seed", "method", "max_evals", "out")
    }
    if getattr(args, "n_points", None) is not None:
        overrides["n_points"] = args.n_points
    if getattr(args, "modes", None):
        overrides["modes"] = tuple(args.modes.split(","))
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "nm_grid", None) is not None:
        overrides["nm_grid"] = args.nm_grid
    return load_config(args.config, overrides).resolved()


def _point_params(args, config):
    if config.model == "cavity":
        return CavityParams(gamma0=config.gamma0, lam=config.lam,
                            omega0=config.omega0, alpha1=args.alpha1,
                            alpha2=args.alpha2)
    return SpinStarParams(n_total=args.n_spins, coupling=args.A,
                          omega0=config.omega0)


def _read_pulse(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 3], data[:, 4]


def _write_pulse(path, T, e1, e2):
    n = len(e1)
    dt = T / n
    with open(path, "w") as fh:
        fh.write("segment,t_start,t_end,eps1,eps2\n")
        for k in range(n):
            fh.write(f"{k},{format(k * dt, '.12g')},{format((k + 1) * dt, '.12g')},"
                     f"{format(e1[k], '.12g')},{format(e2[k], '.12g')}\n")


def cmd_simulate(args):
    config = _config_from_args(args)
    params = _point_params(args, config)
    out = config.out if args.out or args.config else "simulate.csv"
    if args.pulse:
        e1, e2 = _read_pulse(args.pulse)
    else:
        e1 = e2 = None
    if config.model == "cavity":
        steps = config.steps
        if e1 is not None:
            from .pulses import StepField

            e1 = StepField(e1, config.T)
            e2 = StepField(e2, config.T)
        traj = integrate_cavity(params, e1, e2, config.T, steps)
        p1, p2 = traj.populations()
        conc = traj.concurrence_series()
        times = traj.times
    else:
        ops = build_operators(params)
        if e1 is None:
            e1 = np.zeros(config.segments)
            e2 = np.zeros(config.segments)
        dim = 2**params.n_total
        psi0 = np.zeros(dim, dtype=complex)
        psi0[0] = 1.0
        traj = propagate_spinstar(ops, e1, e2, config.T, psi0)
        p1 = np.abs(traj.reduced[:, 2, 2].real)
        p2 = np.abs(traj.reduced[:, 1, 1].real)
        conc = concurrence_trajectory(traj.reduced)
        times = traj.times
    with open(out, "w") as fh:
        fh.write("t,pop_10,pop_01,concurrence\n")
        for row in zip(times, p1, p2, conc):
            fh.write(",".join(format(v, ".12g") for v in row) + "\n")
    print(f"wrote {len(times)} samples to {out}")
    print(f"final concurrence: {conc[-1]:.12g}")
    return 0


def cmd_nm(args):
    config = _config_from_args(args)
    params = _point_params(args, config)
    out = config.out if args.out or args.config else "distance.csv"
    traj = distance_trajectory(config.model, params, config.T, config.nm_grid)
    result = blp_measure(traj)
    with open(out, "w") as fh:
        fh.write("t,trace_distance\n")
        for t, d in zip(traj.times, traj.values):
            fh.write(f"{format(t, '.12g')},{format(d, '.12g')}\n")
    print(f"nm = {result.value:.12g}")
    print(f"regime = {result.regime}")
    print(f"wrote distance trajectory to {out}")
    return 0


def cmd_optimize(args):
    config = _config_from_args(args)
    params = _point_params(args, config)
    out = config.out if args.out or args.config else "pulse.csv"
    if config.model == "cavity":
        problem = CavityControlProblem(params, args.mode, config.T,
                                       n_segments=config.segments,
                                       steps=config.steps, bound=config.bounds)
    else:
        problem = SpinStarControlProblem(params, args.mode, config.T,
                                         n_segments=config.segments,
                                         bound=config.bounds)
    outcome = optimize_problem(problem, seeds=config.seeds,
                               rng_seed=config.master_seed,
                               method=config.method,
                               max_evals=config.max_evals)
    if config.model == "cavity":
        e1, e2 = problem._substage_fields(outcome.best_x)
        seg = problem.pulse_from_flat(outcome.best_x)
        from .pulses import expand_addressing

        f1, f2 = expand_addressing(seg, problem.mode)
        _write_pulse(out, config.T, f1.amplitudes, f2.amplitudes)
        conc = outcome.best_value
        print(f"objective (final concurrence) = {outcome.best_value:.12g}")
    else:
        e1, e2 = problem._channel_amplitudes(outcome.best_x)
        _write_pulse(out, config.T, e1, e2)
        rho = problem.final_reduced(outcome.best_x)
        conc = concurrence_wootters(rho)
        print(f"objective (Bell fidelity) = {outcome.best_value:.12g}")
        print(f"concurrence of optimal state = {conc:.12g}")
    print(f"per-seed values: "
          + " ".join(format(v, ".6g") for v in outcome.per_seed_values))
    print(f"evaluations = {outcome.evaluations}")
    print(f"wrote optimal pulse to {out}")
    return 0


def cmd_sweep(args):
    config = _config_from_args(args)
    progress = None
    if args.verbose:
        def progress(rec):
            status = rec.error or (
                f"nm={rec.nm:.4g} "
                + " ".join(f"{m}={v:.4g}" for m, v in rec.conc_opt.items())
            )
            print(f"point {rec.point_index}: {status} ({rec.wall_time:.1f}s)",
                  file=sys.stderr, flush=True)
    records, summary = run_sweep(config, progress=progress)
    print(format_summary(summary))
    print(f"wrote {len(records)} rows to {config.out}")
    if args.check:
        failures = check_summary(summary, records, config)
        if failures:
            for f in failures:
                print(f"CHECK FAIL: {f}", file=sys.stderr)
            return 1
        print("all checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nmcontrol",
        description="Backflow quantification and entangling-pulse optimization "
                    "for two open quantum systems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one trajectory")
    _add_common(p)
    _add_point(p)
    p.add_argument("--pulse", help="pulse CSV (from `optimize`) to replay")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("nm", help="BLP value of the free dynamics")
    _add_common(p)
    _add_point(p)
    p.add_argument("--nm-grid", dest="nm_grid", type=int)
    p.set_defaults(fn=cmd_nm)

    p = sub.add_parser("optimize", help="optimize one point, one mode")
    _add_common(p)
    _add_point(p)
    p.add_argument("--mode", choices=["SA", "DA", "GA"], default="SA")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("sweep", help="run the full randomized experiment")
    _add_common(p)
    p.add_argument("--n-points", dest="n_points", type=int)
    p.add_argument("--modes", help="comma list, e.g. SA,DA,GA")
    p.add_argument("--workers", type=int)
    p.add_argument("--nm-grid", dest="nm_grid", type=int)
    p.add_argument("--check", action="store_true",
                   help="exit nonzero unless acceptance thresholds hold")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
