"""Command-line front end.

Subcommands: steady-state, simulate, reconstruct, sweep, and pipeline
(simulate + reconstruct fused).  Exit codes: 0 success, 1 usage error,
2 numeric or validation failure.
"""

from __future__ import annotations

import argparse
import math
import sys

from micromaser import emfit, harness, mc, records
from micromaser.kernel import TauGrid, build_kernel, excited_probability
from micromaser.photon_model import (
    DEFAULT_TAIL_THRESHOLD,
    DEFAULT_TRUNCATION,
    MaserParams,
    fidelity,
    metrics,
    steady_state,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    """Bad argument combination detected before any computation."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; remap to the usage exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="micromaser", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    steady = sub.add_parser(
        "steady-state", help="write the steady-state photon distribution"
    )
    _add_param_args(steady)
    steady.add_argument("--trunc", type=int, default=DEFAULT_TRUNCATION,
                        help="photon-number cutoff")
    steady.add_argument("--tail-threshold", type=float, default=DEFAULT_TAIL_THRESHOLD,
                        help="largest allowed relative weight of the last level")
    steady.add_argument("--lenient", action="store_true",
                        help="warn instead of failing when the cutoff clips the tail")
    _add_output_arg(steady)
    steady.set_defaults(func=cmd_steady_state)

    simulate = sub.add_parser(
        "simulate", help="generate a synthetic probe-atom experiment file"
    )
    _add_param_args(simulate)
    _add_experiment_args(simulate)
    _add_output_arg(simulate)
    simulate.set_defaults(func=cmd_simulate)

    reconstruct = sub.add_parser(
        "reconstruct", help="reconstruct the photon distribution from an experiment file"
    )
    reconstruct.add_argument("--input", required=True, help="experiment file to invert")
    _add_em_args(reconstruct)
    reconstruct.add_argument("--trunc", type=int, default=None,
                             help="reconstruction cutoff (default: the experiment's)")
    _add_output_arg(reconstruct)
    reconstruct.set_defaults(func=cmd_reconstruct)

    pipeline = sub.add_parser(
        "pipeline", help="simulate and reconstruct in one run"
    )
    _add_param_args(pipeline)
    _add_experiment_args(pipeline)
    _add_em_args(pipeline)
    pipeline.add_argument("--preset", choices=harness.PRESET_NAMES, default=None,
                          help="start from a named experiment preset")
    _add_output_arg(pipeline)
    pipeline.set_defaults(func=cmd_pipeline)

    sweep = sub.add_parser(
        "sweep", help="repeat pipelines along one axis and report fidelities"
    )
    _add_param_args(sweep)
    _add_experiment_args(sweep)
    _add_em_args(sweep)
    sweep.add_argument("--axis", required=True,
                       choices=("n-tau", "shots", "iterations"))
    sweep.add_argument("--values", required=True, type=int, nargs="+",
                       help="strictly increasing axis values")
    sweep.add_argument("--repeats", type=int, default=harness.DEFAULT_REPEATS)
    sweep.add_argument("--jobs", type=int, default=1,
                       help="worker processes (output is identical for any value)")
    _add_output_arg(sweep)
    sweep.set_defaults(func=cmd_sweep)

    return parser


def _add_param_args(p) -> None:
    p.add_argument("--n-ex", type=float, default=25.0,
                   help="effective pump rate (atoms per photon lifetime)")
    p.add_argument("--n-th", type=float, default=1e-5,
                   help="mean thermal photon number")
    p.add_argument("--theta-pi", type=float, default=None,
                   help="pump parameter in units of pi (e.g. 2.5)")


def _add_experiment_args(p) -> None:
    p.add_argument("--trunc", type=int, default=DEFAULT_TRUNCATION)
    p.add_argument("--tau-min", type=float, default=harness.DEFAULT_TAU_MIN)
    p.add_argument("--tau-max", type=float, default=harness.DEFAULT_TAU_MAX)
    p.add_argument("--n-tau", type=int, default=harness.DEFAULT_N_TAU,
                   help="number of grid intervals (n_tau + 1 sampling times)")
    p.add_argument("--shots", type=int, default=harness.DEFAULT_SHOTS,
                   help="probe atoms per sampling time")
    p.add_argument("--seed", type=int, default=0)


def _add_em_args(p) -> None:
    p.add_argument("--iterations", type=int, default=harness.DEFAULT_ITERATIONS)
    p.add_argument("--stop-tol", type=float, default=0.0,
                   help="stop once the likelihood gain per iteration drops below this")


def _add_output_arg(p) -> None:
    p.add_argument("--output", required=True, help="path of the output file")


def _params_from(args) -> MaserParams:
    if args.theta_pi is None:
        raise UsageError("--theta-pi is required")
    return MaserParams(n_ex=args.n_ex, n_th=args.n_th, theta=args.theta_pi * math.pi)


def _grid_from(args) -> TauGrid:
    if not args.tau_min < args.tau_max:
        raise UsageError(
            f"--tau-min must be smaller than --tau-max "
            f"(got {args.tau_min} >= {args.tau_max})"
        )
    if args.n_tau < 1:
        raise UsageError("--n-tau must be >= 1")
    return TauGrid(args.tau_min, args.tau_max, args.n_tau)


def cmd_steady_state(args) -> int:
    params = _params_from(args)
    dist = steady_state(
        params, args.trunc, tail_threshold=args.tail_threshold,
        strict=not args.lenient,
    )
    m = metrics(dist)
    manifest = records.build_manifest(
        "steady-state",
        {
            "params": records.params_dict(params),
            "theta_pi": args.theta_pi,
            "truncation": args.trunc,
            "tail_threshold": args.tail_threshold,
            "strict": not args.lenient,
        },
    )
    summary = {"truncation": dist.truncation, **records.metrics_dict(m)}
    records.write_distribution(args.output, dist, summary, manifest)
    print(f"wrote {args.output} (mean={m.mean:.6g}, fano={_fano_str(m)})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params_from(args)
    grid = _grid_from(args)
    mset = mc.simulate(params, grid, args.trunc, args.shots, args.seed)
    manifest = _experiment_manifest("simulate", args, params, grid)
    records.write_experiment(args.output, mset, manifest)
    print(f"wrote {args.output} ({grid.n_tau + 1} sampling times, "
          f"{args.shots} shots each)")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    mset, experiment_manifest = records.read_experiment(args.input)
    truncation = args.trunc
    if truncation is None:
        truncation = experiment_manifest.get("spec", {}).get(
            "truncation", DEFAULT_TRUNCATION
        )
    kern = build_kernel(mset.grid, truncation)
    config = emfit.EmConfig(max_iterations=args.iterations,
                            stop_tolerance=args.stop_tol)
    result = emfit.reconstruct(kern, mset.frequencies, config)

    manifest = records.build_manifest(
        "reconstruct",
        {
            "experiment": experiment_manifest.get("spec"),
            "truncation": truncation,
            "em": records.em_dict(config),
        },
        rng=experiment_manifest.get("rng"),
    )
    summary = _comparison_summary(result, mset, truncation)
    excited_rows = zip(
        mset.grid.points,
        excited_probability(kern, result.estimate),
        mset.frequencies,
    )
    records.write_reconstruction(
        args.output, result.estimate, result.loglik_trace, excited_rows,
        summary, manifest,
    )
    print(f"wrote {args.output} ({_summary_str(summary)})")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    spec = _spec_from(args)
    report = harness.run_pipeline(spec)
    kern = build_kernel(spec.grid, spec.truncation)
    manifest = records.build_manifest(
        "pipeline", records.experiment_spec_dict(spec), rng=mc.RNG_ALGORITHM
    )
    result = report.reconstruction
    summary = {
        "fidelity": report.fidelity,
        "truth_mean": report.truth_metrics.mean,
        "truth_fano": report.truth_metrics.fano,
        "estimate_mean": report.estimate_metrics.mean,
        "estimate_fano": report.estimate_metrics.fano,
        "iterations_run": result.iterations_run,
        "converged_early": result.converged_early,
        "residual": result.residual,
    }
    excited_rows = zip(
        spec.grid.points,
        excited_probability(kern, result.estimate),
        report.measurements.frequencies,
    )
    records.write_reconstruction(
        args.output, result.estimate, result.loglik_trace, excited_rows,
        summary, manifest,
    )
    print(f"wrote {args.output} (G={report.fidelity:.6f})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec_from(args)
    axis = {"n-tau": "n_tau", "shots": "shots_per_tau",
            "iterations": "iterations"}[args.axis]
    if any(b <= a for a, b in zip(args.values, args.values[1:])):
        raise UsageError("--values must be strictly increasing (no duplicates)")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    report = harness.run_sweep(spec, axis, args.values,
                               repeats=args.repeats, jobs=args.jobs)
    manifest = records.build_manifest(
        "sweep",
        {
            "base": records.experiment_spec_dict(spec),
            "axis": axis,
            "values": list(args.values),
            "repeats": args.repeats,
            "jobs": args.jobs,
        },
        rng=mc.RNG_ALGORITHM,
    )
    records.write_sweep(args.output, report, manifest)
    print(f"wrote {args.output} ({len(args.values)} axis points, "
          f"{args.repeats} repeats each)")
    return EXIT_OK


def _spec_from(args) -> harness.ExperimentSpec:
    if getattr(args, "preset", None) is not None:
        return harness.preset_spec(args.preset, seed=args.seed)
    params = _params_from(args)
    grid = _grid_from(args)
    return harness.ExperimentSpec(
        params=params,
        grid=grid,
        truncation=args.trunc,
        shots_per_tau=args.shots,
        em=emfit.EmConfig(max_iterations=args.iterations,
                          stop_tolerance=args.stop_tol),
        seed=args.seed,
    )


def _experiment_manifest(command, args, params, grid) -> dict:
    return records.build_manifest(
        command,
        {
            "params": records.params_dict(params),
            "theta_pi": args.theta_pi,
            "grid": records.grid_dict(grid),
            "truncation": args.trunc,
            "shots_per_tau": args.shots,
            "seed": args.seed,
        },
        rng=mc.RNG_ALGORITHM,
    )


def _comparison_summary(result, mset, truncation) -> dict:
    est = metrics(result.estimate)
    summary = {
        "estimate_mean": est.mean,
        "estimate_fano": est.fano,
        "iterations_run": result.iterations_run,
        "converged_early": result.converged_early,
        "residual": result.residual,
    }
    if mset.truth_params is not None:
        truth = steady_state(mset.truth_params, truncation, strict=False)
        tm = metrics(truth)
        summary.update(
            fidelity=fidelity(result.estimate, truth),
            truth_mean=tm.mean,
            truth_fano=tm.fano,
        )
    return summary


def _summary_str(summary) -> str:
    if "fidelity" in summary:
        return f"G={summary['fidelity']:.6f}"
    return f"mean={summary['estimate_mean']:.6g}"


def _fano_str(m) -> str:
    return "undefined" if m.fano is None else f"{m.fano:.6g}"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
