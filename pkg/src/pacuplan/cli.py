"""Command-line pipeline: generate | forecast | optimize | validate | sweep.

Exit codes: 0 on success, 2 for input validation problems, 1 for anything
unexpected.  Every command is deterministic under a fixed --seed and writes
a .manifest.json next to its primary output recording the resolved
configuration and timing.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__, io
from .model import max_expected_occupancy
from .simulation import GenSpec, coverage_stats, generate_instance, monte_carlo_curve
from .solver import SAConfig, baseline_schedule, simulated_annealing
from . import forecast


def _manifest(args: argparse.Namespace, config: dict, inputs: list[str],
              outputs: list[str], started: float) -> None:
    io.write_manifest(io.RunManifest(
        command=args.command,
        version=__version__,
        seed=getattr(args, "seed", None),
        config=config,
        inputs=inputs,
        outputs=outputs,
        wall_clock_seconds=time.perf_counter() - started,
    ), outputs[0])


def cmd_generate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    overrides = {
        "or_count": args.ors,
        "surgeon_count": args.surgeons,
        "patient_count": args.patients,
        "recovery_fraction": args.recovery_fraction,
        "or_open_hours": args.or_hours,
        "day_hours": args.day_hours,
        "seed": args.seed,
    }
    fields = {k: v for k, v in overrides.items() if v is not None}
    if args.spec:
        payload = io.read_json(args.spec)
        ranges = {k: tuple(v) if isinstance(v, list) else v for k, v in payload.items()}
        fields = {**ranges, **fields}
    spec = GenSpec(**fields)
    instance = generate_instance(spec)
    io.write_instance(instance, args.out)
    print(f"wrote {args.out}: {len(instance.patients)} patients, "
          f"{len(instance.surgeons)} surgeons, {instance.or_count} ORs, "
          f"{instance.recovery_count()} needing recovery, "
          f"ORs open {instance.or_open_hours} h of a {instance.day_hours} h day")
    _manifest(args, {k: list(v) if isinstance(v, tuple) else v
                     for k, v in spec.__dict__.items()},
              [args.spec] if args.spec else [], [args.out], started)
    return 0


def cmd_forecast(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    instance = io.read_instance(args.instance)
    schedule = io.read_schedule(args.schedule)
    starts = []
    for p in instance.patients:
        if p.id not in schedule.starts:
            raise ValueError(f"{args.schedule}: no start time for patient {p.id}")
        starts.append(schedule.starts[p.id])
    curve = forecast.occupancy_curve(instance.patients, starts,
                                     grid_step=args.grid_step, horizon=instance.day_hours)
    io.write_occupancy_csv(curve, args.out)
    print(f"wrote {args.out}: {curve.times.size} grid points, "
          f"peak expected occupancy {curve.peak():.4f}")
    _manifest(args, {"grid_step": args.grid_step},
              [args.instance, args.schedule], [args.out], started)
    return 0


def _sa_config(args: argparse.Namespace, seed: int) -> SAConfig:
    return SAConfig(iterations=args.iterations,
                    initial_temperature=args.initial_temperature,
                    cooling_factor=args.cooling_factor,
                    cooling_period=args.cooling_period,
                    grid_step=args.grid_step,
                    seed=seed)


def cmd_optimize(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.replicas < 1:
        raise ValueError("need at least one replica")
    instance = io.read_instance(args.instance)
    base = baseline_schedule(instance)
    base_meo = max_expected_occupancy(instance, base, grid_step=args.grid_step)

    reports = [simulated_annealing(instance, _sa_config(args, args.seed + i))
               for i in range(args.replicas)]
    winner = min(range(len(reports)), key=lambda i: (reports[i].best_meo, i))
    best = reports[winner]

    io.write_schedule(best.best_schedule, args.out)
    report_path = Path(args.out).with_name(Path(args.out).stem + ".report.json")
    reduction = 100.0 * (base_meo - best.best_meo) / base_meo if base_meo > 0 else 0.0
    io.write_json({
        "baseline_meo": base_meo,
        "initial_meo": best.initial_meo,
        "best_meo": best.best_meo,
        "reduction_vs_baseline_pct": reduction,
        "best_sequence": best.best_sequence,
        "accepted": best.accepted,
        "rejected": best.rejected,
        "seed": best.config.seed,
        "config": {
            "iterations": args.iterations,
            "initial_temperature": args.initial_temperature,
            "cooling_factor": args.cooling_factor,
            "cooling_period": args.cooling_period,
            "grid_step": args.grid_step,
        },
        "replicas": [{"seed": r.config.seed, "best_meo": r.best_meo,
                      "initial_meo": r.initial_meo} for r in reports],
        "meo_trace": best.meo_trace,
        "best_trace": best.best_trace,
    }, report_path)
    print(f"wrote {args.out} and {report_path}")
    print(f"baseline MEO {base_meo:.4f} -> best {best.best_meo:.4f} "
          f"({reduction:.1f}% reduction, {args.replicas} replica(s), "
          f"{sum(r.wall_clock_seconds for r in reports):.2f} s annealing)")
    _manifest(args, {"iterations": args.iterations, "cooling_factor": args.cooling_factor,
                     "cooling_period": args.cooling_period,
                     "initial_temperature": args.initial_temperature,
                     "grid_step": args.grid_step, "replicas": args.replicas},
              [args.instance], [args.out, str(report_path)], started)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.samples < 1:
        raise ValueError("need at least one sample")
    instance = io.read_instance(args.instance)
    schedule = io.read_schedule(args.schedule)
    for p in instance.patients:
        if p.id not in schedule.starts:
            raise ValueError(f"{args.schedule}: no start time for patient {p.id}")
    if args.samples == 1:
        print("warning: a single sample gives degenerate statistics (zero variance)",
              file=sys.stderr)
    empirical = monte_carlo_curve(instance, schedule, args.samples,
                                  grid_step=args.grid_step, mode=args.mode,
                                  rng=np.random.default_rng(args.seed))
    stats = coverage_stats(empirical)
    io.write_json({
        "mode": args.mode,
        "n_samples": stats.n_samples,
        "n_points": stats.n_points,
        "fraction_above": stats.fraction_above,
        "fraction_below": stats.fraction_below,
        "fraction_inside": stats.fraction_inside,
        "mean_abs_error": stats.mean_abs_error,
    }, args.out)
    print(f"wrote {args.out}")
    print(f"mode={args.mode} samples={stats.n_samples}: "
          f"mean |error| vs analytic mean {stats.mean_abs_error:.4f}; "
          f"band coverage {stats.fraction_inside:.3%} inside "
          f"({stats.fraction_above:.3%} above, {stats.fraction_below:.3%} below)")
    _manifest(args, {"samples": args.samples, "mode": args.mode, "grid_step": args.grid_step},
              [args.instance, args.schedule], [args.out], started)
    return 0


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.reps < 1:
        raise ValueError("need at least one repetition per cell")
    instance_paths = sorted(p for p in Path(args.instances).glob("*.json")
                            if not p.name.endswith(".manifest.json"))
    if not instance_paths:
        raise ValueError(f"no instance files found in {args.instances}")
    instances = [io.read_instance(p) for p in instance_paths]

    cells = list(itertools.product(args.iteration_grid, args.factor_grid, args.period_grid))
    results = []
    for iterations, factor, period in cells:
        totals = []
        for rep in range(args.reps):
            config_seed = args.seed + rep
            total = 0.0
            for inst in instances:
                config = SAConfig(iterations=iterations, cooling_factor=factor,
                                  cooling_period=period, grid_step=args.grid_step,
                                  seed=config_seed)
                total += simulated_annealing(inst, config).best_meo
            totals.append(total)
        results.append((iterations, factor, period, float(np.mean(totals))))

    best_row = min(range(len(results)), key=lambda i: (results[i][3], i))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iterations", "cooling_factor", "cooling_period",
                         "mean_total_best_meo", "best"])
        for i, (iterations, factor, period, mean_total) in enumerate(results):
            writer.writerow([iterations, float(factor), int(period),
                             float(mean_total), int(i == best_row)])
    iterations, factor, period, mean_total = results[best_row]
    print(f"wrote {args.out}: {len(results)} cells x {args.reps} rep(s) "
          f"on {len(instances)} instance(s)")
    print(f"best cell: iterations={iterations} factor={factor} period={period} "
          f"(mean summed best MEO {mean_total:.4f})")
    _manifest(args, {"iteration_grid": args.iteration_grid, "factor_grid": args.factor_grid,
                     "period_grid": args.period_grid, "reps": args.reps,
                     "grid_step": args.grid_step},
              [str(p) for p in instance_paths], [args.out], started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacuplan",
        description="Forecast recovery-bed occupancy and optimise surgical case sequences.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance file")
    p.add_argument("--spec", help="JSON file of generator fields (ranges etc.)")
    p.add_argument("--patients", type=int, default=None)
    p.add_argument("--surgeons", type=int, default=None)
    p.add_argument("--ors", type=int, default=None)
    p.add_argument("--recovery-fraction", type=float, default=None)
    p.add_argument("--or-hours", type=float, default=None)
    p.add_argument("--day-hours", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="instance.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("forecast", help="occupancy curve CSV for a schedule")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--out", default="occupancy.csv")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("optimize", help="anneal a schedule that levels recovery occupancy")
    p.add_argument("instance")
    p.add_argument("--iterations", type=int, default=2500)
    p.add_argument("--cooling-factor", type=float, default=0.95)
    p.add_argument("--cooling-period", type=int, default=200)
    p.add_argument("--initial-temperature", type=float, default=1.0)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicas", type=int, default=1,
                   help="independent runs with seeds seed, seed+1, ...; best kept")
    p.add_argument("--out", default="schedule.json")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("validate", help="Monte Carlo check of the analytic forecast")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--mode", choices=["true", "matched"], default="true")
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="validation.json")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="grid-sweep annealing parameters over instances")
    p.add_argument("instances", help="directory of instance JSON files")
    p.add_argument("--iteration-grid", type=_int_list, default=[1000, 2000, 3000])
    p.add_argument("--factor-grid", type=_float_list, default=[0.85, 0.90, 0.95])
    p.add_argument("--period-grid", type=_int_list, default=[50, 100, 200])
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - defensive
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
