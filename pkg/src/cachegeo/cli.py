"""Command-line interface.

Subcommands: ``analytic`` (closed-form quantities), ``simulate`` (Monte
Carlo estimate vs closed form), ``sweep`` and ``figure`` (tables to CSV and
JSON), ``plan`` (density or replication-ratio planning).

Exit codes: 0 success, 2 validation failure, 3 degenerate simulation,
4 infeasible planning target.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .analytic import (
    cache_hit_prob,
    replication_ratio_bounds,
    content_outage,
    kappa,
    hit_target_feasible,
    optimal_density,
)
from .model import ParameterError, SystemParams, db_to_linear, validate
from .simulate import (
    DegenerateSampleError,
    Mode,
    SimConfig,
    estimate_content_outage,
    estimate_physical,
    recommended_window_radius,
)
from .sweep import (
    Axis,
    FIGURE_NUMBERS,
    Quantity,
    SweepSpec,
    emit_csv,
    emit_json,
    figure_preset,
    run_sweep,
    spec_from_dict,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_INFEASIBLE = 4

_QUANTITY_NAMES = {
    "outage": Quantity.CONTENT_OUTAGE,
    "hit": Quantity.CACHE_HIT,
    "density": Quantity.OPTIMAL_DENSITY,
}

_AXIS_NAMES = {
    "lambda-s": Axis.LAMBDA_S,
    "pc": Axis.PC,
    "rth": Axis.R_TH,
    "gamma-db": Axis.GAMMA_DB,
    "epsilon": Axis.EPSILON,
}


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lambda_s", type=float, required=True,
                        help="SBS density [SBS/m^2]")
    parser.add_argument("--alpha", type=float, required=True,
                        help="path loss exponent (> 2)")
    parser.add_argument("--gamma-db", dest="gamma_db", type=float, required=True,
                        help="SIR threshold [dB]")
    parser.add_argument("--rth", type=float, required=True,
                        help="threshold distance [m]")
    parser.add_argument("--d", dest="cache_size_d", type=int, required=True,
                        help="contents cached per SBS")
    parser.add_argument("--library", dest="library_size", type=int, required=True,
                        help="library size |C|")


def _params_from_args(args: argparse.Namespace) -> SystemParams:
    return validate(
        SystemParams(
            lambda_s=args.lambda_s,
            alpha=args.alpha,
            gamma=db_to_linear(args.gamma_db),
            r_th=args.rth,
            cache_size_d=args.cache_size_d,
            library_size=args.library_size,
        )
    )


def _print_block(pairs) -> None:
    width = max(len(key) for key, _ in pairs)
    for key, value in pairs:
        rendered = repr(value) if isinstance(value, float) else value
        print(f"{key:<{width}}  {rendered}")


def cmd_analytic(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    out = {
        "params": {**asdict(params), "pc": params.pc},
        "kappa": kappa(params.alpha),
        "replication_ratio": params.pc,
        "cache_hit_prob": cache_hit_prob(params),
        "content_outage": content_outage(params),
    }
    if args.epsilon is not None:
        out["epsilon"] = args.epsilon
        out["hit_target_feasible"] = hit_target_feasible(params, args.epsilon)
    if args.json:
        print(json.dumps(out, indent=2))
        return EXIT_OK
    pairs = [
        ("kappa", out["kappa"]),
        ("replication ratio", out["replication_ratio"]),
        ("cache hit prob", out["cache_hit_prob"]),
        ("content outage", out["content_outage"]),
    ]
    if args.epsilon is not None:
        pairs.append(
            ("feasible for epsilon", f"{out['hit_target_feasible']} (epsilon={args.epsilon!r})")
        )
    _print_block(pairs)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    mode = Mode(args.mode)
    window = args.window if args.window is not None else recommended_window_radius(params)
    cfg = SimConfig(
        trials=args.trials, master_seed=args.seed, window_radius=window, mode=mode
    )
    analytic_value = content_outage(params)
    if mode is Mode.PHYSICAL:
        estimate = estimate_physical(params, cfg)
    else:
        estimate = estimate_content_outage(params, cfg)
    verdict = "PASS" if estimate.contains(analytic_value) else "FAIL"
    out = {
        "params": {**asdict(params), "pc": params.pc},
        "mode": mode.value,
        "trials": cfg.trials,
        "master_seed": cfg.master_seed,
        "window_radius": window,
        "analytic_content_outage": analytic_value,
        "estimate": {
            "mean": estimate.mean,
            "ci_low": estimate.ci_low,
            "ci_high": estimate.ci_high,
            "confidence": estimate.confidence,
            "n": estimate.n,
            "n_discarded": estimate.n_discarded,
        },
        "verdict": verdict,
    }
    if args.json:
        print(json.dumps(out, indent=2))
        return EXIT_OK
    _print_block(
        [
            ("mode", mode.value),
            ("trials", str(cfg.trials)),
            ("window radius", window),
            ("analytic outage", analytic_value),
            ("simulated mean", estimate.mean),
            (
                "confidence interval",
                f"[{estimate.ci_low!r}, {estimate.ci_high!r}] at {estimate.confidence!r}",
            ),
            ("effective samples", f"{estimate.n} ({estimate.n_discarded} discarded)"),
            ("verdict", verdict),
        ]
    )
    return EXIT_OK


def _sim_from_flags(args: argparse.Namespace, existing: SimConfig | None) -> SimConfig | None:
    flagged = args.trials is not None or args.window is not None
    if existing is None and not flagged:
        return None
    base = existing or SimConfig(master_seed=args.seed or 0)
    updates = {}
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.window is not None:
        updates["window_radius"] = args.window
    if args.seed is not None:
        updates["master_seed"] = args.seed
    return replace(base, **updates)


def _grid_from_flags(args: argparse.Namespace) -> tuple[float, ...]:
    if args.steps < 1:
        raise ParameterError("steps", f"steps must be at least 1, got {args.steps}")
    if args.steps == 1:
        return (args.start,)
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise ParameterError("from", "log-spaced grids need positive endpoints")
        lo, hi = math.log10(args.start), math.log10(args.stop)
        return tuple(10 ** (lo + (hi - lo) * i / (args.steps - 1)) for i in range(args.steps))
    return tuple(
        args.start + (args.stop - args.start) * i / (args.steps - 1)
        for i in range(args.steps)
    )


def _write_table(spec: SweepSpec, out_dir: str, name: str, seed: int) -> int:
    table = run_sweep(spec)
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{name}_{seed}.csv"
    json_path = directory / f"{name}_{seed}.json"
    emit_csv(table, csv_path)
    emit_json(table, json_path)
    print(csv_path)
    print(json_path)
    if table.error_count:
        print(f"warning: {table.error_count} cell(s) recorded errors", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.config:
        spec = spec_from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    else:
        required = ("axis", "start", "stop", "steps", "lambda_s", "alpha",
                    "gamma_db", "rth", "cache_size_d", "library_size")
        missing = [name for name in required if getattr(args, name) is None]
        if missing:
            raise ParameterError(
                missing[0], f"missing flags (or use --config): {', '.join(missing)}"
            )
        spec = SweepSpec(
            base=SystemParams(
                lambda_s=args.lambda_s,
                alpha=args.alpha,
                gamma=db_to_linear(args.gamma_db),
                r_th=args.rth,
                cache_size_d=args.cache_size_d,
                library_size=args.library_size,
            ),
            axis=_AXIS_NAMES[args.axis],
            values=(),
        )
    # flags override whatever the config file provided
    if args.axis is not None:
        spec = replace(spec, axis=_AXIS_NAMES[args.axis])
    if args.start is not None or args.stop is not None or args.steps is not None:
        if None in (args.start, args.stop, args.steps):
            raise ParameterError("steps", "grid flags --from/--to/--steps come together")
        spec = replace(spec, values=_grid_from_flags(args))
    if args.quantity is not None:
        spec = replace(spec, quantity=_QUANTITY_NAMES[args.quantity])
    if args.series_axis is not None or args.series_values is not None:
        if None in (args.series_axis, args.series_values):
            raise ParameterError("series", "--series-axis and --series-values come together")
        spec = replace(
            spec,
            series_axis=_AXIS_NAMES[args.series_axis],
            series_values=tuple(float(v) for v in args.series_values.split(",")),
        )
    spec = replace(spec, sim=_sim_from_flags(args, spec.sim))
    name = args.name or spec.label
    if args.seed is not None:
        file_seed = args.seed
    else:
        file_seed = spec.sim.master_seed if spec.sim else 0
    return _write_table(spec, args.out, name, file_seed)


def cmd_figure(args: argparse.Namespace) -> int:
    spec = figure_preset(args.fig)
    if args.trials is not None:
        spec = replace(
            spec,
            sim=SimConfig(
                trials=args.trials, master_seed=args.seed, window_radius=args.window
            ),
        )
    return _write_table(spec, args.out, spec.label, args.seed)


def cmd_plan(args: argparse.Namespace) -> int:
    if args.pc is not None:
        density = optimal_density(args.epsilon, args.pc, args.rth)
        out = {
            "epsilon": args.epsilon,
            "pc": args.pc,
            "r_th": args.rth,
            "lambda_s": density,
        }
        if args.json:
            print(json.dumps(out, indent=2))
        else:
            _print_block([("optimal SBS density [1/m^2]", density)])
        return EXIT_OK
    bound = replication_ratio_bounds(args.lambda_s, args.rth, args.epsilon)
    out = {
        "epsilon": args.epsilon,
        "lambda_s": args.lambda_s,
        "r_th": args.rth,
        "pc_lower": bound.pc_lower,
        "pc_upper": bound.pc_upper,
        "pc_required": bound.pc_required,
        "min_density_area_product": bound.min_density_area_product,
        "feasible": bound.feasible,
    }
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        _print_block(
            [
                ("replication ratio lower bound", bound.pc_required),
                ("replication ratio upper bound", bound.pc_upper),
                ("feasible", str(bound.feasible)),
            ]
        )
    if not bound.feasible:
        print(
            f"infeasible: required replication ratio {bound.pc_required!r} exceeds 1",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cachegeo",
        description="Cache hit and outage model for small cell networks, "
        "with Monte Carlo validation.",
    )
    parser.add_argument("--version", action="version", version=f"cachegeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="evaluate all closed-form quantities")
    _add_param_flags(p)
    p.add_argument("--epsilon", type=float, help="target hit probability for feasibility check")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo estimate vs closed form")
    _add_param_flags(p)
    p.add_argument("--trials", type=int, default=5000, help="Monte Carlo trials (default 5000)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.EMULATED.value)
    p.add_argument("--window", type=float, default=None,
                   help="interference window radius [m] (default: recommended truncation radius)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a parameter sweep, write CSV and JSON")
    p.add_argument("--config", help="JSON sweep spec (flags override its fields)")
    p.add_argument("--axis", choices=sorted(_AXIS_NAMES), help="swept parameter")
    p.add_argument("--from", dest="start", type=float, help="first axis value")
    p.add_argument("--to", dest="stop", type=float, help="last axis value")
    p.add_argument("--steps", type=int, help="number of grid points")
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.add_argument("--quantity", choices=sorted(_QUANTITY_NAMES))
    p.add_argument("--series-axis", dest="series_axis", choices=sorted(_AXIS_NAMES))
    p.add_argument("--series-values", dest="series_values",
                   help="comma-separated values, one curve per value")
    p.add_argument("--lambda", dest="lambda_s", type=float, help="SBS density [SBS/m^2]")
    p.add_argument("--alpha", type=float, help="path loss exponent (> 2)")
    p.add_argument("--gamma-db", dest="gamma_db", type=float, help="SIR threshold [dB]")
    p.add_argument("--rth", type=float, help="threshold distance [m]")
    p.add_argument("--d", dest="cache_size_d", type=int, help="contents cached per SBS")
    p.add_argument("--library", dest="library_size", type=int, help="library size |C|")
    p.add_argument("--trials", type=int, default=None,
                   help="attach Monte Carlo columns with this many trials")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: config value, else 0)")
    p.add_argument("--window", type=float, default=None, help="interference window radius [m]")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--name", default=None, help="output basename (default: spec label)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="run a canned figure-style sweep preset")
    p.add_argument("--fig", type=int, required=True, choices=FIGURE_NUMBERS)
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--trials", type=int, default=None,
                   help="attach Monte Carlo columns with this many trials")
    p.add_argument("--window", type=float, default=None, help="interference window radius [m]")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("plan", help="density or replication-ratio planning for a hit target")
    p.add_argument("--epsilon", type=float, required=True, help="target hit probability in [0, 1)")
    p.add_argument("--rth", type=float, required=True, help="threshold distance [m]")
    unknown = p.add_mutually_exclusive_group(required=True)
    unknown.add_argument("--pc", type=float, help="fixed replication ratio: solve for density")
    unknown.add_argument("--lambda", dest="lambda_s", type=float,
                         help="fixed density: solve for replication-ratio bounds")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_plan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc} (field: {exc.field})", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateSampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
