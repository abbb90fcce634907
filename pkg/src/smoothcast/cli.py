"""Command-line entry points.

Subcommands:
    simulate-longterm    drive the delayed-feedback aggregator on a built-in scenario
    simulate-regression  drive the smoothing regressor on switching data
    replicate-figure1    the full switching experiment with regret traces (CSV)
    verify-bounds        run the bound-verification sweep; exit 0 iff all checks pass

Flag values resolve as: explicit flag > --config JSON entry > built-in default.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .datasets import SwitchingDatasetConfig, generate_switching_dataset
from .experiments import (
    LongTermScenario,
    default_longterm_sweep,
    default_regression_sweep,
    run_bound_sweep,
    run_longterm_scenario,
    run_switching_experiment,
    write_figure_csv,
    write_sweep_csv,
)
from .regret import longterm_regret_bound, regression_regret_bound

_COMMON_FLAGS = {
    "horizon": dict(type=int, help="forecast window length (steps of feedback delay)"),
    "eta": dict(type=float, help="learning rate; default 1/(2*bound^2)"),
    "bound": dict(type=float, help="half-width of the outcome interval"),
    "window": dict(type=int, help="sliding-window size for ridge experts"),
    "sigma": dict(type=float, help="ridge regularization strength"),
    "subst": dict(choices=["vovk", "mean"], help="substitution rule"),
    "seed": dict(type=int, help="random seed"),
    "steps": dict(type=int, help="number of steps"),
    "segments": dict(type=int, help="number of regimes in the switching data"),
    "noise": dict(type=float, help="observation noise standard deviation"),
    "out": dict(type=str, help="output CSV path"),
    "config": dict(type=str, help="JSON file with default flag values"),
}


def _add_flags(parser: argparse.ArgumentParser, names: Sequence[str]) -> None:
    for name in names:
        parser.add_argument(f"--{name}", default=None, **_COMMON_FLAGS[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothcast",
        description="Expert aggregation for long-horizon forecasting with delayed feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "simulate-longterm", help="delayed-feedback aggregation on a built-in scenario"
    )
    _add_flags(p, ["horizon", "eta", "bound", "subst", "seed", "steps", "out", "config"])
    p.add_argument("--experts", type=int, default=None, help="number of expert streams")
    p.add_argument(
        "--scenario",
        choices=["synthetic", "adversarial"],
        default=None,
        help="outcome/stream generator",
    )

    p = sub.add_parser("simulate-regression", help="smoothing regression on switching data")
    _add_flags(
        p,
        [
            "eta",
            "bound",
            "window",
            "sigma",
            "subst",
            "seed",
            "steps",
            "segments",
            "noise",
            "out",
            "config",
        ],
    )
    p.add_argument("--features", type=int, default=None, help="feature dimension")

    p = sub.add_parser(
        "replicate-figure1", help="switching experiment with per-expert regret traces"
    )
    _add_flags(
        p,
        [
            "eta",
            "bound",
            "window",
            "sigma",
            "subst",
            "seed",
            "steps",
            "segments",
            "noise",
            "out",
            "config",
        ],
    )
    p.add_argument("--features", type=int, default=None, help="feature dimension")

    p = sub.add_parser("verify-bounds", help="bound-verification sweep over many runs")
    _add_flags(p, ["out", "config"])
    p.add_argument(
        "--skip-regression",
        action="store_true",
        help="run only the long-horizon part of the sweep",
    )
    return parser


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """explicit flag > config-file entry > built-in default."""
    merged = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _cmd_simulate_longterm(args: argparse.Namespace) -> int:
    opts = _resolve(
        args,
        {
            "horizon": 5,
            "eta": None,
            "bound": 1.0,
            "subst": "vovk",
            "seed": 1,
            "steps": 200,
            "out": "longterm_run.csv",
            "experts": 3,
            "scenario": "synthetic",
        },
    )
    scenario = LongTermScenario(
        kind=opts["scenario"],
        n_experts=opts["experts"],
        horizon=opts["horizon"],
        steps=opts["steps"],
        bound=opts["bound"],
        seed=opts["seed"],
    )
    result = run_longterm_scenario(scenario, eta=opts["eta"], rule=opts["subst"])
    ledger = result.ledger
    eta = ledger.eta
    lines = ["t,algo_loss,mix_loss,cum_algo_loss,max_cum_excess,excess_bound"]
    cum = 0.0
    d = opts["horizon"]
    for i, (h, m) in enumerate(zip(ledger.algo_losses, ledger.mix_losses)):
        t = i + 1
        cum += h
        bound_t = (
            longterm_regret_bound(opts["experts"], t, d, eta) if t > d else 0.0
        )
        lines.append(
            ",".join(
                [
                    str(t),
                    repr(float(h)),
                    repr(float(m)),
                    repr(float(cum)),
                    repr(float(ledger.max_excess_history[i])),
                    repr(float(bound_t)),
                ]
            )
        )
    with open(opts["out"], "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    bound = longterm_regret_bound(opts["experts"], opts["steps"], d, eta)
    print(f"steps={opts['steps']} experts={opts['experts']} horizon={d}")
    print(f"cumulative loss: {cum:.6f}")
    print(f"max cumulative excess: {ledger.max_regret():.6f} (bound {bound:.6f})")
    print(f"wrote {opts['out']}")
    return 0


def _cmd_simulate_regression(args: argparse.Namespace) -> int:
    opts = _resolve(
        args,
        {
            "eta": None,
            "bound": 1.0,
            "window": 40,
            "sigma": 0.01,
            "subst": "vovk",
            "seed": 0,
            "steps": 500,
            "segments": 3,
            "noise": None,
            "out": "regression_run.csv",
            "features": 5,
        },
    )
    dataset = generate_switching_dataset(
        SwitchingDatasetConfig(
            steps=opts["steps"],
            n_features=opts["features"],
            segments=opts["segments"],
            bound=opts["bound"],
            noise_std=opts["noise"],
            seed=opts["seed"],
        )
    )
    result = run_switching_experiment(
        dataset,
        eta=opts["eta"],
        window=opts["window"],
        ridge=opts["sigma"],
        rule=opts["subst"],
    )
    ledger = result.regressor.ledger
    lines = ["t,outcome,algo_loss,cum_algo_loss,excess_bound"]
    for i in range(opts["steps"]):
        t = i + 1
        lines.append(
            ",".join(
                [
                    str(t),
                    repr(float(dataset.y[i])),
                    repr(float(ledger.algo_losses[i])),
                    repr(float(result.cum_algo[i])),
                    repr(float(result.bound_curve[i])),
                ]
            )
        )
    with open(opts["out"], "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"steps={opts['steps']} window={opts['window']} features={opts['features']}")
    print(f"cumulative loss: {result.final_algo_loss():.6f}")
    print(f"baseline (full-history least squares): {result.final_baseline_loss():.6f}")
    print(f"wrote {opts['out']}")
    return 0


def _cmd_replicate_figure1(args: argparse.Namespace) -> int:
    opts = _resolve(
        args,
        {
            "eta": None,
            "bound": 1.0,
            "window": 40,
            "sigma": 0.01,
            "subst": "vovk",
            "seed": 0,
            "steps": 3000,
            "segments": 7,
            "noise": None,
            "out": "figure1.csv",
            "features": 20,
        },
    )
    dataset = generate_switching_dataset(
        SwitchingDatasetConfig(
            steps=opts["steps"],
            n_features=opts["features"],
            segments=opts["segments"],
            bound=opts["bound"],
            noise_std=opts["noise"],
            seed=opts["seed"],
        )
    )
    result = run_switching_experiment(
        dataset,
        eta=opts["eta"],
        window=opts["window"],
        ridge=opts["sigma"],
        rule=opts["subst"],
    )
    write_figure_csv(result, opts["out"])
    eta = result.regressor.spec.eta
    bound = regression_regret_bound(opts["steps"], eta)
    print(f"steps={opts['steps']} window={opts['window']} features={opts['features']}")
    print(f"trace births: {result.trace_births}")
    print(f"cumulative loss: {result.final_algo_loss():.6f}")
    print(f"baseline (full-history least squares): {result.final_baseline_loss():.6f}")
    if result.trace_births:
        worst = max(float(np.max(result.traces[b])) for b in result.trace_births)
        print(f"worst traced regret: {worst:.6f} (final bound {bound:.6f})")
    print(f"wrote {opts['out']}")
    return 0


def _cmd_verify_bounds(args: argparse.Namespace) -> int:
    opts = _resolve(args, {"out": "bound_report.csv"})
    entries = default_longterm_sweep()
    if not args.skip_regression:
        entries = entries + default_regression_sweep()
    report = run_bound_sweep(entries)
    write_sweep_csv(report, opts["out"])
    worst = report.worst_by_check()
    n_pass = sum(row.passed for row in report.rows)
    print(f"ran {len(entries)} runs, {len(report.rows)} checks in {report.elapsed_seconds:.1f}s")
    for name in sorted(worst):
        print(f"  {name}: worst slack {worst[name]:.3e}")
    print(f"checks passed: {n_pass}/{len(report.rows)}")
    print(f"wrote {opts['out']}")
    return 0 if report.all_passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "simulate-longterm": _cmd_simulate_longterm,
        "simulate-regression": _cmd_simulate_regression,
        "replicate-figure1": _cmd_replicate_figure1,
        "verify-bounds": _cmd_verify_bounds,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
