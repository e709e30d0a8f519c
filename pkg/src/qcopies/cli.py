"""Command-line front end.

Subcommands: allocate, simulate, adaptive, hoeffding, tomography,
tenphoton-cost.  Flag values override --config file entries, which override
defaults.  Every experiment is deterministic under --seed (environment
variable QCOPIES_SEED is the fallback).  Exit codes: 0 success, 2 bad
configuration or usage, 3 numerical/domain error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adaptive as adaptive_mod
from . import hoeffding as hoeffding_mod
from .allocator import (
    BudgetProblem,
    CopyAllocation,
    EIGHT_PHOTON_EXPERIMENT_COPIES,
    EIGHT_PHOTON_REPORTED_OPTIMUM,
    allocate_sc,
    explicit_allocation,
    solve_budget,
    uniform_allocation,
)
from .core import density_from_json, noisy_sc_state, rank_two_sc_state
from .errors import ConfigError, QcopiesError
from .phaselift import ReconstructOptions, reconstruction_curve
from .reports import csv_text, write_text
from .simulator import RngSeed, compare_distributions, run_histogram_experiment, HistogramSpec
from .witness import SettingProbabilities, build_settings, delta_f, setting_probabilities


@dataclass(frozen=True)
class TenPhotonCost:
    """Copy-rate arithmetic for a ten-photon coincidence experiment."""

    rate8_hz: float
    two_photon_per_hour: float
    ten_photon_per_hour: float
    copies: int
    hours: float
    days: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


def ten_photon_cost(rate8_hz: float, copies: int) -> TenPhotonCost:
    """Hours needed to collect ten-photon copies, scaled from the
    eight-photon coincidence rate.

    Eight-photon events need four photon pairs, so the per-hour pair rate is
    the fourth root of the hourly eight-photon rate; ten-photon events need
    five simultaneous pairs, hence the fifth power.
    """
    if not rate8_hz > 0:
        raise QcopiesError(f"rate must be positive, got {rate8_hz}")
    if copies < 0:
        raise QcopiesError(f"copies must be >= 0, got {copies}")
    per_hour8 = rate8_hz * 3600.0
    two = per_hour8 ** 0.25
    ten = two ** 5
    hours = 0.0 if copies == 0 else copies / ten
    return TenPhotonCost(
        rate8_hz=rate8_hz,
        two_photon_per_hour=two,
        ten_photon_per_hour=ten,
        copies=int(copies),
        hours=hours,
        days=hours / 24.0,
    )


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x != ""]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("QCOPIES_SEED")
    return int(env) if env else 0


def _parse_schedule(text: str) -> tuple[float, ...]:
    parts = str(text).split(":")
    if len(parts) == 3:
        return adaptive_mod.geometric_schedule(float(parts[0]), float(parts[1]),
                                               float(parts[2]))
    return tuple(_floats(text))


def _parse_compare(specs, n_settings: int) -> dict[str, CopyAllocation]:
    out: dict[str, CopyAllocation] = {}
    for spec in specs or []:
        if ":" not in spec:
            raise ConfigError(f"comparisons look like name:copies, got {spec!r}")
        name, payload = spec.split(":", 1)
        try:
            if "/" in payload:
                counts = [int(x) for x in payload.split("/")]
                if len(counts) != n_settings:
                    raise ConfigError(
                        f"{name!r} lists {len(counts)} settings, expected {n_settings}")
                out[name] = explicit_allocation(counts)
            else:
                out[name] = uniform_allocation(n_settings, int(payload))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad copy counts in {spec!r}: {exc}") from exc
    return out


def _build_state(n: int, fidelity: float | None, corner_mass: float | None,
                 state_file: str | None = None):
    if state_file is not None:
        try:
            rho = density_from_json(Path(state_file).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read state file {state_file!r}: {exc}") from exc
        if rho.n_qubits != n:
            raise ConfigError(f"state file holds {rho.n_qubits} qubits, --n says {n}")
        return rho
    if fidelity is None:
        raise ConfigError("--fidelity is required to build a synthetic state")
    return noisy_sc_state(n, fidelity, corner_mass)


def _emit(out_dir, files: dict[str, str], stdout_name: str | None = None) -> None:
    if out_dir:
        for name, text in files.items():
            write_text(Path(out_dir) / name, text)
    elif stdout_name:
        sys.stdout.write(files[stdout_name])


# --- subcommand implementations -------------------------------------------

def cmd_allocate(args) -> int:
    if args.k is not None:
        if args.epsilon is None:
            raise ConfigError("--k needs --epsilon (the squared budget)")
        k = np.asarray(_floats(args.k))
        alloc = solve_budget(BudgetProblem(k=k, epsilon=float(args.epsilon)),
                             t_min=args.t_min)
        label = "budget"
    elif args.p is not None:
        p_list = _floats(args.p)
        n = args.n if args.n is not None else len(p_list) - 1
        if len(p_list) != n + 1:
            raise ConfigError(f"--p must list n+1={n + 1} probabilities, got {len(p_list)}")
        if any(not 0 <= x <= 1 for x in p_list):
            raise ConfigError("--p entries must lie in [0, 1]")
        if args.epsilon0 is None:
            raise ConfigError("--p needs --epsilon0")
        probs = SettingProbabilities(n=n, P=np.asarray(p_list))
        alloc = allocate_sc(probs, epsilon0=float(args.epsilon0), t_min=args.t_min)
        label = "sc-witness"
    else:
        raise ConfigError("provide either --p (with --epsilon0) or --k (with --epsilon)")

    rows = [(j + 1, int(alloc.t[j]), alloc.real_t[j]) for j in range(alloc.t.size)]
    csv = csv_text(["setting", "copies", "real_copies"], rows)
    report = {
        "kind": label,
        "epsilon0": alloc.epsilon0,
        "t": alloc.t.tolist(),
        "real_t": alloc.real_t.tolist(),
        "total": alloc.total,
    }
    footer = ""
    if alloc.t.size == len(EIGHT_PHOTON_EXPERIMENT_COPIES):
        exp_total = sum(EIGHT_PHOTON_EXPERIMENT_COPIES)
        opt_total = sum(EIGHT_PHOTON_REPORTED_OPTIMUM)
        report["eight_photon_reference"] = {
            "experiment_total": exp_total,
            "reported_optimum_total": opt_total,
            "this_total": alloc.total,
        }
        footer = (f"# reference: eight-photon experiment {exp_total}, "
                  f"reported optimum {opt_total}\n")
    _emit(args.out, {"allocation.csv": csv + footer, "allocation.json": json.dumps(report)},
          stdout_name=None)
    sys.stdout.write(csv + footer)
    sys.stdout.write(f"total={alloc.total}\n")
    return 0


def cmd_simulate(args) -> int:
    if args.n is None:
        raise ConfigError("--n is required")
    wd = build_settings(args.n)
    rho = _build_state(args.n, args.fidelity, args.corner_mass, args.state)
    p_true = setting_probabilities(rho, wd)
    comparisons = _parse_compare(args.compare, args.n + 1)
    if args.epsilon0 is not None:
        eps0 = float(args.epsilon0)
    elif comparisons:
        first = next(iter(comparisons.values()))
        eps0 = delta_f(p_true, first)
    else:
        raise ConfigError("need --epsilon0 or at least one --compare to set the budget")
    optimized = allocate_sc(p_true, epsilon0=eps0, t_min=args.t_min)
    allocations = dict(comparisons)
    allocations["optimized"] = optimized
    if len(allocations) < 2:
        allocations = {"uniform-match": uniform_allocation(
            args.n + 1, int(np.ceil(optimized.total / (args.n + 1)))), **allocations}
    rng = RngSeed(_resolve_seed(args.seed))
    report = compare_distributions(rho, wd, allocations, trials=args.trials, rng=rng,
                                   method=args.method)
    files = {"comparison.csv": report.to_csv(), "comparison.json": report.to_json()}
    if args.histogram:
        for i, (name, alloc) in enumerate(allocations.items()):
            res = run_histogram_experiment(
                rho, wd, alloc, trials=args.trials, rng=RngSeed(rng.seed, stream=i + 1),
                spec=HistogramSpec(bins=args.bins), method=args.method)
            files[f"histogram_{name}.csv"] = res.histogram.to_csv()
            files[f"histogram_{name}.json"] = res.summary_json()
    _emit(args.out, files)
    sys.stdout.write(report.to_csv())
    opt_row = report.row("optimized")
    sys.stdout.write(f"optimized_total={opt_row.total} savings_pct={opt_row.savings_pct:.6g}\n")
    return 0


def cmd_adaptive(args) -> int:
    if args.n is None:
        raise ConfigError("--n is required")
    wd = build_settings(args.n)
    rho = _build_state(args.n, args.fidelity, args.corner_mass, args.state)
    schedule = _parse_schedule(args.schedule)
    if args.initial_p == "target":
        initial = setting_probabilities(noisy_sc_state(args.n, 1.0), wd).P
    elif args.initial_p is not None:
        initial = np.asarray(_floats(args.initial_p))
    else:
        initial = None
    cfg = adaptive_mod.AdaptiveConfig(
        epsilon_schedule=schedule, initial_P=initial,
        t_initial=args.t_initial, t_min=args.t_min,
    )
    rng = RngSeed(_resolve_seed(args.seed))
    state = adaptive_mod.run_adaptive(rho, wd, cfg, rng.generator(), method=args.method)
    files = {"rounds.csv": state.history_csv(), "final.json": state.final_report_json()}
    _emit(args.out, files)
    sys.stdout.write(state.history_csv())
    sys.stdout.write(f"total={state.total_copies} fidelity={state.fidelity:.6g} "
                     f"fidelity_std={state.fidelity_std:.6g}\n")
    return 0


def cmd_hoeffding(args) -> int:
    if args.coverage:
        if args.n is None:
            raise ConfigError("--n is required for coverage runs")
        wd = build_settings(args.n)
        rho = _build_state(args.n, args.fidelity, args.corner_mass, args.state)
        copies = _ints(args.copies)
        rng = RngSeed(_resolve_seed(args.seed))
        table = hoeffding_mod.coverage_experiment(
            rho, wd, copies, delta=args.delta, repeats=args.repeats, rng=rng,
            method=args.method)
        files = {"coverage.csv": table.to_csv()}
        _emit(args.out, files)
        sys.stdout.write(table.to_csv())
        sys.stdout.write(f"true_value={table.true_value:.6g} "
                         f"all_inside={int(table.all_inside)}\n")
        return 0
    if args.required:
        if args.h is None:
            raise ConfigError("--required needs --h and --delta")
        t = hoeffding_mod.required_copies(float(args.h), float(args.delta))
        sys.stdout.write(json.dumps({"h": float(args.h), "delta": args.delta,
                                     "required_copies": t}) + "\n")
        return 0
    if args.t is None or args.h is None:
        raise ConfigError("joint mode needs --t and --h (or use --coverage/--required)")
    t_list = _ints(args.t)
    h_list = _floats(args.h)
    m = args.settings or max(len(t_list), len(h_list))
    if len(t_list) == 1:
        t_list = t_list * m
    if len(h_list) == 1:
        h_list = h_list * m
    prob = hoeffding_mod.joint_success(t_list, h_list)
    sys.stdout.write(json.dumps({"t": t_list, "h": h_list, "joint_success": prob}) + "\n")
    return 0


def cmd_tomography(args) -> int:
    if args.n is None:
        raise ConfigError("--n is required")
    if args.rank2:
        if args.fidelity is None:
            raise ConfigError("--fidelity is required to build a synthetic state")
        rho = rank_two_sc_state(args.n, args.fidelity)
    else:
        rho = _build_state(args.n, args.fidelity, args.corner_mass, args.state)
    counts = _ints(args.settings)
    rng = RngSeed(_resolve_seed(args.seed))
    curve = reconstruction_curve(
        rho, counts_per_setting=args.counts, setting_counts=counts,
        repeats=args.repeats, rng=rng, family=args.family,
        opts=ReconstructOptions(max_iter=args.max_iter), method=args.method)
    _emit(args.out, {"curve.csv": curve.to_csv()})
    sys.stdout.write(curve.to_csv())
    return 0


def cmd_tenphoton_cost(args) -> int:
    if args.rate8 is None or args.copies is None:
        raise ConfigError("tenphoton-cost needs --rate8 and --copies")
    report = ten_photon_cost(args.rate8, args.copies)
    _emit(args.out, {"cost.json": report.to_json()})
    sys.stdout.write(report.to_json() + "\n")
    return 0


# --- parser / config plumbing ----------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcopies",
        description="Copy budgeting and simulation for SC-state certification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with defaults for this command")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="directory for report files")
        p.add_argument("--method", default="inverse_cdf",
                       choices=["inverse_cdf", "multinomial"])

    def state_opt(p):
        p.add_argument("--state", default=None,
                       help="JSON density-matrix file to use instead of --fidelity")

    p = sub.add_parser("allocate", help="closed-form minimum-copies allocation")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p", help="comma list of n+1 setting probabilities")
    p.add_argument("--epsilon0", type=float, help="bound on the fidelity deviation")
    p.add_argument("--k", help="comma list of variance weights")
    p.add_argument("--epsilon", type=float, help="squared budget for --k mode")
    p.add_argument("--t-min", type=int, default=1)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("simulate", help="compare copy distributions by Monte Carlo")
    common(p)
    state_opt(p)
    p.add_argument("--n", type=int)
    p.add_argument("--fidelity", type=float)
    p.add_argument("--corner-mass", type=float, default=None)
    p.add_argument("--epsilon0", type=float, default=None)
    p.add_argument("--compare", action="append",
                   help="name:copies-per-setting or name:c1/c2/...; repeatable")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--histogram", action="store_true")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--t-min", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("adaptive", help="multi-round feedback protocol")
    common(p)
    state_opt(p)
    p.add_argument("--n", type=int)
    p.add_argument("--fidelity", type=float)
    p.add_argument("--corner-mass", type=float, default=None)
    p.add_argument("--schedule", default="0.01:0.1:0.00001",
                   help="start:ratio:final or explicit comma list of squared budgets")
    p.add_argument("--t-initial", type=int, default=5)
    p.add_argument("--initial-p", default=None,
                   help="comma list, or 'target' for pure-state priors")
    p.add_argument("--t-min", type=int, default=1)
    p.set_defaults(func=cmd_adaptive)

    p = sub.add_parser("hoeffding", help="concentration bounds and coverage")
    common(p)
    state_opt(p)
    p.add_argument("--coverage", action="store_true")
    p.add_argument("--required", action="store_true")
    p.add_argument("--n", type=int)
    p.add_argument("--fidelity", type=float)
    p.add_argument("--corner-mass", type=float, default=None)
    p.add_argument("--delta", type=float, default=1e-4)
    p.add_argument("--copies", default="50,100,200,400,800,1600,3200")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--t", help="copies per setting (scalar or comma list)")
    p.add_argument("--h", help="deviation bound (scalar or comma list)")
    p.add_argument("--settings", type=int, default=None)
    p.set_defaults(func=cmd_hoeffding)

    p = sub.add_parser("tomography", help="phaselift reconstruction curve")
    common(p)
    state_opt(p)
    p.add_argument("--n", type=int)
    p.add_argument("--fidelity", type=float)
    p.add_argument("--corner-mass", type=float, default=None)
    p.add_argument("--counts", type=int, default=10000, help="copies per setting")
    p.add_argument("--settings", default="8,16,30,45,56,64",
                   help="comma list of setting counts for the curve")
    p.add_argument("--family", default="projectors", choices=["projectors", "pauli"])
    p.add_argument("--rank2", action="store_true",
                   help="use the rank-two noise model instead of white noise")
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--max-iter", type=int, default=5000)
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("tenphoton-cost", help="copy-rate arithmetic for ten photons")
    common(p)
    p.add_argument("--rate8", type=float, help="eight-photon coincidence rate in Hz")
    p.add_argument("--copies", type=int)
    p.set_defaults(func=cmd_tenphoton_cost)

    _SUBPARSERS.update(sub.choices)
    return parser


_SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


def _apply_config(args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    """Overlay config-file values under explicitly passed flags."""
    if not args.config:
        return args
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config file must hold a JSON object")
    subparser = _SUBPARSERS[args.command]
    options = {a.dest: a.option_strings for a in subparser._actions}
    passed = set(argv)
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in options or dest in ("help", "config"):
            raise ConfigError(f"unknown config key {key!r} for command {args.command!r}")
        if any(opt in passed for opt in options[dest]):
            continue  # explicit flag wins
        setattr(args, dest, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QcopiesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
