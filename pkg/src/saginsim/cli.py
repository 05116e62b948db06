"""Command line front end: single runs and Monte-Carlo scheme comparisons.

``saginsim run`` executes one simulation and writes a per-step metrics
CSV, a manifest capturing the fully resolved configuration, and a text
summary.  ``saginsim compare`` sweeps schemes over a scenario dimension
and writes per-cell aggregates, a plot-ready long-format table and the
raw per-run rows.  Rerunning ``run`` on a manifest reproduces the
per-step CSV byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from saginsim import __version__
from saginsim.engine import (
    AGGREGATE_FIELDS,
    CAMPAIGN_METRICS,
    CampaignResult,
    RunResult,
    run_campaign,
    run_once,
)
from saginsim.scenario import (
    ConfigError,
    Scenario,
    SchemeId,
    apply_overrides,
    default_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

STEP_CSV_FIELDS = (
    "step",
    "outage_users",
    "mean_load",
    "mean_rate_bps",
    "fairness",
    "mean_reward",
    "fp_residual",
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"override must look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override has an empty key: {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _load_scenario(args: argparse.Namespace) -> Scenario:
    """Resolve the scenario from config file, overrides and flags."""
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        if isinstance(data, dict) and isinstance(data.get("scenario"), dict):
            data = data["scenario"]  # accept a manifest written by this tool
        scenario = scenario_from_dict(data)
    else:
        scenario = default_scenario()

    overrides: dict[str, Any] = {}
    for item in args.override or []:
        key, value = _parse_override(item)
        overrides[key] = value
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "scheme", None) and args.command == "run":
        overrides["scheme"] = args.scheme
    if overrides:
        scenario = apply_overrides(scenario, overrides)
    return scenario


def _out_dir(args: argparse.Namespace) -> Path:
    if args.out:
        out = Path(args.out)
    elif os.environ.get("SAGIN_SIM_OUT"):
        out = Path(os.environ["SAGIN_SIM_OUT"])
    else:
        out = Path("saginsim_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_steps_csv(path: Path, result: RunResult) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STEP_CSV_FIELDS)
        for r in result.records:
            writer.writerow([getattr(r, name) for name in STEP_CSV_FIELDS])


def _write_manifest(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _summary_lines(result: RunResult) -> list[str]:
    lines = [
        f"scheme: {result.scheme.value}",
        f"seed: {result.seed}",
        f"steps: {len(result.records)}",
        f"runtime_s: {result.runtime_s:.3f}",
    ]
    for name in AGGREGATE_FIELDS:
        lines.append(f"mean {name}: {result.aggregates[name]:.6g}")
    return lines


def cmd_run(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)

    trajectory_rows: list[tuple] = []

    def observer(step, world, record):
        if not args.dump_trajectories:
            return
        for i in range(world.uav_pos.shape[0]):
            x, y, h = world.uav_pos[i]
            trajectory_rows.append((step, f"uav{i}", "uav", x, y, h))
        for j in range(world.sbs_xy.shape[0]):
            x, y = world.sbs_xy[j]
            trajectory_rows.append((step, f"sbs{j}", "sbs", x, y, scenario.sbs_height_m))
        for u in range(world.users_xy.shape[0]):
            x, y = world.users_xy[u]
            trajectory_rows.append((step, f"user{u}", "user", x, y, scenario.user_height_m))

    result = run_once(scenario, observer=observer)

    _write_steps_csv(out / "steps.csv", result)
    _write_manifest(
        out / "manifest.json",
        {
            "saginsim_version": __version__,
            "command": "run",
            "scenario": scenario_to_dict(result.scenario),
        },
    )
    summary = _summary_lines(result)
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    if args.dump_trajectories:
        with (out / "trajectories.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("step", "entity_id", "kind", "x", "y", "h"))
            writer.writerows(trajectory_rows)
    for line in summary:
        print(line)
    print(f"wrote {out / 'steps.csv'}")
    return EXIT_OK


_SWEEP_FIELDS = {"users": "n_users", "uavs": "n_uavs"}


def _parse_sweep(text: str | None, scenario: Scenario) -> tuple[str, list[int]]:
    """Parse --sweep specs like users=50:300:50, uavs=1:8 or users=50,150."""
    if not text:
        return "n_users", [scenario.n_users]
    if "=" not in text:
        raise ConfigError(f"sweep must look like name=spec, got {text!r}")
    name, spec = text.split("=", 1)
    field = _SWEEP_FIELDS.get(name.strip())
    if field is None:
        valid = ", ".join(sorted(_SWEEP_FIELDS))
        raise ConfigError(f"unknown sweep dimension {name!r}; valid: {valid}")
    spec = spec.strip()
    try:
        if "," in spec:
            values = [int(v) for v in spec.split(",")]
        elif ":" in spec:
            parts = [int(v) for v in spec.split(":")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError
            if step <= 0 or hi < lo:
                raise ValueError
            values = list(range(lo, hi + 1, step))
        else:
            values = [int(spec)]
    except ValueError:
        raise ConfigError(f"cannot parse sweep values from {spec!r}") from None
    if not values:
        raise ConfigError(f"sweep {text!r} produced no values")
    return field, values


def _parse_schemes(text: str | None) -> list[SchemeId]:
    if not text or text.strip().lower() == "all":
        return list(SchemeId)
    schemes = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            schemes.append(SchemeId(part))
        except ValueError:
            valid = ", ".join(m.value for m in SchemeId)
            raise ConfigError(f"unknown scheme {part!r}; valid schemes: {valid}") from None
    if not schemes:
        raise ConfigError("no schemes given")
    return schemes


def _write_campaign_outputs(out: Path, result: CampaignResult) -> None:
    with (out / "aggregate.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["sweep_name", "sweep_value", "scheme", "n_runs"]
        for metric in CAMPAIGN_METRICS:
            header += [f"{metric}_mean", f"{metric}_stderr"]
        writer.writerow(header)
        for cell in result.cells:
            row = [result.sweep_name, cell.sweep_value, cell.scheme.value, cell.n_runs]
            for metric in CAMPAIGN_METRICS:
                row += [cell.means[metric], cell.stderrs[metric]]
            writer.writerow(row)

    with (out / "long.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("metric", "scheme", "x", "mean", "stderr"))
        for cell in result.cells:
            for metric in CAMPAIGN_METRICS:
                writer.writerow(
                    (
                        metric,
                        cell.scheme.value,
                        cell.sweep_value,
                        cell.means[metric],
                        cell.stderrs[metric],
                    )
                )

    with (out / "runs.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["sweep_name", "sweep_value", "scheme", "seed", *CAMPAIGN_METRICS]
        writer.writerow(header)
        for row in result.runs:
            writer.writerow([row[h] for h in header])


def cmd_compare(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args)
    schemes = _parse_schemes(args.scheme)
    sweep_name, sweep_values = _parse_sweep(args.sweep, scenario)
    n_mc = args.mc if args.mc is not None else scenario.n_montecarlo
    if n_mc < 1:
        raise ConfigError(f"--mc must be >= 1, got {n_mc}")
    out = _out_dir(args)

    def progress(row: dict[str, Any]) -> None:
        if args.quiet:
            return
        print(
            f"  {row['scheme']:12s} {sweep_name}={row['sweep_value']:<4d} "
            f"seed={row['seed']} reward={row['mean_reward']:.4f}",
            file=sys.stderr,
        )

    result = run_campaign(
        scenario,
        schemes,
        sweep_name,
        sweep_values,
        n_mc,
        master_seed=args.seed,
        progress=progress,
    )
    _write_campaign_outputs(out, result)
    _write_manifest(
        out / "manifest.json",
        {
            "saginsim_version": __version__,
            "command": "compare",
            "scenario": scenario_to_dict(scenario),
            "schemes": [s.value for s in schemes],
            "sweep_name": sweep_name,
            "sweep_values": list(sweep_values),
            "n_montecarlo": n_mc,
            "master_seed": scenario.seed if args.seed is None else args.seed,
            "failures": result.failures,
        },
    )

    print(f"{'scheme':12s} {'x':>5s} {'reward':>8s} {'load':>7s} {'fairness':>9s} {'outage':>8s}")
    for cell in result.cells:
        print(
            f"{cell.scheme.value:12s} {cell.sweep_value:5d} "
            f"{cell.means['mean_reward']:8.4f} {cell.means['mean_load']:7.3f} "
            f"{cell.means['fairness']:9.4f} {cell.means['outage_users']:8.2f}"
        )
    if result.failures:
        print(f"{len(result.failures)} run(s) failed; see manifest.json", file=sys.stderr)
    print(f"wrote {out / 'aggregate.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saginsim",
        description="UAV-assisted space-air-ground network simulator",
    )
    parser.add_argument("--version", action="version", version=f"saginsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a single simulation run")
    run_p.add_argument("--config", help="scenario JSON (or a manifest from a previous run)")
    run_p.add_argument("--scheme", help="scheme name, e.g. sat3d_ca")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")
    run_p.add_argument("--out", help="output directory (default $SAGIN_SIM_OUT or ./saginsim_out)")
    run_p.add_argument(
        "--override",
        action="append",
        metavar="KEY=VALUE",
        help="override a scenario field (repeatable); nested: algo_params.epsilon=0.2",
    )
    run_p.add_argument(
        "--dump-trajectories",
        action="store_true",
        help="also write per-step entity positions to trajectories.csv",
    )
    run_p.set_defaults(func=cmd_run)

    cmp_p = sub.add_parser("compare", help="Monte-Carlo comparison of schemes over a sweep")
    cmp_p.add_argument("--config", help="scenario JSON (or a manifest)")
    cmp_p.add_argument("--scheme", help="comma-separated scheme names, or 'all'")
    cmp_p.add_argument("--sweep", help="users=50:300:50 | uavs=1:8 | users=50,150,300")
    cmp_p.add_argument("--mc", type=int, help="Monte-Carlo repetitions per cell")
    cmp_p.add_argument("--seed", type=int, help="master seed deriving the shared per-run seeds")
    cmp_p.add_argument("--out", help="output directory (default $SAGIN_SIM_OUT or ./saginsim_out)")
    cmp_p.add_argument("--override", action="append", metavar="KEY=VALUE")
    cmp_p.add_argument("--quiet", action="store_true", help="suppress per-run progress lines")
    cmp_p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surface runtime failures as exit 2
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
