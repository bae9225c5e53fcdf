"""Command-line entry point.

Subcommands:
    run        -- execute one scenario, writing run.csv, metrics.json, and
                  manifest.json into the output directory.
    compare    -- run every variant along one axis (kinematic controller,
                  dynamic controller, or filter) with the same seed and
                  write per-variant logs plus a combined comparison.json.
    replicate  -- canned benchmark artifacts (fig3..fig6, table1, table2):
                  trajectory/error/velocity/torque logs and the two
                  filter-accuracy tables.

Exit codes: 0 success, 2 config validation failure, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, metrics as metrics_mod, scenarios
from .config import (
    ConfigError,
    apply_overrides,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
)
from .engine import ConfigValidationError, ScenarioConfig, SimulationAbort, run as run_engine, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

COMPARE_AXES = {
    "kinematic": ("kinematic_controller", ("conventional", "bioinspired")),
    "dynamic": ("dynamic_controller", ("conventional_smc", "super_twisting", "bioinspired_smc")),
    "filter": ("filter_kind", ("kf", "sif", "asif")),
}

REPLICATE_SUITES = ("fig3", "fig4", "fig5", "fig6", "table1", "table2")


def _load_scenario(args) -> ScenarioConfig:
    if args.config is not None:
        import yaml

        with open(args.config) as fh:
            data = yaml.safe_load(fh)
    else:
        data = config_to_dict(scenarios.default_scenario())
    if args.set:
        data = apply_overrides(data, args.set)
    cfg = config_from_dict(data)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _execute(cfg: ScenarioConfig, out_dir: Path, csv_name: str = "run.csv") -> dict:
    """Run one scenario and write its artifact files; returns the metrics dict."""
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_engine(cfg)
    report = metrics_mod.build_report(result)
    csv_path = out_dir / csv_name
    metrics_path = out_dir / "metrics.json"
    write_csv(result, csv_path)
    with open(metrics_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = {
        "scenario": cfg.name,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "outputs": {"csv": csv_path.name, "metrics": metrics_path.name},
        "versions": {"formsim": __version__},
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report.to_dict()


def cmd_run(args) -> int:
    cfg = _load_scenario(args)
    _execute(cfg, Path(args.out))
    print(f"wrote run.csv, metrics.json, manifest.json to {args.out}")
    return EXIT_OK


def _summary(report: dict) -> dict:
    per_robot = report["per_robot"]
    return {
        "rmse_linear": {rid: r["rmse_linear"] for rid, r in per_robot.items()},
        "rmse_angular": {rid: r["rmse_angular"] for rid, r in per_robot.items()},
        "rmse_linear_fault_window": {
            rid: r.get("rmse_linear_fault_window") for rid, r in per_robot.items()
        },
        "max_abs_v_cmd": {rid: r["max_abs_v_cmd"] for rid, r in per_robot.items()},
        "tau_l_total_variation": {rid: r["tau_l_total_variation"] for rid, r in per_robot.items()},
    }


def cmd_compare(args) -> int:
    base = _load_scenario(args)
    field, variants = COMPARE_AXES[args.axis]
    out_root = Path(args.out)
    comparison: dict = {"axis": args.axis, "seed": base.seed, "variants": {}}
    for variant in variants:
        cfg = replace(base, **{field: variant, "name": f"{base.name}-{variant}"})
        report = _execute(cfg, out_root / variant)
        summary = _summary(report)
        if variant == "super_twisting":
            summary["note"] = "baseline controller, not part of the reference design"
        comparison["variants"][variant] = summary
    with open(out_root / "comparison.json", "w") as fh:
        json.dump(comparison, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(variants)} variant runs and comparison.json to {args.out}")
    return EXIT_OK


def _format_rmse_table(title: str, reports: dict[str, dict], window_key: str | None) -> str:
    """Fixed-width table of linear/angular RMSE (x 10^-2) per follower for
    the KF and adaptive-SIF runs."""
    kinds = list(reports)
    lines = [title]
    header = (
        f"{'Linear velocity':<18}" + "".join(f"{k.upper():>10}" for k in kinds)
        + "    " + f"{'Angular velocity':<18}" + "".join(f"{k.upper():>10}" for k in kinds)
    )
    lines.append(header)
    robots = sorted(reports[kinds[0]]["per_robot"], key=int)
    for rid in robots:
        def cell(kind: str, channel: str) -> str:
            entry = reports[kind]["per_robot"][rid]
            key = f"rmse_{channel}" if window_key is None else f"rmse_{channel}_{window_key}"
            return f"{entry[key] * 100:>10.2f}"

        row = f"{'Follower ' + rid:<18}" + "".join(cell(k, "linear") for k in kinds)
        row += "    " + f"{'Follower ' + rid:<18}" + "".join(cell(k, "angular") for k in kinds)
        lines.append(row)
    lines.append("(values x 10^-2)")
    return "\n".join(lines)


def cmd_replicate(args) -> int:
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else scenarios.DEFAULT_SEED
    suite = args.suite

    if suite in ("fig3", "fig4"):
        cfg = scenarios.default_scenario(seed)
        _execute(cfg, out_root)
        print(f"{suite}: wrote default-scenario log to {args.out}")
        return EXIT_OK

    if suite == "fig5":
        for kin in ("conventional", "bioinspired"):
            cfg = scenarios.speed_jump_scenario(kin, seed)
            _execute(cfg, out_root / kin)
        print(f"fig5: wrote kinematic-controller comparison to {args.out}")
        return EXIT_OK

    if suite == "fig6":
        for dyn in ("conventional_smc", "super_twisting", "bioinspired_smc"):
            cfg = scenarios.chattering_scenario(dyn, seed)
            _execute(cfg, out_root / dyn)
        print(f"fig6: wrote dynamic-controller comparison to {args.out}")
        return EXIT_OK

    # table1 / table2: filter accuracy, normal vs believed-model fault.
    fault = suite == "table2"
    reports = {}
    for kind in ("kf", "asif"):
        cfg = scenarios.filter_scenario(kind, fault=fault, seed=seed)
        reports[kind] = _execute(cfg, out_root / kind)
    window_key = "fault_window" if fault else None
    title = (
        "Velocity RMSE under believed-model fault"
        if fault
        else "Velocity RMSE under normal conditions"
    )
    table = _format_rmse_table(title, reports, window_key)
    with open(out_root / f"{suite}.txt", "w") as fh:
        fh.write(table + "\n")
    print(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"formsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="scenario YAML (default: built-in scenario)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="PATH=VALUE",
            help="dotted-path config override (repeatable), e.g. filter.kind=kf",
        )

    p_run = sub.add_parser("run", help="run one scenario")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run all variants along one axis")
    common(p_cmp)
    p_cmp.add_argument("--axis", required=True, choices=sorted(COMPARE_AXES))
    p_cmp.set_defaults(func=cmd_compare)

    p_rep = sub.add_parser("replicate", help="run a canned benchmark suite")
    p_rep.add_argument("--suite", required=True, choices=REPLICATE_SUITES)
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--seed", type=int, default=None)
    p_rep.set_defaults(func=cmd_replicate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigValidationError) as exc:
        errors = getattr(exc, "errors", [str(exc)])
        for err in errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
