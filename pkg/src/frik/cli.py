"""Command-line entry point wiring config, robot, toolpath, solver and
analysis into reproducible experiment runs.

Commands: ``generate`` (write a cone-spiral toolpath file), ``solve`` (solve
a toolpath and write trajectory/travel/timing reports), ``workspace``
(workpiece-placement sweep over the wall grid), ``compare`` (ad hoc vs
functionally redundant back-to-back with a delta report).

Exit codes: 0 success, 1 usage/config error, 2 convergence failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    SweepSpec,
    TravelReport,
    WorkspaceMap,
    joint_travel,
    summarize_timing,
    workspace_summary,
    workspace_sweep,
)
from .config import ConfigError, RunConfig, apply_flag_overrides, load_config, resolved_dict
from .errors import FrikError, NotConverged
from .robot import RobotModel, irb4600, load_robot
from .solver import SolveResult, TaskProjector, solve_toolpath
from .toolpath import (
    Toolpath,
    assign_adhoc_orientation,
    generate_cone_spiral,
    load_toolpath,
    toolpath_to_dict,
)

# Reference measurements for the default cone benchmark, reported beside
# measured values so runs are easy to compare.
REFERENCE_TRAVEL_DEG = {"adhoc": 685.549, "frik": 571.313, "pct_change": -16.66}
REFERENCE_WORKSPACE_VOXELS = {"adhoc": 75, "frik": 144, "pct_change": 92.0}
REFERENCE_STEP_TIME_US = 196.0


def _fmt(value: float) -> str:
    return repr(float(value))


def _load_model(config: RunConfig) -> RobotModel:
    if config.robot_file is None:
        return irb4600()
    path = Path(config.robot_file)
    if not path.exists():
        raise ConfigError(f"robot file not found: {path}")
    return load_robot(path)


def _resolve_toolpath(config: RunConfig) -> Toolpath:
    if config.toolpath_file is not None:
        path = Path(config.toolpath_file)
        if not path.exists():
            raise ConfigError(f"toolpath file not found: {path}")
        toolpath = load_toolpath(path)
        if config.workpiece_explicit:
            toolpath = toolpath.with_frame(config.workpiece)
        return toolpath
    return generate_cone_spiral(config.cone).with_frame(config.workpiece)


def _audit_header(config: RunConfig, command: str, mode: str | None = None) -> str:
    audit = resolved_dict(config)
    audit["command"] = command
    if mode is not None:
        audit["mode"] = mode
    return "# config: " + json.dumps(audit, sort_keys=True)


def _write_trajectory_csv(
    file: Path,
    header: str,
    results: list[SolveResult],
    with_timing: bool,
) -> None:
    n = len(results[0].q)
    columns = ["k"] + [f"q{i + 1}_deg" for i in range(n)] + ["iterations", "residual"]
    if with_timing:
        columns.append("us")
    lines = [header, ",".join(columns)]
    for k, res in enumerate(results):
        q_deg = np.degrees(res.q)
        cells = [str(k)] + [_fmt(v) for v in q_deg]
        cells.append(str(res.iterations))
        cells.append(_fmt(np.linalg.norm(res.residual)))
        if with_timing:
            cells.append(_fmt(res.wall_time_us))
        lines.append(",".join(cells))
    file.write_text("\n".join(lines) + "\n")


def _write_travel_csv(file: Path, header: str, reports: dict[str, TravelReport]) -> None:
    n = len(next(iter(reports.values())).per_joint_deg)
    modes = list(reports)
    lines = [header]
    if len(modes) == 2:
        lines.append("joint,travel_adhoc_deg,travel_frik_deg,pct_change")
        adhoc, frik = reports["adhoc"], reports["frik"]
        for i in range(n):
            a, f = adhoc.per_joint_deg[i], frik.per_joint_deg[i]
            pct = 100.0 * (f - a) / a if a else 0.0
            lines.append(f"J{i + 1},{_fmt(a)},{_fmt(f)},{_fmt(pct)}")
        pct = (
            100.0 * (frik.overall_deg - adhoc.overall_deg) / adhoc.overall_deg
            if adhoc.overall_deg
            else 0.0
        )
        lines.append(
            f"overall_6d,{_fmt(adhoc.overall_deg)},{_fmt(frik.overall_deg)},{_fmt(pct)}"
        )
    else:
        mode = modes[0]
        report = reports[mode]
        lines.append("joint,travel_deg")
        for i in range(n):
            lines.append(f"J{i + 1},{_fmt(report.per_joint_deg[i])}")
        lines.append(f"overall_6d,{_fmt(report.overall_deg)}")
    file.write_text("\n".join(lines) + "\n")


def _write_workspace_csv(
    file: Path, header: str, map_adhoc: WorkspaceMap, map_frik: WorkspaceMap
) -> None:
    lines = [header, "y_mm,z_mm,reachable_adhoc,w_adhoc,reachable_frik,w_frik"]
    for iy, y in enumerate(map_adhoc.y_centers):
        for iz, z in enumerate(map_adhoc.z_centers):
            cells = [_fmt(y), _fmt(z)]
            for wmap in (map_adhoc, map_frik):
                ok = bool(wmap.reachable[iy, iz])
                cells.append("1" if ok else "0")
                cells.append(_fmt(wmap.mean_w[iy, iz]) if ok else "")
            lines.append(",".join(cells))
    file.write_text("\n".join(lines) + "\n")


def cmd_generate(config: RunConfig, args) -> int:
    if config.cone is None:
        raise ConfigError("generate needs a cone block (config or --cone-* flags)")
    toolpath = generate_cone_spiral(config.cone)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_file = out_dir / "toolpath.json"
    payload = toolpath_to_dict(toolpath)
    audit = resolved_dict(config)
    audit["command"] = "generate"
    payload["config"] = audit
    out_file.write_text(json.dumps(payload, indent=1, sort_keys=True))
    print(f"wrote {out_file} ({len(toolpath)} targets)")
    return 0


def _solve_modes(
    config: RunConfig, modes: list[str]
) -> tuple[dict[str, list[SolveResult]], int | None]:
    model = _load_model(config)
    if config.q0_rad.shape != (model.n,):
        raise ConfigError(f"q0 length {config.q0_rad.shape[0]} does not match robot n={model.n}")
    base_path = _resolve_toolpath(config)
    runs: dict[str, list[SolveResult]] = {}
    for mode in modes:
        if mode == "adhoc":
            path = assign_adhoc_orientation(base_path)
            proj = TaskProjector(6)
        else:
            path = base_path
            proj = TaskProjector(config.task_dof)
        try:
            runs[mode] = solve_toolpath(model, path, config.q0_rad, proj, config.solver)
        except NotConverged as exc:
            print(
                f"{mode}: solver did not converge at target {exc.index}",
                file=sys.stderr,
            )
            return runs, exc.index
    return runs, None


def cmd_solve(config: RunConfig, args, command: str = "solve") -> int:
    modes = ["adhoc", "frik"] if args.mode == "both" else [args.mode]
    runs, failed = _solve_modes(config, modes)
    if failed is not None:
        return 2
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with_timing = not args.no_timing

    reports: dict[str, TravelReport] = {}
    for mode, results in runs.items():
        header = _audit_header(config, command, mode)
        _write_trajectory_csv(out_dir / f"trajectory_{mode}.csv", header, results, with_timing)
        reports[mode] = joint_travel([r.q for r in results])
        print(
            f"{mode}: {len(results)} targets solved, overall travel "
            f"{reports[mode].overall_deg:.3f} deg"
        )

    _write_travel_csv(out_dir / "travel_report.csv", _audit_header(config, command), reports)
    if with_timing:
        timing = {
            mode: {"mean_us": t.mean_us, "total_us": t.total_us}
            for mode, t in ((m, summarize_timing(r)) for m, r in runs.items())
        }
        payload = {
            "config": resolved_dict(config),
            "timing": timing,
            "reference_step_time_us": REFERENCE_STEP_TIME_US,
        }
        (out_dir / "timing_summary.json").write_text(
            json.dumps(payload, indent=1, sort_keys=True)
        )

    if len(reports) == 2:
        adhoc, frik = reports["adhoc"], reports["frik"]
        pct = 100.0 * (frik.overall_deg - adhoc.overall_deg) / adhoc.overall_deg
        print(
            f"overall 6D travel: adhoc {adhoc.overall_deg:.3f} deg, "
            f"frik {frik.overall_deg:.3f} deg ({pct:+.2f}%)"
        )
        print(
            "reference: adhoc "
            f"{REFERENCE_TRAVEL_DEG['adhoc']} deg, frik {REFERENCE_TRAVEL_DEG['frik']} deg "
            f"({REFERENCE_TRAVEL_DEG['pct_change']:+.2f}%)"
        )
    return 0


def cmd_compare(config: RunConfig, args) -> int:
    args.mode = "both"
    return cmd_solve(config, args, command="compare")


def cmd_workspace(config: RunConfig, args) -> int:
    model = _load_model(config)
    if config.q0_rad.shape != (model.n,):
        raise ConfigError(f"q0 length {config.q0_rad.shape[0]} does not match robot n={model.n}")
    template = _resolve_toolpath(config)
    map_adhoc, map_frik = workspace_sweep(
        model,
        template,
        config.sweep,
        config.q0_rad,
        config.solver,
        jobs=config.jobs,
        frik_task_dof=config.task_dof,
    )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = _audit_header(config, "workspace")
    _write_workspace_csv(out_dir / "workspace.csv", header, map_adhoc, map_frik)
    summary = workspace_summary(map_adhoc, map_frik)
    payload = {
        "config": resolved_dict(config),
        "summary": summary,
        "reference_voxels": REFERENCE_WORKSPACE_VOXELS,
    }
    (out_dir / "workspace_summary.json").write_text(
        json.dumps(payload, indent=1, sort_keys=True)
    )
    print(
        f"reachable voxels: adhoc {summary['adhoc']['reachable_voxels']}, "
        f"frik {summary['frik']['reachable_voxels']} "
        f"(reference {REFERENCE_WORKSPACE_VOXELS['adhoc']} -> "
        f"{REFERENCE_WORKSPACE_VOXELS['frik']})"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run-configuration file")
    common.add_argument("--robot", help="robot description JSON file")
    common.add_argument("--toolpath", help="toolpath file (JSON or CSV)")
    common.add_argument("--task-dof", type=int, choices=(3, 5, 6), dest="task_dof")
    common.add_argument("--mode", choices=("frik", "adhoc", "both"), default="frik")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    common.add_argument("--seed", type=int, help="random seed recorded in outputs")
    common.add_argument(
        "--no-timing",
        action="store_true",
        help="exclude wall-time fields from outputs (golden-file runs)",
    )
    for flag, kind in (
        ("--cone-diameter-mm", float),
        ("--cone-height-mm", float),
        ("--cone-pitch-mm", float),
        ("--cone-samples-per-rev", int),
        ("--cone-standoff-mm", float),
    ):
        common.add_argument(flag, type=kind)

    parser = argparse.ArgumentParser(
        prog="frik",
        description="Functionally redundant inverse kinematics toolpath runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write a cone-spiral toolpath file")
    sub.add_parser("solve", parents=[common], help="solve a toolpath and write reports")
    sub.add_parser("workspace", parents=[common], help="workpiece placement sweep")
    sub.add_parser("compare", parents=[common], help="ad hoc vs FRIK delta report")
    return parser


_COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "workspace": cmd_workspace,
    "compare": cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        config = apply_flag_overrides(config, args)
        config.validate()
        return _COMMANDS[args.command](config, args)
    except (FrikError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
