"""Command-line front end: map generation, training, evaluation, replay.

Every subcommand is deterministic for fixed flags: one root seed feeds the
map generator, obstacle draws, and policy sampling, and artifact files
contain no timestamps (wall-clock data lives in the run manifest instead).
Set NAV_ARENA_LOG=debug|info|warning for log verbosity.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import (
    PlannerSpec,
    aggregate,
    build_planner,
    default_scenarios,
    export_csv,
    export_svg,
    load_csv,
    load_suite,
    relative_performance,
    run_episode,
    run_suite,
)
from .benchmark.report import export_frequency_svg
from .drl.checkpoint import load_params, save_params
from .drl.network import NetworkParams
from .drl.train import TrainConfig, a3c_train
from .worldsim.grid import MapGenParams, OccupancyGrid, generate_random_map

log = logging.getLogger("nav_arena.cli")

_TRAIN_FIELDS = {f.name: f.type for f in dataclasses.fields(TrainConfig)}


def _setup_logging() -> None:
    name = os.environ.get("NAV_ARENA_LOG", "warning").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _usage_error(msg: str):
    # exit status 2 marks bad invocations, matching argparse's own errors;
    # data/runtime failures exit 1 instead
    print(f"nav-arena: {msg}", file=sys.stderr)
    raise SystemExit(2)


def write_manifest(path: Path, command: str, config: dict, seed,
                   artifacts: list[str], start: str, end: str | None = None) -> None:
    """Run provenance: config snapshot, seed, artifact paths, timestamps."""
    path.write_text(json.dumps({
        "tool": "nav-arena",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
        "artifacts": artifacts,
        "started_at": start,
        "finished_at": end,
    }, indent=2, sort_keys=True) + "\n")


# --- gen-map ----------------------------------------------------------------

def _parse_size(text: str) -> tuple[float, float]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"size must look like 10x10, got {text!r}")
    w, h = float(parts[0]), float(parts[1])
    if w <= 0 or h <= 0:
        raise ValueError(f"size must be positive, got {text!r}")
    return w, h


def cmd_gen_map(args) -> int:
    try:
        w_m, h_m = _parse_size(args.size)
    except ValueError as e:
        _usage_error(f"gen-map: {e}")
    res = args.resolution
    params = MapGenParams(
        width=int(round(w_m / res)), height=int(round(h_m / res)),
        resolution=res, n_walls=args.walls, n_static=args.static)
    grid = generate_random_map(args.seed, params)
    grid.save(args.out)
    occ = int(grid.cells.sum())
    print(f"wrote {args.out}: {grid.width}x{grid.height} cells at {res} m "
          f"({grid.world_width:g}x{grid.world_height:g} m), "
          f"{occ} occupied ({100.0 * occ / grid.cells.size:.1f}%)")
    return 0


# --- train ----------------------------------------------------------------

def _coerce(name: str, text: str):
    py_type = _TRAIN_FIELDS[name]
    if py_type == "bool":
        lowered = text.strip().lower()
        if lowered not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"{name}: expected a boolean, got {text!r}")
        return lowered in ("true", "1", "yes")
    if py_type == "int":
        return int(text)
    if py_type in ("float", "float | None"):
        return float(text)
    return text


def load_train_config(path) -> dict:
    """Read the [train] section of an INI file into TrainConfig kwargs."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not cp.read(str(path)):
        raise FileNotFoundError(f"config file {path} not found or unreadable")
    unknown_sections = [s for s in cp.sections() if s != "train"]
    if unknown_sections:
        raise ValueError(f"unknown config sections {unknown_sections}; "
                         f"training settings belong under [train]")
    out = {}
    if cp.has_section("train"):
        for key, value in cp["train"].items():
            if key not in _TRAIN_FIELDS:
                raise ValueError(f"unknown training setting {key!r}")
            out[key] = _coerce(key, value)
    return out


def cmd_train(args) -> int:
    overrides = {}
    if args.config:
        overrides.update(load_train_config(args.config))
    if args.workers is not None:
        overrides["n_workers"] = args.workers
    if args.steps is not None:
        overrides["total_steps"] = args.steps
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = TrainConfig(**overrides)  # validation happens before any work

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    log_path = Path(args.log) if args.log else out.with_suffix(".log.csv")
    manifest_path = out.with_suffix(".manifest.json")
    started = _utc_now()
    write_manifest(manifest_path, "train", dataclasses.asdict(cfg), cfg.seed,
                   [str(out), str(log_path)], started)
    init = load_params(args.resume) if args.resume else None

    log.info("training: %d workers, %d steps, seed %d",
             cfg.n_workers, cfg.total_steps, cfg.seed)
    params, rows = a3c_train(
        cfg, log_path=log_path, init_params=init,
        checkpoint_path=out, checkpoint_every=args.checkpoint_every)
    save_params(params, out)
    write_manifest(manifest_path, "train", dataclasses.asdict(cfg), cfg.seed,
                   [str(out), str(log_path)], started, _utc_now())

    tail = [r["success"] for r in rows[-100:]]
    avg = sum(tail) / len(tail) if tail else float("nan")
    print(f"trained {cfg.total_steps} steps, {len(rows)} episodes; "
          f"final success moving average {avg:.2f}")
    print(f"checkpoint: {out}")
    return 0


# --- evaluate ----------------------------------------------------------------

def _materialize_planners(names, checkpoint, suite):
    by_name = {p.name: p for p in suite.planners} if suite else {}
    planners = []
    for name in names:
        if name in by_name:
            spec = by_name[name]
        elif name == "dwa":
            spec = PlannerSpec(name="dwa", kind="dwa")
        elif name == "arena":
            if not checkpoint:
                _usage_error("evaluate: the arena planner needs --checkpoint")
            spec = PlannerSpec(name="arena", kind="policy", checkpoint=checkpoint)
        else:
            _usage_error(f"evaluate: unknown planner {name!r}")
        if spec.kind == "policy" and checkpoint:
            spec = dataclasses.replace(spec, checkpoint=checkpoint)
        planners.append(build_planner(spec))
    return planners


def _print_stats(stats) -> None:
    header = (f"{'planner':<10} {'scenario':<12} {'runs':>5} {'time[s]':>9} "
              f"{'path[m]':>9} {'coll':>6} {'coll/run':>9} {'succ%':>7} {'t/out':>6}")
    print(header)
    print("-" * len(header))
    for s in stats:
        print(f"{s.planner:<10} {s.scenario:<12} {s.runs:>5} {s.mean_time_s:>9.1f} "
              f"{s.mean_path_m:>9.2f} {s.total_collisions:>6} "
              f"{s.mean_collisions:>9.2f} {s.success_pct:>7.1f} {s.timeouts:>6}")


def _print_relative(rows, reference: str) -> None:
    print(f"\nrelative performance (>1 means better than {reference!r}; "
          f"time/path/collisions use reference/planner, success uses "
          f"planner/reference)")
    header = (f"{'planner':<10} {'scenario':<12} {'time':>6} {'path':>6} "
              f"{'coll':>6} {'succ':>6} {'overall%':>9}")
    print(header)
    print("-" * len(header))
    for r in rows:
        flag = " *" if r.capped else ""
        print(f"{r.planner:<10} {r.scenario:<12} {r.time_ratio:>6.2f} "
              f"{r.path_ratio:>6.2f} {r.collision_ratio:>6.2f} "
              f"{r.success_ratio:>6.2f} {r.overall_pct:>9.1f}{flag}")


def cmd_evaluate(args) -> int:
    suite = load_suite(args.suite) if args.suite else None
    if suite is not None:
        scenarios = suite.scenarios
        names = args.planners.split(",") if args.planners else \
            [p.name for p in suite.planners]
        reference = suite.reference
    else:
        scenarios = default_scenarios(repeats=args.repeats or 100)
        names = args.planners.split(",") if args.planners else ["dwa", "arena"]
        reference = "arena" if "arena" in names else names[0]
    names = [n.strip() for n in names if n.strip()]
    if args.repeats is not None:
        scenarios = [dataclasses.replace(s, repeats=args.repeats) for s in scenarios]
    if args.seed:
        scenarios = [dataclasses.replace(s, seed_base=s.seed_base + args.seed)
                     for s in scenarios]
    planners = _materialize_planners(names, args.checkpoint, suite)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_csv = out_dir / "results.csv"
    manifest_path = out_dir / "manifest.json"
    svg_paths = [out_dir / f"trajectories-{sc.name}.svg" for sc in scenarios] \
        if args.svg else []
    started = _utc_now()
    config_snapshot = {
        "suite": args.suite, "planners": names, "repeats": args.repeats,
        "seed": args.seed, "parallel": args.parallel, "reference": reference,
    }
    write_manifest(manifest_path, "evaluate", config_snapshot, args.seed,
                   [str(results_csv)] + [str(p) for p in svg_paths], started)

    log.info("evaluating %s on %d scenarios", names, len(scenarios))
    records = run_suite(planners, scenarios, parallelism=args.parallel,
                        record_trajectories=args.svg)
    export_csv(records, results_csv)
    failures = {}
    for r in records:
        if r.failure:
            failures.setdefault(r.planner, []).append(r.failure)
    for name, msgs in sorted(failures.items()):
        print(f"warning: {len(msgs)} {name} runs failed, e.g. {msgs[0]!r}",
              file=sys.stderr)
    stats = aggregate(records)
    _print_stats(stats)
    if reference in names:
        _print_relative(relative_performance(stats, reference), reference)

    if args.svg:
        for sc, svg_path in zip(scenarios, svg_paths):
            grid = sc.build_grid()
            by_planner = {}
            for r in records:
                if r.scenario == sc.name and r.trajectory is not None:
                    by_planner.setdefault(r.planner, []).append(r.trajectory)
            export_svg(grid, by_planner, svg_path)
    write_manifest(manifest_path, "evaluate", config_snapshot, args.seed,
                   [str(results_csv)] + [str(p) for p in svg_paths], started,
                   _utc_now())
    print(f"\nwrote {results_csv}")
    return 0


# --- replay ----------------------------------------------------------------

def cmd_replay(args) -> int:
    records = load_csv(args.csv)
    if not records:
        raise SystemExit(f"replay: {args.csv} holds no runs")
    suite = load_suite(args.suite) if args.suite else None
    scenarios = {s.name: s for s in
                 (suite.scenarios if suite else default_scenarios())}

    wanted = [r for r in records if r.planner == args.planner
              and r.scenario == args.scenario]
    if args.run is not None:
        wanted = [r for r in wanted if r.run == args.run]
    if not wanted:
        raise SystemExit(
            f"replay: no runs match planner={args.planner!r} "
            f"scenario={args.scenario!r}"
            + (f" run={args.run}" if args.run is not None else ""))
    if args.scenario not in scenarios:
        raise SystemExit(f"replay: unknown scenario {args.scenario!r}")
    scenario = scenarios[args.scenario]

    if suite and args.planner in {p.name for p in suite.planners}:
        spec = next(p for p in suite.planners if p.name == args.planner)
        if spec.kind == "policy" and args.checkpoint:
            spec = dataclasses.replace(spec, checkpoint=args.checkpoint)
    elif args.planner == "dwa":
        spec = PlannerSpec(name="dwa", kind="dwa")
    else:
        if not args.checkpoint:
            _usage_error(f"replay: planner {args.planner!r} needs --checkpoint")
        spec = PlannerSpec(name=args.planner, kind="policy",
                           checkpoint=args.checkpoint)
    planner = build_planner(spec)

    trajectories = []
    for rec in wanted:
        result = run_episode(planner, scenario, rec.run, record_trajectory=True)
        if (result.collisions, result.success) != (rec.collisions, rec.success):
            log.warning("run %d replayed differently than recorded "
                        "(collisions %d vs %d)", rec.run, result.collisions,
                        rec.collisions)
        trajectories.append(result.trajectory)
    export_frequency_svg(scenario.build_grid(), {args.planner: trajectories},
                         args.out)
    print(f"replayed {len(trajectories)} run(s) to {args.out}")
    return 0


# --- inspect ----------------------------------------------------------------

def _inspect_checkpoint(path: Path) -> None:
    params = load_params(path)
    total = 0
    print(f"{path}: network checkpoint")
    for name, arr in params.arrays():
        print(f"  {name:<12} {str(arr.shape):<14} {arr.size}")
        total += arr.size
    print(f"  total parameters: {total}")


def _inspect_results(path: Path) -> None:
    records = load_csv(path)
    print(f"{path}: {len(records)} runs")
    _print_stats(aggregate(records))


def _inspect_map(path: Path) -> None:
    grid = OccupancyGrid.load(path)
    occ = int(grid.cells.sum())
    print(f"{path}: {grid.width}x{grid.height} cells at {grid.resolution} m "
          f"({grid.world_width:g}x{grid.world_height:g} m), "
          f"{occ} occupied ({100.0 * occ / grid.cells.size:.1f}%)")


def _inspect_suite(path: Path) -> None:
    suite = load_suite(path)
    print(f"{path}: suite, reference={suite.reference!r}")
    for p in suite.planners:
        extra = f" checkpoint={p.checkpoint}" if p.checkpoint else ""
        print(f"  planner  {p.name} ({p.kind}{extra})")
    for s in suite.scenarios:
        print(f"  scenario {s.name}: {s.n_obstacles} obstacles at "
              f"{s.v_obs} m/s, {s.repeats} repeats, seeds from {s.seed_base}")


def cmd_inspect(args) -> int:
    path = Path(args.path)
    if not path.exists():
        raise SystemExit(f"inspect: {path} does not exist")
    suffix = path.suffix.lower()
    if suffix == ".npz":
        _inspect_checkpoint(path)
    elif suffix == ".csv":
        _inspect_results(path)
    elif suffix == ".ini":
        _inspect_suite(path)
    elif suffix == ".json":
        print(path.read_text().rstrip())
    else:
        _inspect_map(path)
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nav-arena",
        description="2D navigation workbench: hierarchical planning with a "
                    "learned or dynamic-window local planner.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-map", help="generate a random occupancy grid")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", default="10x10", help="world size in meters, WxH")
    g.add_argument("--resolution", type=float, default=0.1)
    g.add_argument("--walls", type=int, default=2)
    g.add_argument("--static", type=int, default=3)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_map)

    t = sub.add_parser("train", help="train the local planner policy")
    t.add_argument("--config", help="INI file with a [train] section")
    t.add_argument("--out", default="checkpoint.npz")
    t.add_argument("--workers", type=int)
    t.add_argument("--steps", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--log", help="episode log CSV (default: <out>.log.csv)")
    t.add_argument("--resume", help="warm-start from an existing checkpoint")
    t.add_argument("--checkpoint-every", type=int, default=100_000,
                   help="save a rolling checkpoint every N steps")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="run the benchmark suite")
    e.add_argument("--suite", help="suite INI (default: built-in 3x3 matrix)")
    e.add_argument("--planners", help="comma list, e.g. dwa,arena")
    e.add_argument("--checkpoint", help="policy checkpoint for arena")
    e.add_argument("--out", default="eval-out")
    e.add_argument("--repeats", type=int)
    e.add_argument("--seed", type=int, default=0,
                   help="offset added to every scenario seed base")
    e.add_argument("--parallel", type=int, default=os.cpu_count() or 1)
    e.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True,
                   help="write per-scenario trajectory SVGs")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("replay", help="re-simulate recorded runs into an SVG")
    r.add_argument("--csv", required=True, help="results.csv from evaluate")
    r.add_argument("--suite", help="suite INI the results came from")
    r.add_argument("--planner", required=True)
    r.add_argument("--scenario", required=True)
    r.add_argument("--run", type=int, help="single run index (default: all)")
    r.add_argument("--checkpoint", help="policy checkpoint if needed")
    r.add_argument("--out", default="replay.svg")
    r.set_defaults(func=cmd_replay)

    i = sub.add_parser("inspect", help="describe a checkpoint/map/CSV/suite")
    i.add_argument("path")
    i.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (OSError, ValueError, KeyError) as e:
        print(f"nav-arena {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
