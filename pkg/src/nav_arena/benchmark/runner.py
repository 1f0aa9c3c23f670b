"""Episode execution and aggregation for planner comparisons.

``run_episode`` drives one planner stack (global A* + horizon subgoals +
a local planner) through one seeded world until the goal, a timeout, or a
planner failure. ``run_suite`` fans runs out over scenarios and planners
with matched seeds so every planner faces identical obstacle draws, then
``aggregate``/``relative_performance`` reduce the records to report tables.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..drl.checkpoint import load_params
from ..drl.network import NetworkParams
from ..drl.observation import build_observation
from ..global_planner import GlobalPlanner, InvalidEndpoint, NoPath
from ..intermediate_planner import HorizonParams, SubgoalState, update
from ..local_planner import DEFAULT_ACTIONS, DwaParams, dwa_plan, policy_plan
from ..worldsim.obstacles import SpawnError, spawn_obstacles
from ..worldsim.world import RobotState, World, WorldConfig
from .scenarios import PlannerSpec, Scenario

TIMEOUT_S = 180.0
INFLATION_RADIUS = 0.35


class DwaPlanner:
    """Dynamic-window local planner for the benchmark stack."""

    def __init__(self, name: str = "dwa", params: DwaParams | None = None):
        self.name = name
        self.params = params or DwaParams()

    def reset(self) -> None:
        pass

    def act(self, robot, scan, subgoal):
        return dwa_plan(scan, robot, (subgoal.x, subgoal.y), self.params)


class PolicyPlanner:
    """Learned recurrent policy as the local planner."""

    def __init__(self, name: str, params: NetworkParams, mode: str = "greedy", seed: int = 0):
        self.name = name
        self.params = params
        self.mode = mode
        self.seed = seed
        self.reset()

    def reset(self) -> None:
        self._hidden = np.zeros(self.params.hidden_dim)
        self._rng = np.random.default_rng(self.seed) if self.mode == "sample" else None

    def act(self, robot, scan, subgoal):
        obs = build_observation(scan, robot, (subgoal.x, subgoal.y))
        action, self._hidden = policy_plan(
            obs, self.params, self._hidden, mode=self.mode,
            rng=self._rng, actions=DEFAULT_ACTIONS,
        )
        return action


def build_planner(spec: PlannerSpec):
    if spec.kind == "dwa":
        return DwaPlanner(spec.name)
    return PolicyPlanner(spec.name, load_params(spec.checkpoint), mode=spec.mode)


@dataclass
class RunResult:
    planner: str
    scenario: str
    run: int
    time_s: float
    path_m: float
    collisions: int
    reached_goal: bool
    success: bool
    timeout: bool
    replans: int
    failure: str | None = None
    trajectory: np.ndarray | None = field(default=None, repr=False)

    def key(self) -> tuple:
        return (self.planner, self.scenario, self.run)


def run_episode(
    planner,
    scenario: Scenario,
    run: int,
    world_config: WorldConfig | None = None,
    horizon: HorizonParams | None = None,
    record_trajectory: bool = True,
) -> RunResult:
    """Simulate one run and score it.

    Ends at the goal (within the world's goal radius), at 180 simulated
    seconds, or when the global planner fails; the last case is recorded as
    an unsuccessful run with a diagnostic rather than raised. Collisions are
    debounced: one count per contact episode (false -> true transitions of
    the contact flag). Success means the goal was reached with fewer than
    two collisions.
    """
    cfg = world_config or WorldConfig()
    hp = horizon or HorizonParams()
    grid = scenario.build_grid()
    sx, sy, stheta = scenario.start
    goal = scenario.goal
    failure = None
    try:
        obstacles = spawn_obstacles(
            grid, scenario.n_obstacles, scenario.v_obs,
            model=scenario.motion_model, seed=scenario.run_seed(run),
            direction=scenario.direction, keep_out=scenario.keep_out(),
        )
    except SpawnError as e:
        obstacles = []
        failure = f"spawn: {e}"

    world = World(cfg, grid, RobotState(x=sx, y=sy, theta=stheta), obstacles)
    global_planner = GlobalPlanner(grid, inflation_radius=INFLATION_RADIUS)
    sub_state = SubgoalState()
    planner.reset()

    max_steps = int(round(TIMEOUT_S / cfg.dt))
    poses = [(sx, sy, stheta)] if record_trajectory else None
    path_m = 0.0
    collisions = 0
    in_contact = False
    reached = False
    steps = 0

    if failure is None:
        for steps in range(1, max_steps + 1):
            try:
                sub = update(sub_state, world.robot, global_planner, goal, hp, now=world.time)
            except (NoPath, InvalidEndpoint) as e:
                failure = f"planner: {e}"
                steps -= 1
                break
            scan = world.raycast()
            action = planner.act(world.robot, scan, sub)
            px, py = world.robot.x, world.robot.y
            world.step(action.v, action.omega)
            r = world.robot
            path_m += math.hypot(r.x - px, r.y - py)
            if poses is not None:
                poses.append((r.x, r.y, r.theta))
            if world.collided and not in_contact:
                collisions += 1
            in_contact = world.collided
            if math.hypot(r.x - goal[0], r.y - goal[1]) < cfg.goal_radius:
                reached = True
                break

    timeout = not reached and failure is None and steps == max_steps
    return RunResult(
        planner=planner.name,
        scenario=scenario.name,
        run=run,
        time_s=world.time,
        path_m=path_m,
        collisions=collisions,
        reached_goal=reached,
        success=reached and collisions < 2,
        timeout=timeout,
        replans=sub_state.replan_count,
        failure=failure,
        trajectory=np.asarray(poses) if poses is not None else None,
    )


def _run_guarded(planner, scenario, run, world_config, horizon, record_trajectory):
    try:
        return run_episode(planner, scenario, run, world_config, horizon, record_trajectory)
    except Exception as e:  # suite keeps going; the record carries the diagnostic
        return RunResult(
            planner=planner.name, scenario=scenario.name, run=run,
            time_s=0.0, path_m=0.0, collisions=0, reached_goal=False,
            success=False, timeout=False, replans=0,
            failure=f"crash: {type(e).__name__}: {e}",
        )


def run_suite(
    planners,
    scenarios,
    world_config: WorldConfig | None = None,
    horizon: HorizonParams | None = None,
    parallelism: int = 1,
    record_trajectories: bool = False,
    progress=None,
) -> list[RunResult]:
    """Run every planner on every scenario, repeats times each.

    Run ``i`` of a scenario uses obstacle seed ``seed_base + i`` for every
    planner, so all planners face identical worlds. Individual failures are
    recorded and the suite continues. Records come back sorted by
    (planner, scenario, run).
    """
    planners = list(planners)
    scenarios = list(scenarios)
    if not planners:
        raise ValueError("need at least one planner")
    if not scenarios:
        raise ValueError("need at least one scenario")
    names = [p.name for p in planners]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate planner names: {names}")

    tasks = [
        (p, sc, run)
        for p in planners
        for sc in scenarios
        for run in range(sc.repeats)
    ]
    results: list[RunResult] = []
    if parallelism <= 1:
        for p, sc, run in tasks:
            results.append(_run_guarded(p, sc, run, world_config, horizon, record_trajectories))
            if progress is not None:
                progress(len(results), len(tasks), results[-1])
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as ex:
            futures = [
                ex.submit(_run_guarded, p, sc, run, world_config, horizon, record_trajectories)
                for p, sc, run in tasks
            ]
            for fut in futures:
                results.append(fut.result())
                if progress is not None:
                    progress(len(results), len(tasks), results[-1])
    results.sort(key=RunResult.key)
    return results


@dataclass(frozen=True)
class AggregateStats:
    planner: str
    scenario: str
    runs: int
    mean_time_s: float
    mean_path_m: float
    total_collisions: int
    mean_collisions: float
    success_pct: float
    timeouts: int


def aggregate(records) -> list[AggregateStats]:
    """Per (planner, scenario) means and totals over all runs (timeouts included).

    Every field is derivable from the run CSV columns, so aggregating a
    reloaded CSV reproduces these stats exactly; failure diagnostics live on
    the individual records.
    """
    groups: dict[tuple[str, str], list[RunResult]] = {}
    for r in records:
        groups.setdefault((r.planner, r.scenario), []).append(r)
    out = []
    for (planner, scenario), rs in sorted(groups.items()):
        n = len(rs)
        total_coll = sum(r.collisions for r in rs)
        out.append(AggregateStats(
            planner=planner,
            scenario=scenario,
            runs=n,
            mean_time_s=sum(r.time_s for r in rs) / n,
            mean_path_m=sum(r.path_m for r in rs) / n,
            total_collisions=total_coll,
            mean_collisions=total_coll / n,
            success_pct=100.0 * sum(r.success for r in rs) / n,
            timeouts=sum(r.timeout for r in rs),
        ))
    return out


@dataclass(frozen=True)
class RelativeRow:
    planner: str
    scenario: str
    time_ratio: float
    path_ratio: float
    collision_ratio: float
    success_ratio: float
    overall_pct: float
    capped: bool


def _ratio(num: float, den: float) -> tuple[float, bool]:
    # zero denominator: equal-zero counts as parity, otherwise saturate
    if den == 0.0:
        return (1.0, False) if num == 0.0 else (10.0, True)
    return num / den, False


def relative_performance(stats, reference: str) -> list[RelativeRow]:
    """Score every planner against ``reference``, per scenario plus pooled.

    Ratios are oriented so that > 1 always means better than the reference:
    reference/planner for time, path length, and collisions (lower is
    better), planner/reference for success rate. ``overall_pct`` is the sum
    of the four ratios expressed in percent (the reference scores 400). A
    zero denominator saturates the ratio at 10.0 and sets ``capped``.
    """
    stats = list(stats)
    ref_rows = {s.scenario: s for s in stats if s.planner == reference}
    if not ref_rows:
        raise ValueError(f"reference planner {reference!r} not present in stats")

    def pooled(planner: str) -> AggregateStats | None:
        rs = [s for s in stats if s.planner == planner]
        if not rs:
            return None
        n = sum(s.runs for s in rs)
        return AggregateStats(
            planner=planner, scenario="all", runs=n,
            mean_time_s=sum(s.mean_time_s * s.runs for s in rs) / n,
            mean_path_m=sum(s.mean_path_m * s.runs for s in rs) / n,
            total_collisions=sum(s.total_collisions for s in rs),
            mean_collisions=sum(s.total_collisions for s in rs) / n,
            success_pct=sum(s.success_pct * s.runs for s in rs) / n,
            timeouts=sum(s.timeouts for s in rs),
        )

    def compare(row: AggregateStats, ref: AggregateStats) -> RelativeRow:
        t, c1 = _ratio(ref.mean_time_s, row.mean_time_s)
        p, c2 = _ratio(ref.mean_path_m, row.mean_path_m)
        c, c3 = _ratio(ref.mean_collisions, row.mean_collisions)
        s, c4 = _ratio(row.success_pct, ref.success_pct)
        return RelativeRow(
            planner=row.planner, scenario=row.scenario,
            time_ratio=t, path_ratio=p, collision_ratio=c, success_ratio=s,
            overall_pct=100.0 * (t + p + c + s),
            capped=c1 or c2 or c3 or c4,
        )

    out = []
    planner_names = sorted({s.planner for s in stats})
    for planner in planner_names:
        for s in (x for x in stats if x.planner == planner):
            if s.scenario not in ref_rows:
                raise ValueError(
                    f"reference {reference!r} has no stats for scenario {s.scenario!r}")
            out.append(compare(s, ref_rows[s.scenario]))
        pooled_row = pooled(planner)
        pooled_ref = pooled(reference)
        out.append(compare(pooled_row, pooled_ref))
    return out
