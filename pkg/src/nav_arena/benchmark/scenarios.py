"""Benchmark scenario definitions and suite files.

A scenario fixes everything about an evaluation world except the run index:
the map, the obstacle population, the robot start pose, and the goal. Suites
(planner specs + scenario list) load from INI files; ``default_scenarios``
builds the standard 3x3 obstacle-count x speed matrix on an empty room.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from ..worldsim.grid import MapGenParams, OccupancyGrid, generate_random_map
from ..worldsim.obstacles import MOTION_MODELS

# keep-out radii around the start pose and goal when placing obstacles
START_CLEARANCE = 1.0
GOAL_CLEARANCE = 0.6


@dataclass
class Scenario:
    """One evaluation setting, replayed ``repeats`` times with derived seeds."""

    name: str
    n_obstacles: int = 0
    v_obs: float = 0.0
    motion_model: str = "linear-bounce"
    direction: str = "horizontal"
    map_file: str | None = None   # takes precedence over map_seed
    map_seed: int | None = None   # randomized walls/statics; None -> empty room
    start: tuple[float, float, float] = (1.5, 5.05, 0.0)
    goal: tuple[float, float] = (8.5, 5.05)
    repeats: int = 100
    seed_base: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("scenario needs a name")
        if self.v_obs < 0.0:
            raise ValueError("v_obs must be >= 0")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.n_obstacles < 0:
            raise ValueError("n_obstacles must be >= 0")
        if self.motion_model not in MOTION_MODELS:
            raise ValueError(f"unknown motion model {self.motion_model!r}")

    def build_grid(self) -> OccupancyGrid:
        if self.map_file is not None:
            return OccupancyGrid.load(self.map_file)
        if self.map_seed is not None:
            return generate_random_map(
                self.map_seed, MapGenParams(n_walls=2, n_static=3))
        return OccupancyGrid.empty(100, 100, 0.1)

    def run_seed(self, run: int) -> int:
        """Obstacle seed for one run; identical across planners by design."""
        return self.seed_base + run

    def keep_out(self) -> list[tuple[float, float, float]]:
        sx, sy, _ = self.start
        gx, gy = self.goal
        return [(sx, sy, START_CLEARANCE), (gx, gy, GOAL_CLEARANCE)]


def default_scenarios(repeats: int = 100) -> list[Scenario]:
    """The shipped evaluation matrix: 5/10/20 obstacles at 0.1/0.2/0.3 m/s."""
    out = []
    for n in (5, 10, 20):
        for v in (0.1, 0.2, 0.3):
            out.append(Scenario(
                name=f"obs{n}-v{v:.1f}",
                n_obstacles=n,
                v_obs=v,
                repeats=repeats,
                seed_base=1000 * n + int(round(100 * v)),
            ))
    return out


@dataclass
class PlannerSpec:
    """Planner entry from a suite file; materialized by the runner."""

    name: str
    kind: str                    # "dwa" or "policy"
    checkpoint: str | None = None
    mode: str = "greedy"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("dwa", "policy"):
            raise ValueError(f"unknown planner kind {self.kind!r}")
        if self.kind == "policy" and not self.checkpoint:
            raise ValueError(f"planner {self.name!r}: policy planners need a checkpoint")


@dataclass
class Suite:
    planners: list[PlannerSpec]
    scenarios: list[Scenario]
    reference: str = "drl"


def _parse_floats(text: str, n: int, what: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != n:
        raise ValueError(f"{what} needs {n} numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def load_suite(path) -> Suite:
    """Parse a suite INI file.

    Layout: a ``[suite]`` section (``reference``, optional ``repeats``
    default), one ``[planner:<name>]`` section per planner, and one
    ``[scenario:<name>]`` section per scenario. Scenario keys mirror the
    Scenario fields; ``start`` is "x, y, theta" and ``goal`` is "x, y".
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(str(path))
    if not read:
        raise FileNotFoundError(f"suite file {path} not found or unreadable")
    default_repeats = cp.getint("suite", "repeats", fallback=100)
    reference = cp.get("suite", "reference", fallback=None)

    planners: list[PlannerSpec] = []
    scenarios: list[Scenario] = []
    for section in cp.sections():
        if section.startswith("planner:"):
            s = cp[section]
            planners.append(PlannerSpec(
                name=section.split(":", 1)[1],
                kind=s.get("kind", "dwa"),
                checkpoint=s.get("checkpoint", None),
                mode=s.get("mode", "greedy"),
            ))
        elif section.startswith("scenario:"):
            s = cp[section]
            kwargs = dict(
                name=section.split(":", 1)[1],
                n_obstacles=s.getint("n_obstacles", 0),
                v_obs=s.getfloat("v_obs", 0.0),
                motion_model=s.get("motion_model", "linear-bounce"),
                direction=s.get("direction", "horizontal"),
                map_file=s.get("map_file", None),
                repeats=s.getint("repeats", default_repeats),
                seed_base=s.getint("seed_base", 0),
            )
            if "map_seed" in s:
                kwargs["map_seed"] = s.getint("map_seed")
            if "start" in s:
                kwargs["start"] = _parse_floats(s["start"], 3, "start")
            if "goal" in s:
                kwargs["goal"] = _parse_floats(s["goal"], 2, "goal")
            scenarios.append(Scenario(**kwargs))

    if not planners:
        raise ValueError(f"suite file {path} defines no [planner:*] sections")
    if not scenarios:
        raise ValueError(f"suite file {path} defines no [scenario:*] sections")
    if reference is None:
        # comparisons anchor on the learned planner when one is present
        policy = [p for p in planners if p.kind == "policy"]
        reference = (policy[0] if policy else planners[0]).name
    return Suite(planners=planners, scenarios=scenarios, reference=reference)
