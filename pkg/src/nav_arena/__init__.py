"""nav_arena: a deterministic 2D navigation workbench.

Layers, bottom to top:

- ``worldsim``: occupancy grids, differential-drive kinematics, dynamic
  obstacles, lidar raycasting, collision checks.
- ``global_planner``: costmap inflation and A* search.
- ``intermediate_planner``: spatial-horizon subgoal selection and
  replanning triggers.
- ``local_planner``: DWA baseline and the learned-policy runner.
- ``drl``: observation/reward construction, GRU actor-critic with exact
  gradients, A3C training, curriculum control.
- ``benchmark``: scenario definitions, episode metrics, aggregation,
  CSV/SVG reports.
- ``cli``: the ``nav-arena`` command.

Hot numeric kernels live in ``nav_arena.kernels`` with a compiled core and
a numpy fallback selected at import time.
"""

__version__ = "0.1.0"
