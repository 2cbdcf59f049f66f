"""YAML scenario files.

Schema (lengths in meters, frequency in Hz, angles in radians)::

    room:      {x_min, x_max, y_min, y_max}
    grid:      {delta}
    ap:        {position: [x, y, z]}
    irs:       {position: [x, y, z], normal: [nx, ny, nz],
                nx, nz, sub_nx, sub_nz, element_spacing (optional, default lambda/2)}
    obstacles: [{center: [x, y], size: [sx, sy], height}, ...]
    robot:     {height, start: [x, y], goal: [x, y], v_max}
    channel:   {carrier_freq, rician_factor_db | rician_kappa (linear)}
    planning:  {gamma_bar_db}            (optional)

Every violation raises :class:`ConfigError` naming the dotted key.
"""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .geometry import SPEED_OF_LIGHT, GridSpec, IrsLayout, ObstacleBox, Point3, Scenario

DEFAULT_SCENARIO = "indoor_factory.yaml"


def _get(d: dict, key: str, path: str) -> Any:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a mapping")
    if key not in d or d[key] is None:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
    return d[key]


def _num(d: dict, key: str, path: str, *, positive: bool = False, default=None) -> float:
    name = f"{path}.{key}" if path else key
    if default is not None and (key not in d or d[key] is None):
        return float(default)
    v = _get(d, key, path)
    if isinstance(v, str):
        # YAML 1.1 reads exponents without a sign (2.0e9) as strings
        try:
            v = float(v)
        except ValueError:
            pass
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(name, "must be finite")
    if positive and v <= 0:
        raise ConfigError(name, f"must be positive, got {v}")
    return v


def _int(d: dict, key: str, path: str) -> int:
    v = _get(d, key, path)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{path}.{key}", f"expected a positive integer, got {v!r}")
    return v


def _vec(d: dict, key: str, path: str, n: int) -> tuple[float, ...]:
    v = _get(d, key, path)
    name = f"{path}.{key}" if path else key
    if not isinstance(v, (list, tuple)) or len(v) != n:
        raise ConfigError(name, f"expected a list of {n} numbers")
    out = []
    for k, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigError(f"{name}[{k}]", f"expected a finite number, got {x!r}")
        out.append(float(x))
    return tuple(out)


def scenario_from_dict(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "expected a mapping at top level")
    room = _get(cfg, "room", "")
    x_min = _num(room, "x_min", "room")
    x_max = _num(room, "x_max", "room")
    y_min = _num(room, "y_min", "room")
    y_max = _num(room, "y_max", "room")
    if x_max <= x_min:
        raise ConfigError("room.x_max", "must exceed room.x_min")
    if y_max <= y_min:
        raise ConfigError("room.y_max", "must exceed room.y_min")

    channel = _get(cfg, "channel", "")
    fc = _num(channel, "carrier_freq", "channel", positive=True)
    if channel.get("rician_kappa") is not None:
        kappa = _num(channel, "rician_kappa", "channel")
        if kappa < 0:
            raise ConfigError("channel.rician_kappa", "must be non-negative")
    else:
        kappa = 10 ** (_num(channel, "rician_factor_db", "channel") / 10)

    robot = _get(cfg, "robot", "")
    h0 = _num(robot, "height", "robot", positive=True)
    start = _vec(robot, "start", "robot", 2)
    goal = _vec(robot, "goal", "robot", 2)
    v_max = _num(robot, "v_max", "robot", positive=True)

    delta = _num(_get(cfg, "grid", ""), "delta", "grid", positive=True)
    grid = GridSpec.from_bounds(x_min, x_max, y_min, y_max, delta, h0)

    ap = _vec(_get(cfg, "ap", ""), "position", "ap", 3)

    irs = _get(cfg, "irs", "")
    irs_pos = _vec(irs, "position", "irs", 3)
    normal = _vec(irs, "normal", "irs", 3)
    if math.hypot(*normal) == 0:
        raise ConfigError("irs.normal", "must be a nonzero vector")
    spacing = _num(irs, "element_spacing", "irs", positive=True,
                   default=SPEED_OF_LIGHT / fc / 2)
    layout = IrsLayout(nx=_int(irs, "nx", "irs"), nz=_int(irs, "nz", "irs"),
                       sub_nx=_int(irs, "sub_nx", "irs"), sub_nz=_int(irs, "sub_nz", "irs"),
                       element_spacing=spacing)

    raw_obs = cfg.get("obstacles") or []
    if not isinstance(raw_obs, list):
        raise ConfigError("obstacles", "expected a list")
    obstacles = []
    for k, ob in enumerate(raw_obs):
        p = f"obstacles[{k}]"
        c = _vec(ob, "center", p, 2)
        s = _vec(ob, "size", p, 2)
        h = _num(ob, "height", p, positive=True)
        if s[0] <= 0 or s[1] <= 0:
            raise ConfigError(f"{p}.size", "dimensions must be positive")
        obstacles.append(ObstacleBox(c[0], c[1], s[0], s[1], h))

    gamma = -63.0
    if cfg.get("planning") is not None:
        gamma = _num(cfg["planning"], "gamma_bar_db", "planning", default=-63.0)

    q_start = Point3(start[0], start[1], h0)
    q_goal = Point3(goal[0], goal[1], h0)
    for name, q in (("robot.start", q_start), ("robot.goal", q_goal)):
        if not (x_min <= q.x <= x_max and y_min <= q.y <= y_max):
            raise ConfigError(name, "outside the room")
        if any(b.contains_xy(q.x, q.y) for b in obstacles):
            raise ConfigError(name, "inside an obstacle footprint")

    return Scenario(
        ap_pos=Point3(*ap), irs_pos=Point3(*irs_pos), irs_normal=normal,
        obstacles=tuple(obstacles), grid=grid, robot_height=h0,
        q_start=q_start, q_goal=q_goal, v_max=v_max, carrier_freq=fc,
        rician_kappa=kappa, irs_layout=layout, gamma_bar_db=gamma,
    )


def load_scenario(path: str | Path | None = None) -> Scenario:
    """Load a scenario file; ``None`` loads the bundled indoor-factory scene."""
    if path is None:
        text = resources.files("irsnav").joinpath("data", DEFAULT_SCENARIO).read_text()
    else:
        text = Path(path).read_text()
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"invalid YAML: {exc}") from None
    return scenario_from_dict(cfg)


def scenario_to_dict(scene: Scenario) -> dict:
    """Canonical plain-data form; the inverse of :func:`scenario_from_dict`."""
    g = scene.grid
    lay = scene.irs_layout
    return {
        "room": {"x_min": g.x_min, "x_max": g.x_min + g.X * g.delta,
                 "y_min": g.y_min, "y_max": g.y_min + g.Y * g.delta},
        "grid": {"delta": g.delta},
        "ap": {"position": list(scene.ap_pos)},
        "irs": {"position": list(scene.irs_pos), "normal": list(scene.irs_normal),
                "nx": lay.nx, "nz": lay.nz, "sub_nx": lay.sub_nx, "sub_nz": lay.sub_nz,
                "element_spacing": lay.element_spacing},
        "obstacles": [{"center": [b.center_x, b.center_y], "size": [b.size_x, b.size_y],
                       "height": b.height} for b in scene.obstacles],
        "robot": {"height": scene.robot_height, "start": [scene.q_start.x, scene.q_start.y],
                  "goal": [scene.q_goal.x, scene.q_goal.y], "v_max": scene.v_max},
        "channel": {"carrier_freq": scene.carrier_freq,
                    "rician_kappa": scene.rician_kappa},
        "planning": {"gamma_bar_db": scene.gamma_bar_db},
    }


def with_elements(scene: Scenario, n_elements: int) -> Scenario:
    """Same scene with the panel grown or shrunk along z to hold ``n_elements``."""
    lay = scene.irs_layout
    per_row = lay.per_sub * lay.nx
    if n_elements < per_row or n_elements % per_row:
        raise ConfigError("irs.elements",
                          f"{n_elements} is not a positive multiple of {per_row} "
                          f"(elements per sub-surface x sub-surfaces along x)")
    from dataclasses import replace
    return replace(scene, irs_layout=replace(lay, nz=n_elements // per_row))
