"""Scene description: AP, IRS panel, box obstacles and the planning grid.

Coordinates are meters in a right-handed frame with z pointing up. Obstacles
are closed axis-aligned boxes standing on the floor; a point on a face is
inside and a segment grazing a face is blocked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import OutOfRegionError

SPEED_OF_LIGHT = 299_792_458.0


class Point3(NamedTuple):
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


@dataclass(frozen=True)
class ObstacleBox:
    center_x: float
    center_y: float
    size_x: float
    size_y: float
    height: float

    def __post_init__(self):
        if not (self.size_x > 0 and self.size_y > 0 and self.height > 0):
            raise ValueError(f"obstacle dimensions must be positive: {self}")

    @property
    def lo(self) -> tuple[float, float, float]:
        return (self.center_x - self.size_x / 2, self.center_y - self.size_y / 2, 0.0)

    @property
    def hi(self) -> tuple[float, float, float]:
        return (self.center_x + self.size_x / 2, self.center_y + self.size_y / 2, self.height)

    def contains_xy(self, x: float, y: float) -> bool:
        lo, hi = self.lo, self.hi
        return lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``X`` by ``Y`` square cells of side ``delta``.

    ``q0`` is the center of the lower-left cell; its z coordinate is the robot
    antenna height. Indices are 1-based to match the cell numbering used in
    the map files.
    """

    q0: Point3
    delta: float
    X: int
    Y: int

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("grid cell size must be positive")
        if self.X < 1 or self.Y < 1:
            raise ValueError("grid must contain at least one cell")

    @classmethod
    def from_bounds(cls, x_min: float, x_max: float, y_min: float, y_max: float,
                    delta: float, height: float) -> "GridSpec":
        X = int(round((x_max - x_min) / delta))
        Y = int(round((y_max - y_min) / delta))
        q0 = Point3(x_min + delta / 2, y_min + delta / 2, height)
        return cls(q0=q0, delta=delta, X=X, Y=Y)

    @property
    def x_min(self) -> float:
        return self.q0.x - self.delta / 2

    @property
    def y_min(self) -> float:
        return self.q0.y - self.delta / 2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.X, self.Y)

    def centers(self) -> np.ndarray:
        """All cell centers as an ``(X, Y, 3)`` array, row-major in ``(i, j)``."""
        xs = self.q0.x + np.arange(self.X) * self.delta
        ys = self.q0.y + np.arange(self.Y) * self.delta
        out = np.empty((self.X, self.Y, 3))
        out[..., 0] = xs[:, None]
        out[..., 1] = ys[None, :]
        out[..., 2] = self.q0.z
        return out


@dataclass(frozen=True)
class IrsLayout:
    """Element arrangement of the IRS panel.

    The panel holds ``nx * nz`` sub-surfaces, each a contiguous block of
    ``sub_nx * sub_nz`` elements sharing one phase shift.
    """

    nx: int
    nz: int
    sub_nx: int
    sub_nz: int
    element_spacing: float

    def __post_init__(self):
        if min(self.nx, self.nz, self.sub_nx, self.sub_nz) < 1:
            raise ValueError("IRS layout counts must be positive")
        if not self.element_spacing > 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_sub(self) -> int:
        return self.nx * self.nz

    @property
    def per_sub(self) -> int:
        return self.sub_nx * self.sub_nz

    @property
    def n_elements(self) -> int:
        return self.n_sub * self.per_sub

    def element_positions(self, center: Sequence[float], normal: Sequence[float]) -> np.ndarray:
        """Element centers, shape ``(M, 3)``, grouped by sub-surface.

        Elements ``n*per_sub .. (n+1)*per_sub - 1`` belong to sub-surface ``n``.
        """
        u, v = panel_axes(normal)
        cols = self.nx * self.sub_nx
        rows = self.nz * self.sub_nz
        pos = np.empty((self.n_elements, 3))
        m = 0
        for sz in range(self.nz):
            for sx in range(self.nx):
                for ez in range(self.sub_nz):
                    for ex in range(self.sub_nx):
                        cx = sx * self.sub_nx + ex - (cols - 1) / 2
                        cz = sz * self.sub_nz + ez - (rows - 1) / 2
                        pos[m] = (np.asarray(center, dtype=float)
                                  + self.element_spacing * (cx * u + cz * v))
                        m += 1
        return pos


def panel_axes(normal: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical in-plane unit vectors of a panel."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    up = np.array([0.0, 0.0, 1.0])
    u = np.cross(n, up)
    if np.linalg.norm(u) < 1e-12:
        # panel lying flat: pick x as the horizontal axis
        u = np.array([1.0, 0.0, 0.0])
    u = u / np.linalg.norm(u)
    v = np.cross(u, n)
    return u, v / np.linalg.norm(v)


@dataclass(frozen=True)
class Scenario:
    ap_pos: Point3
    irs_pos: Point3
    irs_normal: tuple[float, float, float]
    obstacles: tuple[ObstacleBox, ...]
    grid: GridSpec
    robot_height: float
    q_start: Point3
    q_goal: Point3
    v_max: float
    carrier_freq: float
    rician_kappa: float
    irs_layout: IrsLayout
    gamma_bar_db: float = -63.0

    def __post_init__(self):
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        if not self.carrier_freq > 0:
            raise ValueError("carrier frequency must be positive")
        if not self.rician_kappa >= 0:
            raise ValueError("Rician factor must be non-negative")
        for name in ("q_start", "q_goal"):
            p = getattr(self, name)
            if in_obstacle_footprint(self, p):
                raise ValueError(f"{name} {tuple(p)} lies inside an obstacle")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    def element_positions(self) -> np.ndarray:
        return self.irs_layout.element_positions(self.irs_pos, self.irs_normal)


def cell_center(grid: GridSpec, i: int, j: int) -> Point3:
    if not (1 <= i <= grid.X and 1 <= j <= grid.Y):
        raise OutOfRegionError(f"cell ({i}, {j}) outside 1..{grid.X} x 1..{grid.Y}")
    return Point3(grid.q0.x + (i - 1) * grid.delta,
                  grid.q0.y + (j - 1) * grid.delta,
                  grid.q0.z)


def _axis_index(coord: float, lo: float, delta: float, count: int, axis: str) -> int:
    u = (coord - lo) / delta
    if not (0.0 <= u <= count):
        raise OutOfRegionError(f"{axis}={coord} outside grid")
    # a point on a shared boundary belongs to the lower-index cell
    return max(1, math.ceil(u))


def cell_of(grid: GridSpec, p: Sequence[float]) -> tuple[int, int]:
    return (_axis_index(p[0], grid.x_min, grid.delta, grid.X, "x"),
            _axis_index(p[1], grid.y_min, grid.delta, grid.Y, "y"))


def in_obstacle_footprint(scene: Scenario, p: Sequence[float]) -> bool:
    return any(box.contains_xy(p[0], p[1]) for box in scene.obstacles)


def _slab_interval(a: np.ndarray, d: np.ndarray, lo, hi) -> tuple[float, float]:
    t0, t1 = -math.inf, math.inf
    for ax in range(3):
        if d[ax] == 0.0:
            if a[ax] < lo[ax] or a[ax] > hi[ax]:
                return math.inf, -math.inf
            continue
        ta = (lo[ax] - a[ax]) / d[ax]
        tb = (hi[ax] - a[ax]) / d[ax]
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
    return t0, t1


def segment_hits_box(a: Sequence[float], b: Sequence[float], box: ObstacleBox) -> bool:
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    t0, t1 = _slab_interval(a, d, box.lo, box.hi)
    # closed box, open segment
    return bool(t0 <= t1 and t1 > 0.0 and t0 < 1.0)


def segment_blocked(scene: Scenario, a: Sequence[float], b: Sequence[float]) -> bool:
    if tuple(a) == tuple(b):
        raise ValueError("segment endpoints coincide")
    return any(segment_hits_box(a, b, box) for box in scene.obstacles)


def segments_blocked(obstacles: Sequence[ObstacleBox], a: Sequence[float],
                     points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`segment_blocked` from one endpoint ``a`` to many points.

    ``points`` has shape ``(P, 3)``; returns a boolean array of length ``P``.
    """
    a = np.asarray(a, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    d = pts - a
    blocked = np.zeros(len(pts), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for box in obstacles:
            lo = np.array(box.lo)
            hi = np.array(box.hi)
            t0 = np.full(len(pts), -np.inf)
            t1 = np.full(len(pts), np.inf)
            ok = np.ones(len(pts), dtype=bool)
            for ax in range(3):
                par = d[:, ax] == 0.0
                ok &= ~(par & ((a[ax] < lo[ax]) | (a[ax] > hi[ax])))
                ta = (lo[ax] - a[ax]) / d[:, ax]
                tb = (hi[ax] - a[ax]) / d[:, ax]
                tmin = np.where(par, -np.inf, np.minimum(ta, tb))
                tmax = np.where(par, np.inf, np.maximum(ta, tb))
                t0 = np.maximum(t0, tmin)
                t1 = np.minimum(t1, tmax)
            blocked |= ok & (t0 <= t1) & (t1 > 0.0) & (t0 < 1.0)
    return blocked


def footprint_mask(grid: GridSpec, obstacles: Sequence[ObstacleBox]) -> np.ndarray:
    """``(X, Y)`` boolean mask of cell centers inside any obstacle footprint."""
    c = grid.centers()
    mask = np.zeros(grid.shape, dtype=bool)
    for box in obstacles:
        lo, hi = box.lo, box.hi
        mask |= ((c[..., 0] >= lo[0]) & (c[..., 0] <= hi[0])
                 & (c[..., 1] >= lo[1]) & (c[..., 1] <= hi[1]))
    return mask
