"""Minimum-distance paths over the feasible cells of a radio map.

Feasible cells are graph vertices; cells within one king move of each other
are joined by an edge weighted with the distance between their centers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InfeasibleEndpointError, NoPathError, ParseError
from .fileio import atomic_write_text
from .geometry import Point3, cell_center
from .radiomap import FeasibleMap, RadioMap, feasible_map, gamma_threshold

SQRT2 = math.sqrt(2.0)
PATH_FORMAT = "irsnav-path"


@dataclass(frozen=True, eq=False)
class GridGraph:
    """Explicit adjacency view of a feasible map.

    Planning itself runs on the mask through :mod:`irsnav.kernels`; this
    object exists for inspection and for the graph-level checks.
    """

    feasible: FeasibleMap
    strict: bool = False
    _adj: dict = field(default=None, repr=False)

    def __post_init__(self):
        flags = self.feasible.flags
        X, Y = flags.shape
        delta = self.feasible.grid.delta
        adj: dict[tuple[int, int], dict[tuple[int, int], float]] = {}
        for i, j in zip(*np.nonzero(flags)):
            nbrs = {}
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    if di == 0 and dj == 0:
                        continue
                    a, b = i + di, j + dj
                    if not (0 <= a < X and 0 <= b < Y) or not flags[a, b]:
                        continue
                    diag = di != 0 and dj != 0
                    if diag and self.strict and not (flags[i, b] or flags[a, j]):
                        continue
                    nbrs[(a + 1, b + 1)] = delta * (SQRT2 if diag else 1.0)
            adj[(i + 1, j + 1)] = nbrs
        object.__setattr__(self, "_adj", adj)

    @property
    def vertices(self) -> list[tuple[int, int]]:
        return sorted(self._adj)

    def neighbors(self, v: tuple[int, int]) -> dict[tuple[int, int], float]:
        return dict(self._adj[v])

    def edges(self) -> list[tuple[tuple[int, int], tuple[int, int], float]]:
        return [(u, v, w) for u in sorted(self._adj) for v, w in sorted(self._adj[u].items())
                if u < v]

    def __contains__(self, v) -> bool:
        return tuple(v) in self._adj


def build_graph(feasible: FeasibleMap, strict: bool = False) -> GridGraph:
    return GridGraph(feasible, strict)


@dataclass(frozen=True)
class PlannedPath:
    cells: tuple[tuple[int, int], ...]
    waypoints: tuple[Point3, ...]
    n_orth: int
    n_diag: int
    delta: float
    v_max: float
    gamma_bar_db: float
    mode: str = ""

    @property
    def total_distance(self) -> float:
        return self.delta * (self.n_orth + self.n_diag * SQRT2)

    @property
    def travel_time(self) -> float:
        return self.total_distance / self.v_max

    def __len__(self) -> int:
        return len(self.cells)


def shortest_path(feasible: FeasibleMap | GridGraph, start: tuple[int, int],
                  goal: tuple[int, int], *, v_max: float = 1.0, strict: bool | None = None,
                  mode: str = "") -> PlannedPath:
    """Dijkstra from ``start`` to ``goal`` (1-based cell indices).

    Equal-length routes are resolved by giving every cell the predecessor
    with the smallest ``(i, j)``, so the result is reproducible.
    """
    if isinstance(feasible, GridGraph):
        strict = feasible.strict if strict is None else strict
        feasible = feasible.feasible
    strict = bool(strict)
    flags = feasible.flags
    grid = feasible.grid
    for which, cell in (("start", start), ("goal", goal)):
        i, j = cell
        if not (1 <= i <= grid.X and 1 <= j <= grid.Y) or not flags[i - 1, j - 1]:
            raise InfeasibleEndpointError(which, tuple(cell))
    s = (start[0] - 1) * grid.Y + (start[1] - 1)
    g = (goal[0] - 1) * grid.Y + (goal[1] - 1)
    found, n_orth, n_diag, flat = kernels.grid_dijkstra(flags, s, g, strict)
    if not found:
        raise NoPathError(f"no path from {start} to {goal} at gamma_bar="
                          f"{feasible.gamma_bar_db} dB")
    cells = tuple((int(k) // grid.Y + 1, int(k) % grid.Y + 1) for k in flat)
    return PlannedPath(cells, tuple(cell_center(grid, i, j) for i, j in cells),
                       int(n_orth), int(n_diag), grid.delta, v_max,
                       feasible.gamma_bar_db, mode)


def path_exists(flags: np.ndarray, start: tuple[int, int], goal: tuple[int, int],
                strict: bool = False) -> bool:
    i, j = start
    a, b = goal
    if not flags[i - 1, j - 1] or not flags[a - 1, b - 1]:
        return False
    Y = flags.shape[1]
    return bool(kernels.grid_dijkstra(flags, (i - 1) * Y + j - 1,
                                      (a - 1) * Y + b - 1, strict)[0])


def max_feasible_gamma(rmap: RadioMap, start: tuple[int, int], goal: tuple[int, int],
                       strict: bool = False) -> float | None:
    """Largest target (dB) for which a path exists, by bisection.

    The answer is always one of the map values, so the search runs over the
    sorted distinct finite values. ``None`` if no target is feasible.
    """
    db = rmap.values_db
    cand = np.unique(db[np.isfinite(db)])
    cap = min(db[start[0] - 1, start[1] - 1], db[goal[0] - 1, goal[1] - 1])
    cand = cand[cand <= cap]

    def ok(k):
        return path_exists(feasible_map(rmap, float(cand[k])).flags, start, goal, strict)

    if len(cand) == 0 or not ok(0):
        return None
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return float(cand[lo])


@dataclass(frozen=True)
class PathReport:
    ok: bool
    violation: str = ""
    index: int = -1
    min_margin_db: float = math.nan

    def __bool__(self) -> bool:
        return self.ok


def validate_path(path: PlannedPath, rmap: RadioMap, gamma_bar_db: float,
                  start: tuple[int, int] | None = None,
                  goal: tuple[int, int] | None = None) -> PathReport:
    """Recheck a path against the map, adjacency and endpoint constraints.

    Works from the waypoint coordinates alone, independent of the planner.
    """
    grid = rmap.grid
    if not path.waypoints:
        return PathReport(False, "empty path", 0)
    thr = gamma_threshold(gamma_bar_db)
    margins = []
    for k, p in enumerate(path.waypoints):
        fi = (p.x - grid.q0.x) / grid.delta
        fj = (p.y - grid.q0.y) / grid.delta
        i, j = round(fi), round(fj)
        if abs(fi - i) > 1e-9 or abs(fj - j) > 1e-9 or not (0 <= i < grid.X and 0 <= j < grid.Y):
            return PathReport(False, "waypoint is not a cell center", k)
        v = rmap.values[i, j]
        if not (v >= thr) or v == -math.inf:
            return PathReport(False, "channel gain below target", k)
        margins.append(rmap.values_db[i, j] - gamma_bar_db)
        if k:
            q = path.waypoints[k - 1]
            if math.hypot(p.x - q.x, p.y - q.y) > SQRT2 * grid.delta * (1 + 1e-9):
                return PathReport(False, "successive waypoints not adjacent", k)
    if start is not None and tuple(path.cells[0]) != tuple(start):
        return PathReport(False, "path does not begin at the start cell", 0)
    if goal is not None and tuple(path.cells[-1]) != tuple(goal):
        return PathReport(False, "path does not end at the goal cell", len(path.cells) - 1)
    return PathReport(True, "", -1, float(min(margins)))


# --------------------------------------------------------------------- I/O

def path_to_csv(path: PlannedPath, rmap: RadioMap | None = None) -> str:
    lines = [
        f"# format: {PATH_FORMAT}",
        "# version: 1",
        f"# delta: {path.delta!r}",
        f"# v_max: {path.v_max!r}",
        f"# z: {(path.waypoints[0].z if path.waypoints else 0.0)!r}",
        f"# gamma_bar_db: {path.gamma_bar_db!r}",
        f"# mode: {path.mode}",
        f"# n_orth: {path.n_orth}",
        f"# n_diag: {path.n_diag}",
        f"# total_distance: {path.total_distance!r}",
        f"# travel_time: {path.travel_time!r}",
        "index,i,j,x,y,value_db,cumulative_distance",
    ]
    cum = 0.0
    for k, ((i, j), p) in enumerate(zip(path.cells, path.waypoints)):
        if k:
            q = path.waypoints[k - 1]
            cum += path.delta * (SQRT2 if (p.x != q.x and p.y != q.y) else 1.0)
        v = rmap.values_db[i - 1, j - 1] if rmap is not None else math.nan
        lines.append(f"{k},{i},{j},{p.x!r},{p.y!r},{float(v)!r},{cum!r}")
    return "\n".join(lines) + "\n"


def export_path(path: PlannedPath, file, rmap: RadioMap | None = None) -> Path:
    return atomic_write_text(file, path_to_csv(path, rmap))


def path_from_csv(text: str) -> PlannedPath:
    meta = {}
    rows = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            k, _, v = line[1:].partition(":")
            meta[k.strip()] = (v.strip(), lineno)
            continue
        if not header_seen:
            if line.strip() != "index,i,j,x,y,value_db,cumulative_distance":
                raise ParseError("missing column header", lineno, 1)
            header_seen = True
            continue
        toks = line.split(",")
        if len(toks) != 7:
            raise ParseError(f"expected 7 fields, found {len(toks)}", lineno, 1)
        col = 1
        parsed = []
        for n, t in enumerate(toks):
            try:
                parsed.append(int(t) if n < 3 else float(t))
            except ValueError:
                raise ParseError(f"bad field {t!r}", lineno, col) from None
            col += len(t) + 1
        if parsed[0] != len(rows):
            raise ParseError(f"index {parsed[0]} out of sequence", lineno, 1)
        rows.append(parsed)
    if meta.get("format", ("",))[0] != PATH_FORMAT:
        raise ParseError("not an irsnav path file", 1, 1)

    def field(key, conv):
        if key not in meta:
            raise ParseError(f"missing header field {key!r}", 1, 1)
        text, lineno = meta[key]
        try:
            return conv(text)
        except ValueError:
            raise ParseError(f"bad header field {key}: {text!r}", lineno, 1) from None

    n_orth = field("n_orth", int)
    n_diag = field("n_diag", int)
    delta = field("delta", float)
    v_max = field("v_max", float)
    gamma = field("gamma_bar_db", float)
    z = field("z", float) if "z" in meta else 0.0
    mode = meta.get("mode", ("",))[0]
    cells = tuple((r[1], r[2]) for r in rows)
    pts = tuple(Point3(r[3], r[4], z) for r in rows)
    return PlannedPath(cells, pts, n_orth, n_diag, delta, v_max, gamma, mode)


def import_path(file) -> PlannedPath:
    return path_from_csv(Path(file).read_text())


def plan(rmap: RadioMap, start: tuple[int, int], goal: tuple[int, int], gamma_bar_db: float,
         *, v_max: float = 1.0, strict: bool = False) -> PlannedPath:
    """Threshold the map and run the shortest-path search."""
    fmap = feasible_map(rmap, gamma_bar_db)
    return shortest_path(fmap, start, goal, v_max=v_max, strict=strict, mode=rmap.mode)
