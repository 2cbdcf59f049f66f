"""Parameter sweeps, feasibility thresholds and Monte Carlo validation."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import channel_context, expected_gain, link_stats, monte_carlo_gain
from .config import with_elements
from .errors import InfeasibleEndpointError, NoPathError
from .geometry import Scenario, cell_center, cell_of, footprint_mask
from .phases import optimal_phases
from .planner import max_feasible_gamma, plan
from .radiomap import RadioMap, build_map, export_map, fingerprint, import_map, parse_mode

CACHE_ENV = "IRSNAV_CACHE_DIR"
DEFAULT_MODES = ("no_irs", "discrete:2", "discrete:4", "discrete:8", "continuous")


class MapCache:
    """Maps keyed by scenario/mode fingerprint, in memory and optionally on disk.

    Disk entries are the map CSV files, which store values exactly, so a
    cached map is bit-identical to a freshly built one.
    """

    def __init__(self, directory: str | Path | None = None):
        if directory is None:
            directory = os.environ.get(CACHE_ENV) or None
        self.directory = Path(directory) if directory else None
        self._mem: dict[str, RadioMap] = {}
        self.hits = 0
        self.misses = 0

    def get(self, scene: Scenario, mode: str) -> RadioMap:
        key = fingerprint(scene, mode)
        if key in self._mem:
            self.hits += 1
            return self._mem[key]
        path = self.directory / f"{key}.csv" if self.directory else None
        if path is not None and path.exists():
            rmap = import_map(path, expected_fingerprint=key)
            self.hits += 1
        else:
            rmap = build_map(scene, mode)
            self.misses += 1
            if path is not None:
                export_map(rmap, path)
        self._mem[key] = rmap
        return rmap


def endpoints(scene: Scenario) -> tuple[tuple[int, int], tuple[int, int]]:
    return cell_of(scene.grid, scene.q_start), cell_of(scene.grid, scene.q_goal)


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    mode: str
    distance: float | None
    travel_time: float | None
    waypoints: int
    status: str

    @property
    def feasible(self) -> bool:
        return self.distance is not None


def _plan_row(variable, value, mode, rmap, start, goal, gamma, v_max, strict) -> SweepRow:
    try:
        p = plan(rmap, start, goal, gamma, v_max=v_max, strict=strict)
    except InfeasibleEndpointError as exc:
        return SweepRow(variable, value, mode, None, None, 0, f"infeasible:{exc.reason}")
    except NoPathError as exc:
        return SweepRow(variable, value, mode, None, None, 0, f"infeasible:{exc.reason}")
    return SweepRow(variable, value, mode, p.total_distance, p.travel_time, len(p), "ok")


def sweep_gamma(scene: Scenario, gammas: Sequence[float], modes: Iterable[str] = DEFAULT_MODES,
                *, strict: bool = False, cache: MapCache | None = None) -> list[SweepRow]:
    cache = cache or MapCache()
    start, goal = endpoints(scene)
    rows = []
    for mode in map(parse_mode, modes):
        rmap = cache.get(scene, mode)
        for g in gammas:
            rows.append(_plan_row("gamma_bar_db", float(g), mode, rmap, start, goal, g,
                                  scene.v_max, strict))
    return rows


def sweep_elements(scene: Scenario, counts: Sequence[int], gamma_bar_db: float,
                   modes: Iterable[str] = DEFAULT_MODES, *, strict: bool = False,
                   cache: MapCache | None = None) -> list[SweepRow]:
    cache = cache or MapCache()
    start, goal = endpoints(scene)
    rows = []
    for mode in map(parse_mode, modes):
        for m in counts:
            rmap = cache.get(with_elements(scene, int(m)), mode)
            rows.append(_plan_row("num_elements", float(m), mode, rmap, start, goal,
                                  gamma_bar_db, scene.v_max, strict))
    return rows


def feasibility_thresholds(scene: Scenario, modes: Iterable[str] = DEFAULT_MODES, *,
                           strict: bool = False,
                           cache: MapCache | None = None) -> dict[str, float | None]:
    """Largest feasible target per mode (dB), ``None`` if never feasible."""
    cache = cache or MapCache()
    start, goal = endpoints(scene)
    return {m: max_feasible_gamma(cache.get(scene, m), start, goal, strict)
            for m in map(parse_mode, modes)}


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["variable,value,mode,distance_m,travel_time_s,waypoints,status"]
    for r in rows:
        d = "infeasible" if r.distance is None else repr(r.distance)
        t = "infeasible" if r.travel_time is None else repr(r.travel_time)
        lines.append(f"{r.variable},{r.value!r},{r.mode},{d},{t},{r.waypoints},{r.status}")
    return "\n".join(lines) + "\n"


def thresholds_to_csv(th: dict[str, float | None]) -> str:
    lines = ["mode,max_feasible_gamma_db"]
    for m, v in th.items():
        lines.append(f"{m},{'infeasible' if v is None else repr(v)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------- Monte Carlo probes

@dataclass(frozen=True)
class ProbeResult:
    name: str
    cell: tuple[int, int]
    k_am: float
    k_im: float
    closed_form: float
    empirical: float
    rel_error: float
    rel_sigma: float

    @property
    def passed(self) -> bool:
        return self.rel_error <= 3 * self.rel_sigma


def probe_cells(scene: Scenario) -> dict[str, tuple[int, int]]:
    """Deterministic representative cells: first match in row-major order.

    ``los``: both user links clear; ``nlos_direct``: AP link blocked, IRS link
    clear; ``nlos_both``: both blocked; ``near_irs``: closest free cell to the
    IRS. Categories absent from the scene are omitted.
    """
    grid = scene.grid
    blocked = footprint_mask(grid, scene.obstacles)
    found: dict[str, tuple[int, int]] = {}
    best = (math.inf, None)
    for i in range(1, grid.X + 1):
        for j in range(1, grid.Y + 1):
            if blocked[i - 1, j - 1]:
                continue
            q = cell_center(grid, i, j)
            ap = link_stats(scene, q, "ap").rician_k > 0 or scene.rician_kappa == 0
            irs = link_stats(scene, q, "irs").rician_k > 0 or scene.rician_kappa == 0
            if scene.rician_kappa > 0:
                kind = {(True, True): "los", (False, True): "nlos_direct",
                        (False, False): "nlos_both"}.get((ap, irs))
                if kind and kind not in found:
                    found[kind] = (i, j)
            elif "los" not in found:
                found["los"] = (i, j)
            d = math.dist(q, scene.irs_pos)
            if d < best[0]:
                best = (d, (i, j))
    if best[1] is not None:
        found["near_irs"] = best[1]
    order = ("los", "nlos_direct", "nlos_both", "near_irs")
    return {k: found[k] for k in order if k in found}


def validate_expected_gain(scene: Scenario, n_samples: int, seed: int, *,
                   workers: int = 1) -> list[ProbeResult]:
    """Closed-form expected gain against the Monte Carlo mean at probe cells.

    Each probe uses the continuous optimal phases for its cell and its own
    child seed, so results do not depend on which probes exist.
    """
    out = []
    for k, (name, cell) in enumerate(probe_cells(scene).items()):
        q = cell_center(scene.grid, *cell)
        ctx = channel_context(scene, q)
        los = ctx.los()
        phases = optimal_phases(los)
        ref = expected_gain(los, phases)
        child = [seed, k]
        mc = monte_carlo_gain(ctx, phases, n_samples, child, workers=workers)
        out.append(ProbeResult(name, cell, link_stats(scene, q, "ap").rician_k,
                               link_stats(scene, q, "irs").rician_k, ref, mc.mean,
                               mc.rel_error(ref), mc.rel_sigma(ref)))
    return out


def validation_report(results: Sequence[ProbeResult], n_samples: int, seed: int) -> str:
    lines = [f"# Monte Carlo check of the expected channel power gain "
             f"(samples={n_samples}, seed={seed})",
             "probe,i,j,K_am,K_im,closed_form_db,empirical_db,rel_error,3sigma_bound,result"]
    for r in results:
        lines.append(
            f"{r.name},{r.cell[0]},{r.cell[1]},{r.k_am:.6g},{r.k_im:.6g},"
            f"{10 * math.log10(r.closed_form):.6f},{10 * math.log10(r.empirical):.6f},"
            f"{r.rel_error:.3e},{3 * r.rel_sigma:.3e},{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"
