"""Command-line front end: ``irsnav map|plan|sweep|validate``."""
from __future__ import annotations

import math
from pathlib import Path

import click
import numpy as np
import yaml

from .config import load_scenario, with_elements
from .errors import ConfigError, InfeasibleEndpointError, NoPathError
from .experiments import (MapCache, feasibility_thresholds, sweep_elements,
                          sweep_gamma, sweep_to_csv, thresholds_to_csv, validate_expected_gain,
                          validation_report)
from .fileio import atomic_write_text
from .geometry import cell_of
from .planner import export_path, max_feasible_gamma, plan
from .radiomap import export_heatmap, export_map, parse_mode

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_INFEASIBLE = 5
EXIT_VALIDATION = 6


class CliFailure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _scene(config, elements):
    try:
        scene = load_scenario(config)
        if elements is not None:
            scene = with_elements(scene, elements)
    except ConfigError as exc:
        raise CliFailure(f"config error: {exc}", EXIT_CONFIG) from None
    except yaml.YAMLError as exc:
        raise CliFailure(f"config error: malformed YAML: {exc}", EXIT_CONFIG) from None
    except OSError as exc:
        raise CliFailure(f"cannot read config: {exc}", EXIT_IO) from None
    return scene


def _mode(mode, levels):
    if levels is not None:
        mode = f"discrete:{levels}"
    try:
        return parse_mode(mode)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--mode") from None


def _write(fn, *args):
    try:
        return fn(*args)
    except OSError as exc:
        raise CliFailure(f"write failed: {exc}", EXIT_IO) from None


def _floats(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (inclusive stop)."""
    try:
        if ":" in text:
            a, b, s = (float(t) for t in text.split(":"))
            if s == 0:
                raise ValueError("zero step")
            n = int(math.floor((b - a) / s + 1e-9)) + 1
            return [round(a + k * s, 12) for k in range(max(n, 0))]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"cannot parse values {text!r}: {exc}",
                                 param_hint="--values") from None


def _point(text: str | None):
    if text is None:
        return None
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected x,y, got {text!r}") from None
    return x, y


config_opt = click.option("-c", "--config", type=click.Path(dir_okay=False), default=None,
                          help="Scenario YAML (default: bundled indoor factory).")
mode_opt = click.option("-m", "--mode", default="continuous", show_default=True,
                        help="no_irs, continuous, discrete:L or b-bit.")
levels_opt = click.option("-L", "--levels", type=click.IntRange(min=2), default=None,
                          help="Phase levels; shorthand for --mode discrete:L.")
elements_opt = click.option("-M", "--elements", type=click.IntRange(min=1), default=None,
                            help="Override the number of IRS elements.")
strict_opt = click.option("--strict", is_flag=True,
                          help="Forbid diagonal moves between two infeasible cells.")
out_opt = click.option("-o", "--output-dir", type=click.Path(file_okay=False),
                       default=".", show_default=True)
cache_opt = click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
                         envvar="IRSNAV_CACHE_DIR", help="Map cache directory.")


@click.group()
@click.version_option(package_name="irsnav")
def main():
    """IRS-aware radio maps and constrained robot path planning."""


@main.command("map")
@config_opt
@mode_opt
@levels_opt
@elements_opt
@out_opt
@click.option("--heatmap/--no-heatmap", default=True, show_default=True)
@cache_opt
def cmd_map(config, mode, levels, elements, output_dir, heatmap, cache_dir):
    """Build the channel power gain map and write it as CSV."""
    scene = _scene(config, elements)
    mode = _mode(mode, levels)
    rmap = MapCache(cache_dir).get(scene, mode)
    out = Path(output_dir)
    stem = f"map_{mode.replace(':', '')}"
    _write(export_map, rmap, out / f"{stem}.csv")
    if heatmap:
        _write(export_heatmap, rmap, out / f"{stem}.pgm")
    fin = rmap.finite_db()
    click.echo(f"mode: {mode}")
    click.echo(f"grid: {rmap.grid.X}x{rmap.grid.Y}, delta={rmap.grid.delta} m")
    click.echo(f"fingerprint: {rmap.fingerprint}")
    click.echo(f"obstacle cells: {int(rmap.obstacle_mask.sum())}")
    if fin.size:
        click.echo(f"gain dB min/median/max: {fin.min():.4f} / {np.median(fin):.4f} / "
                   f"{fin.max():.4f}")
    click.echo(f"wrote {out / (stem + '.csv')}")


@main.command("plan")
@config_opt
@click.option("-g", "--gamma", "gamma_db", type=float, default=None,
              help="Gain target in dB (default from config; -inf allowed).")
@mode_opt
@levels_opt
@elements_opt
@strict_opt
@click.option("--start", default=None, help="Override start x,y.")
@click.option("--goal", default=None, help="Override goal x,y.")
@out_opt
@cache_opt
def cmd_plan(config, gamma_db, mode, levels, elements, strict, start, goal, output_dir,
             cache_dir):
    """Plan the shortest path whose cells all meet the gain target."""
    scene = _scene(config, elements)
    mode = _mode(mode, levels)
    gamma_db = scene.gamma_bar_db if gamma_db is None else gamma_db
    rmap = MapCache(cache_dir).get(scene, mode)
    z = scene.robot_height
    qs = _point(start) or scene.q_start[:2]
    qg = _point(goal) or scene.q_goal[:2]
    try:
        s, g = cell_of(scene.grid, (*qs, z)), cell_of(scene.grid, (*qg, z))
    except Exception as exc:
        raise CliFailure(f"config error: {exc}", EXIT_CONFIG) from None
    try:
        path = plan(rmap, s, g, gamma_db, v_max=scene.v_max, strict=strict)
    except (InfeasibleEndpointError, NoPathError) as exc:
        best = max_feasible_gamma(rmap, s, g, strict)
        hint = ("no target is feasible" if best is None
                else f"nearest feasible target is {best:.4f} dB")
        raise CliFailure(f"infeasible at gamma_bar={gamma_db} dB ({exc.reason}); {hint}",
                         EXIT_INFEASIBLE) from None
    out = Path(output_dir)
    target = out / f"path_{mode.replace(':', '')}.csv"
    _write(export_path, path, target, rmap)
    margin = min(rmap.values_db[i - 1, j - 1] for i, j in path.cells) - gamma_db
    snap_s = math.dist(qs, path.waypoints[0][:2])
    snap_g = math.dist(qg, path.waypoints[-1][:2])
    click.echo(f"mode: {mode}")
    click.echo(f"gamma_bar: {gamma_db} dB")
    click.echo(f"start cell: {s} (snap {snap_s:.4f} m), goal cell: {g} (snap {snap_g:.4f} m)")
    click.echo(f"distance: {path.total_distance:.6f} m")
    click.echo(f"travel time: {path.travel_time:.6f} s")
    click.echo(f"waypoints: {len(path)}")
    click.echo(f"feasibility margin: {margin:.6f} dB")
    click.echo(f"wrote {target}")


@main.command("sweep")
@config_opt
@click.option("--variable", type=click.Choice(["gamma_bar", "num_elements"]),
              default="gamma_bar", show_default=True)
@click.option("--values", "values_text", required=True,
              help="Comma list, or start:stop:step with inclusive stop.")
@click.option("--modes", default="no_irs,1-bit,2-bit,3-bit,continuous", show_default=True)
@click.option("-g", "--gamma", "gamma_db", type=float, default=None,
              help="Fixed target for an element sweep (default from config).")
@elements_opt
@strict_opt
@click.option("-o", "--output", type=click.Path(dir_okay=False), default="sweep.csv",
              show_default=True)
@click.option("--thresholds/--no-thresholds", default=True, show_default=True,
              help="Also write the largest feasible target per mode.")
@cache_opt
def cmd_sweep(config, variable, values_text, modes, gamma_db, elements, strict, output,
              thresholds, cache_dir):
    """Travel distance per (value, mode); infeasible rows are kept."""
    scene = _scene(config, elements)
    values = _floats(values_text)
    if not values:
        raise click.BadParameter("no values", param_hint="--values")
    d = np.diff(values)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise click.BadParameter("values must be strictly monotone", param_hint="--values")
    mode_list = [_mode(m.strip(), None) for m in modes.split(",") if m.strip()]
    cache = MapCache(cache_dir)
    if variable == "gamma_bar":
        rows = sweep_gamma(scene, values, mode_list, strict=strict, cache=cache)
    else:
        if any(v != int(v) for v in values):
            raise click.BadParameter("element counts must be integers", param_hint="--values")
        try:
            for v in values:
                with_elements(scene, int(v))
        except ConfigError as exc:
            raise CliFailure(f"config error: {exc}", EXIT_CONFIG) from None
        gamma_db = scene.gamma_bar_db if gamma_db is None else gamma_db
        rows = sweep_elements(scene, [int(v) for v in values], gamma_db, mode_list,
                              strict=strict, cache=cache)
    out = Path(output)
    _write(atomic_write_text, out, sweep_to_csv(rows))
    click.echo(f"wrote {out} ({len(rows)} rows, "
               f"{sum(not r.feasible for r in rows)} infeasible)")
    if thresholds:
        th = feasibility_thresholds(scene, mode_list, strict=strict, cache=cache)
        tpath = out.with_name(out.stem + "_thresholds.csv")
        _write(atomic_write_text, tpath, thresholds_to_csv(th))
        for m, v in th.items():
            click.echo(f"max feasible gamma_bar [{m}]: "
                       f"{'none' if v is None else f'{v:.4f} dB'}")


@main.command("validate")
@config_opt
@click.option("-n", "--samples", type=click.IntRange(min=10_000), default=100_000,
              show_default=True)
@click.option("-s", "--seed", type=click.IntRange(min=0), default=0, show_default=True)
@elements_opt
@click.option("-j", "--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None,
              help="Also write the report to this file.")
def cmd_validate(config, samples, seed, elements, workers, output):
    """Monte Carlo check of the closed-form expected gain at probe cells."""
    scene = _scene(config, elements)
    results = validate_expected_gain(scene, samples, seed, workers=workers)
    report = validation_report(results, samples, seed)
    click.echo(report, nl=False)
    if output:
        _write(atomic_write_text, Path(output), report)
    if not all(r.passed for r in results):
        raise CliFailure("validation failed: error above the 3-sigma bound", EXIT_VALIDATION)

