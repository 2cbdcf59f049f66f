"""Channel power gain maps over the planning grid.

A map stores one value per cell: the largest expected channel power gain the
robot can see at the cell center under the chosen IRS mode.  Cells whose
center lies inside an obstacle footprint hold ``-inf``.

Map CSV layout (``#`` lines are the header, then ``X`` rows of ``Y`` dB
values; row ``i`` is cell column ``i`` along x)::

    # format: irsnav-radio-map
    # version: 1
    # X: 40
    # Y: 40
    # delta: 0.5
    # q0: -9.75 -9.75 1.0
    # mode: continuous
    # fingerprint: <sha256>
    -62.31,-62.08,...
"""
from __future__ import annotations

import hashlib
import json
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import los_field
from .config import scenario_to_dict
from .errors import ParseError, StaleMapWarning
from .fileio import atomic_write_bytes, atomic_write_text
from .geometry import GridSpec, Point3, Scenario, footprint_mask
from .phases import achieved_gains

FORMAT_VERSION = 1
MAP_FORMAT = "irsnav-radio-map"
FEASIBLE_FORMAT = "irsnav-feasible-map"

_ALIASES = {
    "no_irs": "no_irs", "no-irs": "no_irs", "none": "no_irs",
    "continuous": "continuous", "cont": "continuous",
}


def parse_mode(mode: str) -> str:
    """Canonical mode string: ``no_irs``, ``continuous`` or ``discrete:L``.

    ``b-bit`` / ``bbit`` are accepted as ``discrete:2**b``.
    """
    m = str(mode).strip().lower()
    if m in _ALIASES:
        return _ALIASES[m]
    hit = re.fullmatch(r"(\d+)-?bits?", m)
    if hit and int(hit.group(1)) >= 1:
        return f"discrete:{2 ** int(hit.group(1))}"
    hit = re.fullmatch(r"discrete[:(]?(\d+)\)?", m)
    if hit and int(hit.group(1)) >= 2:
        return f"discrete:{int(hit.group(1))}"
    raise ValueError(f"unknown mode {mode!r}")


def mode_levels(mode: str) -> int | None:
    mode = parse_mode(mode)
    return int(mode.split(":")[1]) if mode.startswith("discrete") else None


def mode_label(mode: str) -> str:
    mode = parse_mode(mode)
    if mode.startswith("discrete"):
        L = mode_levels(mode)
        b = L.bit_length() - 1
        return f"{b}-bit" if 2 ** b == L else mode
    return mode


def fingerprint(scene: Scenario, mode: str) -> str:
    payload = {"scenario": scenario_to_dict(scene), "mode": parse_mode(mode)}
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


def db_to_linear(db: np.ndarray) -> np.ndarray:
    """Elementwise ``10**(db/10)``, ``-inf`` for non-finite entries.

    Uses the same scalar conversion as :func:`gamma_threshold`, so a target
    equal to a stored dB value maps to exactly the stored linear value
    (vectorized ``pow`` may differ in the last bit).
    """
    db = np.asarray(db, dtype=float)
    out = np.full(db.shape, -np.inf)
    fin = np.isfinite(db)
    out[fin] = [gamma_threshold(float(x)) for x in db[fin]]
    return out


def linear_to_db(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    out = np.full(v.shape, -np.inf)
    ok = np.isfinite(v) & (v > 0)
    out[ok] = 10.0 * np.log10(v[ok])
    return out


@dataclass(frozen=True, eq=False)
class RadioMap:
    """Per-cell map values.

    ``values_db`` is the stored quantity; ``values`` (linear power gain,
    ``-inf`` for obstacle cells) is derived from it, so a map read back from
    CSV is bit-identical to the one written.
    """

    grid: GridSpec
    values_db: np.ndarray
    mode: str
    fingerprint: str = ""
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        db = np.array(self.values_db, dtype=float)
        if db.shape != self.grid.shape:
            raise ValueError(f"values shape {db.shape} != grid shape {self.grid.shape}")
        db.setflags(write=False)
        lin = db_to_linear(db)
        lin.setflags(write=False)
        object.__setattr__(self, "values_db", db)
        object.__setattr__(self, "values", lin)
        object.__setattr__(self, "mode", parse_mode(self.mode))

    @property
    def obstacle_mask(self) -> np.ndarray:
        return np.isneginf(self.values_db)

    def finite_db(self) -> np.ndarray:
        return self.values_db[np.isfinite(self.values_db)]

    def value_at(self, i: int, j: int) -> float:
        return float(self.values[i - 1, j - 1])


@dataclass(frozen=True, eq=False)
class FeasibleMap:
    grid: GridSpec
    flags: np.ndarray
    gamma_bar_db: float


def build_map(scene: Scenario, mode: str = "continuous", *, workers: int = 1) -> RadioMap:
    """Evaluate the map for every cell center of the scenario grid."""
    mode = parse_mode(mode)
    grid = scene.grid
    blocked = footprint_mask(grid, scene.obstacles)
    centers = grid.centers().reshape(-1, 3)
    free = np.flatnonzero(~blocked.ravel())
    pts = centers[free]
    with_irs = mode != "no_irs"
    levels = mode_levels(mode)

    def evaluate(chunk):
        f = los_field(scene, pts[chunk], with_irs=with_irs)
        if not with_irs:
            return np.abs(f.h_tilde) ** 2 + f.tau
        return achieved_gains(f.h_tilde, f.w_tilde, f.tau, levels)

    # fixed chunking keeps serial and threaded builds bit-identical
    chunks = [slice(s, s + 256) for s in range(0, len(pts), 256)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(evaluate, chunks))
    else:
        parts = [evaluate(c) for c in chunks]
    gains = np.concatenate(parts) if parts else np.empty(0)
    db = np.full(grid.X * grid.Y, -np.inf)
    db[free] = linear_to_db(gains)
    return RadioMap(grid, db.reshape(grid.shape), mode, fingerprint(scene, mode))


def gamma_threshold(gamma_bar_db: float) -> float:
    """Linear threshold for a dB target (``-inf`` dB maps to 0)."""
    if gamma_bar_db == -np.inf:
        return 0.0
    return float(10.0 ** (gamma_bar_db / 10.0))


def feasible_map(rmap: RadioMap, gamma_bar_db: float) -> FeasibleMap:
    thr = gamma_threshold(gamma_bar_db)
    flags = rmap.values >= thr
    flags &= ~rmap.obstacle_mask
    return FeasibleMap(rmap.grid, flags, float(gamma_bar_db))


# --------------------------------------------------------------------- I/O

def _header(kind: str, grid: GridSpec, extra: list[tuple[str, str]]) -> list[str]:
    lines = [
        f"# format: {kind}",
        f"# version: {FORMAT_VERSION}",
        f"# X: {grid.X}",
        f"# Y: {grid.Y}",
        f"# delta: {grid.delta!r}",
        f"# q0: {grid.q0.x!r} {grid.q0.y!r} {grid.q0.z!r}",
    ]
    lines += [f"# {k}: {v}" for k, v in extra]
    return lines


def map_to_csv(rmap: RadioMap) -> str:
    lines = _header(MAP_FORMAT, rmap.grid,
                    [("mode", rmap.mode), ("fingerprint", rmap.fingerprint)])
    for row in rmap.values_db:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def export_map(rmap: RadioMap, path) -> Path:
    return atomic_write_text(path, map_to_csv(rmap))


def _parse_header(lines: list[str], kind: str) -> tuple[dict, int]:
    meta: dict[str, tuple[str, int]] = {}
    n = 0
    for n, line in enumerate(lines, start=1):
        if not line.startswith("#"):
            n -= 1
            break
        body = line[1:].strip()
        if ":" not in body:
            raise ParseError(f"header line is not 'key: value': {line!r}", n, 1)
        k, v = body.split(":", 1)
        meta[k.strip()] = (v.strip(), n)
    if meta.get("format", ("",))[0] != kind:
        raise ParseError(f"expected format {kind!r}", meta.get("format", ("", 1))[1], 1)
    if meta.get("version", ("",))[0] != str(FORMAT_VERSION):
        raise ParseError("unsupported format version", meta.get("version", ("", 1))[1], 1)
    return meta, n


def _meta_grid(meta: dict) -> GridSpec:
    def need(key):
        if key not in meta:
            raise ParseError(f"missing header key {key!r}", 1, 1)
        return meta[key]

    try:
        X = int(need("X")[0])
    except ValueError:
        raise ParseError("X must be an integer", meta["X"][1], 1) from None
    try:
        Y = int(need("Y")[0])
    except ValueError:
        raise ParseError("Y must be an integer", meta["Y"][1], 1) from None
    try:
        delta = float(need("delta")[0])
        q0 = [float(t) for t in need("q0")[0].split()]
        if len(q0) != 3:
            raise ValueError
    except ValueError:
        raise ParseError("bad delta/q0 header", meta.get("q0", ("", 1))[1], 1) from None
    try:
        return GridSpec(Point3(*q0), delta, X, Y)
    except ValueError as exc:
        raise ParseError(str(exc), meta["X"][1], 1) from None


def _parse_rows(lines: list[str], start: int, X: int, Y: int, parse_token) -> np.ndarray:
    body = [(k, ln) for k, ln in enumerate(lines[start:], start=start + 1) if ln.strip()]
    if len(body) != X:
        where = body[-1][0] if body else start + 1
        raise ParseError(f"expected {X} data rows, found {len(body)}", where, 1)
    out = np.empty((X, Y))
    for r, (lineno, line) in enumerate(body):
        tokens = line.split(",")
        if len(tokens) != Y:
            raise ParseError(f"expected {Y} values, found {len(tokens)}", lineno, 1)
        col = 1
        for c, tok in enumerate(tokens):
            try:
                out[r, c] = parse_token(tok.strip())
            except ValueError as exc:
                raise ParseError(str(exc), lineno, col) from None
            col += len(tok) + 1
    return out


def _db_token(tok: str) -> float:
    if tok == "-inf":
        return -np.inf
    v = float(tok)
    if not np.isfinite(v):
        raise ValueError(f"invalid map value {tok!r}")
    return v


def map_from_csv(text: str) -> RadioMap:
    lines = text.splitlines()
    meta, n = _parse_header(lines, MAP_FORMAT)
    grid = _meta_grid(meta)
    values = _parse_rows(lines, n, grid.X, grid.Y, _db_token)
    mode = meta.get("mode", ("continuous", 1))
    try:
        return RadioMap(grid, values, mode[0], meta.get("fingerprint", ("", 1))[0])
    except ValueError as exc:
        raise ParseError(str(exc), mode[1], 1) from None


def import_map(path, expected_fingerprint: str | None = None) -> RadioMap:
    """Read a map CSV; warn with :class:`StaleMapWarning` on fingerprint mismatch."""
    rmap = map_from_csv(Path(path).read_text())
    if expected_fingerprint is not None and rmap.fingerprint != expected_fingerprint:
        warnings.warn(f"map {path} was built for a different scenario "
                      f"({rmap.fingerprint[:12]} != {expected_fingerprint[:12]})",
                      StaleMapWarning, stacklevel=2)
    return rmap


def feasible_to_csv(fmap: FeasibleMap) -> str:
    lines = _header(FEASIBLE_FORMAT, fmap.grid, [("gamma_bar_db", repr(fmap.gamma_bar_db))])
    for row in fmap.flags:
        lines.append(",".join("1" if f else "0" for f in row))
    return "\n".join(lines) + "\n"


def _flag_token(tok: str) -> float:
    if tok not in ("0", "1"):
        raise ValueError(f"flag must be 0 or 1, got {tok!r}")
    return float(tok)


def feasible_from_csv(text: str) -> FeasibleMap:
    lines = text.splitlines()
    meta, n = _parse_header(lines, FEASIBLE_FORMAT)
    grid = _meta_grid(meta)
    flags = _parse_rows(lines, n, grid.X, grid.Y, _flag_token).astype(bool)
    try:
        gamma = float(meta["gamma_bar_db"][0])
    except (KeyError, ValueError):
        raise ParseError("missing or bad gamma_bar_db", 1, 1) from None
    return FeasibleMap(grid, flags, gamma)


def heatmap_pgm(rmap: RadioMap) -> bytes:
    """Binary grayscale image, min-max scaled over finite dB values.

    Obstacle cells are black (0); finite cells span 1..255. The image is
    drawn with +y up and +x to the right.
    """
    db = rmap.values_db
    fin = np.isfinite(db)
    img = np.zeros(db.shape, dtype=np.uint8)
    if fin.any():
        lo, hi = db[fin].min(), db[fin].max()
        span = hi - lo if hi > lo else 1.0
        img[fin] = (1 + np.round(254 * (db[fin] - lo) / span)).astype(np.uint8)
    pix = img.T[::-1]
    h, w = pix.shape
    return f"P5\n{w} {h}\n255\n".encode() + pix.tobytes()


def export_heatmap(rmap: RadioMap, path) -> Path:
    return atomic_write_bytes(path, heatmap_pgm(rmap))
