"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs on identical inputs under both backends; outputs are
checked for agreement before timings are reported.
"""
import argparse
import time

import numpy as np

from irsnav import load_scenario
from irsnav import _kernels_py
from irsnav.channel import channel_context
from irsnav.geometry import cell_center

try:
    from irsnav import _ext
except ImportError:
    _ext = None


def best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cascade_case(scene):
    elems = scene.element_positions()
    ap_dist = np.linalg.norm(elems - np.asarray(scene.ap_pos), axis=1)
    cells = scene.grid.centers().reshape(-1, 3)[:400]
    k = 2 * np.pi / scene.wavelength
    per = scene.irs_layout.per_sub
    return lambda impl: impl.cascade_sums(elems, ap_dist, cells, k, per)


def mc_case(scene, n):
    ctx = channel_context(scene, cell_center(scene.grid, 20, 1))
    f = ctx.phasor(np.zeros(ctx.n_sub))
    sd = np.sqrt([ctx.eta_am, ctx.eta_im, ctx.eta_ai])
    return lambda impl: impl.mc_power_moments(ctx.h_los, ctx.r_los, ctx.g_los, f, *sd, n,
                                              np.random.PCG64(7))


def dijkstra_case(size, density=0.25, seed=3):
    rng = np.random.default_rng(seed)
    mask = rng.random((size, size)) > density
    mask[0, 0] = mask[-1, -1] = True
    return lambda impl: impl.grid_dijkstra(mask, 0, size * size - 1, False)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--mc-samples", type=int, default=200)
    args = ap.parse_args()
    if _ext is None:
        print("compiled extension not built; only the fallback is available")
        return

    scene = load_scenario()
    cases = [
        ("cascade_sums 400 cells x M=1200", cascade_case(scene)),
        (f"mc_power_moments {args.mc_samples} samples, M=1200",
         mc_case(scene, args.mc_samples)),
        ("grid_dijkstra 40x40", dijkstra_case(40)),
        ("grid_dijkstra 200x200", dijkstra_case(200)),
    ]
    print(f"{'kernel':<40}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, run in cases:
        tp, op = best_of(lambda: run(_kernels_py), args.repeat)
        tc, oc = best_of(lambda: run(_ext), args.repeat)
        if isinstance(op, tuple):
            ok = all(np.allclose(a, b, rtol=1e-10, atol=0) for a, b in zip(op, oc))
        else:
            ok = np.allclose(op, oc, rtol=1e-10, atol=1e-20)
        flag = "" if ok else "  MISMATCH"
        print(f"{name:<40}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x{flag}")


if __name__ == "__main__":
    main()
