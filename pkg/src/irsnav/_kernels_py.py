"""Pure-Python/numpy implementations of the hot kernels.

These define the reference behaviour; ``_ext.pyx`` mirrors them, including
the order in which normal variates are drawn, so both backends consume the
same random stream for the same seed.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)
_INV_SQRT2 = 1.0 / SQRT2
_MC_CHUNK = 4096


def cascade_sums(elem_pos, ap_dist, cells, wavenumber, per_sub):
    """Per-sub-surface sums of unit cascade phasors.

    ``out[p, n] = sum_{m in n} exp(-1j*k*(|elem_m - cell_p| - ap_dist_m))``
    """
    elem_pos = np.ascontiguousarray(elem_pos, dtype=float)
    ap_dist = np.ascontiguousarray(ap_dist, dtype=float)
    cells = np.ascontiguousarray(cells, dtype=float).reshape(-1, 3)
    M = len(elem_pos)
    n_sub = M // per_sub
    out = np.empty((len(cells), n_sub), dtype=complex)
    # bound the temporary to ~8 MB
    step = max(1, (1 << 20) // max(M, 1))
    for s in range(0, len(cells), step):
        c = cells[s:s + step]
        d = np.sqrt(((c[:, None, :] - elem_pos[None, :, :]) ** 2).sum(axis=2))
        ph = np.exp(-1j * wavenumber * (d - ap_dist[None, :]))
        out[s:s + step] = ph.reshape(len(c), n_sub, per_sub).sum(axis=2)
    return out


def mc_power_moments(h_los, r_los, g_los, phasor, sd_h, sd_r, sd_g, n_samples, bit_generator):
    """Sums of ``|c|^2`` and ``|c|^4`` over ``n_samples`` channel draws.

    Per sample the draw order is ``h.re, h.im`` then, per element,
    ``r.re, r.im, g.re, g.im``; each complex entry is CN(0, 1).
    """
    rng = np.random.Generator(bit_generator)
    r_los = np.asarray(r_los, dtype=complex)
    g_los = np.asarray(g_los, dtype=complex)
    phasor = np.asarray(phasor, dtype=complex)
    M = len(r_los)
    width = 4 * M + 2
    s1 = 0.0
    s2 = 0.0
    done = 0
    while done < n_samples:
        k = min(_MC_CHUNK, n_samples - done)
        z = rng.standard_normal((k, width))
        h = h_los + sd_h * _INV_SQRT2 * (z[:, 0] + 1j * z[:, 1])
        r = r_los + sd_r * _INV_SQRT2 * (z[:, 2::4] + 1j * z[:, 3::4])
        g = g_los + sd_g * _INV_SQRT2 * (z[:, 4::4] + 1j * z[:, 5::4])
        c = np.conj(h) + (np.conj(r) * phasor * g).sum(axis=1)
        p = c.real ** 2 + c.imag ** 2
        s1 += float(p.sum())
        s2 += float((p * p).sum())
        done += k
    return s1, s2


def grid_dijkstra(mask, start, goal, strict=False):
    """8-connected shortest path on a boolean ``(X, Y)`` mask.

    ``start`` and ``goal`` are flat row-major indices. Path length is kept as
    exact move counts ``(n_orth, n_diag)`` so ties are detected exactly; among
    equal-length routes each vertex keeps the predecessor with the smallest
    flat index. Returns ``(found, n_orth, n_diag, path)``.
    """
    mask = np.ascontiguousarray(mask, dtype=bool)
    X, Y = mask.shape
    flat = mask.ravel()
    size = X * Y
    big = 1 << 60
    a = [big] * size
    b = [big] * size
    pred = [-1] * size
    done = [False] * size
    a[start] = 0
    b[start] = 0
    heap = [(0.0, start)]
    while heap:
        _, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == goal:
            break
        ui, uj = divmod(u, Y)
        for di in (-1, 0, 1):
            vi = ui + di
            if vi < 0 or vi >= X:
                continue
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                vj = uj + dj
                if vj < 0 or vj >= Y:
                    continue
                v = vi * Y + vj
                if not flat[v] or done[v]:
                    continue
                diag = di != 0 and dj != 0
                if diag and strict and not (flat[ui * Y + vj] or flat[vi * Y + uj]):
                    continue
                na = a[u] + (0 if diag else 1)
                nb = b[u] + (1 if diag else 0)
                if na == a[v] and nb == b[v]:
                    if u < pred[v]:
                        pred[v] = u
                    continue
                if a[v] == big or na + nb * SQRT2 < a[v] + b[v] * SQRT2:
                    a[v] = na
                    b[v] = nb
                    pred[v] = u
                    heapq.heappush(heap, (na + nb * SQRT2, v))
    if not done[goal]:
        return False, -1, -1, np.empty(0, dtype=np.int64)
    path = [goal]
    while path[-1] != start:
        path.append(pred[path[-1]])
    return True, a[goal], b[goal], np.array(path[::-1], dtype=np.int64)
