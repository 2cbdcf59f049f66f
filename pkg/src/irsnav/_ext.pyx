# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``; same signatures."""
import numpy as np

cimport cython
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport cos, sin, sqrt
from libc.stdlib cimport free, malloc
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal

cdef double SQRT2 = sqrt(2.0)
cdef double INV_SQRT2 = 1.0 / sqrt(2.0)


def cascade_sums(elem_pos, ap_dist, cells, double wavenumber, Py_ssize_t per_sub):
    cdef double[:, ::1] E = np.ascontiguousarray(elem_pos, dtype=np.float64)
    cdef double[::1] A = np.ascontiguousarray(ap_dist, dtype=np.float64)
    cdef double[:, ::1] C = np.ascontiguousarray(cells, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t M = E.shape[0]
    cdef Py_ssize_t P = C.shape[0]
    cdef Py_ssize_t n_sub = M // per_sub
    out = np.empty((P, n_sub), dtype=np.complex128)
    cdef double[:, ::1] O = out.view(np.float64).reshape(P, 2 * n_sub)
    cdef Py_ssize_t p, n, k, m
    cdef double dx, dy, dz, ph, re, im
    with nogil:
        for p in range(P):
            for n in range(n_sub):
                re = 0.0
                im = 0.0
                for k in range(per_sub):
                    m = n * per_sub + k
                    dx = C[p, 0] - E[m, 0]
                    dy = C[p, 1] - E[m, 1]
                    dz = C[p, 2] - E[m, 2]
                    ph = -wavenumber * (sqrt(dx * dx + dy * dy + dz * dz) - A[m])
                    re += cos(ph)
                    im += sin(ph)
                O[p, 2 * n] = re
                O[p, 2 * n + 1] = im
    return out


def mc_power_moments(h_los, r_los, g_los, phasor, double sd_h, double sd_r,
                     double sd_g, Py_ssize_t n_samples, bit_generator):
    cdef double[::1] R = np.ascontiguousarray(r_los, dtype=np.complex128).view(np.float64)
    cdef double[::1] G = np.ascontiguousarray(g_los, dtype=np.complex128).view(np.float64)
    cdef double[::1] F = np.ascontiguousarray(phasor, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t M = R.shape[0] // 2
    cdef double hr = complex(h_los).real
    cdef double hi = complex(h_los).imag
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator")
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    cdef Py_ssize_t s, m
    cdef double cr, ci, xr, xi, rr, ri, gr, gi, tr, ti, p
    cdef double s1 = 0.0, s2 = 0.0
    sh = sd_h * INV_SQRT2
    sr = sd_r * INV_SQRT2
    sg = sd_g * INV_SQRT2
    cdef double c_sh = sh, c_sr = sr, c_sg = sg
    with bit_generator.lock, nogil:
        for s in range(n_samples):
            xr = hr + c_sh * random_standard_normal(rng)
            xi = hi + c_sh * random_standard_normal(rng)
            cr = xr
            ci = -xi
            for m in range(M):
                rr = R[2 * m] + c_sr * random_standard_normal(rng)
                ri = R[2 * m + 1] + c_sr * random_standard_normal(rng)
                gr = G[2 * m] + c_sg * random_standard_normal(rng)
                gi = G[2 * m + 1] + c_sg * random_standard_normal(rng)
                # conj(r) * phasor
                tr = rr * F[2 * m] + ri * F[2 * m + 1]
                ti = rr * F[2 * m + 1] - ri * F[2 * m]
                cr += tr * gr - ti * gi
                ci += tr * gi + ti * gr
            p = cr * cr + ci * ci
            s1 += p
            s2 += p * p
    return s1, s2


cdef inline bint _heap_less(double ka, Py_ssize_t na, double kb, Py_ssize_t nb) nogil:
    return ka < kb or (ka == kb and na < nb)


def grid_dijkstra(mask, Py_ssize_t start, Py_ssize_t goal, bint strict=False):
    cdef unsigned char[:, ::1] Mk = np.ascontiguousarray(mask, dtype=bool).view(np.uint8)
    cdef Py_ssize_t X = Mk.shape[0]
    cdef Py_ssize_t Y = Mk.shape[1]
    cdef Py_ssize_t size = X * Y
    cdef long long big = 1LL << 60
    a_arr = np.full(size, big, dtype=np.int64)
    b_arr = np.full(size, big, dtype=np.int64)
    pred_arr = np.full(size, -1, dtype=np.int64)
    done_arr = np.zeros(size, dtype=np.uint8)
    cdef long long[::1] a = a_arr
    cdef long long[::1] b = b_arr
    cdef long long[::1] pred = pred_arr
    cdef unsigned char[::1] done = done_arr
    # binary heap; each vertex pushed at most 8 times
    cdef Py_ssize_t cap = 8 * size + 1
    cdef double *hk = <double *> malloc(cap * sizeof(double))
    cdef Py_ssize_t *hn = <Py_ssize_t *> malloc(cap * sizeof(Py_ssize_t))
    if hk == NULL or hn == NULL:
        free(hk)
        free(hn)
        raise MemoryError()
    cdef Py_ssize_t hsize = 0
    cdef Py_ssize_t u, v, ui, uj, vi, vj, di, dj, pos, parent, child
    cdef long long na, nb
    cdef double key, tk
    cdef Py_ssize_t tn
    cdef bint diag
    a[start] = 0
    b[start] = 0
    hk[0] = 0.0
    hn[0] = start
    hsize = 1
    with nogil:
        while hsize > 0:
            u = hn[0]
            hsize -= 1
            if hsize > 0:
                # sift the last element down from the root
                tk = hk[hsize]
                tn = hn[hsize]
                pos = 0
                while True:
                    child = 2 * pos + 1
                    if child >= hsize:
                        break
                    if child + 1 < hsize and _heap_less(hk[child + 1], hn[child + 1], hk[child], hn[child]):
                        child += 1
                    if _heap_less(hk[child], hn[child], tk, tn):
                        hk[pos] = hk[child]
                        hn[pos] = hn[child]
                        pos = child
                    else:
                        break
                hk[pos] = tk
                hn[pos] = tn
            if done[u]:
                continue
            done[u] = 1
            if u == goal:
                break
            ui = u // Y
            uj = u % Y
            for di in range(-1, 2):
                vi = ui + di
                if vi < 0 or vi >= X:
                    continue
                for dj in range(-1, 2):
                    if di == 0 and dj == 0:
                        continue
                    vj = uj + dj
                    if vj < 0 or vj >= Y:
                        continue
                    v = vi * Y + vj
                    if not Mk[vi, vj] or done[v]:
                        continue
                    diag = di != 0 and dj != 0
                    if diag and strict and not (Mk[ui, vj] or Mk[vi, uj]):
                        continue
                    if diag:
                        na = a[u]
                        nb = b[u] + 1
                    else:
                        na = a[u] + 1
                        nb = b[u]
                    if na == a[v] and nb == b[v]:
                        if u < pred[v]:
                            pred[v] = u
                        continue
                    key = na + nb * SQRT2
                    if a[v] == big or key < a[v] + b[v] * SQRT2:
                        a[v] = na
                        b[v] = nb
                        pred[v] = u
                        pos = hsize
                        hsize += 1
                        while pos > 0:
                            parent = (pos - 1) // 2
                            if _heap_less(key, v, hk[parent], hn[parent]):
                                hk[pos] = hk[parent]
                                hn[pos] = hn[parent]
                                pos = parent
                            else:
                                break
                        hk[pos] = key
                        hn[pos] = v
    free(hk)
    free(hn)
    if not done[goal]:
        return False, -1, -1, np.empty(0, dtype=np.int64)
    path = []
    cdef Py_ssize_t cur = goal
    while cur != start:
        path.append(cur)
        cur = pred[cur]
    path.append(start)
    path.reverse()
    return True, int(a[goal]), int(b[goal]), np.array(path, dtype=np.int64)
