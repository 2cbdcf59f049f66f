import os
import subprocess
import sys

import numpy as np
import pytest

from irsnav import kernels


def _both():
    b = kernels.backends()
    if len(b) < 2:
        pytest.skip("compiled extension not built")
    return b["python"], b["cython"]


def test_backend_selected():
    assert kernels.BACKEND in ("python", "cython")
    assert "python" in kernels.backends()


def test_env_forces_fallback():
    env = dict(os.environ, IRSNAV_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from irsnav import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_cascade_sums_agree(scene):
    py, cy = _both()
    elems = scene.element_positions()
    ap_d = np.linalg.norm(elems - np.asarray(scene.ap_pos), axis=1)
    cells = scene.grid.centers().reshape(-1, 3)[::37]
    k = 2 * np.pi / scene.wavelength
    a = py.cascade_sums(elems, ap_d, cells, k, 20)
    b = cy.cascade_sums(elems, ap_d, cells, k, 20)
    assert a.shape == (len(cells), 60)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_cascade_sums_direct_formula(rng):
    py, cy = _both()
    elems = rng.normal(size=(6, 3))
    ap_d = rng.uniform(1, 5, 6)
    cells = rng.normal(size=(3, 3))
    ref = np.exp(-1j * 7.0 * (np.linalg.norm(elems[None] - cells[:, None], axis=2) - ap_d))
    ref = ref.reshape(3, 2, 3).sum(axis=2)
    for impl in (py, cy):
        np.testing.assert_allclose(impl.cascade_sums(elems, ap_d, cells, 7.0, 3), ref,
                                   rtol=1e-12)


def test_mc_moments_same_stream(rng):
    py, cy = _both()
    M = 5
    h = 0.3 + 0.1j
    r = rng.normal(size=M) + 1j * rng.normal(size=M)
    g = rng.normal(size=M) + 1j * rng.normal(size=M)
    f = np.exp(1j * rng.uniform(0, 6, M))
    a = py.mc_power_moments(h, r, g, f, 0.5, 0.7, 0.9, 5000, np.random.PCG64(3))
    b = cy.mc_power_moments(h, r, g, f, 0.5, 0.7, 0.9, 5000, np.random.PCG64(3))
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_dijkstra_unreachable_and_trivial():
    for impl in kernels.backends().values():
        mask = np.array([[True, False, True]])
        found, *_ = impl.grid_dijkstra(mask, 0, 2, False)
        assert not found
        found, a, b, path = impl.grid_dijkstra(mask, 0, 0, False)
        assert found and (a, b) == (0, 0) and list(path) == [0]
