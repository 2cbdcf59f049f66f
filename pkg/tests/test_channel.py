import math

import numpy as np
import pytest

from irsnav import kernels
from irsnav.channel import (LosChannel, channel_context, db_to_gain, expected_gain,
                            link_stats, los_components, los_field, make_context,
                            monte_carlo_gain, path_loss_los, path_loss_nlos,
                            sample_effective_channel, ap_irs_stats)
from irsnav.errors import DomainError, InfeasibleLocationError, ShapeError
from irsnav.geometry import cell_center
from oracles import expected_power_elementwise, mc_power_numpy

KAPPA = 10 ** 0.3
FC = 2e9


# hand-evaluated: 19*log10(2) = 5.719570, 20*log10(2) = 6.020600
@pytest.mark.parametrize("d,los,nlos", [
    (1.0, 37.559570, 38.420600),
    (10.0, 59.059570, 61.420600),
    (100.0, 80.559570, 84.420600),
])
def test_path_loss_values(d, los, nlos):
    assert path_loss_los(d, FC) == pytest.approx(los, abs=1e-5)
    assert path_loss_nlos(d, FC) == pytest.approx(nlos, abs=1e-5)


def test_nlos_never_below_los():
    d = np.logspace(-1, 3, 200)
    assert np.all(path_loss_nlos(d, FC) >= path_loss_los(d, FC))


def test_nlos_takes_los_branch_at_short_range():
    # the two curves cross where 1.5*log10(d) = -0.56 - log10(2), d ~ 0.267 m
    d = 0.2
    assert path_loss_nlos(d, FC) == pytest.approx(path_loss_los(d, FC))


def test_path_loss_domain():
    with pytest.raises(DomainError):
        path_loss_los(0.0, FC)
    with pytest.raises(DomainError):
        path_loss_nlos(-1.0, FC)


def test_db_to_gain():
    assert db_to_gain(30.0) == pytest.approx(1e-3)


def test_link_stats_blocked_and_clear(scene):
    clear = cell_center(scene.grid, 1, 5)
    st = link_stats(scene, clear, "ap")
    d = math.dist(clear, scene.ap_pos)
    assert st.rician_k == pytest.approx(KAPPA)
    assert st.path_loss == pytest.approx(db_to_gain(path_loss_los(d, FC)))
    assert st.eta == pytest.approx(st.path_loss / (KAPPA + 1))
    blocked = cell_center(scene.grid, 1, 1)
    st = link_stats(scene, blocked, "ap")
    d = math.dist(blocked, scene.ap_pos)
    assert st.rician_k == 0
    assert st.path_loss == pytest.approx(db_to_gain(path_loss_nlos(d, FC)))
    assert st.eta == st.path_loss


def test_ap_irs_link_is_clear(scene):
    st = ap_irs_stats(scene)
    assert st.rician_k == pytest.approx(KAPPA)


def test_link_stats_inside_obstacle(scene):
    with pytest.raises(InfeasibleLocationError):
        link_stats(scene, (0.0, 0.0, 1.0), "ap")


def test_los_components_match_context(scene):
    for cell in [(1, 5), (20, 1), (3, 8), (35, 30)]:
        q = cell_center(scene.grid, *cell)
        a = los_components(scene, q)
        b = channel_context(scene, q).los()
        assert a.h_tilde == pytest.approx(b.h_tilde, rel=1e-12)
        np.testing.assert_allclose(a.w_tilde, b.w_tilde, rtol=1e-9, atol=1e-20)
        assert a.tau == pytest.approx(b.tau, rel=1e-14)


def test_los_field_vectorized_matches_single(scene):
    pts = np.array([cell_center(scene.grid, 1, 5), cell_center(scene.grid, 20, 1)])
    f = los_field(scene, pts)
    for p, q in enumerate(pts):
        one = los_components(scene, q)
        assert f.at(p).h_tilde == one.h_tilde
        np.testing.assert_array_equal(f.at(p).w_tilde, one.w_tilde)


def test_blocked_links_drop_los_parts(scene):
    q = cell_center(scene.grid, 3, 8)  # both user links blocked
    los = los_components(scene, q)
    assert los.h_tilde == 0
    assert np.all(los.w_tilde == 0)


def test_tau_formula(scene):
    q = cell_center(scene.grid, 1, 5)
    am, im, ai = link_stats(scene, q, "ap"), link_stats(scene, q, "irs"), ap_irs_stats(scene)
    tau = am.eta + ai.eta * im.eta * (im.rician_k + ai.rician_k + 1) * 1200
    assert los_components(scene, q).tau == pytest.approx(tau, rel=1e-13)


def _random_context(rng, n_sub, per_sub, los_am=True, los_im=True):
    M = n_sub * per_sub
    eta_am, eta_im, eta_ai = rng.uniform(0.2, 2.0, 3)
    k_am = KAPPA if los_am else 0.0
    k_im = KAPPA if los_im else 0.0
    k_ai = KAPPA
    h = math.sqrt(eta_am * k_am) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    r = math.sqrt(eta_im * k_im) * np.exp(1j * rng.uniform(0, 2 * np.pi, M))
    g = math.sqrt(eta_ai * k_ai) * np.exp(1j * rng.uniform(0, 2 * np.pi, M))
    return make_context(h, r, g, eta_am, eta_im, eta_ai, per_sub, k_im, k_ai)


def test_expected_gain_matches_elementwise_oracle(rng):
    for _ in range(50):
        ctx = _random_context(rng, rng.integers(1, 6), rng.integers(1, 5),
                              rng.random() < 0.5, rng.random() < 0.5)
        th = rng.uniform(0, 2 * np.pi, ctx.n_sub)
        ref = expected_power_elementwise(ctx.h_los, ctx.r_los, ctx.g_los, ctx.phasor(th),
                                         ctx.eta_am, ctx.eta_im, ctx.eta_ai)
        assert expected_gain(ctx.los(), th) == pytest.approx(ref, rel=1e-12)


def test_expected_gain_shape_check():
    los = LosChannel(1 + 0j, np.ones(3, complex), 0.5)
    with pytest.raises(ShapeError):
        expected_gain(los, np.zeros(2))


def test_make_context_shape_check():
    with pytest.raises(ShapeError):
        make_context(0j, np.ones(3), np.ones(3), 1, 1, 1, 2, 0, 0)


def test_monte_carlo_agrees_with_numpy_sampler(rng):
    ctx = _random_context(rng, 3, 2)
    th = rng.uniform(0, 2 * np.pi, 3)
    ref = expected_gain(ctx.los(), th)
    mc = monte_carlo_gain(ctx, th, 200_000, seed=5)
    m2, se2 = mc_power_numpy(ctx.h_los, ctx.r_los, ctx.g_los, ctx.phasor(th),
                             ctx.eta_am, ctx.eta_im, ctx.eta_ai, 200_000, 6)
    assert abs(mc.mean - ref) < 4 * mc.std_err
    assert abs(m2 - ref) < 4 * se2
    assert abs(mc.mean - m2) < 4 * math.hypot(mc.std_err, se2)


def test_monte_carlo_rayleigh_limit(rng):
    # all K = 0: the mean reduces to eta_am + eta_ai*eta_im*M
    M = 6
    ctx = make_context(0j, np.zeros(M), np.zeros(M), 0.7, 1.3, 0.4, 2, 0.0, 0.0)
    assert ctx.tau == pytest.approx(0.7 + 0.4 * 1.3 * M)
    mc = monte_carlo_gain(ctx, np.zeros(3), 100_000, seed=1)
    assert abs(mc.mean - ctx.tau) < 4 * mc.std_err


def test_monte_carlo_deterministic_and_worker_independent(rng):
    ctx = _random_context(rng, 2, 3)
    a = monte_carlo_gain(ctx, [0.1, 2.0], 5000, seed=9)
    b = monte_carlo_gain(ctx, [0.1, 2.0], 5000, seed=9)
    c = monte_carlo_gain(ctx, [0.1, 2.0], 5000, seed=9, workers=4)
    assert a == b == c
    d = monte_carlo_gain(ctx, [0.1, 2.0], 5000, seed=10)
    assert d.mean != a.mean


def test_monte_carlo_backends_agree(rng):
    backends = kernels.backends()
    if len(backends) < 2:
        pytest.skip("compiled extension not built")
    ctx = _random_context(rng, 2, 4)
    res = [monte_carlo_gain(ctx, [0.3, 1.0], 3000, seed=2, backend=b)
           for b in backends.values()]
    assert res[0].mean == pytest.approx(res[1].mean, rel=1e-12)


def test_sample_effective_channel_mean_power(rng):
    ctx = _random_context(rng, 2, 2)
    th = [0.5, 4.0]
    c = sample_effective_channel(ctx, th, seed=3, size=100_000)
    p = np.abs(c) ** 2
    ref = expected_gain(ctx.los(), th)
    assert abs(p.mean() - ref) < 4 * p.std() / math.sqrt(len(p))
    one = sample_effective_channel(ctx, th, seed=3)
    assert isinstance(one, complex)
    assert one == sample_effective_channel(ctx, th, seed=3)
