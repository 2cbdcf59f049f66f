"""Rician AP/IRS/user channels and their expected power.

Path losses follow the 3GPP indoor-factory sparse/high-BS (InF-SH) model and
are handled as linear power gains (< 1) everywhere except at the I/O
boundary. A link whose straight segment is blocked by an obstacle is pure
Rayleigh (K = 0) with NLoS path loss; otherwise K = kappa with LoS path loss.

LoS components use exact spherical wavefronts per IRS element.  Sign
conventions: the direct term of the effective channel is ``conj(h)`` and the
cascade term for sub-surface ``n`` is ``conj(w_n) * exp(1j*theta_n)``, where
``w_n = sum_{m in n} r_m * conj(g_m)`` over the scaled LoS vectors.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DomainError, InfeasibleLocationError, ShapeError
from .geometry import Scenario, in_obstacle_footprint, segments_blocked


def path_loss_los(d, fc):
    """InF-SH LoS path loss in dB; ``d`` in meters, ``fc`` in Hz."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DomainError("distance must be positive")
    out = 31.84 + 21.5 * np.log10(d) + 19.0 * np.log10(fc / 1e9)
    return float(out) if out.ndim == 0 else out


def path_loss_nlos(d, fc):
    """InF-SH NLoS path loss in dB, never below the LoS value."""
    d = np.asarray(d, dtype=float)
    los = np.asarray(path_loss_los(d, fc))
    out = np.maximum(los, 32.4 + 23.0 * np.log10(d) + 20.0 * np.log10(fc / 1e9))
    return float(out) if out.ndim == 0 else out


def db_to_gain(loss_db):
    return 10.0 ** (-np.asarray(loss_db, dtype=float) / 10.0)


@dataclass(frozen=True)
class LinkStats:
    path_loss: float
    rician_k: float

    @property
    def eta(self) -> float:
        return self.path_loss / (self.rician_k + 1.0)


def _link_arrays(scene: Scenario, endpoint, points: np.ndarray):
    d = np.linalg.norm(points - np.asarray(endpoint, dtype=float), axis=1)
    blocked = segments_blocked(scene.obstacles, endpoint, points)
    loss_db = np.where(blocked, path_loss_nlos(d, scene.carrier_freq),
                       path_loss_los(d, scene.carrier_freq))
    L = db_to_gain(loss_db)
    K = np.where(blocked, 0.0, scene.rician_kappa)
    return L, K, d


def _check_feasible(scene: Scenario, q) -> np.ndarray:
    if in_obstacle_footprint(scene, q):
        raise InfeasibleLocationError(f"location {tuple(q)} is inside an obstacle")
    return np.asarray(q, dtype=float).reshape(1, 3)


def link_stats(scene: Scenario, q, endpoint: str) -> LinkStats:
    """Statistics of the AP-user (``"ap"``) or IRS-user (``"irs"``) link."""
    pts = _check_feasible(scene, q)
    if endpoint == "ap":
        src = scene.ap_pos
    elif endpoint == "irs":
        src = scene.irs_pos
    else:
        raise ValueError(f"endpoint must be 'ap' or 'irs', got {endpoint!r}")
    L, K, _ = _link_arrays(scene, src, pts)
    return LinkStats(float(L[0]), float(K[0]))


def ap_irs_stats(scene: Scenario) -> LinkStats:
    L, K, _ = _link_arrays(scene, scene.ap_pos, np.asarray(scene.irs_pos, float).reshape(1, 3))
    return LinkStats(float(L[0]), float(K[0]))


@dataclass(frozen=True)
class LosChannel:
    """Deterministic part of the channel at one location.

    ``h_tilde`` is the scaled direct LoS term, ``w_tilde`` the per-sub-surface
    combined cascade and ``tau`` the phase-independent diffuse power.
    """

    h_tilde: complex
    w_tilde: np.ndarray
    tau: float

    @property
    def n_sub(self) -> int:
        return len(self.w_tilde)

    def upper_bound(self) -> float:
        return (abs(self.h_tilde) + float(np.abs(self.w_tilde).sum())) ** 2 + self.tau


@dataclass(frozen=True)
class LosField:
    """:class:`LosChannel` quantities for many locations at once."""

    h_tilde: np.ndarray  # (P,)
    w_tilde: np.ndarray  # (P, N)
    tau: np.ndarray      # (P,)
    k_am: np.ndarray
    k_im: np.ndarray
    eta_am: np.ndarray

    def at(self, p: int) -> LosChannel:
        return LosChannel(complex(self.h_tilde[p]), self.w_tilde[p].copy(), float(self.tau[p]))


def los_field(scene: Scenario, points: np.ndarray, *, with_irs: bool = True) -> LosField:
    """Vectorized LoS components for feasible points of shape ``(P, 3)``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    k = 2 * np.pi / scene.wavelength
    L_am, K_am, d_am = _link_arrays(scene, scene.ap_pos, pts)
    eta_am = L_am / (K_am + 1)
    h = np.sqrt(eta_am * K_am) * np.exp(-1j * k * d_am)
    lay = scene.irs_layout
    if not with_irs:
        return LosField(h, np.zeros((len(pts), 0), complex), eta_am.copy(),
                        K_am, np.zeros(len(pts)), eta_am)
    ai = ap_irs_stats(scene)
    L_im, K_im, _ = _link_arrays(scene, scene.irs_pos, pts)
    eta_im = L_im / (K_im + 1)
    elems = scene.element_positions()
    ap_dist = np.linalg.norm(elems - np.asarray(scene.ap_pos, float), axis=1)
    sums = kernels.cascade_sums(elems, ap_dist, pts, k, lay.per_sub)
    amp = np.sqrt(eta_im * K_im) * np.sqrt(ai.eta * ai.rician_k)
    w = amp[:, None] * sums
    tau = eta_am + ai.eta * eta_im * (K_im + ai.rician_k + 1) * lay.n_elements
    return LosField(h, w, tau, K_am, K_im, eta_am)


def los_components(scene: Scenario, q) -> LosChannel:
    pts = _check_feasible(scene, q)
    return los_field(scene, pts).at(0)


def _thetas(phases, n: int) -> np.ndarray:
    th = np.asarray(getattr(phases, "thetas", phases), dtype=float).ravel()
    if len(th) != n:
        raise ShapeError(f"expected {n} phase shifts, got {len(th)}")
    return th


def expected_gain(los: LosChannel, phases) -> float:
    """Mean of ``|c|^2`` over the diffuse components for the given phases."""
    th = _thetas(phases, los.n_sub)
    coherent = np.conj(los.h_tilde) + np.sum(np.conj(los.w_tilde) * np.exp(1j * th))
    return float(abs(coherent) ** 2 + los.tau)


@dataclass(frozen=True)
class ChannelContext:
    """Everything needed to draw channel realizations at one location.

    ``r_los`` and ``g_los`` are the per-element scaled LoS vectors; the
    ``eta_*`` values are the diffuse powers of the three links.
    """

    h_los: complex
    r_los: np.ndarray
    g_los: np.ndarray
    eta_am: float
    eta_im: float
    eta_ai: float
    per_sub: int
    tau: float

    @property
    def n_elements(self) -> int:
        return len(self.r_los)

    @property
    def n_sub(self) -> int:
        return self.n_elements // self.per_sub

    def los(self) -> LosChannel:
        w = (self.r_los * np.conj(self.g_los)).reshape(self.n_sub, self.per_sub).sum(axis=1)
        return LosChannel(complex(self.h_los), w, self.tau)

    def phasor(self, phases) -> np.ndarray:
        th = _thetas(phases, self.n_sub)
        return np.repeat(np.exp(1j * th), self.per_sub)


def make_context(h_los: complex, r_los: Sequence[complex], g_los: Sequence[complex],
                 eta_am: float, eta_im: float, eta_ai: float, per_sub: int,
                 k_im: float, k_ai: float) -> ChannelContext:
    """Build a context from raw components; ``tau`` follows from the etas."""
    r = np.asarray(r_los, dtype=complex)
    g = np.asarray(g_los, dtype=complex)
    if len(r) != len(g) or len(r) % per_sub:
        raise ShapeError("element vectors must match and split evenly into sub-surfaces")
    tau = eta_am + eta_ai * eta_im * (k_im + k_ai + 1) * len(r)
    return ChannelContext(complex(h_los), r, g, eta_am, eta_im, eta_ai, per_sub, tau)


def channel_context(scene: Scenario, q) -> ChannelContext:
    pts = _check_feasible(scene, q)
    k = 2 * np.pi / scene.wavelength
    am = link_stats(scene, q, "ap")
    im = link_stats(scene, q, "irs")
    ai = ap_irs_stats(scene)
    elems = scene.element_positions()
    d_aq = float(np.linalg.norm(pts[0] - np.asarray(scene.ap_pos, float)))
    d_mq = np.linalg.norm(elems - pts[0], axis=1)
    d_am = np.linalg.norm(elems - np.asarray(scene.ap_pos, float), axis=1)
    h = np.sqrt(am.eta * am.rician_k) * np.exp(-1j * k * d_aq)
    r = np.sqrt(im.eta * im.rician_k) * np.exp(-1j * k * d_mq)
    g = np.sqrt(ai.eta * ai.rician_k) * np.exp(-1j * k * d_am)
    return make_context(h, r, g, am.eta, im.eta, ai.eta, scene.irs_layout.per_sub,
                        im.rician_k, ai.rician_k)


def sample_effective_channel(ctx: ChannelContext, phases, seed, size: int | None = None):
    """Draw ``c = conj(h) + r^H Theta g`` with CN(0, 1) diffuse entries.

    Returns a complex scalar, or an array of ``size`` samples. Deterministic in
    ``seed``.
    """
    rng = np.random.default_rng(seed)
    f = ctx.phasor(phases)
    n = 1 if size is None else size
    M = ctx.n_elements

    def cn(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    h = ctx.h_los + np.sqrt(ctx.eta_am) * cn(n)
    r = ctx.r_los + np.sqrt(ctx.eta_im) * cn((n, M))
    g = ctx.g_los + np.sqrt(ctx.eta_ai) * cn((n, M))
    c = np.conj(h) + (np.conj(r) * f * g).sum(axis=1)
    return complex(c[0]) if size is None else c


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    std_err: float
    n_samples: int

    def rel_error(self, reference: float) -> float:
        return abs(self.mean - reference) / reference

    def rel_sigma(self, reference: float) -> float:
        return self.std_err / reference


def monte_carlo_gain(ctx: ChannelContext, phases, n_samples: int, seed, *,
                     batches: int = 8, workers: int = 1, backend=None) -> MonteCarloResult:
    """Empirical mean of ``|c|^2``.

    The seed is split into ``batches`` independent child streams whose sums
    are combined in a fixed order, so the result does not depend on
    ``workers``.
    """
    impl = backend or kernels
    f = ctx.phasor(phases)
    children = np.random.SeedSequence(seed).spawn(batches)
    counts = [n_samples // batches + (1 if b < n_samples % batches else 0)
              for b in range(batches)]

    def run(b):
        return impl.mc_power_moments(ctx.h_los, ctx.r_los, ctx.g_los, f,
                                     np.sqrt(ctx.eta_am), np.sqrt(ctx.eta_im),
                                     np.sqrt(ctx.eta_ai), counts[b],
                                     np.random.PCG64(children[b]))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(batches)))
    else:
        parts = [run(b) for b in range(batches)]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0)
    return MonteCarloResult(mean, float(np.sqrt(var / n_samples)), n_samples)
