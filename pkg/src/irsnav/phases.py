"""IRS phase-shift design: continuous optimum and b-bit quantization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LosChannel, expected_gain

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class PhaseConfig:
    """Sub-surface phase shifts in ``[0, 2*pi)``; ``levels`` is None if continuous."""

    thetas: np.ndarray
    levels: int | None = None

    @property
    def is_discrete(self) -> bool:
        return self.levels is not None


def wrap(theta):
    out = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    # mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def optimal_phases(los: LosChannel) -> PhaseConfig:
    """Phases aligning every cascade term with the direct term.

    With a blocked direct link the common reference is phase 0; sub-surfaces
    with a zero cascade get phase 0.
    """
    ref = np.angle(np.conj(los.h_tilde)) if los.h_tilde != 0 else 0.0
    w = np.asarray(los.w_tilde)
    th = np.where(w != 0, ref - np.angle(np.conj(w)), 0.0)
    return PhaseConfig(wrap(th))


def quantize_phases(theta_star: PhaseConfig, levels: int) -> PhaseConfig:
    """Map each phase to the nearest of ``levels`` uniform levels.

    Distance is measured around the circle; ties go to the lower level index.
    """
    if levels < 2:
        raise ValueError(f"need at least 2 phase levels, got {levels}")
    step = TWO_PI / levels
    th = wrap(theta_star.thetas)
    grid = np.arange(levels) * step
    diff = np.abs(th[:, None] - grid[None, :])
    dist = np.minimum(diff, TWO_PI - diff)
    idx = np.argmin(dist, axis=1)  # first minimum = lower index
    return PhaseConfig(grid[idx], levels)


def achieved_gain(los: LosChannel, levels: int | None = None) -> float:
    """Map value at one location: closed-form optimum, or quantized optimum."""
    if levels is None:
        return los.upper_bound()
    return expected_gain(los, quantize_phases(optimal_phases(los), levels))


def achieved_gains(h_tilde: np.ndarray, w_tilde: np.ndarray, tau: np.ndarray,
                   levels: int | None = None) -> np.ndarray:
    """Vectorized :func:`achieved_gain` over ``P`` locations."""
    if levels is None:
        return (np.abs(h_tilde) + np.abs(w_tilde).sum(axis=1)) ** 2 + tau
    ref = np.where(h_tilde != 0, np.angle(np.conj(h_tilde)), 0.0)
    th = np.where(w_tilde != 0, ref[:, None] - np.angle(np.conj(w_tilde)), 0.0)
    th = wrap(th)
    step = TWO_PI / levels
    grid = np.arange(levels) * step
    diff = np.abs(th[..., None] - grid)
    idx = np.argmin(np.minimum(diff, TWO_PI - diff), axis=-1)
    q = grid[idx]
    coherent = np.conj(h_tilde) + (np.conj(w_tilde) * np.exp(1j * q)).sum(axis=1)
    return np.abs(coherent) ** 2 + tau
