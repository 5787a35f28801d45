"""Empirical ratios for the time-smoothing and truncation estimates.

Each function returns one ratio for one input; ensembles, suprema and
refinement studies are assembled by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pointnls.fractional import (
    SQRT_4PI_I,
    FracNormSpec,
    TimeGrid,
    abel_sums,
    abel_weights,
    frac_sobolev_norm,
    hilbert_truncate,
)
from pointnls.propagator import InitialDatum


@dataclass(frozen=True, eq=False)
class PacketSum:
    """``sum_j a_j exp(-((t - c_j) / w_j)^2 + i nu_j t)``: smooth and effectively band-limited."""

    amplitudes: np.ndarray
    centers: np.ndarray
    widths: np.ndarray
    frequencies: np.ndarray

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        arg = -(((t - self.centers) / self.widths) ** 2) + 1j * self.frequencies * t
        return np.sum(self.amplitudes * np.exp(arg), axis=-1)

    @property
    def bandwidth(self) -> float:
        """Frequency beyond which every term's spectrum is below ``e^{-25}`` of its peak."""
        return float(np.max(np.abs(self.frequencies) + 10.0 / self.widths))


def random_packet_sum(
    rng: np.random.Generator,
    scale: float = 1.0,
    n_terms: int = 5,
    centers: tuple[float, float] = (-0.5, 1.5),
    widths: tuple[float, float] = (0.1, 0.5),
    max_frequency: float = 6.0,
) -> PacketSum:
    """Random packet sum whose support grows and bandwidth shrinks with ``scale``."""
    return PacketSum(
        amplitudes=rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms),
        centers=scale * rng.uniform(*centers, n_terms),
        widths=scale * rng.uniform(*widths, n_terms),
        frequencies=rng.uniform(-max_frequency, max_frequency, n_terms) / scale,
    )


def free_trace_ratio(datum: InitialDatum, half_window: float, dt: float, taper: float = 0.1) -> float:
    """``|[exp(i t d^2) f](0)|_{H^{1/4}_t} / |f|_{L^2_x}`` over ``t in [-half_window, half_window]``."""
    grid = TimeGrid.from_horizon(half_window, dt, t0=-half_window)
    trace = datum.free_at_origin(grid.t)
    mass, _ = datum.norms()
    if mass == 0:
        raise ValueError("zero datum")
    spec = FracNormSpec(0.25, (-half_window, half_window), taper)
    return frac_sobolev_norm(trace, grid, spec) / math.sqrt(mass)


def abel_smoothing_ratio(samples: np.ndarray, grid: TimeGrid) -> float:
    """``|L f(0, .)|_{H^{1/2}_t} / |f|_{L^2_t}`` for ``f`` given on ``grid`` (zero before it)."""
    samples = np.asarray(samples, dtype=complex)
    trace = abel_sums(samples, abel_weights(grid)) / SQRT_4PI_I
    window = (grid.t0, grid.T)
    den = frac_sobolev_norm(samples, grid, FracNormSpec(0.0, window))
    if den == 0:
        raise ValueError("zero input")
    return frac_sobolev_norm(trace, grid, FracNormSpec(0.5, window)) / den


def truncation_ratio(
    samples: np.ndarray, grid: TimeGrid, interval: tuple[float, float], mu: float, taper: float = 0.1
) -> float:
    """``|chi_I f|_{H^mu} / |f|_{H^mu}``; the cut is applied before the edge taper."""
    spec = FracNormSpec(mu, (grid.t0, grid.T), taper)
    den = frac_sobolev_norm(samples, grid, spec)
    if den == 0:
        raise ValueError("zero input")
    return frac_sobolev_norm(hilbert_truncate(samples, grid, interval), grid, spec) / den
