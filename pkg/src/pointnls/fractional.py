"""Product-integration quadrature for the half-order Abel kernels and
discrete homogeneous Sobolev norms in time.

All weights integrate the piecewise-linear interpolant of the data exactly
against the singular kernel, so constants and linear functions are
reproduced to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import binom, wofz

#: principal branch of sqrt(4*pi*i)
SQRT_4PI_I = 2.0 * math.sqrt(math.pi) * complex(math.cos(math.pi / 4), math.sin(math.pi / 4))

_SQRT_PI = math.sqrt(math.pi)
_SERIES_CUTOFF = 64


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid ``t0 + k * dt`` for ``k = 0..n_steps``."""

    t0: float
    dt: float
    n_steps: int

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"time step must be positive: dt = {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"need at least one step: n_steps = {self.n_steps}")

    @classmethod
    def from_horizon(cls, T: float, dt: float, t0: float = 0.0) -> TimeGrid:
        n = int(round((T - t0) / dt))
        if not math.isclose(t0 + n * dt, T, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"horizon {T} is not a multiple of dt = {dt}")
        return cls(t0=t0, dt=dt, n_steps=n)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def T(self) -> float:
        return self.t0 + self.n_steps * self.dt

    def index(self, t: float) -> int:
        """Index of the node at time *t*; raises if *t* is not a node."""
        k = int(round((t - self.t0) / self.dt))
        if not 0 <= k <= self.n_steps or not math.isclose(
            self.t0 + k * self.dt, t, rel_tol=1e-9, abs_tol=1e-9 * self.dt
        ):
            raise IndexError(f"t = {t} is not a node of {self}")
        return k


def _interior_unscaled(n: int) -> np.ndarray:
    """Hat-function moments ``c_e`` of ``u^{-1/2}``, ``e = 0..n``."""
    e = np.arange(n + 1, dtype=np.float64)
    c = np.empty(n + 1)
    c[0] = 4.0 / 3.0

    small = (e >= 1) & (e <= _SERIES_CUTOFF)
    es = e[small]
    c[small] = (4.0 / 3.0) * ((es + 1) ** 1.5 - 2 * es**1.5 + (es - 1) ** 1.5)

    # second difference of (4/3) u^{3/2} loses digits for large e
    big = e > _SERIES_CUTOFF
    eb = e[big]
    acc = np.zeros_like(eb)
    for m in range(6, 0, -1):
        acc += binom(1.5, 2 * m) * eb ** (-2.0 * m)
    c[big] = (8.0 / 3.0) * eb**1.5 * acc
    return c


def _endpoint_unscaled(n: int) -> np.ndarray:
    """Weight of the far endpoint node (one-sided hat), ``k = 0..n``."""
    k = np.arange(n + 1, dtype=np.float64)
    w = np.zeros(n + 1)

    small = (k >= 1) & (k <= _SERIES_CUTOFF)
    ks = k[small]
    w[small] = 2.0 * np.sqrt(ks) - (4.0 / 3.0) * (ks**1.5 - (ks - 1) ** 1.5)

    big = k > _SERIES_CUTOFF
    kb = k[big]
    acc = np.zeros_like(kb)
    for m in range(14, 1, -1):
        acc += binom(1.5, m) * (-1.0 / kb) ** m
    w[big] = (4.0 / 3.0) * kb**1.5 * acc
    return w


@lru_cache(maxsize=32)
def _unscaled_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    interior = _interior_unscaled(n)
    endpoint = _endpoint_unscaled(n)
    interior.setflags(write=False)
    endpoint.setflags(write=False)
    return interior, endpoint


@dataclass(frozen=True)
class AbelWeights:
    r"""Product-integration weights for :math:`\int_{t_0}^{t_k} (t_k - s)^{-1/2} g(s)\,ds`.

    The row for node ``k`` is ``w[k][j] = sqrt(dt) * interior[k - j]`` for
    ``1 <= j <= k`` and ``w[k][0] = sqrt(dt) * endpoint[k]``, so only two
    length ``n + 1`` tables are stored.
    """

    dt: float
    n_steps: int
    interior: np.ndarray = field(repr=False)
    endpoint: np.ndarray = field(repr=False)
    order: int = 1

    def row(self, k: int) -> np.ndarray:
        """Weights ``w[k][0..k]``."""
        if not 0 <= k <= self.n_steps:
            raise IndexError(f"step index {k} outside 0..{self.n_steps}")
        if k == 0:
            return np.zeros(1)
        r = math.sqrt(self.dt) * self.interior[k::-1].copy()
        r[0] = math.sqrt(self.dt) * self.endpoint[k]
        return r


def abel_weights(grid: TimeGrid) -> AbelWeights:
    """Build piecewise-linear product weights for the half-order Abel kernel."""
    if not grid.dt > 0 or grid.n_steps < 1:
        raise ValueError("invalid time grid")
    interior, endpoint = _unscaled_tables(grid.n_steps)
    return AbelWeights(dt=grid.dt, n_steps=grid.n_steps, interior=interior, endpoint=endpoint)


def _check_series(f: np.ndarray, weights: AbelWeights, k: int) -> None:
    if not 0 <= k <= weights.n_steps:
        raise IndexError(f"step index {k} outside 0..{weights.n_steps}")
    if len(f) < k + 1:
        raise IndexError(f"series has {len(f)} samples, need {k + 1}")


def abel_sum(f: np.ndarray, weights: AbelWeights, k: int) -> complex:
    """``sum_j w[k][j] f_j``: the Abel integral up to node ``k``."""
    _check_series(f, weights, k)
    if k == 0:
        return 0j
    return complex(np.dot(weights.row(k), f[: k + 1]))


def abel_sums(f: np.ndarray, weights: AbelWeights) -> np.ndarray:
    """Abel integrals at every node at once (FFT convolution)."""
    f = np.asarray(f, dtype=complex)
    n = len(f) - 1
    if n > weights.n_steps:
        raise IndexError("series longer than the weight table")
    c = weights.interior[: n + 1]
    conv = fftconvolve(f, c)[: n + 1]
    out = math.sqrt(weights.dt) * (conv + (weights.endpoint[: n + 1] - c) * f[0])
    out[0] = 0.0
    return out


def abel_tail_sums(f: np.ndarray, weights: AbelWeights) -> np.ndarray:
    r"""Right-sided Abel integrals :math:`\int_{t_k}^{t_n} (\tau - t_k)^{-1/2} f\,d\tau`."""
    f = np.asarray(f, dtype=complex)
    return abel_sums(f[::-1], weights)[::-1]


def apply_L_at_origin(f: np.ndarray, weights: AbelWeights, k: int) -> complex:
    """Discrete ``[L_0 f](0, t_k)`` with the 1/sqrt(4 pi i) prefactor."""
    return abel_sum(np.asarray(f, dtype=complex), weights, k) / SQRT_4PI_I


def apply_Lambda_tail(f: np.ndarray, weights: AbelWeights, k: int) -> complex:
    """Discrete ``[Lambda f](0, t_k)`` truncated to the window ``[t_k, t_n]``.

    ``f`` holds samples on nodes ``0..n`` and the tail beyond ``t_n`` is
    dropped; the truncation error is bounded by the kernel-weighted size of
    ``f`` past ``t_n``, so callers should refine ``t_n`` until the value
    settles.  The kernel for ``tau > t`` is the principal branch of
    ``1/sqrt(4 pi i (t - tau))``, i.e. the conjugate of the forward kernel.
    """
    f = np.asarray(f, dtype=complex)
    n = len(f) - 1
    if n < 0:
        raise ValueError("empty window")
    if not 0 <= k <= n:
        raise IndexError(f"step index {k} outside 0..{n}")
    tail = f[k:][::-1]
    m = n - k
    return abel_sum(tail, weights, m) / np.conj(SQRT_4PI_I)


# {{{ oscillatory kernel at x != 0


def _primitives(x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r"""Primitives of the heat kernel ``G(x, w)`` and ``w G(x, w)`` at ``w = i u``.

    ``x`` has shape ``(nx, 1)`` and ``u > 0`` shape ``(nu,)``.  Written with
    the Faddeeva function so that nothing overflows for large ``x^2/u``.
    """
    ax = np.abs(x)
    sqrt_u = np.sqrt(u)
    rot = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
    sqrt_w = sqrt_u * rot
    phase = np.exp(1j * (ax * ax) / (4.0 * u))
    iz = ax * rot / (2.0 * sqrt_u)
    p0 = phase * (sqrt_w / _SQRT_PI - 0.5 * ax * wofz(iz))
    p1 = 1j * u * sqrt_w * phase / (3.0 * _SQRT_PI) - (ax * ax / 6.0) * p0
    return p0, p1


def _duhamel_rows(x: np.ndarray, dt: float, m: int) -> np.ndarray:
    r"""Weights ``W[x, e]`` with ``sum_e W[x, e] g(t - e dt)`` approximating
    :math:`\int_0^{m\,dt} K(x, u) g(t - u)\,du`, ``K = e^{ix^2/4u}/\sqrt{4\pi i u}``."""
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    u = dt * np.arange(m + 1, dtype=float)
    p0 = np.zeros((x.shape[0], m + 1), dtype=complex)
    p1 = np.zeros_like(p0)
    p0[:, 1:], p1[:, 1:] = _primitives(x, u[1:])
    m0 = -1j * np.diff(p0, axis=1)
    m1 = -np.diff(p1, axis=1)
    rows = np.zeros_like(p0)
    rows[:, 1:] += (m1 - u[:-1] * m0) / dt
    rows[:, :-1] += (u[1:] * m0 - m1) / dt
    return rows


def duhamel_integrals(
    f: np.ndarray, dt: float, xs: np.ndarray, *, chunk: int = 32, conjugate: bool = False
) -> np.ndarray:
    r"""Evaluate :math:`\sum_e W[x, e] f_e` for each ``x`` in ``xs``.

    ``f[e]`` is the integrand at lag ``u = e dt`` from the singular endpoint.
    The kernel depends on ``|x|`` only, so each distinct modulus is computed
    once.  With ``conjugate`` the backward kernel (conjugate of the forward
    one) is used.
    """
    f = np.asarray(f, dtype=complex)
    m = len(f) - 1
    xs = np.asarray(xs, dtype=float)
    out = np.zeros(xs.shape, dtype=complex)
    if m == 0:
        return out
    ax, inverse = np.unique(np.abs(xs).ravel(), return_inverse=True)
    vals = np.zeros(ax.shape, dtype=complex)

    zero = ax == 0.0
    if np.any(zero):
        # lag ordering puts the Abel endpoint weight at e = m
        interior, endpoint = _unscaled_tables(m)
        w = interior[: m + 1].astype(complex)
        w[m] = endpoint[m]
        prefactor = np.conj(SQRT_4PI_I) if conjugate else SQRT_4PI_I
        vals[zero] = math.sqrt(dt) * np.dot(w, f) / prefactor

    nz = np.flatnonzero(~zero)
    for start in range(0, len(nz), chunk):
        idx = nz[start : start + chunk]
        rows = _duhamel_rows(ax[idx], dt, m)
        if conjugate:
            rows = np.conj(rows)
        vals[idx] = rows @ f
    return vals[inverse].reshape(xs.shape)


# }}}


def apply_L_at_x(f: np.ndarray, weights: AbelWeights, k: int, x: float) -> complex:
    r"""Discrete :math:`[\mathcal{L}_0 f](x, t_k)` with the full oscillatory kernel.

    The piecewise-linear interpolant of ``f`` is integrated exactly against
    :math:`e^{ix^2/4(t_k-\tau)}/\sqrt{4\pi i (t_k - \tau)}` on every panel, so
    the result is exact for linear ``f`` and reduces to
    :func:`apply_L_at_origin` when ``x == 0``.
    """
    f = np.asarray(f, dtype=complex)
    _check_series(f, weights, k)
    if k == 0:
        return 0j
    if x == 0:
        return apply_L_at_origin(f, weights, k)
    lagged = f[: k + 1][::-1]
    return complex(duhamel_integrals(lagged, weights.dt, np.array([x]))[0])


def apply_Lambda_at_x(f: np.ndarray, weights: AbelWeights, k: int, x: float) -> complex:
    """Truncated ``[Lambda f](x, t_k)`` over nodes ``k..n`` at position *x*."""
    f = np.asarray(f, dtype=complex)
    n = len(f) - 1
    if not 0 <= k <= n:
        raise IndexError(f"step index {k} outside 0..{n}")
    if x == 0:
        return apply_Lambda_tail(f, weights, k)
    return complex(duhamel_integrals(f[k:], weights.dt, np.array([x]), conjugate=True)[0])


# {{{ fractional Sobolev norms


@dataclass(frozen=True)
class FracNormSpec:
    """Exponent, time window and edge taper for :func:`frac_sobolev_norm`."""

    mu: float
    window: tuple[float, float]
    taper_fraction: float = 0.0

    def __post_init__(self) -> None:
        if not -0.5 < self.mu < 1.0:
            raise ValueError(f"exponent must lie in (-1/2, 1): mu = {self.mu}")
        a, b = self.window
        if not b > a:
            raise ValueError(f"empty window: {self.window}")
        if not 0.0 <= self.taper_fraction <= 0.5:
            raise ValueError(f"taper fraction must lie in [0, 1/2]: {self.taper_fraction}")


def raised_cosine_taper(n: int, fraction: float) -> np.ndarray:
    """Window equal to one in the middle with cosine ramps of ``fraction * n`` samples."""
    w = np.ones(n)
    m = int(math.floor(fraction * n))
    if m > 0:
        ramp = 0.5 * (1 - np.cos(np.pi * (np.arange(m) + 0.5) / m))
        w[:m] = ramp
        w[n - m :] = ramp[::-1]
    return w


def frac_sobolev_norm(
    samples: np.ndarray, grid: TimeGrid, spec: FracNormSpec, *, pad_factor: int = 4
) -> float:
    r"""Discrete homogeneous :math:`\dot H^\mu_t` norm of a sampled series.

    Uses :math:`\hat v(\omega) \approx \mathrm{DFT}(v)\,dt` and the spectral
    measure :math:`d\omega / 2\pi`, so ``mu = 0`` is the rectangle-rule
    :math:`L^2` norm.  The zero-frequency bin is integrated analytically
    against :math:`|\omega|^{2\mu}` over its cell, which keeps negative
    exponents finite.
    """
    samples = np.asarray(samples, dtype=complex)
    t = grid.t[: len(samples)]
    a, b = spec.window
    sel = (t >= a - 1e-12 * grid.dt) & (t <= b + 1e-12 * grid.dt)
    v = samples[sel]
    n = len(v)
    if n == 0:
        raise ValueError(f"window {spec.window} contains no samples")
    if not np.any(v):
        return 0.0
    v = v * raised_cosine_taper(n, spec.taper_fraction)

    n_fft = 1 << max(int(math.ceil(math.log2(pad_factor * n))), 1)
    vhat = np.fft.fft(v, n_fft) * grid.dt
    omega = 2 * np.pi * np.fft.fftfreq(n_fft, grid.dt)
    domega = 2 * np.pi / (n_fft * grid.dt)
    mu = spec.mu

    power = np.abs(vhat) ** 2
    total = np.sum(np.abs(omega[1:]) ** (2 * mu) * power[1:]) * domega
    total += power[0] * 2 * (domega / 2) ** (2 * mu + 1) / (2 * mu + 1)
    return float(math.sqrt(total / (2 * np.pi)))


def hilbert_truncate(samples: np.ndarray, grid: TimeGrid, interval: tuple[float, float]) -> np.ndarray:
    """Multiply by the sharp indicator of ``[a, b]`` (either end may be infinite)."""
    samples = np.asarray(samples, dtype=complex)
    t = grid.t[: len(samples)]
    a, b = interval
    mask = (t >= a) & (t <= b)
    return np.where(mask, samples, 0)


# }}}
