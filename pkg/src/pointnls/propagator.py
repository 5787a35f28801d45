"""Free Schrodinger group applied to initial data.

Conventions: ``psi_hat(xi) = int psi(x) exp(-i xi x) dx`` and
``exp(i t d_x^2)`` multiplies ``psi_hat`` by ``exp(-i xi^2 t)``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy import integrate
from scipy.special import wofz

from pointnls.fractional import TimeGrid
from pointnls.snapshot import FieldSnapshot, check_symmetric, sobolev_h1

_ROT = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


class TransformTailError(ValueError):
    """The sampled transform does not decay within the resolved band."""

    def __init__(self, required: float, available: float) -> None:
        super().__init__(
            f"transform tail not negligible: need |xi| <= {required:.4g}, "
            f"grid resolves only {available:.4g}"
        )
        self.required = required
        self.available = available


class InitialDatum(ABC):
    """An H^1 initial profile together with its free evolution."""

    @abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def free_at_origin(self, t: np.ndarray) -> np.ndarray:
        """``[exp(i t d^2) psi0](0)`` for an array of times."""

    @abstractmethod
    def free_on_grid(self, t: float, x: np.ndarray) -> np.ndarray:
        """``[exp(i t d^2) psi0](x)``."""

    @abstractmethod
    def norms(self) -> tuple[float, float]:
        """``(mass, |d psi0|_2^2)``."""

    def fourier(self, xi: np.ndarray) -> np.ndarray | None:
        """Analytic transform, or ``None`` when the kind has no closed form."""
        return None

    @property
    def origin_value(self) -> complex:
        return complex(self(np.zeros(1))[0])

    def hdot_norm(self, sigma: float) -> float:
        """Homogeneous Sobolev norm in ``x`` from the transform."""

        def integrand(xi: float) -> float:
            return abs(xi) ** (2 * sigma) * abs(self.fourier(np.array([xi]))[0]) ** 2

        val = sum(
            integrate.quad(integrand, a, b, limit=400)[0]
            for a, b in ((-np.inf, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, np.inf))
        )
        return math.sqrt(val / (2 * math.pi))

    def _check(self) -> None:
        mass, grad_sq = self.norms()
        if not (math.isfinite(mass) and math.isfinite(grad_sq)):
            raise ValueError("initial datum is not in H^1")


@dataclass(frozen=True)
class GaussianPacket(InitialDatum):
    """``A exp(-(x - x0)^2 / a^2) exp(i v x)``."""

    amplitude: complex = 1.0
    width: float = 1.0
    center: float = 0.0
    velocity: float = 0.0

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValueError(f"Gaussian width must be positive: {self.width}")
        self._check()

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-((x - self.center) ** 2) / self.width**2 + 1j * self.velocity * x)

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        a, v, x0 = self.width, self.velocity, self.center
        xi = np.asarray(xi, dtype=float)
        return (
            self.amplitude * a * math.sqrt(math.pi)
            * np.exp(-(a**2) * (xi - v) ** 2 / 4 - 1j * (xi - v) * x0)
        )

    def free_on_grid(self, t: float, x: np.ndarray) -> np.ndarray:
        a, v = self.width, self.velocity
        x = np.asarray(x, dtype=float)
        s = 1 + 4j * t / a**2
        y = x - self.center - 2 * v * t
        return (
            self.amplitude / np.sqrt(s)
            * np.exp(-(y**2) / (a**2 * s) + 1j * (v * x - v * v * t))
        )

    def free_at_origin(self, t: np.ndarray) -> np.ndarray:
        a, v = self.width, self.velocity
        t = np.asarray(t, dtype=float)
        s = 1 + 4j * t / a**2
        y = -self.center - 2 * v * t
        return self.amplitude / np.sqrt(s) * np.exp(-(y**2) / (a**2 * s) - 1j * v * v * t)

    def norms(self) -> tuple[float, float]:
        A2 = abs(self.amplitude) ** 2
        a = self.width
        c = math.sqrt(math.pi / 2)
        return A2 * a * c, A2 * c * (1 / a + self.velocity**2 * a)


def _exp_abs_free(x: np.ndarray, t: float) -> np.ndarray:
    """``[exp(i t d^2) exp(-|x|)](x)`` for ``t > 0``, overflow-free."""
    x = np.asarray(x, dtype=float)
    sq = math.sqrt(t) * _ROT
    chirp = np.exp(1j * x * x / (4 * t))

    def term(y: np.ndarray) -> np.ndarray:
        z = sq - y / (2 * sq)
        out = np.empty(y.shape, dtype=complex)
        pos = z.real >= 0
        out[pos] = chirp[pos] * wofz(1j * z[pos])
        neg = ~pos
        # erfc(z) = 2 - erfc(-z) keeps the growing exponential out
        out[neg] = 2 * np.exp(1j * t - y[neg]) - chirp[neg] * wofz(-1j * z[neg])
        return out

    return 0.5 * (term(x) + term(-x))


@dataclass(frozen=True)
class GroundState(InitialDatum):
    """``factor * phi0(scale * x)`` with ``phi0 = 2^{1/(p-1)} exp(-|x|)``."""

    p: float
    factor: complex = 1.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise ValueError(f"nonlinearity power must exceed 1: p = {self.p}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive: {self.scale}")
        self._check()

    @property
    def peak(self) -> complex:
        return self.factor * 2.0 ** (1.0 / (self.p - 1))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.peak * np.exp(-self.scale * np.abs(np.asarray(x, dtype=float)))

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        b = self.scale
        xi = np.asarray(xi, dtype=float)
        return self.peak * 2 * b / (b * b + xi * xi)

    def free_on_grid(self, t: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        b = self.scale
        if t == 0:
            return self(x)
        u = _exp_abs_free(b * x, b * b * abs(t))
        if t < 0:
            u = np.conj(u)
        return self.peak * u

    def free_at_origin(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        s = self.scale**2 * np.abs(t)
        out = wofz(1j * np.sqrt(s) * _ROT)
        out = np.where(t < 0, np.conj(out), out)
        return self.peak * out

    def norms(self) -> tuple[float, float]:
        a2 = abs(self.peak) ** 2
        return a2 / self.scale, a2 * self.scale


@dataclass(frozen=True, eq=False)
class Sampled(InitialDatum):
    """Samples on a symmetric grid, assumed negligible outside it.

    Free evolution uses a zero-padded discrete transform; the padded box is
    sized from the largest requested time so that periodic images cannot
    reach the evaluation points.
    """

    x: np.ndarray
    values: np.ndarray
    tail_tol: float = 1e-8
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        check_symmetric(self.x)
        if np.shape(self.values) != np.shape(self.x):
            raise ValueError("values and grid have different shapes")
        self._check()

    @classmethod
    def from_snapshot(cls, snap: FieldSnapshot, **kwargs) -> Sampled:
        return cls(x=np.asarray(snap.x), values=np.asarray(snap.values, dtype=complex), **kwargs)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def half_width(self) -> float:
        return float(self.x[-1])

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        return np.interp(x, self.x, v.real) + 1j * np.interp(x, self.x, v.imag)

    def norms(self) -> tuple[float, float]:
        mass, grad_sq, _ = sobolev_h1(FieldSnapshot(self.x, np.asarray(self.values, dtype=complex)))
        return mass, grad_sq

    def _transform(self, n_pad: int) -> tuple[np.ndarray, np.ndarray]:
        if n_pad not in self._cache:
            v = np.zeros(n_pad, dtype=complex)
            n = len(self.x) // 2
            v[: n + 1] = self.values[n:]
            v[n_pad - n :] = self.values[:n]
            vhat = sfft.fft(v) * self.dx
            xi = 2 * np.pi * sfft.fftfreq(n_pad, self.dx)
            self._cache[n_pad] = (xi, vhat)
        return self._cache[n_pad]

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        return np.exp(-1j * np.outer(xi, self.x)) @ v * self.dx

    def band_limit(self) -> float:
        """Smallest cutoff dropping at most ``tail_tol`` of the l1 transform mass."""
        xi, vhat = self._transform(sfft.next_fast_len(4 * len(self.x)))
        order = np.argsort(np.abs(xi))
        mag = np.abs(vhat[order])
        total = mag.sum()
        if total == 0:
            return 0.0
        tail = total - np.cumsum(mag)
        k = int(np.argmax(tail <= self.tail_tol * total))
        cutoff = float(np.abs(xi[order][k]))
        nyquist = math.pi / self.dx
        if cutoff > 0.9 * nyquist:
            raise TransformTailError(cutoff, nyquist)
        return cutoff

    def _modes(self, t_max: float, reach: float) -> tuple[np.ndarray, np.ndarray]:
        cutoff = self.band_limit()
        box = 2.0 * (self.half_width + reach) + 2.5 * cutoff * abs(t_max) + 10 * self.dx
        n_pad = sfft.next_fast_len(max(int(math.ceil(box / self.dx)), 4 * len(self.x)))
        xi, vhat = self._transform(n_pad)
        keep = np.abs(xi) <= cutoff
        length = n_pad * self.dx
        return xi[keep], vhat[keep] / length

    def free_at_origin(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        if flat.size == 0:
            return np.zeros(t.shape, dtype=complex)
        xi, c = self._modes(float(np.max(np.abs(flat))), 0.0)
        k2 = xi * xi
        out = np.empty(flat.size, dtype=complex)
        block = max(1, min(512, 2**22 // max(len(k2), 1)))
        for s in range(0, flat.size, block):
            tt = flat[s : s + block]
            out[s : s + block] = np.exp(-1j * np.outer(tt, k2)) @ c
        return out.reshape(t.shape)

    def free_on_grid(self, t: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if t == 0:
            return self(x)
        xi, c = self._modes(t, float(np.max(np.abs(x))))
        coef = c * np.exp(-1j * xi * xi * t)
        out = np.empty(x.size, dtype=complex)
        flat = x.ravel()
        block = max(1, 2**22 // max(len(xi), 1))
        for s in range(0, flat.size, block):
            out[s : s + block] = np.exp(1j * np.outer(flat[s : s + block], xi)) @ coef
        return out.reshape(x.shape)

    def hdot_norm(self, sigma: float) -> float:
        xi, vhat = self._transform(sfft.next_fast_len(4 * len(self.x)))
        dxi = abs(xi[1] - xi[0])
        mask = xi != 0
        val = np.sum(np.abs(xi[mask]) ** (2 * sigma) * np.abs(vhat[mask]) ** 2) * dxi
        return math.sqrt(val / (2 * math.pi))


@dataclass(frozen=True)
class OriginDrive:
    """``[exp(i t d^2) psi0](0)`` on a time grid."""

    grid: TimeGrid
    values: np.ndarray


def propagate_at_origin(datum: InitialDatum, grid: TimeGrid) -> OriginDrive:
    """Free evolution at the origin on every node of ``grid``."""
    return OriginDrive(grid=grid, values=np.asarray(datum.free_at_origin(grid.t), dtype=complex))


def propagate_on_grid(datum: InitialDatum, t: float, xgrid: np.ndarray) -> FieldSnapshot:
    """Free evolution on a symmetric spatial grid."""
    xgrid = np.asarray(xgrid, dtype=float)
    check_symmetric(xgrid)
    if t == 0:
        return FieldSnapshot(xgrid, np.asarray(datum(xgrid), dtype=complex), 0.0)
    return FieldSnapshot(xgrid, np.asarray(datum.free_on_grid(t, xgrid), dtype=complex), t)
