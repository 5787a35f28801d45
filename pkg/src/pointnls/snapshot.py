"""Field samples on a symmetric spatial grid with a marked origin node."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def symmetric_grid(half_width: float, dx: float) -> np.ndarray:
    """Nodes ``k * dx`` for ``|k * dx| <= half_width``; always contains 0."""
    if not dx > 0 or not half_width > 0:
        raise ValueError(f"need positive half width and spacing, got {half_width}, {dx}")
    n = int(math.floor(half_width / dx + 1e-9))
    return dx * np.arange(-n, n + 1, dtype=float)


def check_symmetric(x: np.ndarray) -> tuple[int, float]:
    """Return ``(origin index, spacing)`` or raise for a malformed grid."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 3 or len(x) % 2 == 0:
        raise ValueError("spatial grid must be 1-D with an odd number of nodes")
    mid = len(x) // 2
    dx = x[1] - x[0]
    if not dx > 0 or not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
        raise ValueError("spatial grid must be uniform and increasing")
    if abs(x[mid]) > 1e-12 * dx or not np.allclose(x, -x[::-1], rtol=0, atol=1e-9 * dx):
        raise ValueError("spatial grid must be symmetric about an origin node")
    return mid, float(dx)


@dataclass(frozen=True)
class FieldSnapshot:
    """``psi(., t)`` sampled on a symmetric grid."""

    x: np.ndarray
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        check_symmetric(self.x)
        if np.shape(self.values) != np.shape(self.x):
            raise ValueError("values and grid have different shapes")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def origin(self) -> int:
        return len(self.x) // 2

    @property
    def at_origin(self) -> complex:
        return complex(self.values[self.origin])

    def edge_ratio(self) -> float:
        """Largest boundary modulus relative to the maximum (should be tiny)."""
        vmax = np.max(np.abs(self.values))
        if vmax == 0:
            return 0.0
        return float(max(abs(self.values[0]), abs(self.values[-1])) / vmax)


def one_sided_derivatives(snapshot: FieldSnapshot) -> tuple[complex, complex]:
    """Second-order one-sided derivatives ``(d psi(0-), d psi(0+))``."""
    v = snapshot.values
    o = snapshot.origin
    h = snapshot.dx
    if o < 3:
        raise ValueError("need at least three nodes on each side of the origin")
    dplus = (-3 * v[o] + 4 * v[o + 1] - v[o + 2]) / (2 * h)
    dminus = (3 * v[o] - 4 * v[o - 1] + v[o - 2]) / (2 * h)
    return complex(dminus), complex(dplus)


def _half_line_gradient(v: np.ndarray, h: float) -> np.ndarray:
    """Derivative on a half-line segment whose first node is the origin."""
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return d


def half_line_gradients(snapshot: FieldSnapshot) -> tuple[np.ndarray, np.ndarray]:
    """Gradients on ``x <= 0`` and ``x >= 0``, each ordered away from the origin.

    Stencils never straddle the origin, where the field has a kink.
    """
    v = np.asarray(snapshot.values, dtype=complex)
    o = snapshot.origin
    h = snapshot.dx
    right = _half_line_gradient(v[o:], h)
    left = -_half_line_gradient(v[o::-1], h)
    return left, right


def _trapezoid(y: np.ndarray, h: float) -> float:
    return float(h * (np.sum(y) - 0.5 * (y[0] + y[-1])))


def sobolev_h1(snapshot: FieldSnapshot) -> tuple[float, float, float]:
    """``(mass, |d psi|_2^2, H^1 norm)`` with a kink-aware gradient."""
    v = np.asarray(snapshot.values, dtype=complex)
    h = snapshot.dx
    mass = _trapezoid(np.abs(v) ** 2, h)
    left, right = half_line_gradients(snapshot)
    grad_sq = _trapezoid(np.abs(left) ** 2, h) + _trapezoid(np.abs(right) ** 2, h)
    return mass, grad_sq, math.sqrt(mass + grad_sq)


def weighted_integral(snapshot: FieldSnapshot, weight: np.ndarray, of_gradient: bool = False) -> float:
    """Trapezoid value of ``int weight |psi|^2`` or ``int weight |d psi|^2``."""
    h = snapshot.dx
    if not of_gradient:
        return _trapezoid(weight * np.abs(snapshot.values) ** 2, h)
    o = snapshot.origin
    left, right = half_line_gradients(snapshot)
    wl = weight[o::-1]
    wr = weight[o:]
    return _trapezoid(wl * np.abs(left) ** 2, h) + _trapezoid(wr * np.abs(right) ** 2, h)
