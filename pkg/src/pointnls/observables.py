"""Mass, energy, the dichotomy ratio eta, the trace Gagliardo-Nirenberg ratio,
the coercivity gap and the localized virial identity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pointnls.ground_state import exponents, ground_state
from pointnls.snapshot import FieldSnapshot, sobolev_h1, weighted_integral

# Hermite join on [1, 2] from (1, 2, 2, 0) to zero, in powers of s = r - 1
_JOIN = np.polynomial.Polynomial([1.0, 2.0, 1.0, 0.0, -85.0, 194.0, -157.0, 44.0])


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    mass: float
    energy: float
    eta: float
    gn: float
    gap: float


@dataclass(frozen=True)
class VirialWeight:
    """``a(x) = R^2 chi(|x| / R)`` with ``chi(r) = r^2`` on ``[0, 1]`` and 0 past 2.

    The join on ``[1, 2]`` is the degree-7 Hermite polynomial matching three
    derivatives at each end, so ``chi'''`` is continuous and ``chi''''`` is
    merely bounded.
    """

    R: float

    def __post_init__(self) -> None:
        if not self.R > 0:
            raise ValueError(f"radius must be positive: R = {self.R}")

    @staticmethod
    def chi(r: np.ndarray, derivative: int = 0) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        inner = [r**2, 2 * r, 2 + 0 * r] + [0 * r] * 3
        out = np.where(r <= 1.0, inner[derivative], 0.0)
        mid = (r > 1.0) & (r < 2.0)
        poly = _JOIN.deriv(derivative) if derivative else _JOIN
        out[mid] = poly(r[mid] - 1.0)
        return out

    def a(self, x: np.ndarray, derivative: int = 0) -> np.ndarray:
        """``d^m a / dx^m`` for even ``m`` (the only ones the identity uses) or ``m = 0``."""
        if derivative % 2:
            raise ValueError("only even derivatives of the radial weight are provided")
        x = np.asarray(x, dtype=float)
        return self.R ** (2 - derivative) * self.chi(x / self.R, derivative)

    def admissibility_defect(self, h: float = 1e-3) -> float:
        """Largest of ``|a(0)|, |a'(0)|, |a'''(0)|`` by central differences."""
        xs = h * np.arange(-2, 3, dtype=float)
        v = self.a(xs)
        d1 = (v[3] - v[1]) / (2 * h)
        d3 = (v[4] - 2 * v[3] + 2 * v[1] - v[0]) / (2 * h**3)
        return float(max(abs(v[2]), abs(d1), abs(d3)))


def _origin_power(snapshot: FieldSnapshot, p: float, q: complex | None) -> float:
    value = snapshot.at_origin if q is None else q
    return abs(value) ** (p + 1)


def mass_energy(snapshot: FieldSnapshot, p: float, q: complex | None = None) -> tuple[float, float]:
    """``M = int |psi|^2`` and ``E = |d psi|^2 / 2 - |psi(0)|^{p+1} / (p + 1)``.

    Pass the trajectory value ``q`` when available; it is more accurate than
    the grid sample at the kink.
    """
    mass, grad_sq, _ = sobolev_h1(snapshot)
    return mass, 0.5 * grad_sq - _origin_power(snapshot, p, q) / (p + 1)


def eta(snapshot: FieldSnapshot, p: float) -> float:
    """``|psi|^k |d psi| / (|phi0|^k |d phi0|)`` with ``k = (1 - sigma_c) / sigma_c``."""
    k = exponents(p).me_exponent
    mass, grad_sq, _ = sobolev_h1(snapshot)
    return math.sqrt(mass) ** k * math.sqrt(grad_sq) / ground_state(p).eta_denominator


def gn_functional(snapshot: FieldSnapshot) -> float:
    """``|psi|_2 |d psi|_2 / |psi(0)|^2``, at least 1 for every nonzero H^1 field."""
    q = snapshot.at_origin
    if q == 0:
        raise ValueError("ratio undefined when psi(0) = 0")
    mass, grad_sq, _ = sobolev_h1(snapshot)
    return math.sqrt(mass * grad_sq) / abs(q) ** 2


def coercivity_gap(snapshot: FieldSnapshot, p: float, q: complex | None = None) -> float:
    """``4 |d psi|^2 - 2 |psi(0)|^{p+1}``."""
    _, grad_sq, _ = sobolev_h1(snapshot)
    return 4.0 * grad_sq - 2.0 * _origin_power(snapshot, p, q)


def observe(snapshot: FieldSnapshot, p: float, q: complex | None = None) -> ObservableRecord:
    """All observables of one snapshot; ``eta`` is NaN for ``p <= 3`` and ``gn`` for ``psi(0) = 0``."""
    mass, energy = mass_energy(snapshot, p, q)
    e = eta(snapshot, p) if p > 3 else math.nan
    gn = gn_functional(snapshot) if snapshot.at_origin != 0 else math.nan
    return ObservableRecord(
        t=snapshot.t, mass=mass, energy=energy, eta=e, gn=gn, gap=coercivity_gap(snapshot, p, q)
    )


@dataclass(frozen=True)
class VirialTerms:
    lhs: float
    kinetic: float
    point: float
    curvature: float

    @property
    def rhs(self) -> float:
        return self.kinetic - self.point - self.curvature

    @property
    def residual(self) -> float:
        """``|lhs - rhs|`` over the summed magnitudes of the right-hand terms."""
        scale = abs(self.kinetic) + abs(self.point) + abs(self.curvature)
        diff = abs(self.lhs - self.rhs)
        if scale == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / scale


def virial_terms(
    snapshots: tuple[FieldSnapshot, FieldSnapshot, FieldSnapshot],
    weight: VirialWeight,
    p: float,
    q_mid: complex | None = None,
    nonlinear: bool = True,
) -> VirialTerms:
    """Both sides of ``z'' = 4 int a''|d psi|^2 - 2 a''(0)|psi(0)|^{p+1} - int a''''|psi|^2``.

    ``z = int a |psi|^2`` is differentiated by a second central difference
    over three equally spaced snapshots.  With ``nonlinear=False`` the point
    term is dropped (free flow).
    """
    before, mid, after = snapshots
    step = mid.t - before.t
    if not step > 0 or not math.isclose(after.t - mid.t, step, rel_tol=1e-9):
        raise ValueError("snapshots must be equally spaced in time")
    if weight.admissibility_defect() > 1e-6:
        raise ValueError("weight is not admissible")
    x = mid.x
    a0 = weight.a(x)
    z = [weighted_integral(s, a0) for s in snapshots]
    lhs = (z[2] - 2 * z[1] + z[0]) / step**2
    kinetic = 4.0 * weighted_integral(mid, weight.a(x, 2), of_gradient=True)
    a2_origin = float(weight.a(np.zeros(1), 2)[0])
    point = 2.0 * a2_origin * _origin_power(mid, p, q_mid) if nonlinear else 0.0
    curvature = weighted_integral(mid, weight.a(x, 4))
    return VirialTerms(lhs=lhs, kinetic=kinetic, point=point, curvature=curvature)


def virial_residual(
    snapshots: tuple[FieldSnapshot, FieldSnapshot, FieldSnapshot],
    weight: VirialWeight,
    p: float,
    q_mid: complex | None = None,
    nonlinear: bool = True,
) -> float:
    return virial_terms(snapshots, weight, p, q_mid, nonlinear).residual
