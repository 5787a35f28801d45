"""Critical exponents, the exponential ground state and the mass-energy threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CriticalExponents:
    p: float
    sigma_c: float
    q: float
    q_tilde: float

    @property
    def l2_critical(self) -> bool:
        return self.sigma_c == 0.0

    @property
    def me_exponent(self) -> float:
        """``(1 - sigma_c) / sigma_c``, the mass power in the threshold."""
        if self.sigma_c <= 0:
            raise ValueError(f"threshold needs p > 3, got p = {self.p}")
        return (1 - self.sigma_c) / self.sigma_c


def exponents(p: float) -> CriticalExponents:
    if not p > 1:
        raise ValueError(f"nonlinearity power must exceed 1: p = {p}")
    sigma_c = 0.5 - 1.0 / (p - 1)
    if p == 3:
        sigma_c = 0.0
    return CriticalExponents(p=p, sigma_c=sigma_c, q=2.0 * (p - 1), q_tilde=2.0 * (p - 1) / p)


@dataclass(frozen=True)
class GroundStateData:
    p: float
    amplitude: float
    mass: float
    grad_norm: float
    energy: float
    threshold: float | None
    """``M^{(1-sigma_c)/sigma_c} E`` of the ground state; ``None`` for ``p <= 3``."""

    @property
    def eta_denominator(self) -> float:
        """``|phi0|_2^{(1-sigma_c)/sigma_c} |d phi0|_2``."""
        k = exponents(self.p).me_exponent
        return math.sqrt(self.mass) ** k * self.grad_norm


def ground_state(p: float) -> GroundStateData:
    """Closed-form data for ``phi0 = 2^{1/(p-1)} exp(-|x|)``."""
    ex = exponents(p)
    amp = 2.0 ** (1.0 / (p - 1))
    mass = amp * amp  # int amp^2 exp(-2|x|) dx
    grad_norm = amp  # |d phi0|_2 = |phi0|_2
    energy = amp * amp * (p - 3) / (2 * (p + 1))
    threshold = mass**ex.me_exponent * energy if p > 3 else None
    return GroundStateData(
        p=p, amplitude=amp, mass=mass, grad_norm=grad_norm, energy=energy, threshold=threshold
    )


def phi0(p: float, x: np.ndarray) -> np.ndarray:
    return 2.0 ** (1.0 / (p - 1)) * np.exp(-np.abs(np.asarray(x, dtype=float)))


def scaled_ground_state(p: float, lam: float, x: np.ndarray) -> np.ndarray:
    """Scaling-family member ``lam^{1/(p-1)} phi0(lam x)``."""
    return lam ** (1.0 / (p - 1)) * phi0(p, lam * np.asarray(x, dtype=float))


def jump_residual(p: float) -> float:
    """``|phi0'(0+) - phi0'(0-) + |phi0(0)|^{p-1} phi0(0)|`` from the closed form."""
    amp = 2.0 ** (1.0 / (p - 1))
    return abs(-2.0 * amp + amp ** (p - 1) * amp)


def ode_residual(p: float, dx: float = 1e-3, probe: float = 1.0) -> float:
    """Finite-difference residual of ``phi0'' = phi0`` at ``probe != 0``."""
    xs = np.array([probe - dx, probe, probe + dx])
    f = phi0(p, xs)
    return float(abs((f[2] - 2 * f[1] + f[0]) / dx**2 - f[1]))


def stationary_residual(p: float, dx: float = 1e-3, probe: float = 1.0) -> float:
    """Larger of :func:`jump_residual` and :func:`ode_residual`."""
    if not p > 1:
        raise ValueError(f"nonlinearity power must exceed 1: p = {p}")
    return max(jump_residual(p), ode_residual(p, dx, probe))


def instability_rate(p: float) -> float:
    """Growth rate of the unstable linear mode of ``exp(i t) phi0``; zero for ``p <= 3``.

    Perturbations ``A exp(-k1|x|) + B exp(-k2|x|)`` with ``k1^2 = 1 - i lam``
    satisfy both linearized jump conditions iff ``s = |k1|^2`` solves
    ``2 (s + p)^2 = (p + 1)^2 (s + 1)``; the nontrivial root is
    ``s = (p^2 - 2p - 1) / 2`` and ``lam = sqrt(s^2 - 1)``.
    """
    if not p > 1:
        raise ValueError(f"nonlinearity power must exceed 1: p = {p}")
    s = (p * p - 2 * p - 1) / 2
    return math.sqrt(s * s - 1) if s > 1 else 0.0
