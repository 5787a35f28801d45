"""Threshold classification of initial data and scattering diagnostics.

The wave operator solves the final-value problem

    q(t) = [exp(i t d^2) psi_plus](0) - i [Lambda g](0, t),   t in [T, T_max],

where ``Lambda g(x, t) = int_t^{T_max} exp(i (t - s) d^2) delta g(s) ds`` and
``g = |q|^{p-1} q``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from pointnls.fractional import SQRT_4PI_I, TimeGrid, abel_tail_sums, abel_weights, duhamel_integrals
from pointnls.ground_state import exponents, ground_state
from pointnls.propagator import InitialDatum
from pointnls.snapshot import FieldSnapshot, check_symmetric, sobolev_h1
from pointnls.solver import ChargeTrajectory, SolverError, Status, nonlinear_term

_BOUNDARY_RTOL = 1e-12


class Verdict(str, enum.Enum):
    GLOBAL = "GlobalScattersExpected"
    BLOWUP = "BlowUpExpected"
    INDETERMINATE = "AboveThresholdIndeterminate"

    @property
    def decided(self) -> bool:
        return self is not Verdict.INDETERMINATE


@dataclass(frozen=True)
class ClassificationResult:
    mass: float
    energy: float
    me_product: float
    threshold: float
    eta0: float
    verdict: Verdict
    small_data: bool
    hdot_norm: float
    delta_sd: float

    def agrees_with(self, status: Status) -> bool | None:
        """Outcome agreement, or ``None`` when the verdict is undecided or the run stalled."""
        if not self.verdict.decided or status is Status.STALLED:
            return None
        expected = Status.COMPLETED if self.verdict is Verdict.GLOBAL else Status.BLOWUP
        return status is expected


def classify(datum: InitialDatum, p: float, delta_sd: float = 0.1) -> ClassificationResult:
    """Place ``datum`` relative to the ground-state mass-energy threshold.

    Below the threshold the sign of ``eta(0) - 1`` decides between global
    scattering and blow-up; negative energy always predicts blow-up.  The
    boundary case (equality up to rounding) is left undecided.  ``small_data``
    compares the critical homogeneous norm with ``delta_sd``; it is reported
    for information and never enters the verdict.
    """
    if not p > 3:
        raise ValueError(f"threshold dichotomy needs p > 3, got p = {p}")
    ex = exponents(p)
    gs = ground_state(p)
    mass, grad_sq = datum.norms()
    energy = 0.5 * grad_sq - abs(datum.origin_value) ** (p + 1) / (p + 1)
    k = ex.me_exponent
    me = mass**k * energy
    eta0 = math.sqrt(mass) ** k * math.sqrt(grad_sq) / gs.eta_denominator
    thr = gs.threshold

    if energy < 0:
        verdict = Verdict.BLOWUP
    elif me < thr and not math.isclose(me, thr, rel_tol=_BOUNDARY_RTOL):
        if math.isclose(eta0, 1.0, rel_tol=_BOUNDARY_RTOL):
            verdict = Verdict.INDETERMINATE
        else:
            verdict = Verdict.GLOBAL if eta0 < 1 else Verdict.BLOWUP
    else:
        verdict = Verdict.INDETERMINATE

    hdot = datum.hdot_norm(ex.sigma_c)
    return ClassificationResult(
        mass=mass,
        energy=energy,
        me_product=me,
        threshold=thr,
        eta0=eta0,
        verdict=verdict,
        small_data=hdot < delta_sd,
        hdot_norm=hdot,
        delta_sd=delta_sd,
    )


def lq_tail(q: np.ndarray, dt: float, exponent: float) -> np.ndarray:
    """``(int_{t_k}^{T_max} |q|^r dt)^{1/r}`` at every node (nonincreasing)."""
    dens = np.abs(np.asarray(q)) ** exponent
    if len(dens) < 2:
        return np.zeros(len(dens))
    tail = cumulative_trapezoid(dens[::-1], dx=dt, initial=0.0)[::-1]
    return tail ** (1.0 / exponent)


def decay_exponent(t: np.ndarray, q: np.ndarray, min_samples: int = 30) -> float:
    """Least-squares ``alpha`` in ``|q| ~ t^-alpha`` over the last decade."""
    t = np.asarray(t, dtype=float)
    t_max = float(t[-1])
    sel = (t >= t_max / 10) & (t > 0)
    if np.count_nonzero(sel) < min_samples:
        raise ValueError(f"need {min_samples} samples in the last decade of the horizon")
    mag = np.abs(np.asarray(q))[sel]
    if np.any(mag == 0):
        raise ValueError("charge vanishes inside the fit window")
    slope = np.polyfit(np.log(t[sel]), np.log(mag), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class ScatteringDiagnostics:
    t: np.ndarray
    lq_tail: np.ndarray
    lq_total: float
    psi_plus: FieldSnapshot
    residual_times: tuple[float, ...]
    h1_residual: tuple[float, ...]
    decay_exponent: float | None
    T_max: float

    def residual_at(self, T: float) -> float:
        return self.h1_residual[self.residual_times.index(T)]


def backward_source(traj: ChargeTrajectory, t: float, xgrid: np.ndarray) -> np.ndarray:
    """``[Lambda g](x, t)`` truncated at the end of the trajectory."""
    k = traj.grid.index(t)
    g = traj.nonlinearity()[k:]
    if len(g) < 2:
        return np.zeros(np.shape(xgrid), dtype=complex)
    return duhamel_integrals(g, traj.grid.dt, xgrid, conjugate=True)


def scattering_diagnostics(
    traj: ChargeTrajectory,
    datum: InitialDatum,
    xgrid: np.ndarray,
    residual_times: tuple[float, ...] = (),
    fit: bool = True,
) -> ScatteringDiagnostics:
    """Charge tails, the scattering state and the ``H^1`` distance to it.

    ``psi_plus = psi0 + i [Lambda g](., 0)`` and
    ``psi(T) - exp(i T d^2) psi_plus = -i [Lambda g](., T)``, both truncated
    at the trajectory end, which is reported as ``T_max``.
    """
    if traj.status is not Status.COMPLETED:
        raise SolverError(f"trajectory ended with {traj.status.value}; no scattering diagnostics")
    if traj.grid.t0 != 0.0:
        raise ValueError("trajectory must start at t = 0")
    xgrid = np.asarray(xgrid, dtype=float)
    check_symmetric(xgrid)
    r = exponents(traj.p).q if traj.p > 3 else 2.0 * (traj.p - 1)
    tail = lq_tail(traj.q, traj.grid.dt, r)
    plus = np.asarray(datum(xgrid), dtype=complex) + 1j * backward_source(traj, 0.0, xgrid)
    residuals = []
    for T in residual_times:
        snap = FieldSnapshot(xgrid, backward_source(traj, T, xgrid), T)
        residuals.append(sobolev_h1(snap)[2])
    alpha = decay_exponent(traj.t, traj.q) if fit else None
    return ScatteringDiagnostics(
        t=traj.t,
        lq_tail=tail,
        lq_total=float(tail[0]),
        psi_plus=FieldSnapshot(xgrid, plus, 0.0),
        residual_times=tuple(residual_times),
        h1_residual=tuple(residuals),
        decay_exponent=alpha,
        T_max=float(traj.t[-1]),
    )


class WaveOperatorDivergence(RuntimeError):
    """The final-value iteration does not contract."""


@dataclass(frozen=True)
class WaveOperatorResult:
    trajectory: ChargeTrajectory
    psi_at_T: FieldSnapshot
    iterations: int
    contraction: float


def wave_operator(
    psi_plus: InitialDatum,
    p: float,
    T: float,
    T_max: float,
    dt: float,
    xgrid: np.ndarray,
    *,
    damping: float = 1.0,
    tol: float = 1e-13,
    max_iter: int = 200,
) -> WaveOperatorResult:
    """Solution with prescribed scattering state ``psi_plus`` on ``[T, T_max]``.

    Damped Picard iteration over the whole window; ``contraction`` is the
    largest observed ratio of successive update sizes.  Raises
    :class:`WaveOperatorDivergence` when updates grow.
    """
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    grid = TimeGrid.from_horizon(T_max, dt, t0=T)
    w = abel_weights(grid)
    drive = np.asarray(psi_plus.free_at_origin(grid.t), dtype=complex)
    coef = 1j / np.conj(SQRT_4PI_I)
    q = drive.copy()
    scale = max(float(np.max(np.abs(drive))), 1e-300)
    prev_update = math.inf
    contraction = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        target = drive - coef * abel_tail_sums(nonlinear_term(q, p), w)
        update = float(np.max(np.abs(target - q)))
        if not math.isfinite(update) or update > 1e6 * scale:
            raise WaveOperatorDivergence(f"iterates exploded after {iterations} sweeps")
        if math.isfinite(prev_update) and prev_update > 0:
            ratio = update / prev_update
            contraction = max(contraction, ratio)
            if iterations > 5 and ratio > 1.0:
                raise WaveOperatorDivergence(
                    f"update grew by {ratio:.3g} at sweep {iterations}; choose a later T"
                )
        q = q + damping * (target - q)
        prev_update = update
        if update <= tol * scale:
            break
    else:
        raise WaveOperatorDivergence(f"no convergence in {max_iter} sweeps")

    traj = ChargeTrajectory(grid=grid, q=q, status=Status.COMPLETED, p=p, drive=drive)
    xgrid = np.asarray(xgrid, dtype=float)
    free = np.asarray(psi_plus.free_on_grid(T, xgrid), dtype=complex)
    values = free - 1j * backward_source(traj, T, xgrid)
    return WaveOperatorResult(
        trajectory=traj,
        psi_at_T=FieldSnapshot(xgrid, values, T),
        iterations=iterations,
        contraction=contraction,
    )
