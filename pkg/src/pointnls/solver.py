"""Time marching for the closed Volterra-Abel equation of the boundary trace

    q(t) = [exp(i t d^2) psi0](0) + i / sqrt(4 pi i) int_0^t (t - s)^{-1/2} |q|^{p-1} q ds.

Each step splits the product-integration sum into a history part (fixed
once per step) and the last-panel term, which is resolved by fixed-point
iteration seeded with the frozen-history predictor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from pointnls.fractional import SQRT_4PI_I, TimeGrid, abel_weights
from pointnls.propagator import InitialDatum, OriginDrive, propagate_at_origin


class Status(str, enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUp"
    STALLED = "Stalled"


class NotApplicable(ArithmeticError):
    """A diagnostic is undefined for this input (e.g. 0/0)."""


class SolverError(RuntimeError):
    """A trajectory cannot be used for the requested operation."""


@dataclass(frozen=True)
class SolverConfig:
    p: float
    dt: float
    T: float
    fp_tol: float = 1e-12
    fp_max_iters: int = 50
    blowup_amp: float = 1e6
    blowup_growth: float = 10.0
    nonlinear: bool = True

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise ValueError(f"nonlinearity power must exceed 1: p = {self.p}")
        if not self.dt > 0:
            raise ValueError(f"time step must be positive: dt = {self.dt}")
        if not self.T > 0:
            raise ValueError(f"horizon must be positive: T = {self.T}")
        if not (self.fp_tol > 0 and self.fp_max_iters > 0 and self.blowup_amp > 0 and self.blowup_growth > 1):
            raise ValueError("tolerances and ceilings must be positive")

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_horizon(self.T, self.dt)


@dataclass(frozen=True)
class ChargeTrajectory:
    """``q(t_k) = psi(0, t_k)`` for the steps that were accepted."""

    grid: TimeGrid
    q: np.ndarray
    status: Status
    p: float
    nonlinear: bool = True
    t_detect: float | None = None
    stall_step: int | None = None
    reason: str = ""
    max_iterations: int = 0
    drive: np.ndarray | None = field(default=None, repr=False)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t[: len(self.q)]

    @property
    def completed(self) -> bool:
        return self.status is Status.COMPLETED

    @property
    def blowup_interval(self) -> tuple[float, float] | None:
        if self.t_detect is None:
            return None
        return (self.t_detect - self.grid.dt, self.t_detect)

    def nonlinearity(self) -> np.ndarray:
        return nonlinear_term(self.q, self.p) if self.nonlinear else np.zeros_like(self.q)

    def at(self, t: float) -> complex:
        k = self.grid.index(t)
        if k >= len(self.q):
            raise SolverError(f"trajectory stops at t = {self.t[-1]}, requested {t}")
        return complex(self.q[k])


def nonlinear_term(q: np.ndarray | complex, p: float) -> np.ndarray | complex:
    """``|q|^{p-1} q``."""
    a2 = np.real(q) ** 2 + np.imag(q) ** 2
    return a2 ** ((p - 1) / 2) * q


def solve_charge(
    datum: InitialDatum, cfg: SolverConfig, drive: OriginDrive | None = None
) -> ChargeTrajectory:
    """March the charge equation on ``[0, cfg.T]``.

    Blow-up is declared when ``|q|`` exceeds ``cfg.blowup_amp``, when one step
    multiplies ``|q|`` by more than ``cfg.blowup_growth``, or when the
    corrector fails while the amplitude is growing.  A corrector failure
    without growth is reported as a stall (``dt`` too large).
    """
    grid = cfg.grid
    if drive is None:
        drive = propagate_at_origin(datum, grid)
    elif drive.grid != grid:
        raise ValueError("drive was computed on a different time grid")
    F = np.asarray(drive.values, dtype=complex)
    n = grid.n_steps
    w = abel_weights(grid)
    scale = math.sqrt(cfg.dt)
    coef = 1j / SQRT_4PI_I
    rev = np.ascontiguousarray(w.interior[::-1])  # rev[n - e] = interior[e]
    endpoint = w.endpoint
    gamma = coef * scale * w.interior[0]
    p = cfg.p

    q = np.zeros(n + 1, dtype=complex)
    g = np.zeros(n + 1, dtype=complex)
    q[0] = F[0]
    if cfg.nonlinear:
        g[0] = nonlinear_term(q[0], p)

    status = Status.COMPLETED
    t_detect = None
    stall_step = None
    reason = ""
    max_iters = 0
    last = n

    for k in range(1, n + 1):
        if not cfg.nonlinear:
            q[k] = F[k]
            continue
        hist = endpoint[k] * g[0]
        if k > 1:
            hist += np.dot(rev[n - k + 1 : n], g[1:k])
        base = F[k] + coef * scale * hist

        cur = base + gamma * g[k - 1]
        converged = False
        growing = False
        for it in range(1, cfg.fp_max_iters + 1):
            nxt = base + gamma * nonlinear_term(cur, p)
            err = abs(nxt - cur)
            cur = nxt
            if not math.isfinite(err) or abs(cur) > cfg.blowup_amp:
                growing = True
                break
            if err <= cfg.fp_tol * abs(cur) or err == 0.0:
                converged = True
                break
        max_iters = max(max_iters, it)

        if not converged:
            prev = abs(q[k - 1])
            rising = k >= 2 and prev > abs(q[k - 2]) and prev > abs(q[0])
            if growing or rising:
                status, t_detect = Status.BLOWUP, float(grid.t[k])
                reason = "corrector diverged with growing amplitude"
            else:
                status, stall_step = Status.STALLED, k
                reason = f"corrector did not converge in {cfg.fp_max_iters} iterations"
            last = k - 1
            break

        q[k] = cur
        g[k] = nonlinear_term(cur, p)
        prev = abs(q[k - 1])
        if abs(cur) > cfg.blowup_amp or (prev > 0 and abs(cur) > cfg.blowup_growth * prev):
            status, t_detect = Status.BLOWUP, float(grid.t[k])
            reason = "amplitude ceiling" if abs(cur) > cfg.blowup_amp else "per-step growth ceiling"
            last = k - 1
            break

    return ChargeTrajectory(
        grid=grid,
        q=q[: last + 1].copy(),
        status=status,
        p=p,
        nonlinear=cfg.nonlinear,
        t_detect=t_detect,
        stall_step=stall_step,
        reason=reason,
        max_iterations=max_iters,
        drive=F,
    )


def richardson_order(datum: InitialDatum, cfg: SolverConfig, t_probe: float) -> float:
    """Observed order ``log2(|q_h - q_{h/2}| / |q_{h/2} - q_{h/4}|)`` at ``t_probe``.

    Returns ``inf`` when the scheme reproduces the solution to rounding at
    all three resolutions (e.g. the linear problem with a closed-form drive)
    and raises :class:`NotApplicable` for an identically zero trajectory.
    """
    vals = []
    for div in (1, 2, 4):
        run = solve_charge(datum, replace(cfg, dt=cfg.dt / div))
        k = run.grid.index(t_probe)
        if k >= len(run.q) or (not run.completed and k >= len(run.q) - 1):
            raise SolverError(f"run with dt = {cfg.dt / div} did not reach t = {t_probe}")
        if not run.completed:
            raise SolverError(f"run with dt = {cfg.dt / div} ended with {run.status.value}")
        vals.append(complex(run.q[k]))
    scale = max(abs(v) for v in vals)
    if scale == 0.0:
        raise NotApplicable("trajectory is identically zero")
    d1 = abs(vals[0] - vals[1])
    d2 = abs(vals[1] - vals[2])
    floor = 64 * np.finfo(float).eps * scale
    if d1 <= floor and d2 <= floor:
        return math.inf
    if d2 <= floor:
        raise NotApplicable("finest difference is at rounding level")
    return math.log2(d1 / d2)
