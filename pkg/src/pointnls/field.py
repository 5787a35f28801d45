"""Rebuild the field from its boundary trace and check the kink at the origin."""

from __future__ import annotations

import numpy as np

from pointnls.fractional import duhamel_integrals
from pointnls.propagator import InitialDatum, propagate_on_grid
from pointnls.snapshot import FieldSnapshot, check_symmetric, one_sided_derivatives, sobolev_h1
from pointnls.solver import ChargeTrajectory, SolverError

__all__ = ["reconstruct", "reconstruct_many", "jump_defect", "sobolev_h1"]


def reconstruct(
    traj: ChargeTrajectory, datum: InitialDatum, t: float, xgrid: np.ndarray, *, chunk: int = 32
) -> FieldSnapshot:
    """``psi(x, t) = [exp(i t d^2) psi0](x) + i int_0^t K(x, t - s) g(s) ds``.

    ``g = |q|^{p-1} q`` is taken from the trajectory and integrated with the
    exact oscillatory product rule, so the origin value reproduces ``q(t)``.
    """
    xgrid = np.asarray(xgrid, dtype=float)
    check_symmetric(xgrid)
    k = traj.grid.index(t)
    if k >= len(traj.q):
        reason = f" ({traj.status.value} at t = {traj.t_detect})" if traj.t_detect is not None else ""
        raise SolverError(f"trajectory stops at t = {traj.t[-1]}{reason}, requested {t}")
    tk = float(traj.grid.t[k])
    free = propagate_on_grid(datum, tk, xgrid).values
    if k == 0 or not traj.nonlinear:
        return FieldSnapshot(xgrid, free, tk)
    g = traj.nonlinearity()[: k + 1][::-1]
    duhamel = duhamel_integrals(g, traj.grid.dt, xgrid, chunk=chunk)
    return FieldSnapshot(xgrid, free + 1j * duhamel, tk)


def reconstruct_many(
    traj: ChargeTrajectory, datum: InitialDatum, times: list[float], xgrid: np.ndarray
) -> list[FieldSnapshot]:
    return [reconstruct(traj, datum, t, xgrid) for t in times]


def jump_defect(snapshot: FieldSnapshot, p: float) -> float:
    """``|D+ - D- + |psi(0)|^{p-1} psi(0)|`` with second-order one-sided differences."""
    dminus, dplus = one_sided_derivatives(snapshot)
    q = snapshot.at_origin
    return abs(dplus - dminus + abs(q) ** (p - 1) * q)
