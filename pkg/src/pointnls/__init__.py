"""Simulator for the Schrodinger equation with a focusing point nonlinearity at the origin.

The dynamics are closed by an Abel-type Volterra equation for the boundary
trace ``q(t) = psi(0, t)``; the field everywhere else follows from ``q`` by
a Duhamel formula.
"""

from pointnls.field import jump_defect, reconstruct
from pointnls.fractional import TimeGrid, abel_weights
from pointnls.ground_state import exponents, ground_state, instability_rate
from pointnls.observables import VirialWeight, mass_energy, observe, virial_residual
from pointnls.propagator import GaussianPacket, GroundState, Sampled, propagate_at_origin, propagate_on_grid
from pointnls.scattering import classify, scattering_diagnostics, wave_operator
from pointnls.snapshot import FieldSnapshot, sobolev_h1, symmetric_grid
from pointnls.solver import ChargeTrajectory, SolverConfig, Status, richardson_order, solve_charge

__all__ = [
    "ChargeTrajectory",
    "FieldSnapshot",
    "GaussianPacket",
    "GroundState",
    "Sampled",
    "SolverConfig",
    "Status",
    "TimeGrid",
    "VirialWeight",
    "abel_weights",
    "classify",
    "exponents",
    "ground_state",
    "instability_rate",
    "jump_defect",
    "mass_energy",
    "observe",
    "propagate_at_origin",
    "propagate_on_grid",
    "reconstruct",
    "richardson_order",
    "scattering_diagnostics",
    "sobolev_h1",
    "solve_charge",
    "symmetric_grid",
    "virial_residual",
    "wave_operator",
]
