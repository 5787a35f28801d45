from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointnls.fractional import abel_weights, apply_Lambda_tail
from pointnls.propagator import GaussianPacket, GroundState, Sampled
from pointnls.scattering import (
    Verdict,
    WaveOperatorDivergence,
    backward_source,
    classify,
    decay_exponent,
    lq_tail,
    scattering_diagnostics,
    wave_operator,
)
from pointnls.snapshot import symmetric_grid
from pointnls.solver import SolverConfig, SolverError, Status, solve_charge


@pytest.mark.parametrize(
    "A, verdict",
    [
        (0.1, Verdict.GLOBAL),
        (0.5, Verdict.GLOBAL),
        (0.9, Verdict.GLOBAL),
        (1.0, Verdict.INDETERMINATE),
        (1.3, Verdict.INDETERMINATE),
        (1.4, Verdict.BLOWUP),
        (2.0, Verdict.BLOWUP),
    ],
)
def test_gaussian_verdicts(A, verdict):
    c = classify(GaussianPacket(amplitude=A), 5)
    assert c.verdict is verdict
    # M = sqrt(pi/2) A^2, |d psi|^2 = M, E = M/2 - A^6/6, threshold 2/3
    m = math.sqrt(math.pi / 2) * A**2
    assert c.me_product == pytest.approx(m**3 * (m / 2 - A**6 / 6))
    assert c.eta0 == pytest.approx(m**1.5 * math.sqrt(m) / 2)
    assert c.threshold == pytest.approx(2 / 3)


def test_ground_state_is_on_the_boundary():
    c = classify(GroundState(p=5), 5)
    assert c.verdict is Verdict.INDETERMINATE
    assert c.eta0 == pytest.approx(1.0)


@given(factor=st.floats(0.05, 0.99))
def test_scaled_down_ground_state_scatters(factor):
    assert classify(GroundState(p=5, factor=factor), 5).verdict is Verdict.GLOBAL


def test_small_data_flag():
    assert classify(GaussianPacket(amplitude=0.05), 5).small_data
    assert not classify(GaussianPacket(amplitude=0.5), 5).small_data


def test_agreement():
    c = classify(GaussianPacket(amplitude=0.5), 5)
    assert c.agrees_with(Status.COMPLETED) is True
    assert c.agrees_with(Status.BLOWUP) is False
    assert c.agrees_with(Status.STALLED) is None
    assert classify(GaussianPacket(amplitude=1.0), 5).agrees_with(Status.COMPLETED) is None


def test_classify_needs_supercritical_power():
    with pytest.raises(ValueError):
        classify(GaussianPacket(), 3)


def test_lq_tail_of_constant():
    tail = lq_tail(np.full(11, 2.0), 0.1, 4.0)
    np.testing.assert_allclose(tail, 2.0 * (1.0 - 0.1 * np.arange(11)) ** 0.25, atol=1e-14)
    assert np.all(np.diff(tail) <= 0)


@given(alpha=st.floats(0.2, 1.5))
def test_decay_exponent_of_power_law(alpha):
    t = np.linspace(0, 100, 10001)
    q = np.where(t > 0, t, 1.0) ** -alpha * np.exp(1j * t)
    assert decay_exponent(t, q) == pytest.approx(alpha, abs=0.02)


def test_decay_exponent_needs_samples():
    with pytest.raises(ValueError):
        decay_exponent(np.linspace(0, 1, 10), np.ones(10))


@pytest.fixture(scope="module")
def small_run():
    datum = GaussianPacket(amplitude=0.5)
    return datum, solve_charge(datum, SolverConfig(p=5, dt=0.01, T=20.0))


@pytest.mark.parametrize("T", [0.5, 1.0])
def test_scattering_state_consistent_at_origin(small_run, T):
    datum, traj = small_run
    x = symmetric_grid(40.0, 1 / 32)
    diag = scattering_diagnostics(traj, datum, x, residual_times=(T,), fit=False)
    # q(T) - [exp(i T d^2) psi_plus](0) = -i [Lambda g](0, T), from the origin weights
    lam = apply_Lambda_tail(traj.nonlinearity(), abel_weights(traj.grid), traj.grid.index(T))
    free = Sampled.from_snapshot(diag.psi_plus, tail_tol=1e-4).free_at_origin(np.array([T]))[0]
    assert abs(traj.at(T) - free + 1j * lam) < 1e-2 * abs(lam)
    assert backward_source(traj, T, np.zeros(3))[1] == pytest.approx(lam, abs=1e-12)
    assert diag.residual_at(T) > 0
    assert diag.T_max == 20.0
    assert diag.lq_total == pytest.approx(diag.lq_tail[0])


def test_diagnostics_need_completed_run():
    datum = GaussianPacket(amplitude=1.6)
    traj = solve_charge(datum, SolverConfig(p=5, dt=1e-3, T=1.0))
    with pytest.raises(SolverError):
        scattering_diagnostics(traj, datum, symmetric_grid(2.0, 0.5))


def test_wave_operator_round_trip_small():
    T, T_max, dt = 2.0, 20.0, 0.02
    plus = GaussianPacket(amplitude=0.1)
    x = symmetric_grid(80.0, 1 / 8)
    res = wave_operator(plus, 5, T, T_max, dt, x)
    assert res.contraction < 0.1
    # forward solve from psi(T) reproduces the final-value trajectory
    fwd = solve_charge(Sampled.from_snapshot(res.psi_at_T), SolverConfig(p=5, dt=dt, T=T_max - T))
    np.testing.assert_allclose(fwd.q, res.trajectory.q, atol=1e-8)


def test_wave_operator_diverges_for_large_data():
    with pytest.raises(WaveOperatorDivergence):
        wave_operator(GaussianPacket(amplitude=5.0), 5, 0.0, 5.0, 0.01, symmetric_grid(2.0, 0.5))


def test_wave_operator_rejects_bad_damping():
    with pytest.raises(ValueError):
        wave_operator(GaussianPacket(), 5, 0.0, 1.0, 0.1, symmetric_grid(2.0, 0.5), damping=0.0)
