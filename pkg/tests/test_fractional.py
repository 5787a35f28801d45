from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from pointnls.fractional import (
    SQRT_4PI_I,
    FracNormSpec,
    TimeGrid,
    abel_sum,
    abel_sums,
    abel_tail_sums,
    abel_weights,
    apply_L_at_origin,
    apply_L_at_x,
    apply_Lambda_tail,
    duhamel_integrals,
    frac_sobolev_norm,
    hilbert_truncate,
    raised_cosine_taper,
)


def test_sqrt_4pi_i_squares_to_4pi_i():
    assert SQRT_4PI_I**2 == pytest.approx(4j * math.pi, rel=1e-15)
    assert SQRT_4PI_I.real > 0


class TestTimeGrid:
    def test_from_horizon(self):
        g = TimeGrid.from_horizon(1.0, 0.1)
        assert g.n_steps == 10
        assert g.T == pytest.approx(1.0)
        assert g.index(0.3) == 3

    def test_offset_origin(self):
        g = TimeGrid.from_horizon(2.0, 0.5, t0=-1.0)
        np.testing.assert_allclose(g.t, [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0])

    @pytest.mark.parametrize("T, dt", [(1.05, 0.1), (0.0, 0.1)])
    def test_rejects_bad_horizon(self, T, dt):
        with pytest.raises(ValueError):
            TimeGrid.from_horizon(T, dt)

    @pytest.mark.parametrize("t", [0.35, -0.1, 1.1])
    def test_index_rejects_off_grid(self, t):
        with pytest.raises(IndexError):
            TimeGrid.from_horizon(1.0, 0.1).index(t)


def _abel_linear(a: complex, b: complex, t: np.ndarray) -> np.ndarray:
    # int_0^t (t - s)^(-1/2) (a + b s) ds
    return a * 2 * np.sqrt(t) + b * 4 / 3 * t**1.5


@given(
    a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    n=st.integers(1, 300),
    dt=st.floats(1e-3, 1.0),
)
def test_abel_weights_exact_for_linear_integrands(a, b, n, dt):
    grid = TimeGrid(0.0, dt, n)
    f = a + b * grid.t
    got = abel_sums(f, abel_weights(grid))
    want = _abel_linear(a, b, grid.t)
    scale = (abs(a) + abs(b) * grid.T + 1) * math.sqrt(grid.T)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12 * scale)


def test_abel_sums_agree_with_single_rows():
    rng = np.random.default_rng(0)
    grid = TimeGrid(0.0, 0.01, 80)
    w = abel_weights(grid)
    f = rng.normal(size=81) + 1j * rng.normal(size=81)
    direct = [abel_sum(f, w, k) for k in range(81)]
    np.testing.assert_allclose(abel_sums(f, w), direct, atol=1e-12)


def test_abel_sum_of_sqrt_integrand_converges():
    # int_0^1 (1 - s)^(-1/2) s^(1/2) ds = B(3/2, 1/2) = pi / 2
    errs = []
    for n in (100, 200, 400):
        grid = TimeGrid(0.0, 1.0 / n, n)
        errs.append(abs(abel_sum(np.sqrt(grid.t), abel_weights(grid), n) - math.pi / 2))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_tail_sums_mirror_forward_sums():
    grid = TimeGrid(0.0, 0.05, 40)
    w = abel_weights(grid)
    f = np.cos(grid.t) + 1j * grid.t
    tail = abel_tail_sums(f, w)
    # int_{t_k}^{T} (s - t_k)^(-1/2) f(s) ds by adaptive quadrature at a few nodes
    for k in (0, 10, 39):
        re = integrate.quad(lambda s: np.cos(s), grid.t[k], grid.T, weight="alg", wvar=(-0.5, 0))[0]
        im = integrate.quad(lambda s: s, grid.t[k], grid.T, weight="alg", wvar=(-0.5, 0))[0]
        assert tail[k] == pytest.approx(complex(re, im), abs=1e-3)
    assert tail[-1] == 0


def test_origin_operators_carry_prefactors():
    grid = TimeGrid(0.0, 0.1, 10)
    w = abel_weights(grid)
    ones = np.ones(11)
    assert apply_L_at_origin(ones, w, 10) == pytest.approx(2.0 / SQRT_4PI_I, rel=1e-13)
    assert apply_Lambda_tail(ones, w, 0) == pytest.approx(2.0 / np.conj(SQRT_4PI_I), rel=1e-13)


def _kernel_quadrature(x: float, t: float, a: complex, b: complex) -> complex:
    # int_0^t K(x, u) (a + b (t - u)) du after y = 1/u, a Fourier integral on [1/t, inf)
    omega = x * x / 4
    c0, c1 = a + b * t, -b

    def fourier(weight: str, power: float) -> float:
        return integrate.quad(lambda y: y**power, 1 / t, np.inf, weight=weight, wvar=omega)[0]

    total = 0j
    for coef, power in ((c0, -1.5), (c1, -2.5)):
        total += coef * complex(fourier("cos", power), fourier("sin", power))
    return total / SQRT_4PI_I


@pytest.mark.parametrize("x", [0.3, 1.0, 2.5])
def test_duhamel_matches_quadrature_for_linear_data(x):
    t, n, a, b = 1.0, 50, 1.0, 0.5j
    dt = t / n
    lag = dt * np.arange(n + 1)
    got = duhamel_integrals(a + b * (t - lag), dt, np.array([x]))[0]
    assert got == pytest.approx(_kernel_quadrature(x, t, a, b), abs=1e-9)


@pytest.mark.parametrize("conjugate", [False, True])
def test_duhamel_continuous_at_origin(conjugate):
    rng = np.random.default_rng(4)
    f = rng.normal(size=61) + 1j * rng.normal(size=61)
    vals = duhamel_integrals(f, 0.01, np.array([0.0, 1e-9]), conjugate=conjugate)
    assert vals[0] == pytest.approx(vals[1], abs=1e-7)


def test_conjugate_kernel_identity():
    rng = np.random.default_rng(5)
    f = rng.normal(size=41) + 1j * rng.normal(size=41)
    x = np.array([0.0, 0.4, -1.7])
    back = duhamel_integrals(f, 0.02, x, conjugate=True)
    fwd = duhamel_integrals(np.conj(f), 0.02, x)
    np.testing.assert_allclose(back, np.conj(fwd), atol=1e-14)


def test_duhamel_even_in_x():
    f = np.linspace(0, 1, 31) * (1 + 1j)
    v = duhamel_integrals(f, 0.03, np.array([-0.8, 0.8]))
    assert v[0] == v[1]


def test_apply_L_at_x_reduces_to_origin():
    grid = TimeGrid(0.0, 0.02, 30)
    w = abel_weights(grid)
    f = np.exp(1j * grid.t)
    assert apply_L_at_x(f, w, 30, 0.0) == apply_L_at_origin(f, w, 30)
    assert apply_L_at_x(f, w, 30, 1e-8) == pytest.approx(apply_L_at_origin(f, w, 30), abs=1e-7)


@pytest.mark.parametrize("mu", [-0.25, 0.25, 0.5, 0.75])
def test_frac_norm_of_gaussian(mu):
    # |e^{-t^2}|^2_{H^mu} = (1/2pi) int |w|^{2mu} pi e^{-w^2/2} dw = 2^(mu-1/2) Gamma(mu+1/2)
    grid = TimeGrid.from_horizon(8.0, 0.01, t0=-8.0)
    spec = FracNormSpec(mu, (-8.0, 8.0))
    want = math.sqrt(2 ** (mu - 0.5) * special.gamma(mu + 0.5))
    errs = [abs(frac_sobolev_norm(np.exp(-grid.t**2), grid, spec, pad_factor=pf) / want - 1) for pf in (4, 16)]
    assert errs[0] < 5e-3
    assert errs[1] < errs[0]


def test_frac_norm_zero_exponent_is_l2():
    rng = np.random.default_rng(6)
    grid = TimeGrid(0.0, 0.1, 99)
    v = rng.normal(size=100) + 1j * rng.normal(size=100)
    got = frac_sobolev_norm(v, grid, FracNormSpec(0.0, (0.0, grid.T)))
    assert got == pytest.approx(math.sqrt(np.sum(np.abs(v) ** 2) * grid.dt), rel=1e-12)


@given(scale=st.floats(0.1, 10.0), c=st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_frac_norm_homogeneous(scale, c):
    grid = TimeGrid.from_horizon(6.0, 0.02, t0=-6.0)
    v = np.exp(-grid.t**2) * (1 + 0.5j * grid.t)
    spec = FracNormSpec(0.25, (-6.0, 6.0))
    assert frac_sobolev_norm(c * v, grid, spec) == pytest.approx(abs(c) * frac_sobolev_norm(v, grid, spec))


@pytest.mark.parametrize("mu, window, taper", [(1.0, (0, 1), 0), (-0.5, (0, 1), 0), (0, (1, 1), 0), (0, (0, 1), 0.6)])
def test_frac_norm_spec_validation(mu, window, taper):
    with pytest.raises(ValueError):
        FracNormSpec(mu, window, taper)


def test_raised_cosine_taper():
    w = raised_cosine_taper(100, 0.1)
    assert w[50] == 1.0
    assert w[0] < 0.01 and w[-1] < 0.01
    np.testing.assert_allclose(w, w[::-1])


def test_hilbert_truncate():
    grid = TimeGrid(0.0, 0.5, 6)
    v = hilbert_truncate(np.ones(7), grid, (0.9, 2.0))
    np.testing.assert_array_equal(v, [0, 0, 1, 1, 1, 0, 0])
