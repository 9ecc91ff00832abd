import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from qrzero.ald import (
    ALDParams,
    ald_cdf,
    ald_cdf_at_zero,
    ald_logpdf,
    ald_ppf,
    check_loss,
    mixture_constants,
    validate_tau,
)

taus = st.floats(0.01, 0.99)


def test_check_loss_examples():
    assert check_loss(0.0, 0.3) == 0.0
    assert check_loss(2.0, 0.5) == 1.0
    assert check_loss(-1.0, 0.25) == pytest.approx(0.75)


@given(st.floats(-1e6, 1e6), taus)
def test_check_loss_nonnegative(u, tau):
    val = check_loss(u, tau)
    assert val >= 0
    assert (val == 0) == (u == 0)


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.1, 1.5])
def test_tau_boundary_rejected(tau):
    with pytest.raises(ValueError):
        validate_tau(tau)
    with pytest.raises(ValueError):
        mixture_constants(tau)


def test_sigma_must_be_positive():
    with pytest.raises(ValueError):
        ALDParams(0.0, 0.0, 0.5)


def test_logpdf_examples():
    p = ALDParams(0.0, 1.0, 0.5)
    assert ald_logpdf(0.0, p) == pytest.approx(np.log(0.25))
    assert ald_logpdf(1.0, p) == pytest.approx(np.log(0.25) - 0.5)


def test_density_integrates_to_one():
    p = ALDParams(0.0, 1.0, 0.3)
    total, _ = integrate.quad(lambda y: np.exp(ald_logpdf(y, p)), -50, 50, points=[0.0],
                              epsabs=1e-12, epsrel=1e-12, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_cdf_at_zero_examples():
    assert ald_cdf_at_zero(0.0, 1.0, 0.3) == pytest.approx(0.3)
    assert ald_cdf_at_zero(1.0, 1.0, 0.5) == pytest.approx(0.5 * np.exp(-0.5))
    assert ald_cdf_at_zero(1.0, 1.0, 0.5) == pytest.approx(0.303265, abs=1e-6)
    assert ald_cdf_at_zero(-1.0, 1.0, 0.5) == pytest.approx(0.696735, abs=1e-6)


def test_cdf_consistency():
    p = ALDParams(0.7, 1.3, 0.2)
    assert ald_cdf(p.mu, p) == pytest.approx(p.tau)
    assert ald_cdf(0.0, p) == ald_cdf_at_zero(p.mu, p.sigma, p.tau)


@pytest.mark.parametrize("mu,sigma,tau", [(0.0, 1.0, 0.3), (1.5, 0.5, 0.8), (-2.0, 2.0, 0.1)])
def test_cdf_matches_quadrature(mu, sigma, tau):
    p = ALDParams(mu, sigma, tau)
    grid = np.linspace(mu - 6 * sigma, mu + 6 * sigma, 20)
    for y in grid:
        # integrate from the mode so each piece is smooth
        piece, _ = integrate.quad(lambda t: np.exp(ald_logpdf(t, p)), mu, y,
                                  epsabs=1e-13, epsrel=1e-13)
        assert ald_cdf(y, p) == pytest.approx(tau + piece, abs=1e-8)


def test_cdf_derivative_is_density():
    p = ALDParams(0.4, 0.8, 0.35)
    grid = np.linspace(-4, 4, 41)
    grid = grid[np.abs(grid - p.mu) > 1e-3]
    h = 1e-5
    fd = (ald_cdf(grid + h, p) - ald_cdf(grid - h, p)) / (2 * h)
    np.testing.assert_allclose(fd, np.exp(ald_logpdf(grid, p)), atol=1e-6)


def test_cdf_limits_and_monotone():
    p = ALDParams(0.0, 1.0, 0.6)
    y = np.linspace(-60, 60, 1001)
    F = ald_cdf(y, p)
    assert np.all(np.diff(F) >= 0)
    assert F[0] < 1e-10 and F[-1] > 1 - 1e-10


def test_ppf_inverts_cdf():
    p = ALDParams(-0.3, 1.7, 0.15)
    q = np.linspace(0.001, 0.999, 99)
    np.testing.assert_allclose(ald_cdf(ald_ppf(q, p.mu, p.sigma, p.tau), p), q, atol=1e-12)


def test_mixture_constants_examples():
    mc = mixture_constants(0.5)
    assert mc.theta == 0.0 and mc.psi2 == 8.0
    mc = mixture_constants(0.25)
    assert mc.theta == pytest.approx(8 / 3) and mc.psi2 == pytest.approx(32 / 3)
    mc = mixture_constants(0.75)
    assert mc.theta == pytest.approx(-8 / 3) and mc.psi2 == pytest.approx(32 / 3)


@given(taus)
def test_mixture_constants_symmetry(tau):
    a, b = mixture_constants(tau), mixture_constants(1 - tau)
    assert a.theta == pytest.approx(-b.theta, abs=1e-9)
    assert a.psi2 == pytest.approx(b.psi2)
    assert a.psi2 > 0


def test_cdf_at_zero_increasing_in_tau():
    tau_grid = np.arange(0.05, 0.951, 0.05)
    for mu in np.arange(-3, 4):
        vals = ald_cdf_at_zero(mu, 1.0, tau_grid)
        assert np.all(np.diff(vals) > 0), mu
