import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import ive

from gdoa.circular import (
    ASYMPTOTIC_KAPPA,
    VonMises,
    _bessel_ratio_asymptotic,
    approximate_posterior,
    bessel_ratio,
    log_density,
    moment_vector,
    wrap_angle,
)


def bessel_series(x: float, m: int) -> float:
    """Power-series oracle for I_m(x), summed to machine precision."""
    term = (x / 2.0) ** m / math.factorial(m)
    total = term
    t = 0
    while True:
        t += 1
        term *= (x / 2.0) ** 2 / (t * (t + m))
        total += term
        if term < 1e-18 * total:
            return total


def vm_moment_quadrature(mu: float, kappa: float, m: int) -> complex:
    """E[exp(1j*m*omega)] under a von Mises law by adaptive quadrature.

    Uses the overflow-safe scaled density exp(kappa*(cos(w-mu)-1)).
    """
    norm = 2.0 * np.pi * ive(0, kappa)
    re = quad(lambda w: np.cos(m * w) * np.exp(kappa * (np.cos(w - mu) - 1.0)),
              mu - np.pi, mu + np.pi, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    im = quad(lambda w: np.sin(m * w) * np.exp(kappa * (np.cos(w - mu) - 1.0)),
              mu - np.pi, mu + np.pi, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    return (re + 1j * im) / norm


class TestBesselRatio:
    def test_zero_kappa_first_order(self):
        assert bessel_ratio(0.0, 1) == 0.0

    def test_identity_order(self):
        assert bessel_ratio(0.0, 0) == 1.0

    def test_against_series_oracle(self):
        oracle = bessel_series(2.0, 1) / bessel_series(2.0, 0)
        assert bessel_ratio(2.0, 1) == pytest.approx(oracle, rel=1e-12)
        assert bessel_ratio(2.0, 1) == pytest.approx(0.6978, abs=1e-4)

    def test_negative_kappa_rejected(self):
        with pytest.raises(ValueError):
            bessel_ratio(-1.0, 1)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            bessel_ratio(1.0, -1)

    @given(kappa=st.floats(0.0, 1e6), m=st.integers(0, 40))
    @settings(max_examples=80, deadline=None)
    def test_bounded(self, kappa, m):
        r = bessel_ratio(kappa, m)
        assert 0.0 <= r <= 1.0

    def test_monotone_in_kappa(self):
        kappas = np.logspace(-3, 8, 60)
        for m in (1, 2, 7, 31):
            vals = np.array([bessel_ratio(k, m) for k in kappas])
            assert np.all(np.diff(vals) >= 0)

    def test_large_kappa_stable(self):
        for kappa in (1e6, 1e9, 1e12, np.inf):
            r = bessel_ratio(kappa, np.arange(33))
            assert np.all(np.isfinite(r))
            assert r[1] == pytest.approx(1.0, abs=1e-5)

    def test_switchover_agreement(self):
        m = np.arange(65)
        below = ive(m, ASYMPTOTIC_KAPPA) / ive(0, ASYMPTOTIC_KAPPA)
        above = _bessel_ratio_asymptotic(m, ASYMPTOTIC_KAPPA)
        assert np.abs(below - above).max() < 1e-12


class TestMomentVector:
    def test_uniform_distribution(self):
        a = moment_vector(VonMises(0.7, 0.0), 5)
        np.testing.assert_array_equal(a, [1, 0, 0, 0, 0])

    def test_point_mass_limit(self):
        mu = -1.2
        a = moment_vector(VonMises(mu, 1e9), 6)
        np.testing.assert_allclose(a, np.exp(1j * mu * np.arange(6)), atol=1e-3)

    def test_against_quadrature(self):
        vm = VonMises(0.3, 5.0)
        a = moment_vector(vm, 4)
        oracle = np.array([vm_moment_quadrature(vm.mu, vm.kappa, m) for m in range(4)])
        np.testing.assert_allclose(a, oracle, atol=1e-8)

    def test_first_moment_consistency(self):
        vm = VonMises(1.1, 7.3)
        a = moment_vector(vm, 3)
        assert np.angle(a[1]) == pytest.approx(vm.mu, abs=1e-15)
        assert abs(a[1]) == bessel_ratio(vm.kappa, 1)

    def test_nonincreasing_magnitudes(self):
        a = moment_vector(VonMises(0.4, 12.0), 16)
        mags = np.abs(a)
        assert np.all(np.diff(mags) <= 1e-15)


def dense_mode_oracle(eta, n_grid=2**20):
    """Argmax of the exact log-density on a dense grid, then bounded refinement."""
    from scipy.optimize import minimize_scalar

    G = n_grid
    grid = (np.fft.ifft(np.conj(eta), n=G) * G).real
    g = int(np.argmax(grid))
    lo, hi = 2 * np.pi * (g - 1) / G, 2 * np.pi * (g + 1) / G
    res = minimize_scalar(lambda w: -log_density(eta, w), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return wrap_angle(res.x)


class TestApproximatePosterior:
    def test_single_harmonic_is_exact(self):
        c = 3.7
        eta = np.zeros(8, dtype=complex)
        eta[1] = c
        vm = approximate_posterior(eta)
        assert vm.mu == 0.0
        assert vm.kappa == pytest.approx(c, rel=1e-12)

    def test_single_harmonic_phase(self):
        # eta_1 = c*exp(1j*phi) shifts the mode to +phi
        c, phi = 2.0, 0.9
        eta = np.zeros(6, dtype=complex)
        eta[1] = c * np.exp(1j * phi)
        vm = approximate_posterior(eta)
        assert vm.mu == pytest.approx(phi, abs=1e-12)
        assert vm.kappa == pytest.approx(c, rel=1e-10)

    def test_matches_dense_grid_oracle(self):
        rng = np.random.default_rng(7)
        eta = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        vm = approximate_posterior(eta)
        oracle = dense_mode_oracle(eta)
        assert abs(wrap_angle(vm.mu - oracle)) < 1e-6

    def test_mode_dominates_grid(self):
        rng = np.random.default_rng(123)
        grid = np.linspace(-np.pi, np.pi, 4096, endpoint=False)
        for _ in range(20):
            eta = rng.standard_normal(12) + 1j * rng.standard_normal(12)
            vm = approximate_posterior(eta)
            assert log_density(eta, vm.mu) >= log_density(eta, grid).max() - 1e-9

    def test_laplace_concentration_positive(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            eta = rng.standard_normal(10) + 1j * rng.standard_normal(10)
            assert approximate_posterior(eta).kappa > 0

    def test_degenerate_zero_eta(self):
        vm = approximate_posterior(np.zeros(8, dtype=complex))
        assert vm.mu == 0.0 and vm.kappa == 0.0

    def test_prior_only(self):
        prior = VonMises(-0.8, 4.0)
        vm = approximate_posterior(np.zeros(8, dtype=complex), prior=prior)
        assert vm.mu == pytest.approx(prior.mu, abs=1e-10)
        assert vm.kappa == pytest.approx(prior.kappa, rel=1e-10)

    def test_prior_tilts_mode(self):
        eta = np.zeros(8, dtype=complex)
        eta[1] = 2.0  # likelihood mode at 0
        vm = approximate_posterior(eta, prior=VonMises(1.0, 2.0))
        assert 0.0 < vm.mu < 1.0  # pulled between likelihood and prior modes

    def test_eta_too_short(self):
        with pytest.raises(ValueError):
            approximate_posterior(np.zeros(1, dtype=complex))


class TestVonMisesType:
    def test_mu_wrapped(self):
        assert VonMises(3 * np.pi, 1.0).mu == pytest.approx(-np.pi, abs=1e-12)

    def test_negative_kappa_rejected(self):
        with pytest.raises(ValueError):
            VonMises(0.0, -0.5)

    @given(x=st.floats(-50.0, 50.0))
    @settings(max_examples=50, deadline=None)
    def test_wrap_angle_range(self, x):
        w = wrap_angle(x)
        assert -np.pi <= w < np.pi
        assert np.cos(w - x) == pytest.approx(1.0, abs=1e-9)
