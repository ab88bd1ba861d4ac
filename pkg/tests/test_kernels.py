import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fapchan import kernels
from fapchan.errors import DomainError, IncompatibleKernelError, ZeroDriftError
from fapchan.kernels import ChannelParams, Kernel, RegimeLabel, RegimeThresholds

from conftest import LAM, SIGMA2

ONE_D = [Kernel.EXACT_EQ2, Kernel.SUBORDINATION, Kernel.CAUCHY_LIMIT, Kernel.CORE_ASYMPTOTIC, Kernel.TAIL_ASYMPTOTIC]


class TestChannelParams:
    def test_derived_quantities(self):
        p = ChannelParams.from_diffusion(10.0, 100.0, 5.0)
        assert p.sigma2 == 200.0
        assert p.diffusion == 100.0
        assert p.n_c == 40.0

    def test_zero_drift_critical_scale_is_infinite(self):
        assert math.isinf(ChannelParams(10, 200, 0).n_c)

    @pytest.mark.parametrize("lam,s2,v", [(0, 200, 1), (-1, 200, 1), (10, 0, 1), (10, 200, -0.5),
                                          (10, float("nan"), 1), (10, 200, float("inf"))])
    def test_invalid(self, lam, s2, v):
        with pytest.raises(DomainError):
            ChannelParams(lam, s2, v)


def test_cauchy_mode(zero_drift):
    assert kernels.log_pdf(zero_drift, Kernel.CAUCHY_LIMIT, 0.0) == pytest.approx(math.log(1 / (10 * math.pi)), rel=1e-15)


def test_cauchy_pdf_values(zero_drift):
    assert kernels.pdf(zero_drift, Kernel.CAUCHY_LIMIT, 10.0) == pytest.approx(1 / (20 * math.pi), rel=1e-15)
    n = np.array([1e4, 1e6, 1e9])
    np.testing.assert_allclose(n**2 * kernels.pdf(zero_drift, Kernel.CAUCHY_LIMIT, n), LAM / math.pi, rtol=1e-6)


@pytest.mark.parametrize("kernel", [Kernel.EXACT_EQ2, Kernel.SUBORDINATION])
def test_vanishing_drift_recovers_cauchy(kernel):
    p = ChannelParams(LAM, SIGMA2, 1e-6)
    n = np.array([0.0, 5.0, 20.0])
    ratio = kernels.pdf(p, kernel, n) / kernels.pdf(p, Kernel.CAUCHY_LIMIT, n)
    np.testing.assert_allclose(ratio, 1.0, rtol=1e-3)


def test_subordination_second_moment(drift5):
    # Mixture identity E[N^2] = sigma2 * E[T] = sigma2 * lambda / v.
    f = lambda n: n * n * kernels.pdf(drift5, Kernel.SUBORDINATION, n)
    m2 = 2 * sum(integrate.quad(f, a, b, epsrel=1e-12, limit=200)[0] for a, b in [(0, 40), (40, 400), (400, 4000), (4000, np.inf)])
    assert m2 == pytest.approx(400.0, rel=1e-8)


def test_exact_matches_tail_asymptotic_far_out(drift5):
    n = 10 * drift5.n_c
    exact = kernels.pdf(drift5, Kernel.EXACT_EQ2, n)
    tail = kernels.pdf(drift5, Kernel.TAIL_ASYMPTOTIC, n)
    assert abs(tail / exact - 1) < 0.10


def test_tail_asymptotic_is_continuous_at_z_hi(drift5):
    th = kernels.DEFAULT_THRESHOLDS
    rho = th.z_hi * drift5.sigma2 / drift5.v
    n = math.sqrt(rho**2 - LAM**2)
    assert kernels.log_pdf(drift5, Kernel.TAIL_ASYMPTOTIC, n) == pytest.approx(
        kernels.log_pdf(drift5, Kernel.EXACT_EQ2, n), rel=1e-12)


def test_bivariate_values():
    assert kernels.bivariate_cauchy_pdf(10.0, 0.0, 0.0) == pytest.approx(1 / (200 * math.pi), rel=1e-15)
    for r in [0.5, 7.0, 300.0]:
        assert kernels.bivariate_cauchy_pdf(10.0, r, 0.0) == kernels.bivariate_cauchy_pdf(10.0, 0.0, r)
    with pytest.raises(DomainError):
        kernels.bivariate_cauchy_pdf(0.0, 1.0, 1.0)


def _radial_mass(lam, r0=0.0):
    f = lambda rho: kernels.bivariate_cauchy_pdf(lam, rho, 0.0) * 2 * math.pi * rho
    pts = [r0, r0 + lam, r0 + 100 * lam, np.inf]
    return sum(integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)[0] for a, b in zip(pts, pts[1:]))


def test_bivariate_normalization_and_exceedance():
    assert _radial_mass(LAM) == pytest.approx(1.0, abs=1e-6)
    for r in [0.0, LAM, 10 * LAM]:
        assert _radial_mass(LAM, r) == pytest.approx(LAM / math.hypot(LAM, r), abs=1e-6)


def test_bivariate_decays_as_inverse_cube():
    r = np.array([1e3, 1e4, 1e5])
    np.testing.assert_allclose(kernels.bivariate_cauchy_pdf(LAM, r, 0.0) * r**3, LAM / (2 * math.pi), rtol=1e-3)


@pytest.mark.parametrize("v,expected", [(5.0, 40.0), (0.1, 2000.0)])
def test_critical_scale(v, expected):
    assert kernels.critical_scale(ChannelParams(LAM, SIGMA2, v)) == expected


def test_critical_scale_zero_drift():
    assert kernels.critical_scale(ChannelParams(LAM, SIGMA2, 0)) == math.inf


@pytest.mark.parametrize("n,label,z", [
    (0.0, RegimeLabel.CAUCHY_CORE, 0.25),
    (400.0, RegimeLabel.EXPONENTIAL_TAIL, 10.0),
    (40.0, RegimeLabel.TRANSITION, 1.03),
])
def test_classify_regime(drift5, n, label, z):
    regime = kernels.classify_regime(drift5, n)
    assert regime.label is label
    assert regime.z == pytest.approx(z, abs=5e-3)


def test_classify_regime_rejects_zero_drift(zero_drift):
    with pytest.raises(ZeroDriftError):
        kernels.classify_regime(zero_drift, 0.0)


def test_custom_thresholds(drift5):
    assert kernels.classify_regime(drift5, 0.0, RegimeThresholds(0.1, 0.5)).label is RegimeLabel.TRANSITION
    with pytest.raises(DomainError):
        RegimeThresholds(2.0, 1.0)


def test_tail_decay_rates(drift5):
    assert kernels.tail_decay_rate(drift5, Kernel.EXACT_EQ2) == pytest.approx(0.05)
    assert kernels.tail_decay_rate(drift5, Kernel.SUBORDINATION) == pytest.approx(0.025)
    tiny = ChannelParams(LAM, SIGMA2, 1e-9)
    assert kernels.tail_decay_rate(tiny, Kernel.SUBORDINATION) < 1e-10
    with pytest.raises(IncompatibleKernelError):
        kernels.tail_decay_rate(drift5, Kernel.CAUCHY_LIMIT)


@pytest.mark.parametrize("kernel", [Kernel.EXACT_EQ2, Kernel.SUBORDINATION])
@pytest.mark.parametrize("v", [1.0, 5.0])
def test_tail_rate_fit(kernel, v):
    p = ChannelParams(LAM, SIGMA2, v)
    n = np.linspace(5 * p.n_c, 10 * p.n_c, 201)
    fitted = kernels.fit_tail_rate(n, kernels.log_pdf(p, kernel, n))
    assert fitted == pytest.approx(kernels.tail_decay_rate(p, kernel), rel=0.05)


def test_bare_slope_includes_prefactor_bias(drift5):
    # Without the n^(-3/2) term the straight-line slope overshoots the rate by >10%.
    n = np.linspace(200, 400, 201)
    bare = kernels.fit_tail_rate(n, kernels.log_pdf(drift5, Kernel.SUBORDINATION, n), prefactor_power=0)
    assert bare > 1.1 * 0.025


@pytest.mark.parametrize("kernel", [Kernel.EXACT_EQ2, Kernel.SUBORDINATION])
def test_zero_drift_rejected_for_drifted_kernels(zero_drift, kernel):
    with pytest.raises(IncompatibleKernelError):
        kernels.log_pdf(zero_drift, kernel, 0.0)


def test_bivariate_kernel_not_one_dimensional(drift5):
    with pytest.raises(IncompatibleKernelError):
        kernels.log_pdf(drift5, Kernel.BIVARIATE_CAUCHY, 0.0)


def test_far_tail_underflows_gracefully(drift5):
    assert kernels.pdf(drift5, Kernel.EXACT_EQ2, 1e6) == 0.0
    assert math.isfinite(kernels.log_pdf(drift5, Kernel.EXACT_EQ2, 1e6))


@pytest.mark.parametrize("kernel", [Kernel.EXACT_EQ2, Kernel.SUBORDINATION])
def test_cauchy_convergence_small_drift(kernel):
    p = ChannelParams(LAM, SIGMA2, 1e-4 * SIGMA2 / LAM * 0.99)
    n = np.linspace(-10 * LAM, 10 * LAM, 2001)
    ratio = kernels.pdf(p, kernel, n) / kernels.pdf(p, Kernel.CAUCHY_LIMIT, n)
    assert np.max(np.abs(ratio - 1)) < 1e-2


def test_core_asymptotic_matches_exact_for_small_z():
    p = ChannelParams(LAM, SIGMA2, 0.5)
    n = np.linspace(0, 15, 200)
    assert np.all(kernels.bessel_argument(p, n) < 0.05)
    ratio = kernels.pdf(p, Kernel.EXACT_EQ2, n) / kernels.pdf(p, Kernel.CORE_ASYMPTOTIC, n)
    assert np.max(np.abs(ratio - 1)) < 5e-2


drift = st.floats(min_value=1e-3, max_value=50.0)
offset = st.floats(min_value=0.0, max_value=1e5)


@given(v=drift, n=offset, kernel=st.sampled_from(ONE_D))
def test_symmetry(v, n, kernel):
    p = ChannelParams(LAM, SIGMA2, v)
    assert kernels.log_pdf(p, kernel, n) == kernels.log_pdf(p, kernel, -n)


@settings(max_examples=50)
@given(v=drift, kernel=st.sampled_from(ONE_D))
def test_unimodal(v, kernel):
    p = ChannelParams(LAM, SIGMA2, v)
    n = np.concatenate([np.linspace(0, 50, 200), np.geomspace(50, 1e5, 400)])
    lp = kernels.log_pdf(p, kernel, n)
    assert np.all(np.diff(lp) <= 1e-12)
