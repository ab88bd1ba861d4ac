import mpmath
import numpy as np
import pytest

from fapchan import montecarlo as mc
from fapchan.kernels import ChannelParams

LAM = 10.0
SIGMA2 = 200.0
AMPLITUDE = 200.0


def k1_integral_oracle(z):
    """K1(z) = int_0^inf exp(-z cosh t) cosh t dt, truncated where the integrand is < e^-(z+100)."""
    mpmath.mp.dps = 30
    z = mpmath.mpf(z)
    t_max = mpmath.acosh(1 + 100 / z)
    return float(mpmath.quad(lambda t: mpmath.exp(-z * mpmath.cosh(t)) * mpmath.cosh(t),
                             mpmath.linspace(0, t_max, 16)))


@pytest.fixture
def drift5():
    """Reference drifted channel: lambda=10, D=100, v=5."""
    return ChannelParams(LAM, SIGMA2, 5.0)


@pytest.fixture
def zero_drift():
    return ChannelParams(LAM, SIGMA2, 0.0)


_SAMPLE_CACHE = {}


@pytest.fixture(scope="session")
def fap_samples():
    """10^6 seeded FAP draws per drift, shared across modules."""

    def get(v, samples=10**6, seed=2024):
        key = (v, samples, seed)
        if key not in _SAMPLE_CACHE:
            _SAMPLE_CACHE[key] = mc.draw_fap(ChannelParams(LAM, SIGMA2, v), mc.McConfig(samples, seed))
        return _SAMPLE_CACHE[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One verdict line per acceptance criterion, filled by test_acceptance.py.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.rstrip("abcd")), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
