"""FAP noise densities and the spatial regime classification around n_c = sigma2 / v.

Lengths are in micrometres and times in seconds throughout (sigma2 in um^2/s,
v in um/s), although nothing here depends on the unit choice as long as the
inputs are consistent.

Two drifted kernels are provided.  ``EXACT_EQ2`` is the closed form with the
extra ``exp(-z)`` factor; it does not integrate to one.  ``SUBORDINATION`` is
the inverse-Gaussian mixture of lateral Gaussians, which is a proper density
and matches the first-passage sampler in :mod:`fapchan.montecarlo`.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IncompatibleKernelError, ZeroDriftError
from .special import log_bessel_k1

__all__ = [
    "ChannelParams",
    "Kernel",
    "RegimeLabel",
    "Regime",
    "RegimeThresholds",
    "DEFAULT_THRESHOLDS",
    "log_pdf",
    "pdf",
    "bivariate_cauchy_pdf",
    "critical_scale",
    "bessel_argument",
    "classify_regime",
    "tail_decay_rate",
    "fit_tail_rate",
]


@dataclass(frozen=True)
class ChannelParams:
    """Physical description of the channel.

    Parameters
    ----------
    lam : float
        Transmitter-receiver distance lambda.
    sigma2 : float
        Diffusion scale sigma^2 = 2 D.
    v : float
        Drift speed toward the receiving plane; 0 selects the zero-drift limit.
    """

    lam: float
    sigma2: float
    v: float = 0.0

    def __post_init__(self):
        for name in ("lam", "sigma2", "v"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise DomainError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.lam <= 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if self.sigma2 <= 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if self.v < 0:
            raise DomainError(f"drift must point toward the receiver (v >= 0), got {self.v}")

    @classmethod
    def from_diffusion(cls, lam, diffusion, v=0.0):
        return cls(lam=lam, sigma2=2.0 * diffusion, v=v)

    @property
    def diffusion(self):
        return 0.5 * self.sigma2

    @property
    def n_c(self):
        return math.inf if self.v == 0 else self.sigma2 / self.v

    def with_drift(self, v):
        return ChannelParams(self.lam, self.sigma2, float(v))


class Kernel(enum.Enum):
    EXACT_EQ2 = "eq2"
    SUBORDINATION = "subordination"
    CAUCHY_LIMIT = "cauchy"
    CORE_ASYMPTOTIC = "core"
    TAIL_ASYMPTOTIC = "tail"
    BIVARIATE_CAUCHY = "bivariate"

    @property
    def needs_drift(self):
        return self in (Kernel.EXACT_EQ2, Kernel.SUBORDINATION, Kernel.TAIL_ASYMPTOTIC)

    @property
    def is_normalized(self):
        """True for kernels that integrate to one for every valid parameter set."""
        return self in (Kernel.SUBORDINATION, Kernel.CAUCHY_LIMIT, Kernel.BIVARIATE_CAUCHY)


class RegimeLabel(enum.Enum):
    CAUCHY_CORE = "CauchyCore"
    TRANSITION = "Transition"
    EXPONENTIAL_TAIL = "ExponentialTail"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RegimeThresholds:
    z_lo: float = 0.3
    z_hi: float = 3.0

    def __post_init__(self):
        if not 0 < self.z_lo < self.z_hi:
            raise DomainError("regime thresholds need 0 < z_lo < z_hi")


DEFAULT_THRESHOLDS = RegimeThresholds()


@dataclass(frozen=True)
class Regime:
    label: RegimeLabel
    z: float


def _require(params, kernel):
    if kernel is Kernel.BIVARIATE_CAUCHY:
        raise IncompatibleKernelError("the bivariate kernel is two-dimensional; use bivariate_cauchy_pdf")
    if kernel.needs_drift and params.v == 0:
        raise IncompatibleKernelError(f"kernel {kernel.value!r} requires v > 0")


def bessel_argument(params, n):
    """z(n) = (v / sigma2) * sqrt(n^2 + lambda^2)."""
    return params.v / params.sigma2 * np.hypot(n, params.lam)


def _log_eq2_prefactor(params, rho):
    v, lam, s2 = params.v, params.lam, params.sigma2
    return math.log(v * lam / (math.pi * s2)) - np.log(rho) + v * lam / s2


def log_pdf(params, kernel, n, thresholds=DEFAULT_THRESHOLDS):
    """Natural log of the noise density at lateral offset ``n`` (scalar or array).

    Everything is assembled in the log domain so far tails never underflow
    before the final exponentiation in :func:`pdf`.
    """
    _require(params, kernel)
    scalar = np.ndim(n) == 0
    n = np.asarray(n, dtype=float)
    if not np.all(np.isfinite(n)):
        raise DomainError("offsets must be finite")
    lam, s2, v = params.lam, params.sigma2, params.v
    rho = np.hypot(n, lam)

    if kernel is Kernel.CAUCHY_LIMIT:
        out = math.log(lam / math.pi) - 2.0 * np.log(rho)
    elif kernel is Kernel.CORE_ASYMPTOTIC:
        # K1(z) ~ 1/z substituted into the closed form, drift exponential kept.
        out = math.log(lam / math.pi) - 2.0 * np.log(rho) + v * (lam - rho) / s2
    elif kernel in (Kernel.EXACT_EQ2, Kernel.SUBORDINATION):
        z = v * rho / s2
        out = _log_eq2_prefactor(params, rho) + log_bessel_k1(z)
        if kernel is Kernel.EXACT_EQ2:
            out = out - z
    else:
        out = _log_tail_asymptotic(params, rho, thresholds)

    return float(out) if scalar else out


def _log_tail_asymptotic(params, rho, thresholds):
    # C * rho^(-3/2) * exp(-2 v rho / sigma2), C pinned by continuity with EXACT_EQ2 at z = z_hi.
    v, s2 = params.v, params.sigma2
    rho_hi = thresholds.z_hi * s2 / v
    z_hi = thresholds.z_hi
    log_exact_hi = _log_eq2_prefactor(params, rho_hi) + log_bessel_k1(z_hi) - z_hi
    log_c = log_exact_hi + 1.5 * math.log(rho_hi) + 2.0 * z_hi
    return log_c - 1.5 * np.log(rho) - 2.0 * v * rho / s2


def pdf(params, kernel, n, thresholds=DEFAULT_THRESHOLDS):
    return np.exp(log_pdf(params, kernel, n, thresholds))


def bivariate_cauchy_pdf(lam, n1, n2):
    """Zero-drift density on the 2D receiving plane, lambda / (2 pi (|n|^2 + lambda^2)^(3/2))."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    r2 = np.square(n1) + np.square(n2) + lam * lam
    return lam / (2.0 * math.pi * r2 ** 1.5)


def critical_scale(params):
    """Cutoff length sigma2 / v separating the Cauchy core from the exponential tail."""
    return params.n_c


def classify_regime(params, n, thresholds=DEFAULT_THRESHOLDS):
    if params.v == 0:
        raise ZeroDriftError("with zero drift the whole line is Cauchy core")
    z = float(bessel_argument(params, n))
    if z < thresholds.z_lo:
        label = RegimeLabel.CAUCHY_CORE
    elif z > thresholds.z_hi:
        label = RegimeLabel.EXPONENTIAL_TAIL
    else:
        label = RegimeLabel.TRANSITION
    return Regime(label, z)


def tail_decay_rate(params, kernel):
    """Exponential decay rate of the density tail.

    ``EXACT_EQ2`` carries exp(-z) twice (once inside K1, once explicitly) and
    decays at 2 v / sigma2; ``SUBORDINATION`` decays at v / sigma2.
    """
    if params.v == 0:
        raise ZeroDriftError("zero drift has an algebraic tail, not an exponential one")
    if kernel is Kernel.EXACT_EQ2:
        return 2.0 * params.v / params.sigma2
    if kernel is Kernel.SUBORDINATION:
        return params.v / params.sigma2
    raise IncompatibleKernelError(f"tail rate is defined for eq2 and subordination, not {kernel.value!r}")


def fit_tail_rate(n, log_f, prefactor_power=1.5, weights=None):
    """Least-squares exponential rate of a tail ``log f = c - p*ln|n| - rate*|n|``.

    The algebraic prefactor power ``p`` is held fixed (3/2 for both drifted
    kernels) so the returned rate is the coefficient of the linear term.
    Pass ``prefactor_power=0`` for a bare slope fit.
    """
    n = np.abs(np.asarray(n, dtype=float))
    y = np.asarray(log_f, dtype=float) + prefactor_power * np.log(n)
    slope = np.polynomial.polynomial.polyfit(n, y, 1, w=weights)[1]
    return -float(slope)
