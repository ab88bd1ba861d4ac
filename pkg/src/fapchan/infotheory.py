"""Information-theoretic quantities of the FAP channel with a peak-limited uniform input.

All results are in nats.  Mutual information uses I(X;Y) = h(Y) - h(N), with
the output density f_Y(y) = P(y - A < N < y + A) / (2A) read off a
:class:`~fapchan.quadrature.TabulatedCdf` of the noise.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DomainError, InfiniteVarianceError, QuadratureError, UnnormalizedError, ZeroDriftError
from .kernels import ChannelParams, Kernel
from .quadrature import (
    DEFAULT_CONFIG,
    TAIL_MASS_TARGET,
    build_cdf,
    integrate_panels,
    integrate_semi_infinite,
    quantile,
    require_converged,
)

__all__ = [
    "CapacityConfig",
    "CapacityPoint",
    "InterferencePoint",
    "ShapingLoss",
    "kernel_mass",
    "noise_entropy",
    "noise_variance",
    "mutual_information_uniform",
    "gaussian_capacity",
    "cauchy_capacity",
    "uniform_mi_bracket",
    "shaping_loss",
    "interference_probability",
    "bivariate_interference",
    "capacity_sweep",
    "interference_sweep",
]

# MI below this is treated as quadrature noise around zero; anything more negative is an error.
_MI_FLOOR = -1e-6


@dataclass(frozen=True)
class CapacityConfig:
    """Peak amplitude A of the uniform input X ~ U[-A, A]."""

    amplitude: float = 200.0

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise DomainError(f"amplitude must be positive, got {self.amplitude}")

    @property
    def signal_power(self):
        return self.amplitude ** 2 / 3.0


@dataclass(frozen=True)
class CapacityPoint:
    v: float
    mi_exact_nats: float
    c_gauss_nats: float
    c_cauchy_nats: float
    noise_variance: float
    n_c: float


@dataclass(frozen=True)
class InterferencePoint:
    v: float
    r: float
    p_int: float


class ShapingLoss(NamedTuple):
    asymptotic: float
    numeric: float


def _half_line(g, params, cfg, what):
    """Integral of ``g`` over [0, inf) with breakpoints at decades of lambda up to ~10 n_c."""
    lam = params.lam
    reach = 10.0 * params.n_c if params.v > 0 else 1e6 * lam
    reach = min(max(reach, 10.0 * lam), 1e8 * lam)
    edges = [0.0, lam]
    while edges[-1] < reach:
        edges.append(edges[-1] * 10.0)
    _, finite = integrate_panels(g, edges, cfg)
    tail = integrate_semi_infinite(g, edges[-1], cfg, scale=edges[-1])
    require_converged(finite, what)
    require_converged(tail, what + " (tail)")
    return finite.value + tail.value


def _check_density(params, kernel, allow_unnormalized):
    kernels.log_pdf(params, kernel, 0.0)
    if not kernel.is_normalized and not allow_unnormalized:
        raise UnnormalizedError(f"kernel {kernel.value!r} is not a normalized density")


def kernel_mass(params, kernel, cfg=DEFAULT_CONFIG):
    """Total integral of the kernel over the real line (1 for a proper density)."""
    if kernel is Kernel.CAUCHY_LIMIT:
        params = params.with_drift(0.0) if params.v else params
    return 2.0 * _half_line(lambda n: kernels.pdf(params, kernel, n), params, cfg, "normalization integral")


def noise_entropy(params, kernel, cfg=DEFAULT_CONFIG, allow_unnormalized=False):
    """Differential entropy h(N) = -int f ln f, in nats."""
    _check_density(params, kernel, allow_unnormalized)

    def g(n):
        lp = kernels.log_pdf(params, kernel, n)
        return -np.exp(lp) * lp

    return 2.0 * _half_line(g, params, cfg, "noise entropy")


def noise_variance(params, kernel, cfg=DEFAULT_CONFIG):
    """Second moment int n^2 f(n) dn of the (zero-mean) noise."""
    if kernel is Kernel.CAUCHY_LIMIT or params.v == 0:
        raise InfiniteVarianceError("the zero-drift Cauchy noise has infinite variance")
    kernels.log_pdf(params, kernel, 0.0)
    return 2.0 * _half_line(lambda n: n * n * kernels.pdf(params, kernel, n), params, cfg, "noise variance")


def _output_entropy(cdf, amplitude, n_cut, cfg):
    two_a = 2.0 * amplitude

    def g(y):
        fy = cdf.mass_between(y - amplitude, y + amplitude) / two_a
        out = np.zeros_like(fy)
        pos = fy > 0
        out[pos] = -fy[pos] * np.log(fy[pos])
        return out

    end = amplitude + n_cut
    edges = [0.0, 0.5 * amplitude, amplitude, 1.5 * amplitude, 2.0 * amplitude]
    while edges[-1] * 4.0 < end:
        edges.append(edges[-1] * 4.0)
    if end > edges[-1]:
        edges.append(end)
    _, res = integrate_panels(g, edges, cfg)
    return 2.0 * require_converged(res, "output entropy")


def mutual_information_uniform(params, kernel, cap, cfg=DEFAULT_CONFIG, cdf=None, allow_unnormalized=False):
    """I(X;Y) for X ~ U[-A, A] and additive noise drawn from ``kernel``.

    With ``allow_unnormalized`` the same formula is evaluated formally for an
    improper kernel (no renormalization is applied).
    """
    _check_density(params, kernel, allow_unnormalized)
    if cdf is None:
        cdf = build_cdf(params, kernel, cfg)
    if not allow_unnormalized:
        cdf.require_normalized()
    # Noise quantile at 1 - TAIL_MASS_TARGET bounds the output integration range.
    if cdf.is_normalized:
        n_cut = quantile(cdf, 1.0 - TAIL_MASS_TARGET)
    else:
        n_cut = cdf.n_max
    h_out = _output_entropy(cdf, cap.amplitude, n_cut, cfg)
    # Beyond A + n_cut the output density has converged to the noise density.
    start = cap.amplitude + n_cut

    def g(n):
        lp = kernels.log_pdf(params, kernel, n)
        return -np.exp(lp) * lp

    tail = integrate_semi_infinite(g, start, cfg, scale=start)
    h_out += 2.0 * require_converged(tail, "output entropy tail")
    mi = h_out - noise_entropy(params, kernel, cfg, allow_unnormalized)
    if not allow_unnormalized:
        if mi < _MI_FLOOR:
            raise QuadratureError(f"mutual information came out negative ({mi!r})")
        mi = max(mi, 0.0)
    return mi


def gaussian_capacity(cap, variance):
    """AWGN capacity 1/2 ln(1 + P_X / variance) with P_X = A^2 / 3."""
    if not variance > 0:
        raise DomainError(f"noise variance must be positive, got {variance}")
    if math.isinf(variance):
        return 0.0
    return 0.5 * math.log1p(cap.signal_power / variance)


def cauchy_capacity(cap, lam):
    """Zero-drift capacity ln(A / lambda); drift does not enter."""
    if not cap.amplitude > lam:
        raise DomainError(f"need A > lambda for a positive Cauchy capacity (A={cap.amplitude}, lambda={lam})")
    return math.log(cap.amplitude / lam)


def uniform_mi_bracket(cap, lam):
    """(ln(A / (2 pi lambda)), ln(A / lambda)): high-SNR uniform-input value and the Cauchy capacity."""
    return math.log(cap.amplitude / (2.0 * math.pi * lam)), cauchy_capacity(cap, lam)


def shaping_loss(cap, lam, mi_exact):
    return ShapingLoss(asymptotic=math.log(2.0 * math.pi), numeric=cauchy_capacity(cap, lam) - mi_exact)


def _cauchy_exceedance(lam, r):
    # 1 - (2/pi) arctan(r / lambda), written without cancellation at large r.
    return 2.0 / math.pi * math.atan2(lam, r)


def interference_probability(params, kernel, r, cfg=DEFAULT_CONFIG):
    """P(|N| > r), the chance a particle lands beyond a neighbour at separation r."""
    if not (math.isfinite(r) and r >= 0):
        raise DomainError(f"separation must be a finite r >= 0, got {r}")
    if kernel is Kernel.CAUCHY_LIMIT:
        return _cauchy_exceedance(params.lam, r)
    kernels.log_pdf(params, kernel, 0.0)
    res = integrate_semi_infinite(
        lambda n: kernels.pdf(params, kernel, n), r, cfg, scale=max(r, params.lam)
    )
    return 2.0 * require_converged(res, f"interference integral at r={r:g}")


def bivariate_interference(lam, r):
    """P(|N| > r) for the bivariate Cauchy core on the receiving plane: lambda / sqrt(lambda^2 + r^2)."""
    if not r >= 0:
        raise DomainError(f"separation must be nonnegative, got {r}")
    return lam / math.hypot(lam, r)


def _capacity_row(lam, sigma2, kernel, cap, v, cfg, allow_unnormalized):
    params = ChannelParams(lam, sigma2, v)
    variance = noise_variance(params, kernel, cfg)
    return CapacityPoint(
        v=float(v),
        mi_exact_nats=mutual_information_uniform(params, kernel, cap, cfg, allow_unnormalized=allow_unnormalized),
        c_gauss_nats=gaussian_capacity(cap, variance),
        c_cauchy_nats=cauchy_capacity(cap, lam),
        noise_variance=variance,
        n_c=params.n_c,
    )


def capacity_sweep(lam, sigma2, kernel, cap, v_grid, cfg=DEFAULT_CONFIG, workers=1, allow_unnormalized=False):
    """One :class:`CapacityPoint` per drift in ``v_grid``, in grid order."""
    v_grid = [float(v) for v in v_grid]
    if not v_grid:
        raise DomainError("empty drift grid")
    if any(v <= 0 for v in v_grid):
        raise ZeroDriftError("capacity sweep drifts must be strictly positive")
    if any(b <= a for a, b in zip(v_grid, v_grid[1:])):
        raise DomainError("drift grid must be strictly increasing")
    cauchy_capacity(cap, lam)

    def row(v):
        return _capacity_row(lam, sigma2, kernel, cap, v, cfg, allow_unnormalized)

    if workers == 1:
        return [row(v) for v in v_grid]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(row, v_grid))


def interference_sweep(lam, sigma2, kernel, r_grid, v_list, cfg=DEFAULT_CONFIG, include_zero_drift=True):
    """Rows (v, r, p_int) for every drift and separation.

    A drift of 0 (or ``include_zero_drift``) adds the Cauchy closed-form
    baseline, listed first.
    """
    r_grid = [float(r) for r in r_grid]
    if any(r < 0 for r in r_grid) or any(b <= a for a, b in zip(r_grid, r_grid[1:])):
        raise DomainError("separation grid must be nonnegative and strictly increasing")
    drifts = [float(v) for v in v_list]
    if any(v < 0 for v in drifts):
        raise DomainError("drifts must be nonnegative")
    drifted = [v for v in drifts if v > 0]
    rows = []
    if include_zero_drift or any(v == 0 for v in drifts):
        rows += [InterferencePoint(0.0, r, _cauchy_exceedance(lam, r)) for r in r_grid]
    for v in drifted:
        params = ChannelParams(lam, sigma2, v)
        rows += [InterferencePoint(v, r, interference_probability(params, kernel, r, cfg)) for r in r_grid]
    return rows
