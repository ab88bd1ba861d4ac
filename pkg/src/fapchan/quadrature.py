"""Adaptive Gauss-Kronrod quadrature and tabulated CDFs of the noise kernels.

Integrands are called with 1-D float arrays and must return arrays of the
same shape.  Refinement is vectorised: every pass evaluates all panels being
bisected in one call.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import kernels
from .errors import DomainError, QuadratureError, UnnormalizedError
from .kernels import DEFAULT_THRESHOLDS, Kernel

__all__ = [
    "QuadConfig",
    "QuadResult",
    "TabulatedCdf",
    "integrate",
    "integrate_panels",
    "integrate_semi_infinite",
    "require_converged",
    "build_cdf",
    "quantile",
    "TAIL_MASS_TARGET",
]

# 15-point Kronrod abscissae on [0, 1] (mirrored), its weights, and the
# weights of the embedded 7-point Gauss rule (Gauss nodes are the odd ones).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:14:2] = _WG[2::-1]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

TAIL_MASS_TARGET = 1e-9


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise DomainError("tolerances must be nonnegative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise DomainError("at least one of abs_tol, rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be positive")

    def tolerance(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_CONFIG = QuadConfig()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    subdivisions_used: int
    converged: bool


def require_converged(result, what="integral"):
    if not result.converged:
        raise QuadratureError(
            f"{what} did not converge: value={result.value!r}, "
            f"error estimate={result.error_estimate!r} after {result.subdivisions_used} subdivisions"
        )
    return result.value


def _gk15(f, a, b):
    """Kronrod estimate and error bound for each panel [a_i, b_i]."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if np.isnan(fx).any():
        raise QuadratureError("integrand returned NaN")
    kron = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    ahalf = np.abs(half)
    resabs = ahalf * (np.abs(fx) @ KRONROD_WEIGHTS)
    mean = 0.5 * (fx @ KRONROD_WEIGHTS)
    resasc = ahalf * (np.abs(fx - mean[:, None]) @ KRONROD_WEIGHTS)
    err = np.abs(kron - gauss)
    # Error scaling and roundoff floor as in QUADPACK's qk15.
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _TINY / (50.0 * _EPS), np.maximum(floor, err), err)
    return kron, err


def _refine(f, edges, cfg):
    """Adaptive refinement over the panels delimited by ``edges``.

    Returns per-input-panel values and errors, total subdivisions, and the
    convergence flag.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or not np.all(np.isfinite(edges)):
        raise DomainError("panel edges must be a finite 1-D array with at least two entries")
    if np.any(np.diff(edges) <= 0):
        raise DomainError("panel edges must be strictly increasing")
    n_panels = edges.size - 1
    a, b = edges[:-1].copy(), edges[1:].copy()
    owner = np.arange(n_panels)
    val, err = _gk15(f, a, b)
    splits = 0
    converged = False
    while True:
        total = float(val.sum())
        total_err = float(err.sum())
        tol = cfg.tolerance(total)
        if total_err <= tol:
            converged = True
            break
        if splits >= cfg.max_subdivisions:
            break
        # Panels too narrow to bisect in floating point cannot improve further.
        splittable = (b - a) > 64.0 * _EPS * np.maximum(np.abs(a), np.abs(b))
        cand = np.flatnonzero(splittable & (err > 0))
        if cand.size == 0:
            break
        order = cand[np.argsort(err[cand])[::-1]]
        cum = np.cumsum(err[order])
        excess = total_err - 0.5 * tol
        count = int(np.searchsorted(cum, 0.5 * excess)) + 1
        count = max(1, min(count, order.size, cfg.max_subdivisions - splits))
        pick = order[:count]
        splits += count
        mid = 0.5 * (a[pick] + b[pick])
        new_a = np.concatenate([a[pick], mid])
        new_b = np.concatenate([mid, b[pick]])
        new_owner = np.concatenate([owner[pick], owner[pick]])
        new_val, new_err = _gk15(f, new_a, new_b)
        keep = np.ones(a.size, dtype=bool)
        keep[pick] = False
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        owner = np.concatenate([owner[keep], new_owner])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])
    panel_val = np.bincount(owner, weights=val, minlength=n_panels)
    panel_err = np.bincount(owner, weights=err, minlength=n_panels)
    return panel_val, panel_err, splits, converged


def integrate(f, a, b, cfg=DEFAULT_CONFIG):
    """Integrate ``f`` over the finite interval [a, b]."""
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"need finite a < b, got [{a}, {b}]")
    val, err, splits, ok = _refine(f, [a, b], cfg)
    return QuadResult(float(val[0]), float(err[0]), splits, ok)


def integrate_panels(f, edges, cfg=DEFAULT_CONFIG):
    """Integrals of ``f`` over each consecutive panel of ``edges``.

    The tolerance applies to the sum over all panels.  Returns
    ``(values, QuadResult_for_the_sum)``.
    """
    val, err, splits, ok = _refine(f, edges, cfg)
    return val, QuadResult(float(val.sum()), float(err.sum()), splits, ok)


def integrate_semi_infinite(f, a, cfg=DEFAULT_CONFIG, scale=1.0):
    """Integrate ``f`` over [a, inf) via x = a + scale * t / (1 - t), t in [0, 1).

    ``scale`` sets where the bulk of the mass sits after mapping; 1 gives the
    plain rational substitution.
    """
    if not math.isfinite(a):
        raise DomainError("lower limit must be finite")
    if not scale > 0:
        raise DomainError("scale must be positive")

    def mapped(t):
        s = 1.0 - t
        return f(a + scale * t / s) * (scale / (s * s))

    return integrate(mapped, 0.0, 1.0, cfg)


def _monotone_slopes(x, y, d):
    """Limit Hermite slopes so every cubic piece stays monotone (Fritsch-Carlson)."""
    delta = np.diff(y) / np.diff(x)
    flat = delta == 0
    safe = np.where(flat, 1.0, delta)
    alpha = np.where(flat, 0.0, d[:-1] / safe)
    beta = np.where(flat, 0.0, d[1:] / safe)
    radius = np.hypot(alpha, beta)
    tau = np.where(radius > 3.0, 3.0 / np.maximum(radius, 3.0), 1.0)
    scale = np.minimum(np.concatenate([[1.0], tau]), np.concatenate([tau, [1.0]]))
    out = d * scale
    # Zero slopes that disagree in sign with a neighbouring secant or touch a flat piece.
    bad = np.zeros(d.size, dtype=bool)
    bad[:-1] |= flat | (alpha < 0)
    bad[1:] |= flat | (beta < 0)
    out[bad] = 0.0
    return out


@dataclass(frozen=True)
class TabulatedCdf:
    """Monotone tabulated CDF of a symmetric 1-D noise kernel.

    Internally the one-sided survival S(x) = P(N > x), x >= 0, is stored on a
    half grid so that far-tail probabilities keep full relative precision.
    ``grid``/``values`` expose the full symmetric table F on [-n_max, n_max].
    """

    params: kernels.ChannelParams
    kernel: Kernel
    half_grid: np.ndarray
    half_survival: np.ndarray
    total_mass: float
    tail_rate: float | None
    _spline: CubicHermiteSpline = field(repr=False, compare=False)

    @property
    def n_max(self):
        return float(self.half_grid[-1])

    @property
    def grid(self):
        return np.concatenate([-self.half_grid[:0:-1], self.half_grid])

    @property
    def values(self):
        s = self.half_survival
        return np.concatenate([s[:0:-1], self.total_mass - s])

    @property
    def is_normalized(self):
        return abs(self.total_mass - 1.0) <= 1e-6

    def require_normalized(self):
        if not self.is_normalized:
            raise UnnormalizedError(
                f"kernel {self.kernel.value!r} has total mass {self.total_mass:.9g}, not 1"
            )

    def _closure(self, x):
        s_max, n_max = self.half_survival[-1], self.n_max
        if self.tail_rate is None:
            return s_max * n_max / x
        return s_max * np.exp(-self.tail_rate * (x - n_max)) * (n_max / x) ** 1.5

    def survival(self, x):
        """One-sided tail P(N > x) for x >= 0 (array or scalar)."""
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0):
            raise DomainError("survival is tabulated for nonnegative offsets")
        out = np.empty_like(x)
        inside = x <= self.n_max
        out[inside] = self._spline(x[inside])
        if np.any(~inside):
            out[~inside] = self._closure(x[~inside])
        np.clip(out, 0.0, self.half_survival[0], out=out)
        return float(out[0]) if scalar else out

    def cdf(self, n):
        scalar = np.ndim(n) == 0
        n = np.atleast_1d(np.asarray(n, dtype=float))
        s = self.survival(np.abs(n))
        out = np.where(n < 0, s, self.total_mass - s)
        return float(out[0]) if scalar else out

    def two_sided_tail(self, r):
        """P(|N| > r), r >= 0."""
        return 2.0 * self.survival(r)

    def mass_between(self, lo, hi):
        """P(lo < N < hi), evaluated without cancellation when both ends share a sign."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        lo, hi = np.broadcast_arrays(lo, hi)
        s_lo = self.survival(np.abs(lo))
        s_hi = self.survival(np.abs(hi))
        out = np.where(
            lo >= 0,
            s_lo - s_hi,
            np.where(hi <= 0, s_hi - s_lo, self.total_mass - s_lo - s_hi),
        )
        return np.maximum(out, 0.0)


def _kernel_tail_rate(params, kernel):
    if kernel in (Kernel.EXACT_EQ2, Kernel.SUBORDINATION):
        return kernels.tail_decay_rate(params, kernel)
    if kernel is Kernel.TAIL_ASYMPTOTIC:
        return 2.0 * params.v / params.sigma2
    if kernel is Kernel.CORE_ASYMPTOTIC and params.v > 0:
        return params.v / params.sigma2
    return None


def _survival_integral(f, x, lam, cfg):
    res = integrate_semi_infinite(f, x, cfg, scale=max(x, lam))
    return require_converged(res, f"tail integral from {x:g}")


def build_cdf(params, kernel, cfg=DEFAULT_CONFIG, half_nodes=2048, thresholds=DEFAULT_THRESHOLDS):
    """Tabulate the CDF of ``kernel`` at ``params``.

    The table extends to the n_max at which the one-sided residual mass drops
    below TAIL_MASS_TARGET/2 (relative to the kernel's own mass).  Node
    spacing is linear on [0, lambda] and geometric beyond.
    """
    if kernel is Kernel.BIVARIATE_CAUCHY:
        raise DomainError("build_cdf tabulates one-dimensional kernels only")
    kernels.log_pdf(params, kernel, 0.0, thresholds)  # compatibility check
    if half_nodes < 16:
        raise DomainError("half_nodes must be at least 16")
    lam = params.lam

    def f(n):
        return kernels.pdf(params, kernel, n, thresholds)

    half_mass = _survival_integral(f, 0.0, lam, cfg)
    target = 0.5 * TAIL_MASS_TARGET * 2.0 * half_mass
    n_max = lam
    s_max = _survival_integral(f, n_max, lam, cfg)
    for _ in range(200):
        if s_max < target:
            break
        n_max *= 2.0
        s_max = _survival_integral(f, n_max, lam, cfg)
    else:  # pragma: no cover - every kernel here has a decaying tail
        raise QuadratureError("could not bracket the tail cut-off")

    n_lin = max(half_nodes // 8, 4)
    core = np.linspace(0.0, lam, n_lin)
    outer = np.geomspace(lam, n_max, half_nodes - n_lin + 1)[1:]
    half_grid = np.concatenate([core, outer])

    panels, res = integrate_panels(f, half_grid, QuadConfig(cfg.abs_tol * 1e-2, cfg.rel_tol * 1e-2, 20 * cfg.max_subdivisions))
    require_converged(res, "CDF panel integrals")
    survival = s_max + np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    # Mass from the direct tail integral and from the panels must agree.
    total_mass = 2.0 * survival[0]
    if abs(survival[0] - half_mass) > max(10 * cfg.tolerance(half_mass), 1e-9):
        raise QuadratureError(
            f"panel sum {survival[0]!r} disagrees with direct half-line integral {half_mass!r}"
        )
    slopes = _monotone_slopes(half_grid, survival, -f(half_grid))
    spline = CubicHermiteSpline(half_grid, survival, slopes)
    return TabulatedCdf(
        params=params,
        kernel=kernel,
        half_grid=half_grid,
        half_survival=survival,
        total_mass=float(total_mass),
        tail_rate=_kernel_tail_rate(params, kernel),
        _spline=spline,
    )


def _invert_survival(cdf, target):
    """x >= 0 with S(x) = target, by bisection on the interpolant and closure."""
    lo, hi = 0.0, cdf.n_max
    while cdf.survival(hi) > target:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if cdf.survival(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def quantile(cdf, p):
    """Inverse CDF by bisection; ``cdf`` must be normalized."""
    cdf.require_normalized()
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    half = 0.5 * cdf.total_mass
    if p == half:
        return 0.0
    if p < half:
        return -_invert_survival(cdf, p)
    return _invert_survival(cdf, cdf.total_mass - p)
