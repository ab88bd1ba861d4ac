"""Exact first-passage sampling of the FAP noise and goodness-of-fit statistics.

The sampler never steps a Brownian path.  The first-passage time T across
the gap lambda is drawn directly (inverse Gaussian for v > 0, Levy for v = 0)
and the lateral coordinate, an independent driftless diffusion, is then
N = sqrt(sigma2 * T) * Z.

Random streams come from numpy's PCG64.  Samples are produced in fixed-size
chunks, chunk ``k`` seeded by ``SeedSequence([seed, k])``, so the stream is a
function of (seed, samples) alone, whatever the worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "McConfig",
    "SampleStats",
    "chunk_rng",
    "sample_first_passage_time",
    "sample_fap",
    "draw_fap",
    "ks_statistic",
    "summarize",
]

CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise DomainError(f"samples must be a positive integer, got {self.samples!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.workers < 1:
            raise DomainError("workers must be positive")


@dataclass(frozen=True)
class SampleStats:
    count: int
    mean: float
    variance: float
    median_abs: float
    quartiles: tuple
    radii: np.ndarray
    exceedances: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int

    def exceedance_fraction(self):
        return self.exceedances / self.count


def chunk_rng(seed, chunk_index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(chunk_index)])))


def sample_first_passage_time(params, rng, size=None):
    """First-passage time(s) of drifted Brownian motion across distance lambda.

    For v > 0 this is the inverse-Gaussian law with mean mu = lambda / v and
    shape lambda^2 / sigma2, drawn by the Michael-Schucany-Haas transform;
    for v = 0 it is the Levy law lambda^2 / (sigma2 Z^2).
    """
    lam, s2, v = params.lam, params.sigma2, params.v
    z = rng.standard_normal(size)
    if v == 0:
        return lam * lam / (s2 * z * z)
    mu = lam / v
    shape = lam * lam / s2
    a = mu * z * z / (2.0 * shape)
    # mu * (1 + a - sqrt(a^2 + 2a)), rewritten to avoid cancellation when a is large.
    x = mu / (1.0 + a + np.sqrt(a * (a + 2.0)))
    u = rng.random(size)
    return np.where(u * (mu + x) <= mu, x, mu * mu / x)


def sample_fap(params, rng, size=None):
    t = sample_first_passage_time(params, rng, size)
    return np.sqrt(params.sigma2 * t) * rng.standard_normal(size)


def _chunk(params, seed, index, size):
    return sample_fap(params, chunk_rng(seed, index), size)


def draw_fap(params, cfg):
    """All ``cfg.samples`` FAP draws, assembled in chunk order."""
    sizes = [CHUNK_SIZE] * (cfg.samples // CHUNK_SIZE)
    if cfg.samples % CHUNK_SIZE:
        sizes.append(cfg.samples % CHUNK_SIZE)
    jobs = list(enumerate(sizes))
    if cfg.workers == 1:
        parts = [_chunk(params, cfg.seed, k, m) for k, m in jobs]
    else:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(lambda job: _chunk(params, cfg.seed, *job), jobs))
    return np.concatenate(parts)


def ks_statistic(samples, cdf, renormalize=False):
    """Kolmogorov-Smirnov distance between the sample ECDF and a tabulated CDF.

    ``renormalize=True`` divides an improper CDF by its total mass first; the
    caller is responsible for reporting that it did so.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise DomainError("need at least one sample")
    if renormalize:
        f = cdf.cdf(x) / cdf.total_mass
    else:
        cdf.require_normalized()
        f = cdf.cdf(x)
    n = x.size
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def summarize(samples, bin_edges, radii):
    """Deterministic summary of a sample set.

    Samples outside the histogram range are tallied in ``underflow`` and
    ``overflow`` so that counts + underflow + overflow == count.
    """
    x = np.asarray(samples, dtype=float)
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be strictly increasing")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    ax = np.abs(x)
    counts, _ = np.histogram(x, edges)
    return SampleStats(
        count=int(x.size),
        mean=float(x.mean()),
        variance=float(x.var()),
        median_abs=float(np.median(ax)),
        quartiles=tuple(float(q) for q in np.quantile(x, [0.25, 0.5, 0.75])),
        radii=radii,
        exceedances=np.array([np.count_nonzero(ax > r) for r in radii], dtype=np.int64),
        bin_edges=edges,
        counts=counts.astype(np.int64),
        underflow=int(np.count_nonzero(x < edges[0])),
        overflow=int(np.count_nonzero(x > edges[-1])),
    )
