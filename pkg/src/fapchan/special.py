r"""Modified Bessel function of the second kind, order one.

Two-piece evaluation split at ``z = 2``:

* ``z <= 2``: the convergent ascending series

  .. math::
      K_1(z) = \frac{1}{z} + \ln\frac{z}{2} I_1(z)
               - \frac{z}{4}\sum_{k\ge0}\bigl[\psi(k+1)+\psi(k+2)\bigr]
                 \frac{(z^2/4)^k}{k!\,(k+1)!}

  truncated where the terms fall below double precision at ``z = 2``.
* ``z > 2``: a Chebyshev expansion of ``exp(z) * sqrt(z) * K1(z)`` in
  ``u = 4/z - 1``, which covers the whole half-line ``(2, inf)``.

All functions accept scalars or arrays and return the same shape.
"""

import math

import numpy as np

from .errors import DomainError

__all__ = ["bessel_k1", "bessel_k1_scaled", "log_bessel_k1", "BRANCH_POINT"]

BRANCH_POINT = 2.0

_EULER_GAMMA = 0.57721566490153286061
_SERIES_TERMS = 20

# (z^2/4)^k / (k! (k+1)!) weights and the digamma sums psi(k+1) + psi(k+2).
_I1_WEIGHTS = np.array(
    [1.0 / (math.factorial(k) * math.factorial(k + 1)) for k in range(_SERIES_TERMS)]
)
_harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, _SERIES_TERMS + 1))])
_PSI_SUMS = np.array(
    [(_harmonic[k] - _EULER_GAMMA) + (_harmonic[k + 1] - _EULER_GAMMA) for k in range(_SERIES_TERMS)]
)
_K1_SMALL_WEIGHTS = _PSI_SUMS * _I1_WEIGHTS
del _harmonic

# Generated by tools/gen_k1_coeffs.py (50-digit arithmetic, |c_j| > 1e-18 kept).
_K1_LARGE_CHEB = np.array([
    1.3603130952422213347,
    1.0392373657681723844e-1,
    -2.8578168596227793868e-3,
    1.9521551847135163111e-4,
    -1.93619797416608296e-5,
    2.4064849478372171171e-6,
    -3.5019606030878125421e-7,
    5.7410841254500492923e-8,
    -1.0345762465678097027e-8,
    2.0150497551970346161e-9,
    -4.1903547593419255842e-10,
    9.2183151876053141258e-11,
    -2.1299678384277910216e-11,
    5.1396396734823435404e-12,
    -1.2891739609498229352e-12,
    3.3484196660522431201e-13,
    -8.9767051820101460692e-14,
    2.4771544242195986813e-14,
    -7.0198370892147688513e-15,
    2.0387031662398608799e-15,
    -6.0570472706430178228e-16,
    1.8380935752430454256e-16,
    -5.6894628491936483742e-17,
    1.7940510478863572914e-17,
    -5.7567444820733024501e-18,
    1.8778651901623267398e-18,
])


def _check(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)) or np.any(z <= 0):
        raise DomainError("K1 is defined here only for finite z > 0")
    return z


def _horner(weights, x):
    acc = np.zeros_like(x)
    for w in weights[::-1]:
        acc = acc * x + w
    return acc


def _clenshaw(coeffs, u):
    b1 = np.zeros_like(u)
    b2 = np.zeros_like(u)
    for c in coeffs[:0:-1]:
        b1, b2 = 2.0 * u * b1 - b2 + c, b1
    return u * b1 - b2 + coeffs[0]


def _k1_small(z):
    q = 0.25 * z * z
    i1 = 0.5 * z * _horner(_I1_WEIGHTS, q)
    tail = 0.25 * z * _horner(_K1_SMALL_WEIGHTS, q)
    return 1.0 / z + np.log(0.5 * z) * i1 - tail


def _k1_large_sqrt_scaled(z):
    """exp(z) * sqrt(z) * K1(z) for z > 2."""
    return _clenshaw(_K1_LARGE_CHEB, 4.0 / z - 1.0)


def _unwrap(out, scalar):
    return float(out[0]) if scalar else out


def bessel_k1(z):
    """K1(z) for z > 0.

    Underflows to 0 once exp(-z) does (z beyond roughly 745); use
    :func:`bessel_k1_scaled` or :func:`log_bessel_k1` there.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_check(z))
    out = np.empty_like(z)
    small = z <= BRANCH_POINT
    out[small] = _k1_small(z[small])
    zl = z[~small]
    out[~small] = _k1_large_sqrt_scaled(zl) * np.exp(-zl) / np.sqrt(zl)
    return _unwrap(out, scalar)


def bessel_k1_scaled(z):
    """exp(z) * K1(z), finite for any finite z > 0."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_check(z))
    out = np.empty_like(z)
    small = z <= BRANCH_POINT
    zs = z[small]
    out[small] = _k1_small(zs) * np.exp(zs)
    zl = z[~small]
    out[~small] = _k1_large_sqrt_scaled(zl) / np.sqrt(zl)
    return _unwrap(out, scalar)


def log_bessel_k1(z):
    """ln K1(z), computed without forming K1 when it would underflow."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_check(z))
    out = np.empty_like(z)
    small = z <= BRANCH_POINT
    out[small] = np.log(_k1_small(z[small]))
    zl = z[~small]
    out[~small] = np.log(_k1_large_sqrt_scaled(zl)) - 0.5 * np.log(zl) - zl
    return _unwrap(out, scalar)
