"""Regenerate the Chebyshev table used by ``fapchan.special`` for z > 2.

The fitted function is g(z) = exp(z) * sqrt(z) * K1(z) on [2, inf), expressed
in u = 4/z - 1 so that u covers (-1, 1].  Run with ``python tools/gen_k1_coeffs.py``
and paste the output over ``_K1_LARGE_CHEB``.
"""

import mpmath as mp

mp.mp.dps = 50
DEGREE = 48
CUTOFF = mp.mpf("1e-18")


def g(u):
    z = 4 / (u + 1)
    return mp.exp(z) * mp.sqrt(z) * mp.besselk(1, z)


def chebyshev_coefficients(func, degree):
    n = degree + 1
    nodes = [mp.cos(mp.pi * (k + mp.mpf(1) / 2) / n) for k in range(n)]
    values = [func(x) for x in nodes]
    coeffs = []
    for j in range(n):
        s = mp.fsum(values[k] * mp.cos(mp.pi * j * (k + mp.mpf(1) / 2) / n) for k in range(n))
        coeffs.append(2 * s / n)
    coeffs[0] /= 2
    return coeffs


if __name__ == "__main__":
    coeffs = chebyshev_coefficients(g, DEGREE)
    last = max(j for j, c in enumerate(coeffs) if abs(c) > CUTOFF)
    print("_K1_LARGE_CHEB = np.array([")
    for c in coeffs[: last + 1]:
        print(f"    {mp.nstr(c, 20, min_fixed=0, max_fixed=0)},")
    print("])")
