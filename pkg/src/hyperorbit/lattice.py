"""Exact integer LLL reduction.

All arithmetic is on Python ints (integral Gram-Schmidt in the style of
Cohen, Algorithm 2.6.7), so the reduction never loses precision no matter
how large the scaled entries get.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["lll_reduce"]


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis, delta=Fraction(99, 100)):
    """Return an LLL-reduced copy of ``basis`` (a list of integer rows).

    The rows must be linearly independent. ``delta`` is the Lovasz
    constant, 1/4 < delta <= 1.
    """
    b = [[int(x) for x in row] for row in basis]
    n = len(b)
    if n <= 1:
        return b
    delta = Fraction(delta)
    p, q = delta.numerator, delta.denominator

    # d[i] = Gram determinant of the first i vectors; lam[k][j] = d[j+1] * mu_kj
    d = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]
    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("lattice basis is linearly dependent")

    def gram_schmidt_row(k):
        for j in range(k + 1):
            u = _dot(b[k], b[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise ValueError("lattice basis is linearly dependent")
                d[k + 1] = u

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            # nearest integer to lam/d, exact
            num, den = lam[k][l], d[l + 1]
            r = (2 * num + den) // (2 * den)
            bl = b[l]
            b[k] = [x - r * y for x, y in zip(b[k], bl)]
            lam[k][l] -= r * den
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        big = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (big * t + lm * lam[i][k]) // d[k + 1]
        d[k] = big

    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gram_schmidt_row(k)
        red(k, k - 1)
        lm = lam[k][k - 1]
        if q * d[k + 1] * d[k - 1] < p * d[k] * d[k] - q * lm * lm:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b
