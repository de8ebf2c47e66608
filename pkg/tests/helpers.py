"""Generators of random structured test data and independent oracles."""

import math

import numpy as np

from hyperorbit.matrix_core import BlockPartition, complex_to_b


def random_K(rng, part, scale=1.0, angle_range=(-math.pi, math.pi), nil_scale=1.0):
    """Random element of K for ``part`` with B-block angles drawn from angle_range."""
    n = part.n
    out = np.zeros((n, n))
    for sl in part.t_slices():
        k = sl.stop - sl.start
        blk = np.tril(rng.normal(scale=nil_scale, size=(k, k)), -1)
        blk += rng.uniform(-scale, scale) * np.eye(k)
        out[sl, sl] = blk
    for sl in part.b_slices():
        m = (sl.stop - sl.start) // 2
        z = complex(rng.uniform(-scale, scale), rng.uniform(*angle_range))
        c = np.tril(rng.normal(scale=nil_scale, size=(m, m)) + 1j * rng.normal(scale=nil_scale, size=(m, m)), -1)
        c += z * np.eye(m)
        out[sl, sl] = complex_to_b(c)
    return out


def commuting_K_family(rng, part, p, invertible=True):
    """p commuting matrices in K: per block, a scalar plus a polynomial in one fixed nilpotent.

    Scalars are drawn so that different blocks have different joint spectra.
    """
    n = part.n
    nils_t = [np.tril(rng.normal(size=(k, k)), -1) for k in part.t_blocks]
    nils_b = [
        np.tril(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)), -1) for m in part.b_blocks
    ]
    fam = []
    for _ in range(p):
        a = np.zeros((n, n))
        for sl, nil in zip(part.t_slices(), nils_t):
            mu = rng.uniform(0.5, 3.0) * rng.choice([-1, 1])
            poly = mu * np.eye(nil.shape[0])
            power = np.eye(nil.shape[0])
            for _j in range(1, nil.shape[0]):
                power = power @ nil
                poly = poly + rng.normal() * power
            a[sl, sl] = poly
        for sl, nil in zip(part.b_slices(), nils_b):
            z = rng.uniform(0.5, 3.0) * np.exp(1j * rng.uniform(0.3, math.pi - 0.3) * rng.choice([-1, 1]))
            poly = z * np.eye(nil.shape[0], dtype=complex)
            power = np.eye(nil.shape[0], dtype=complex)
            for _j in range(1, nil.shape[0]):
                power = power @ nil
                poly = poly + complex(rng.normal(), rng.normal()) * power
            a[sl, sl] = complex_to_b(poly)
        fam.append(a)
    return fam


def random_conditioned(rng, n, cond_max):
    """Random matrix with condition number in [1, cond_max]."""
    u, _ = np.linalg.qr(rng.normal(size=(n, n)))
    v, _ = np.linalg.qr(rng.normal(size=(n, n)))
    c = math.exp(rng.uniform(0, math.log(cond_max)))
    s = np.exp(np.linspace(0, math.log(c), n))
    rng.shuffle(s)
    return u @ np.diag(s) @ v.T


def brute_force_index(sign_vectors, r, max_len=8):
    """Index by enumerating products of all words of length 1..max_len."""
    gens = [tuple(v) for v in sign_vectors]
    seen = set()
    layer = {tuple([1] * r)}
    for _ in range(max_len):
        layer = {tuple(a * b for a, b in zip(w, g)) for w in layer for g in gens}
        seen |= layer
    return sum(tuple(-1 if i == k else 1 for i in range(r)) in seen for k in range(r))


def partitions_up_to(nmax, nmin=1):
    from hyperorbit.matrix_core import partitions_of

    for n in range(nmin, nmax + 1):
        yield from partitions_of(n)


__all__ = [
    "BlockPartition",
    "brute_force_index",
    "commuting_K_family",
    "random_K",
    "random_conditioned",
]
