"""Exponential and principal logarithm on the K classes.

Every block is scalar-plus-nilpotent (over R for T-blocks, over C for
B-blocks via the 2x2 correspondence), so both maps are finite sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix_core import (
    DEFAULT_TOL,
    StructureError,
    b_to_complex,
    block_join,
    complex_to_b,
    is_in_K,
    k_deviation,
    max_norm,
)

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def _exp_scalar_nilpotent(mu, nil):
    """exp(mu I + N) for strictly lower triangular N (real or complex)."""
    m = nil.shape[0]
    term = np.eye(m, dtype=nil.dtype)
    acc = term.copy()
    for j in range(1, m):
        term = term @ nil / j
        acc = acc + term
    return np.exp(mu) * acc


def _log_scalar_nilpotent(mu, nil):
    """log(mu I + N) on the principal branch, via log(mu) I + log(I + N/mu)."""
    m = nil.shape[0]
    x = nil / mu
    term = np.eye(m, dtype=x.dtype)
    acc = np.zeros_like(term)
    for j in range(1, m):
        term = term @ x
        acc = acc + ((-1) ** (j + 1) / j) * term
    return np.log(mu) * np.eye(m, dtype=acc.dtype) + acc


def _t_parts(blk):
    mu = float(np.mean(np.diag(blk)))
    return mu, np.tril(blk, -1)


def _b_parts(blk):
    c = b_to_complex(blk)
    z = complex(np.mean(np.diag(c)))
    return z, np.tril(c, -1)


def _require_K(a, part, tol):
    if a.shape != (part.n, part.n) or not is_in_K(a, part, tol):
        dev = k_deviation(a, part) if a.shape == (part.n, part.n) else float("inf")
        raise StructureError(f"matrix is not in K{part} (deviation {dev:.3g})")


def exp_K(b, part, tol=DEFAULT_TOL):
    b = np.asarray(b, dtype=float)
    _require_K(b, part, tol)
    blocks = []
    for sl in part.t_slices():
        mu, nil = _t_parts(b[sl, sl])
        blocks.append(_exp_scalar_nilpotent(mu, nil))
    for sl in part.b_slices():
        z, nil = _b_parts(b[sl, sl])
        blocks.append(complex_to_b(_exp_scalar_nilpotent(z, nil)))
    return block_join(blocks, [])


@dataclass
class KLogResult:
    B: np.ndarray
    branch_generators: list
    partition: object

    def to_dict(self):
        return {
            "B": self.B.tolist(),
            "partition": self.partition.to_dict(),
        }


def branch_generator(part, l):
    """L_l: J_{m_l} in B-block slot l, zero elsewhere."""
    out = np.zeros((part.n, part.n))
    sl = part.b_slices()[l]
    m = part.b_blocks[l]
    out[sl, sl] = np.kron(np.eye(m), J2)
    return out


def principal_log_K(a, part, tol=DEFAULT_TOL):
    """Principal logarithm of a matrix in K+.

    T-blocks need a positive eigenvalue; B-blocks need an invertible
    diagonal 2x2 block. The rotation angle of each B-block diagonal lands
    in (-pi, pi].
    """
    a = np.asarray(a, dtype=float)
    _require_K(a, part, tol)
    scale = max(max_norm(a), 1e-300)
    blocks = []
    for k, sl in enumerate(part.t_slices()):
        mu, nil = _t_parts(a[sl, sl])
        if not mu > tol.det_tol * scale:
            raise StructureError(
                f"not in image of exp: T-block {k} has eigenvalue {mu:.6g} <= 0"
            )
        blocks.append(_log_scalar_nilpotent(mu, nil))
    for l, sl in enumerate(part.b_slices()):
        z, nil = _b_parts(a[sl, sl])
        rho = abs(z)
        if not rho > tol.det_tol * scale:
            raise StructureError(f"not in image of exp: B-block {l} has singular diagonal")
        # divide out the modulus first so huge or tiny blocks do not overflow
        unit = z / rho
        if unit.imag == 0.0 and unit.real < 0:
            unit = complex(-1.0, 0.0)
        logc = _log_scalar_nilpotent(unit, nil / rho) + math.log(rho) * np.eye(nil.shape[0])
        blocks.append(complex_to_b(logc))
    B = block_join(blocks, [])
    gens = [branch_generator(part, l) for l in range(part.s)]
    return KLogResult(B, gens, part)


def log_branch(res, k):
    k = list(k)
    if len(k) != len(res.branch_generators):
        raise ValueError(f"expected {len(res.branch_generators)} branch integers, got {len(k)}")
    out = res.B.copy()
    for kl, gen in zip(k, res.branch_generators):
        out = out + 2 * math.pi * int(kl) * gen
    return out
