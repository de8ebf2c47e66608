"""Explicit hypercyclic families with the minimal number n - s + 1 of generators.

Recipe for a partition with s B-blocks:

1. alpha = (-sqrt(p_1), ..., -sqrt(p_n)) over distinct primes, checked for
   integer relations at high precision;
2. S sends e_k to 2 pi f^(k) (k <= s) and the remaining e_k to the unused
   standard basis vectors, so H = sum N u_j + sum 2 pi Z f^(l) is S applied
   to a Kronecker-form semigroup;
3. each u_j is realised as B_j u0 for B_j in K with a single nonzero
   column below the diagonal per block (these nilpotents multiply to 0,
   so all B_j commute);
4. A_j = exp(B_j / 2), with the j-th T-block negated for j <= r so the
   index reaches r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .density import DENSE, integer_relation
from .exp_log import exp_K
from .matrix_core import (
    DEFAULT_TOL,
    BlockPartition,
    HyperorbitError,
    commutator_residual,
    complex_to_b,
    is_in_K,
    max_norm,
)
from .semigroup import canonical_vectors, compute_index, is_invertible

_CHECK_TOL = 1e-9


class ConstructionError(HyperorbitError):
    """A self-check of the construction failed; this indicates a bug."""


def _primes():
    found = []
    k = 2
    while True:
        if all(k % p for p in found if p * p <= k):
            found.append(k)
            yield k
        k += 1


def choose_alpha(n, height=DEFAULT_TOL.relation_height):
    """Negative square roots of primes with no integer relation among (1, alpha) up to height."""
    if n < 1:
        raise ValueError("n must be at least 1")
    height = int(height)
    chosen = []
    tried = 0
    primes = _primes()
    while len(chosen) < n:
        if tried >= 2 * n:
            raise ConstructionError(f"no relation-free alpha after {tried} candidates")
        p = next(primes)
        tried += 1
        cand = chosen + [p]
        k = len(cand) + 1
        bits = 32 + math.ceil(k * math.log2(max(height, 2)))
        with mpmath.workprec(bits):
            vals = [mpmath.mpf(1)] + [-mpmath.sqrt(q) for q in cand]
            rel = integer_relation(vals, height)
        if rel is None:
            chosen.append(p)
    return np.array([-math.sqrt(p) for p in chosen])


def build_dense_vectors(n, s, part, alpha):
    """Basis matrix S and the n - s + 1 vectors u_j.

    u_k = S e_{s+k} for k <= n - s and the last one is S alpha.
    """
    if part.n != n or part.s != s:
        raise ValueError(f"partition {part} does not have n={n}, s={s}")
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (n,):
        raise ValueError(f"alpha must have length {n}")
    cv = canonical_vectors(part)
    lattice_rows = [t - 1 for t in cv.t]
    rest = [i for i in range(n) if i not in lattice_rows]
    S = np.zeros((n, n))
    for k, f in enumerate(cv.f):
        S[:, k] = 2 * math.pi * f
    for k, i in enumerate(rest):
        S[i, s + k] = 1.0
    u = [S[:, s + k].copy() for k in range(n - s)]
    u.append(S @ alpha)
    return S, u


def log_for_vector(u, part):
    """B in K with B u0 = u: each block is x I + (first column of u's slice)."""
    n = part.n
    B = np.zeros((n, n))
    for sl in part.t_slices():
        y = u[sl]
        blk = y[0] * np.eye(y.size)
        blk[1:, 0] = y[1:]
        B[sl, sl] = blk
    for sl in part.b_slices():
        y = u[sl]
        # the 2x2 block with first column (y, y') corresponds to y + i y'
        z = y[0::2] + 1j * y[1::2]
        c = z[0] * np.eye(z.size, dtype=complex)
        c[1:, 0] = z[1:]
        B[sl, sl] = complex_to_b(c)
    return B


@dataclass
class ConstructionRecipe:
    partition: BlockPartition
    alpha: np.ndarray
    S: np.ndarray
    u: list
    B: list
    A: list
    height: int
    checks: dict

    def to_dict(self):
        return {
            "partition": self.partition.to_dict(),
            "alpha": self.alpha.tolist(),
            "S": self.S.tolist(),
            "u": [x.tolist() for x in self.u],
            "B": [b.tolist() for b in self.B],
            "relation_height": self.height,
            "checks": self.checks,
        }


def build_generators(part, height=DEFAULT_TOL.relation_height, tol=DEFAULT_TOL, verify=True):
    """Emit n - s + 1 commuting generators in K* whose semigroup is hypercyclic."""
    n, r, s = part.n, part.r, part.s
    alpha = choose_alpha(n, height)
    S, u = build_dense_vectors(n, s, part, alpha)
    u0 = canonical_vectors(part).u0
    Bs, As = [], []
    for j, uj in enumerate(u):
        B = log_for_vector(uj, part)
        if not np.array_equal(B @ u0, uj):
            raise ConstructionError(f"B_{j} u0 != u_{j}")
        A = exp_K(0.5 * B, part)
        if j < r:
            sl = part.t_slices()[j]
            A[sl, sl] = -A[sl, sl]
        Bs.append(B)
        As.append(A)
    recipe = ConstructionRecipe(part, alpha, S, u, Bs, As, int(height), {})
    if verify:
        recipe.checks = verify_recipe(recipe, tol)
    return recipe


def verify_recipe(recipe, tol=DEFAULT_TOL):
    """Run every self-check; raise ConstructionError naming the first failure."""
    from .analysis import analyze_family

    part, As, Bs = recipe.partition, recipe.A, recipe.B
    comm = max(
        (commutator_residual(a, b) for i, a in enumerate(As) for b in As[i + 1:]),
        default=0.0,
    )
    if comm > _CHECK_TOL:
        raise ConstructionError(f"commutativity check failed: residual {comm:.3g}")
    for j, a in enumerate(As):
        if not is_in_K(a, part, tol) or not is_invertible(a, tol):
            raise ConstructionError(f"A_{j} is not an invertible element of K{part}")
    sq = 0.0
    for a, b in zip(As, Bs):
        e = exp_K(b, part)
        sq = max(sq, max_norm(a @ a - e) / max(1.0, max_norm(e)))
    if sq > _CHECK_TOL:
        raise ConstructionError(f"A_j^2 = exp(B_j) check failed: residual {sq:.3g}")
    idx = compute_index(As, part, tol).index
    if idx != part.r:
        raise ConstructionError(f"index check failed: index {idx}, r = {part.r}")
    report = analyze_family(As, tol)
    if report.verdict.status != DENSE or report.hypercyclic is not True:
        raise ConstructionError(
            f"pipeline check failed: verdict {report.verdict.status} ({report.verdict.obstruction})"
        )
    return {
        "commutator_residual": comm,
        "square_exp_residual": sq,
        "index": idx,
        "verdict": report.verdict.status,
        "pipeline_partition": report.partition.to_dict(),
    }


def reference_example(variant="corrected"):
    """The three-generator family on R^2 with B-logs 2 pi I, 2 pi E21 and the alpha generator.

    variant="printed" returns the second generator with the sign of its
    off-diagonal entry flipped; its square is then not exp of the intended log.
    """
    pi = math.pi
    a1 = np.diag([math.exp(pi), math.exp(pi)])
    off = pi if variant == "printed" else -pi
    if variant not in ("corrected", "printed"):
        raise ValueError(f"unknown variant {variant!r}")
    a2 = np.array([[-1.0, 0.0], [off, -1.0]])
    a3 = math.exp(-pi * math.sqrt(2)) * np.array([[1.0, 0.0], [-pi * math.sqrt(3), 1.0]])
    return [a1, a2, a3]


def reference_logs():
    """Intended logs of the squared generators of ``reference_example``."""
    pi = math.pi
    return [
        np.diag([2 * pi, 2 * pi]),
        np.array([[0.0, 0.0], [2 * pi, 0.0]]),
        np.array([[-2 * pi * math.sqrt(2), 0.0], [-2 * pi * math.sqrt(3), -2 * pi * math.sqrt(2)]]),
    ]


def reference_checks_table():
    part = BlockPartition((2,), ())
    logs = reference_logs()
    return {
        v: (reference_example(v), logs, part) for v in ("corrected", "printed")
    }
