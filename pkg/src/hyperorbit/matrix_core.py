"""Dense matrix helpers and structural predicates for the K_{eta,r,s} class.

A matrix is in K for a partition (t_blocks; b_blocks) when it is block
diagonal with

* T-blocks: lower triangular with a constant diagonal, and
* B-blocks: lower block triangular in 2x2 blocks of the form
  [[a, b], [-b, a]] with a constant diagonal 2x2 block.

T-blocks come first, B-blocks after. All tolerances are relative to the
max-abs-entry norm of the operand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 32


class HyperorbitError(Exception):
    """Base class for domain errors."""


class DimensionError(HyperorbitError):
    pass


class StructureError(HyperorbitError):
    """Raised when a matrix is not in the expected K-structure."""

    def __init__(self, message, entry=None):
        super().__init__(message)
        self.entry = entry


@dataclass(frozen=True)
class ToleranceConfig:
    structural_tol: float = 1e-9
    det_tol: float = 1e-12
    relation_height: int = 10**6

    def __post_init__(self):
        if self.structural_tol < 0 or self.det_tol < 0 or self.relation_height < 1:
            raise ValueError("tolerances must be nonnegative and relation_height positive")


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class BlockPartition:
    """Sizes of the T-blocks (n_1..n_r) and B-blocks (m_1..m_s)."""

    t_blocks: tuple = ()
    b_blocks: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "t_blocks", tuple(int(x) for x in self.t_blocks))
        object.__setattr__(self, "b_blocks", tuple(int(x) for x in self.b_blocks))
        if any(x < 1 for x in self.t_blocks + self.b_blocks):
            raise ValueError("block sizes must be positive")
        if self.n == 0:
            raise ValueError("empty partition")

    @property
    def r(self):
        return len(self.t_blocks)

    @property
    def s(self):
        return len(self.b_blocks)

    @property
    def n(self):
        return sum(self.t_blocks) + 2 * sum(self.b_blocks)

    def t_slices(self):
        out, start = [], 0
        for size in self.t_blocks:
            out.append(slice(start, start + size))
            start += size
        return out

    def b_slices(self):
        out, start = [], sum(self.t_blocks)
        for size in self.b_blocks:
            out.append(slice(start, start + 2 * size))
            start += 2 * size
        return out

    def to_dict(self):
        return {"t_blocks": list(self.t_blocks), "b_blocks": list(self.b_blocks)}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data.get("t_blocks", ())), tuple(data.get("b_blocks", ())))

    def __str__(self):
        t = ",".join(map(str, self.t_blocks))
        b = ",".join(map(str, self.b_blocks))
        return f"({t};{b})"


def partitions_of(n):
    """Every BlockPartition of dimension n (ordered block-size tuples)."""

    def compositions(total):
        if total == 0:
            yield ()
            return
        for first in range(1, total + 1):
            for rest in compositions(total - first):
                yield (first,) + rest

    for twice_b in range(0, n + 1, 2):
        for t in compositions(n - twice_b):
            for b in compositions(twice_b // 2):
                yield BlockPartition(t, b)


@dataclass(frozen=True)
class SBlock:
    """The 2x2 matrix [[alpha, beta], [-beta, alpha]]."""

    alpha: float
    beta: float

    def matrix(self):
        return np.array([[self.alpha, self.beta], [-self.beta, self.alpha]])

    def to_complex(self):
        return sblock_to_complex(self.alpha, self.beta)


# [[a, b], [-b, a]] acts on R^2 as multiplication by z = a - i b: it is the
# rotation by arg(z) scaled by |z|. J2 = [[0, -1], [1, 0]] corresponds to i.
def sblock_to_complex(alpha, beta):
    return complex(alpha, -beta)


def complex_to_sblock(z):
    return z.real, -z.imag


def b_to_complex(block):
    """Map a 2m x 2m lower-block-triangular B-block to an m x m complex matrix."""
    m = block.shape[0] // 2
    a = 0.5 * (block[0::2, 0::2] + block[1::2, 1::2])
    b = 0.5 * (block[0::2, 1::2] - block[1::2, 0::2])
    return a - 1j * b if m else np.zeros((0, 0), complex)


def complex_to_b(cmat):
    m = cmat.shape[0]
    out = np.zeros((2 * m, 2 * m))
    a, b = cmat.real, -cmat.imag
    out[0::2, 0::2] = a
    out[1::2, 1::2] = a
    out[0::2, 1::2] = b
    out[1::2, 0::2] = -b
    return out


def max_norm(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_matrix(a, name="matrix"):
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} is not square: shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionError(f"{name} has dimension {m.shape[0]} > {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_family(family):
    mats = [as_matrix(a, f"generator {k}") for k, a in enumerate(family)]
    if mats:
        n = mats[0].shape[0]
        for k, m in enumerate(mats):
            if m.shape[0] != n:
                raise DimensionError(
                    f"generator {k} has dimension {m.shape[0]}, generator 0 has {n}"
                )
    return mats


def commutator_residual(a, b):
    """Relative commutator size ||AB - BA|| / (1 + ||A|| ||B||), max-abs norm."""
    c = a @ b - b @ a
    return max_norm(c) / (1.0 + max_norm(a) * max_norm(b))


def commute_check(family, tol=DEFAULT_TOL):
    mats = family if isinstance(family, list) else list(family)
    n0 = None
    for k, m in enumerate(mats):
        m = np.asarray(m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"generator {k} is not square")
        if n0 is None:
            n0 = m.shape[0]
        elif m.shape[0] != n0:
            raise DimensionError(f"generators 0 and {k} have dimensions {n0} and {m.shape[0]}")
    return first_noncommuting_pair(mats, tol) is None


def first_noncommuting_pair(mats, tol=DEFAULT_TOL):
    for i, j in itertools.combinations(range(len(mats)), 2):
        if commutator_residual(np.asarray(mats[i]), np.asarray(mats[j])) > tol.structural_tol:
            return i, j
    return None


def project_to_K(a, part):
    """Nearest K-structured matrix in the entrywise sense (averaging diagonals)."""
    a = np.asarray(a, dtype=float)
    out = np.zeros_like(a)
    for sl in part.t_slices():
        blk = np.tril(a[sl, sl])
        np.fill_diagonal(blk, np.mean(np.diag(a[sl, sl])))
        out[sl, sl] = blk
    for sl in part.b_slices():
        c = b_to_complex(a[sl, sl])
        c = np.tril(c)
        np.fill_diagonal(c, np.mean(np.diag(c)))
        out[sl, sl] = complex_to_b(c)
    return out


def k_deviation(a, part):
    """Max-abs distance from ``a`` to its K-projection."""
    a = np.asarray(a, dtype=float)
    if a.shape != (part.n, part.n):
        raise DimensionError(f"matrix shape {a.shape} does not match partition of n={part.n}")
    return max_norm(a - project_to_K(a, part))


def is_in_K(a, part, tol=DEFAULT_TOL):
    a = np.asarray(a, dtype=float)
    if a.shape != (part.n, part.n):
        return False
    return k_deviation(a, part) <= tol.structural_tol * max(1.0, max_norm(a))


def _first_violation(a, part, thresh):
    """Locate the first entry that breaks K-structure, or None."""
    n = part.n
    owner = np.full(n, -1)
    for idx, sl in enumerate(part.t_slices() + part.b_slices()):
        owner[sl] = idx
    for i in range(n):
        for j in range(n):
            if owner[i] != owner[j] and abs(a[i, j]) > thresh:
                return (i, j), "outside the diagonal blocks"
    for sl in part.t_slices():
        blk = a[sl, sl]
        for i in range(blk.shape[0]):
            for j in range(i + 1, blk.shape[0]):
                if abs(blk[i, j]) > thresh:
                    return (sl.start + i, sl.start + j), "above the diagonal of a T-block"
            if abs(blk[i, i] - blk[0, 0]) > thresh:
                return (sl.start + i, sl.start + i), "non-constant T-block diagonal"
    for sl in part.b_slices():
        blk = a[sl, sl]
        m = blk.shape[0] // 2
        for bi in range(m):
            for bj in range(m):
                sub = blk[2 * bi:2 * bi + 2, 2 * bj:2 * bj + 2]
                pos = (sl.start + 2 * bi, sl.start + 2 * bj)
                if bj > bi and max_norm(sub) > thresh:
                    return pos, "above the block diagonal of a B-block"
                if abs(sub[0, 0] - sub[1, 1]) > thresh or abs(sub[0, 1] + sub[1, 0]) > thresh:
                    return pos, "2x2 block not of the form [[a, b], [-b, a]]"
                if bi == bj and max_norm(sub - blk[0:2, 0:2]) > thresh:
                    return pos, "non-constant B-block diagonal"
    return None


@dataclass
class TBlockInfo:
    matrix: np.ndarray
    eigenvalue: float


@dataclass
class BBlockInfo:
    matrix: np.ndarray
    diagonal: SBlock

    @property
    def eigenvalues(self):
        z = self.diagonal.to_complex()
        return z, z.conjugate()


def block_split(a, part, tol=DEFAULT_TOL):
    """Split a K-structured matrix into its T- and B-blocks.

    Raises StructureError naming the first offending entry (0-based) if
    ``a`` is not in K within tolerance.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (part.n, part.n):
        raise DimensionError(f"matrix shape {a.shape} does not match partition of n={part.n}")
    thresh = tol.structural_tol * max(1.0, max_norm(a))
    bad = _first_violation(a, part, thresh)
    if bad is not None:
        (i, j), why = bad
        raise StructureError(f"entry ({i}, {j}) {why}", entry=(i, j))
    ts = [TBlockInfo(a[sl, sl].copy(), float(np.mean(np.diag(a[sl, sl])))) for sl in part.t_slices()]
    bs = []
    for sl in part.b_slices():
        blk = a[sl, sl].copy()
        bs.append(BBlockInfo(blk, SBlock(float(blk[0, 0]), float(blk[0, 1]))))
    return ts, bs


def block_join(t_blocks, b_blocks):
    mats = [np.asarray(getattr(b, "matrix", b), dtype=float) for b in list(t_blocks) + list(b_blocks)]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    start = 0
    for m in mats:
        k = m.shape[0]
        out[start:start + k, start:start + k] = m
        start += k
    return out


class BudgetExceeded(HyperorbitError):
    """An enumeration would exceed its work budget."""
