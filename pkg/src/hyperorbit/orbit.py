"""Sampling the orbit {A v0 : A in G} of a commuting family.

Commuting generators reduce words to exponent tuples, so the orbit up to
a given exponent is a p-dimensional grid of products A_1^a_1 ... A_p^a_p v0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .density import grid_stats
from .matrix_core import DEFAULT_TOL, BudgetExceeded, as_family, first_noncommuting_pair
from .normal_form import NonCommutingError

ORBIT_BUDGET = 2 * 10**7


@dataclass
class OrbitSample:
    points: np.ndarray
    exponents: np.ndarray
    words_tried: int
    overflow_pruned: int
    box_halfwidth: float
    escape_pruned: int = 0
    n: int = field(default=0)

    def __post_init__(self):
        if not self.n:
            self.n = self.points.shape[1] if self.points.ndim == 2 else 0

    def __len__(self):
        return self.points.shape[0]

    def to_dict(self):
        return {
            "n": self.n,
            "count": len(self),
            "words_tried": self.words_tried,
            "escape_pruned": self.escape_pruned,
            "overflow_pruned": self.overflow_pruned,
            "box_halfwidth": self.box_halfwidth,
        }


def _powers(a, max_exponent):
    """A^0..A^max_exponent; entries that overflow become nan."""
    n = a.shape[0]
    out = np.empty((max_exponent + 1, n, n))
    out[0] = np.eye(n)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_exponent + 1):
            out[k] = out[k - 1] @ a
    bad = ~np.all(np.isfinite(out), axis=(1, 2))
    out[bad] = np.nan
    return out


def _min_singular(powers):
    """Smallest singular value over all finite powers (0 if any power is nonfinite)."""
    lo = math.inf
    for m in powers:
        if not np.all(np.isfinite(m)):
            continue
        lo = min(lo, float(np.linalg.svd(m, compute_uv=False)[-1]))
    return lo if math.isfinite(lo) else 0.0


def enumerate_orbit(family, v0, max_exponent, box_halfwidth, include_identity=True,
                    tol=DEFAULT_TOL, budget=ORBIT_BUDGET):
    """Points of the orbit inside [-box, box]^n over exponents 0..max_exponent.

    A partial product x is dropped once |x| times the smallest singular
    value any remaining factor can have already exceeds the box diagonal,
    so pruning never loses an in-box point. Products that overflow are
    dropped and counted. Points come in lexicographic exponent order,
    exact duplicates removed.
    """
    mats = as_family(family)
    if not mats:
        raise ValueError("family has no generators")
    pair = first_noncommuting_pair(mats, tol)
    if pair is not None:
        raise NonCommutingError(pair)
    n = mats[0].shape[0]
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (n,):
        raise ValueError(f"v0 has shape {v0.shape}, expected ({n},)")
    if max_exponent < 0:
        raise ValueError("max_exponent must be nonnegative")
    E = int(max_exponent) + 1
    p = len(mats)
    pows = [_powers(a, E - 1) for a in mats]
    shrink = [_min_singular(pw) for pw in pows]
    # tail[j] bounds from below the stretch of any product of factors j..p-1
    tail = [1.0] * (p + 1)
    for j in range(p - 1, -1, -1):
        tail[j] = tail[j + 1] * shrink[j]
    limit = math.sqrt(n) * box_halfwidth

    x = v0[None, :]
    ex = np.zeros((1, 0), dtype=np.int64)
    escaped = overflow = 0
    for j in range(p):
        rows = x.shape[0] * E
        if rows > budget:
            raise BudgetExceeded(f"orbit enumeration needs {rows} partial products (budget {budget})")
        with np.errstate(over="ignore", invalid="ignore"):
            x = np.einsum("eij,rj->rei", pows[j], x).reshape(-1, n)
        ex = np.hstack([np.repeat(ex, E, axis=0), np.tile(np.arange(E), ex.shape[0])[:, None]])
        remaining = E ** (p - j - 1)
        finite = np.all(np.isfinite(x), axis=1)
        overflow += int((~finite).sum()) * remaining
        x, ex = x[finite], ex[finite]
        with np.errstate(over="ignore", invalid="ignore"):
            far = np.linalg.norm(x, axis=1) * tail[j + 1] > limit
        escaped += int(far.sum()) * remaining
        x, ex = x[~far], ex[~far]
    words = x.shape[0]
    if not include_identity:
        keep = np.any(ex != 0, axis=1)
        x, ex = x[keep], ex[keep]
    inside = np.all(np.abs(x) <= box_halfwidth, axis=1)
    x, ex = x[inside], ex[inside]
    if x.shape[0]:
        _, first = np.unique(x, axis=0, return_index=True)
        first = np.sort(first)
        x, ex = x[first], ex[first]
    return OrbitSample(x, ex, words, overflow, float(box_halfwidth), escaped, n)


def coverage_report(sample, cells_per_axis):
    """Grid coverage of the sample over its box (n <= 3)."""
    if sample.n > 3:
        raise ValueError("grid coverage is limited to n <= 3")
    return grid_stats(sample.points.reshape(-1, sample.n), sample.n, sample.box_halfwidth, cells_per_axis)


def emit_points(points, path, n=None):
    """Write points as CSV (header x1..xn, 17 significant digits)."""
    pts = points.points if isinstance(points, OrbitSample) else np.asarray(points, dtype=float)
    if n is None:
        n = points.n if isinstance(points, OrbitSample) else (pts.shape[1] if pts.ndim == 2 else 0)
    pts = pts.reshape(-1, n) if n else pts
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{i + 1}" for i in range(n)])
            for row in pts:
                w.writerow([format(float(v), ".17g") for v in row])
    except OSError as exc:
        raise OSError(f"cannot write points to {path}: {exc.strerror or exc}") from exc
