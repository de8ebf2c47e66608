"""Density of additive semigroups H = sum N u_k + sum 2 pi Z w_l in R^n.

Three outcomes: a Kronecker certificate of density, a certified
obstruction, or Unknown with empirical coverage attached.

Integer relations are searched by exact LLL on values scaled to the
working precision. In p bits, k values admit spurious "relations" of
height about 2^(p/k), so the searched height is capped at
2^((p - 24)/k); searches at larger heights need higher-precision input
(mpmath numbers are accepted).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import scipy.linalg as sla
from scipy import ndimage

from .lattice import lll_reduce
from .matrix_core import DEFAULT_TOL

DENSE = "CertifiedDense"
NOT_DENSE = "CertifiedNotDense"
UNKNOWN = "Unknown"

COUNT_BOUND = "CountBound"
RANK_DEFICIENT = "RankDeficient"
LATTICE_CONFINED = "LatticeConfined"
EMPTY_INVERTIBLE = "EmptyInvertiblePart"
INDEX_DEFICIT = "IndexDeficit"

FLOAT_BITS = 53
_GUARD_BITS = 24
_SLACK_BITS = 8
MAX_HEIGHT = 2**63 - 1
MAX_COMBINATIONS = 5000
ENUMERATION_BUDGET = 10**8


@dataclass
class IntegerRelation:
    coefficients: list
    target_values: list
    residual: float
    searched_height: int = 0

    def to_dict(self):
        return {
            "coefficients": list(self.coefficients),
            "target_values": [float(v) for v in self.target_values],
            "residual": self.residual,
            "searched_height": self.searched_height,
        }


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            raise ValueError("values must be finite")
        sign, man, exp, _ = x._mpf_
        man = -int(man) if sign else int(man)
        return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


def working_precision(values):
    """Bits of precision carried by the inputs: mp.prec for mpmath numbers, else 53."""
    if any(isinstance(v, mpmath.mpf) for v in values):
        return int(mpmath.mp.prec)
    return FLOAT_BITS


def precision_height(k, prec):
    """Largest height at which a k-term relation search is meaningful in prec bits."""
    if k <= 1:
        return MAX_HEIGHT
    return max(1, int(2.0 ** ((prec - _GUARD_BITS) / k)))


def integer_relation(values, height, prec=None):
    """Small nonzero integer c with sum c_i v_i = 0 to working precision, or None.

    Searches up to min(height, precision_height); the searched height is
    recorded on the result.
    """
    height = int(height)
    if height >= MAX_HEIGHT:
        raise OverflowError(f"relation height {height} exceeds the 64-bit coefficient range")
    if height < 1:
        raise ValueError("height must be positive")
    vals = list(values)
    k = len(vals)
    if k == 0:
        return None
    for v in vals:
        if not mpmath.isfinite(v if isinstance(v, mpmath.mpf) else mpmath.mpf(float(v))):
            raise ValueError("values must be finite")
    prec = working_precision(vals) if prec is None else int(prec)
    eff = min(height, precision_height(k, prec))
    fr = [_to_fraction(v) for v in vals]
    top = max(abs(f) for f in fr)
    if top == 0:
        return IntegerRelation([1] + [0] * (k - 1), vals, 0.0, eff)
    weight = Fraction(2**prec) / top
    basis = [[int(i == j) for j in range(k)] + [round(weight * fr[i])] for i in range(k)]
    slack = Fraction(1, 2 ** (prec - _SLACK_BITS))
    for row in lll_reduce(basis):
        c = row[:k]
        if not any(c) or max(abs(x) for x in c) > eff:
            continue
        resid = abs(sum(ci * fi for ci, fi in zip(c, fr)))
        if resid <= slack * sum(abs(ci) * abs(fi) for ci, fi in zip(c, fr)):
            first = next(x for x in c if x)
            if first < 0:
                c = [-x for x in c]
            return IntegerRelation(c, vals, float(resid), eff)
    return None


def simultaneous_relation(a, height, prec=FLOAT_BITS):
    """Nonzero integer k (|k_i| <= height) with a @ k integral, or None.

    ``a`` is J x n. Returns (k, searched_height).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    J, n = a.shape
    eff = min(int(height), max(1, int(2.0 ** ((prec - _GUARD_BITS) * J / (n + J)))))
    top = max(1.0, float(np.max(np.abs(a))))
    shift = prec - math.ceil(math.log2(top))
    weight = 2**shift
    fr = [[_to_fraction(x) for x in row] for row in a]
    basis = []
    for i in range(n):
        basis.append([int(i == j) for j in range(n)] + [round(weight * fr[jj][i]) for jj in range(J)])
    for jj in range(J):
        basis.append([0] * n + [-weight if t == jj else 0 for t in range(J)])
    slack = Fraction(1, 2 ** (prec - _SLACK_BITS))
    for row in lll_reduce(basis):
        k = row[:n]
        if not any(k) or max(abs(x) for x in k) > eff:
            continue
        good = True
        for jj in range(J):
            val = sum(ki * fr[jj][i] for i, ki in enumerate(k))
            dist = abs(val - round(val))
            if dist > slack * (sum(abs(ki) * abs(fr[jj][i]) for i, ki in enumerate(k)) + 1):
                good = False
                break
        if good:
            return k, eff
    return None, eff


@dataclass
class DensityVerdict:
    status: str
    obstruction: str | None = None
    evidence: dict = field(default_factory=dict)
    locally_hypercyclic: bool | None = None
    hypercyclic: bool | None = None

    def to_dict(self):
        return {
            "status": self.status,
            "obstruction": self.obstruction,
            "locally_hypercyclic": self.locally_hypercyclic,
            "hypercyclic": self.hypercyclic,
            "evidence": self.evidence,
        }


def count_bound_check(p, s, n):
    """CountBound evidence when p + s <= n: H then lies in a Z-span of <= n vectors."""
    if p + s <= n:
        return {"obstruction": COUNT_BOUND, "p": p, "s": s, "n": n}
    return None


def _precision_after(cond):
    lost = math.ceil(math.log2(max(cond, 1.0)))
    return max(FLOAT_BITS - lost, _GUARD_BITS + 1)


def rank_and_lattice_check(H, tol=DEFAULT_TOL):
    gens = [np.asarray(u, float) for u in H.nat_generators + H.lattice_generators]
    n = H.n
    if not gens:
        return {"obstruction": RANK_DEFICIENT, "rank": 0, "n": n}
    g = np.column_stack(gens)
    sv = np.linalg.svd(g, compute_uv=False)
    rank = int(np.sum(sv > 1e-10 * sv[0])) if sv[0] > 0 else 0
    if rank < n:
        return {"obstruction": RANK_DEFICIENT, "rank": rank, "n": n}
    _, _, piv = sla.qr(g, pivoting=True, mode="economic")
    cols, rest = list(piv[:n]), list(piv[n:])
    s = g[:, cols]
    s_inv = np.linalg.inv(s)
    if not rest:
        q = s_inv[0]
        return {"obstruction": LATTICE_CONFINED, "covector": q.tolist(), "relation": [1] + [0] * (n - 1)}
    coords = s_inv @ g[:, rest]
    prec = _precision_after(np.linalg.cond(s))
    k, eff = simultaneous_relation(coords.T, tol.relation_height, prec)
    if k is None:
        return None
    q = np.asarray(k, dtype=float) @ s_inv
    return {
        "obstruction": LATTICE_CONFINED,
        "covector": q.tolist(),
        "relation": list(k),
        "searched_height": eff,
    }


def kronecker_certify(H, tol=DEFAULT_TOL):
    """Find coordinates in which H contains N^a x Z^b + N alpha with Kronecker alpha.

    Columns of S come from the generators (lattice generators may be
    negated freely); alpha = S^-1 u for a further N-generator u. Requires
    every alpha_i < 0 after sign flips and no integer relation among
    (1, alpha_1, ..., alpha_n).
    """
    n = H.n
    labelled = [(np.asarray(w, float), "lattice", i) for i, w in enumerate(H.lattice_generators)]
    labelled += [(np.asarray(u, float), "nat", i) for i, u in enumerate(H.nat_generators)]
    if len(labelled) < n + 1:
        return None
    tried = 0
    for combo in itertools.combinations(range(len(labelled)), n):
        tried += 1
        if tried > MAX_COMBINATIONS:
            break
        s = np.column_stack([labelled[i][0] for i in combo])
        cond = np.linalg.cond(s)
        if not np.isfinite(cond) or cond > 1e12:
            continue
        s_inv = np.linalg.inv(s)
        for j, (u, kind, _) in enumerate(labelled):
            if kind != "nat" or j in combo:
                continue
            alpha = s_inv @ u
            signs = np.ones(n)
            for pos, i in enumerate(combo):
                if labelled[i][1] == "lattice" and alpha[pos] > 0:
                    signs[pos] = -1.0
            alpha = alpha * signs
            thr = tol.structural_tol * max(1.0, float(np.max(np.abs(alpha))))
            if not np.all(alpha < -thr):
                continue
            prec = _precision_after(cond)
            rel = integer_relation([1.0] + alpha.tolist(), tol.relation_height, prec=prec)
            if rel is not None:
                continue
            return {
                "S": (s * signs).tolist(),
                "alpha": alpha.tolist(),
                "columns": [[labelled[i][1], labelled[i][2]] for i in combo],
                "alpha_source": ["nat", labelled[j][2]],
                "relation_height": tol.relation_height,
                "searched_height": min(tol.relation_height, precision_height(n + 1, prec)),
                "precision_bits": prec,
            }
    return None


def _enumerate(gens, lattice_flags, bound, box, budget, norm):
    """Partial sums with rigorous box-escape pruning.

    norm="l1" bounds the total word length sum |c_k| <= bound; norm="linf"
    bounds every coefficient separately.
    """
    n = gens[0].shape[0]
    x = np.zeros((1, n))
    used = np.zeros(1, dtype=np.int64)
    enumerated = 1
    partial = False
    for j, (g, lat) in enumerate(zip(gens, lattice_flags)):
        coeffs = np.arange(-bound if lat else 0, bound + 1)
        if x.shape[0] * coeffs.size > budget:
            partial = True
            x, used = x[: max(1, budget // coeffs.size)], used[: max(1, budget // coeffs.size)]
        x = (x[:, None, :] + coeffs[None, :, None] * g[None, None, :]).reshape(-1, n)
        used = (used[:, None] + np.abs(coeffs)[None, :]).reshape(-1)
        if norm == "l1":
            ok = used <= bound
            x, used = x[ok], used[ok]
        enumerated += x.shape[0]
        rest = list(zip(gens[j + 1:], lattice_flags[j + 1:]))
        if not rest:
            continue
        reach_up = np.array([np.maximum(np.abs(h), 0) if l2 else np.maximum(h, 0) for h, l2 in rest])
        reach_dn = np.array([np.abs(h) if l2 else np.maximum(-h, 0) for h, l2 in rest])
        if norm == "l1":
            rem = (bound - used)[:, None].astype(float)
            up = rem * reach_up.max(axis=0)
            down = rem * reach_dn.max(axis=0)
        else:
            up = bound * reach_up.sum(axis=0)
            down = bound * reach_dn.sum(axis=0)
        alive = np.all((x + up >= -box) & (x - down <= box), axis=1)
        x, used = x[alive], used[alive]
        if enumerated > budget:
            partial = True
    return x, enumerated, partial


def empirical_coverage(H, coeff_bound, box_halfwidth, cells_per_axis, budget=ENUMERATION_BUDGET,
                       norm="l1", return_points=False):
    """Enumerate bounded combinations of the generators and grid the box.

    Coverage is the fraction of the cells_per_axis^n cells of
    [-box, box]^n holding at least one point.
    """
    if norm not in ("l1", "linf"):
        raise ValueError(f"unknown coefficient norm {norm!r}")
    n = H.n
    gens = [np.asarray(u, float) for u in H.nat_generators] + [
        np.asarray(w, float) for w in H.lattice_generators
    ]
    flags = [False] * len(H.nat_generators) + [True] * len(H.lattice_generators)
    if gens:
        pts, enumerated, partial = _enumerate(gens, flags, int(coeff_bound), box_halfwidth, budget, norm)
    else:
        pts, enumerated, partial = np.zeros((1, n)), 1, False
    inside = pts[np.all(np.abs(pts) <= box_halfwidth, axis=1)]
    stats = grid_stats(inside, n, box_halfwidth, cells_per_axis)
    stats.update(
        {
            "coeff_bound": int(coeff_bound),
            "norm": norm,
            "points_enumerated": int(enumerated),
            "points_in_box": int(inside.shape[0]),
            "partial": partial,
        }
    )
    if return_points:
        return stats, inside
    return stats


def grid_stats(points, n, box, cells):
    total = cells**n
    if points.shape[0] == 0:
        return {
            "coverage": 0.0,
            "cells_hit": 0,
            "total_cells": total,
            "count_histogram": [],
            "empty_ball_radius": None,
            "largest_empty_cluster": total if n <= 3 else None,
        }
    idx = np.floor((points + box) / (2 * box) * cells).astype(np.int64)
    idx = np.clip(idx, 0, cells - 1)
    flat = np.ravel_multi_index(idx.T, (cells,) * n)
    hit, counts = np.unique(flat, return_counts=True)
    radius, largest = None, None
    if n <= 3:
        occ = np.zeros((cells,) * n, dtype=bool)
        occ.flat[hit] = True
        if not occ.all():
            radius = float(ndimage.distance_transform_edt(~occ).max() * 2 * box / cells)
            labels, count = ndimage.label(~occ)
            largest = int(np.bincount(labels.ravel())[1:].max()) if count else 0
        else:
            radius, largest = 0.0, 0
    return {
        "coverage": hit.size / total,
        "cells_hit": int(hit.size),
        "total_cells": total,
        "count_histogram": np.bincount(counts).tolist(),
        "empty_ball_radius": radius,
        "largest_empty_cluster": largest,
    }


def density_verdict(H, index_report=None, part=None, tol=DEFAULT_TOL, coverage=None):
    """Run obstructions, then the Kronecker certificate, then fall back to coverage.

    With an index report the hypercyclic answer also needs index = r;
    without one the verdict concerns density of H alone.
    """
    p, s, n = len(H.nat_generators), len(H.lattice_generators), H.n
    r = part.r if part is not None else (index_report.r if index_report is not None else 0)
    if p == 0 and index_report is not None:
        return DensityVerdict(NOT_DENSE, EMPTY_INVERTIBLE, {"p": 0}, False, False)
    ev = count_bound_check(p, s, n)
    if ev is None:
        ev = rank_and_lattice_check(H, tol)
    if ev is not None:
        return DensityVerdict(NOT_DENSE, ev["obstruction"], ev, False, False)
    cert = kronecker_certify(H, tol)
    if cert is not None:
        if index_report is not None and index_report.index < r:
            ev = {"index": index_report.index, "r": r, "kronecker": cert}
            return DensityVerdict(NOT_DENSE, INDEX_DEFICIT, ev, True, False)
        return DensityVerdict(DENSE, None, cert, True, True)
    cov = coverage or {}
    stats = empirical_coverage(
        H,
        cov.get("coeff_bound", 50),
        cov.get("box_halfwidth", 10 * math.pi),
        cov.get("cells_per_axis", 50 if n <= 2 else 20),
    ) if n <= 3 else {"skipped": "coverage grid limited to n <= 3"}
    return DensityVerdict(UNKNOWN, None, {"coverage": stats}, None, None)
