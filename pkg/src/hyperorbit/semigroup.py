"""Canonical vectors, invertible part, index and the additive semigroup g^2_{v0}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exp_log import exp_K, principal_log_K
from .matrix_core import (
    DEFAULT_TOL,
    HyperorbitError,
    StructureError,
    as_family,
    max_norm,
    project_to_K,
)

@dataclass
class CanonicalVectors:
    u0: np.ndarray
    v0: np.ndarray
    f: list
    t: list  # 1-based positions t_l with f^(l) = e_{t_l}


def canonical_vectors(part, P=None, tol=DEFAULT_TOL):
    n = part.n
    P = np.eye(n) if P is None else np.asarray(P, dtype=float)
    if P.shape != (n, n):
        raise ValueError(f"P has shape {P.shape}, partition needs {n}x{n}")
    if abs(np.linalg.det(P)) <= tol.det_tol * max(max_norm(P), 1e-300) ** n:
        raise HyperorbitError("P is singular")
    u0 = np.zeros(n)
    for sl in part.t_slices() + part.b_slices():
        u0[sl.start] = 1.0
    t, f = [], []
    for sl in part.b_slices():
        t.append(sl.start + 2)
        e = np.zeros(n)
        e[sl.start + 1] = 1.0
        f.append(e)
    return CanonicalVectors(u0, P @ u0, f, t)


def is_invertible(a, tol=DEFAULT_TOL):
    n = a.shape[0]
    return abs(np.linalg.det(a)) > tol.det_tol * max(max_norm(a), 1e-300) ** n


def invertible_part(family, tol=DEFAULT_TOL):
    """Generators lying in GL(n, R), plus warnings when nothing survives."""
    mats = as_family(family)
    kept = [a for a in mats if is_invertible(a, tol)]
    warnings = []
    if len(kept) < len(mats):
        dropped = [k for k, a in enumerate(mats) if not is_invertible(a, tol)]
        warnings.append(f"singular generators dropped: {dropped}")
    if not kept:
        warnings.append("invertible part is trivial: the semigroup is not hypercyclic")
    return kept, warnings


@dataclass
class IndexReport:
    sign_vectors: list
    achievable: list
    index: int
    r: int

    def to_dict(self):
        return {
            "sign_vectors": [list(v) for v in self.sign_vectors],
            "achievable": [list(v) for v in self.achievable],
            "index": self.index,
        }


def sign_closure(sign_vectors, r):
    """Subgroup of {+1,-1}^r generated by the given sign patterns.

    A sub-semigroup of a finite group is a subgroup, so closing under
    products reaches exactly the patterns realised by the semigroup.
    """
    gens = [tuple(int(x) for x in v) for v in sign_vectors]
    if not gens:
        return set()
    reached = set(gens)
    frontier = list(reached)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = tuple(x * y for x, y in zip(a, g))
                if c not in reached:
                    reached.add(c)
                    nxt.append(c)
        frontier = nxt
    return reached


def index_from_signs(sign_vectors, r):
    if r == 0:
        return 0, []
    ach = sign_closure(sign_vectors, r)
    count = 0
    for k in range(r):
        target = tuple(-1 if i == k else 1 for i in range(r))
        if target in ach:
            count += 1
    return count, sorted(ach, reverse=True)


def compute_index(transformed, part, tol=DEFAULT_TOL):
    mats = [np.asarray(a, dtype=float) for a in transformed]
    signs = []
    for k, a in enumerate(mats):
        scale = max(max_norm(a), 1e-300)
        vec = []
        for sl in part.t_slices():
            mu = float(np.mean(np.diag(a[sl, sl])))
            if abs(mu) <= tol.det_tol * scale:
                raise StructureError(
                    f"generator {k} has a zero T-block eigenvalue; drop singular generators first"
                )
            vec.append(1 if mu > 0 else -1)
        signs.append(tuple(vec))
    idx, ach = index_from_signs(signs, part.r)
    return IndexReport(signs, ach, idx, part.r)


@dataclass
class AdditiveSemigroup:
    nat_generators: list
    lattice_generators: list
    n: int
    logs: list = field(default_factory=list)
    exp_residuals: list = field(default_factory=list)

    def scaled(self, c):
        return AdditiveSemigroup(
            [c * u for u in self.nat_generators], [c * w for w in self.lattice_generators], self.n
        )

    def to_dict(self):
        return {
            "n": self.n,
            "nat_generators": [list(map(float, u)) for u in self.nat_generators],
            "lattice_generators": [list(map(float, w)) for w in self.lattice_generators],
        }

    @classmethod
    def from_dict(cls, data):
        n = int(data["n"])
        nat = [np.asarray(u, dtype=float) for u in data.get("nat_generators", [])]
        lat = [np.asarray(w, dtype=float) for w in data.get("lattice_generators", [])]
        for v in nat + lat:
            if v.shape != (n,):
                raise ValueError(f"generator of length {v.shape} in dimension {n}")
        return cls(nat, lat, n)


def compute_g2_v0(family, nf, tol=DEFAULT_TOL):
    """Additive semigroup sum N B_k v0 + sum 2 pi Z P f^(l) with A_k^2 = exp(B_k).

    Only invertible generators contribute. B_k is returned in original
    coordinates (``logs``), and exp(B_k) = A_k^2 is checked.
    """
    mats, _ = invertible_part(family, tol)
    part = nf.partition
    cv = canonical_vectors(part, nf.P, tol)
    nat, logs, resid = [], [], []
    for k, a in enumerate(mats):
        sq = nf.P_inv @ (a @ a) @ nf.P
        sq_k = project_to_K(sq, part)
        try:
            res = principal_log_K(sq_k, part, tol)
        except StructureError as exc:
            raise StructureError(f"square of generator {k}: {exc}") from exc
        b_orig = nf.P @ res.B @ nf.P_inv
        check = exp_K(res.B, part, tol)
        err = max_norm(check - sq) / max(1.0, max_norm(sq))
        logs.append(b_orig)
        resid.append(err)
        nat.append(nf.P @ (res.B @ cv.u0))
    lattice = [2 * math.pi * (nf.P @ f) for f in cv.f]
    return AdditiveSemigroup(nat, lattice, part.n, logs, resid)

