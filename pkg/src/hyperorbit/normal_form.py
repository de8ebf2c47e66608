"""Simultaneous reduction of a commuting family to K_{eta,r,s} form.

The space is split into the joint real generalized eigenspaces of the
family (one block per joint eigenvalue, or per conjugate pair of joint
eigenvalues). Inside each block a common flag of the nilpotent parts puts
every generator in lower triangular form; complex blocks are handled over
C and read back through (Re u, Im u) pairs, which yields the 2x2
[[a, b], [-b, a]] structure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .matrix_core import (
    DEFAULT_TOL,
    BlockPartition,
    HyperorbitError,
    as_family,
    first_noncommuting_pair,
    k_deviation,
    max_norm,
)

log = logging.getLogger(__name__)

N_SEEDS = 5
CLUSTER_GAP = 1e-6
# expected size of backward errors in the eigensolver input, relative
_PERTURBATION = 1e-12
_RANK_TOL = 1e-7


class NonCommutingError(HyperorbitError):
    def __init__(self, pair):
        super().__init__(f"generators {pair[0]} and {pair[1]} do not commute")
        self.pair = pair


class NormalFormError(HyperorbitError):
    pass


@dataclass
class NormalForm:
    P: np.ndarray
    P_inv: np.ndarray
    partition: BlockPartition
    transformed: list
    residual: float
    certified: bool = True
    seed: int = 0
    warnings: list = field(default_factory=list)

    @property
    def cond(self):
        return float(np.linalg.cond(self.P))

    def to_dict(self):
        return {
            "P": self.P.tolist(),
            "partition": self.partition.to_dict(),
            "residual": self.residual,
        }


def _cluster_threshold(size, scale):
    # a Jordan block of size k smears its eigenvalue over a radius of about
    # (perturbation)^(1/k); the gap threshold must grow with cluster size
    return scale * max(CLUSTER_GAP, 4.0 * _PERTURBATION ** (1.0 / size))


def cluster_eigenvalues(eigs, scale):
    """Group eigenvalues into clusters, folding conjugate pairs together.

    Returns a list of (member indices, centroid) where the centroid is a
    complex number with nonnegative imaginary part.
    """
    eigs = np.asarray(eigs, dtype=complex)
    pts = np.column_stack([eigs.real, np.abs(eigs.imag)])
    clusters = [[i] for i in range(len(eigs))]
    cents = [pts[i].copy() for i in range(len(eigs))]
    scale = max(scale, 1e-300)
    while len(clusters) > 1:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                dist = float(np.hypot(*(cents[a] - cents[b])))
                if best is None or dist < best[0]:
                    best = (dist, a, b)
        dist, a, b = best
        size = len(clusters[a]) + len(clusters[b])
        if dist > _cluster_threshold(size, scale):
            break
        merged = clusters[a] + clusters[b]
        cents[a] = np.mean(pts[merged], axis=0)
        clusters[a] = merged
        del clusters[b], cents[b]
    out = [(sorted(c), complex(cen[0], cen[1])) for c, cen in zip(clusters, cents)]
    return sorted(out, key=lambda t: (t[1].real, t[1].imag))


def _is_complex_cluster(centroid, size, scale):
    return centroid.imag > _cluster_threshold(size, scale)


def _split(m):
    """Split R^d into the real generalized eigenspaces of m.

    Returns a list of (V, W, centroid, size) with m V = V R, W V = I.
    """
    d = m.shape[0]
    scale = max_norm(m)
    eigs = np.linalg.eigvals(m)
    clusters = cluster_eigenvalues(eigs, scale)
    if len(clusters) == 1:
        return [(np.eye(d), np.eye(d), clusters[0][1], d)]
    target = clusters[0][1]
    others = [c for _, c in clusters[1:]]

    def pick(re, im):
        p = np.array([re, abs(im)])
        dt = np.hypot(*(p - [target.real, target.imag]))
        return all(dt < np.hypot(*(p - [o.real, o.imag])) for o in others)

    t, u, sdim = sla.schur(m, output="real", sort=pick)
    k = len(clusters[0][0])
    if sdim != k:
        raise NormalFormError(
            f"eigenvalue cluster near {target:.6g} could not be separated "
            f"(selected {sdim} of {k}); try a larger structural tolerance"
        )
    t11, t12, t22 = t[:k, :k], t[:k, k:], t[k:, k:]
    x = sla.solve_sylvester(t11, -t22, -t12)
    ut = u.T
    v1, w1 = u[:, :k], ut[:k] - x @ ut[k:]
    v2, w2 = u[:, :k] @ x + u[:, k:], ut[k:]
    out = [(v1, w1, target, k)]
    for vs, ws, cen, size in _split(t22):
        out.append((v2 @ vs, ws @ w2, cen, size))
    return out


def _generator_is_primary(r, scale):
    """True when r has a single eigenvalue cluster (real or conjugate pair)."""
    if r.shape[0] == 0:
        return True
    return len(cluster_eigenvalues(np.linalg.eigvals(r), max(scale, max_norm(r)))) == 1


def _flag_basis(nils, scale):
    """Basis in which the commuting nilpotent matrices are strictly lower triangular.

    Built from the chain of common kernels K_1 = cap ker N,
    K_{i+1} = {v : N v in K_i}; the deepest layer goes last.
    """
    d = nils[0].shape[0] if nils else 0
    dtype = complex if any(np.iscomplexobj(x) for x in nils) else float
    if d == 0:
        return np.zeros((0, 0), dtype), True
    thresh = _RANK_TOL * max(scale, 1e-300)
    layers = []
    basis = np.zeros((d, 0), dtype)
    ok = True
    while basis.shape[1] < d:
        proj = np.eye(d, dtype=dtype) - basis @ basis.conj().T
        stack = np.vstack([proj @ x for x in nils]) if nils else np.zeros((1, d), dtype)
        _, sv, vh = np.linalg.svd(stack)
        sv = np.concatenate([sv, np.zeros(d - len(sv))])
        null = vh.conj().T[:, sv <= thresh]
        new = proj @ null
        if new.shape[1]:
            q, s, _ = np.linalg.svd(new, full_matrices=False)
            new = q[:, s > 1e-6]
        else:
            new = np.zeros((d, 0), dtype)
        if new.shape[1] == 0:
            ok = False
            q, _ = np.linalg.qr(np.hstack([basis, np.eye(d, dtype=dtype)]))
            new = q[:, basis.shape[1]:d]
        layers.append(new)
        basis = np.hstack([basis, new])
    return np.hstack(layers[::-1]), ok


def _sign_normalize(v):
    i = int(np.argmax(np.abs(v)))
    return v if v[i] >= 0 else -v


def _build_block(r_list, scale, force_complex):
    """Inner basis F of one primary subspace; returns (F, kind, ok)."""
    d = r_list[0].shape[0]
    if not force_complex:
        nils = [r - (np.trace(r) / d) * np.eye(d) for r in r_list]
        f, ok = _flag_basis(nils, scale)
        cols = [_sign_normalize(f[:, j] / np.linalg.norm(f[:, j])) for j in range(d)]
        return np.column_stack(cols), "T", ok
    if d % 2:
        raise NormalFormError("complex eigenspace of odd real dimension")
    m = d // 2
    # split over C by the operator with the most pronounced imaginary part
    best = max(
        r_list,
        key=lambda r: np.max(np.abs(np.linalg.eigvals(r).imag)) / max(max_norm(r), 1e-300),
    )
    _, u, sdim = sla.schur(best.astype(complex), output="complex", sort=lambda z: z.imag > 0)
    if sdim != m:
        raise NormalFormError("could not separate a conjugate pair of eigenvalue clusters")
    u1 = u[:, :m]
    cs = [u1.conj().T @ r @ u1 for r in r_list]
    nils = [c - (np.trace(c) / m) * np.eye(m) for c in cs]
    g, ok = _flag_basis(nils, scale)
    cols = []
    for j in range(m):
        vec = u1 @ g[:, j]
        i = int(np.argmax(np.abs(vec)))
        vec = vec * (abs(vec[i]) / vec[i])
        vec = vec / np.linalg.norm(vec)
        cols += [vec.real, vec.imag]
    return np.column_stack(cols), "B", ok


def _shifted(a, tol):
    n = a.shape[0]
    scale = max_norm(a)
    if abs(np.linalg.det(a)) > tol.det_tol * max(scale, 1e-300) ** n:
        return a
    # the infinity norm bounds the spectral radius, so this shift is never an eigenvalue
    return a - (np.linalg.norm(a, np.inf) + 1.0) * np.eye(n)


def _primary_decomposition(mats, shifted, seed):
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(1, 98, size=len(shifted))
    z = sum(c * a / max(max_norm(a), 1e-300) for c, a in zip(coeffs, shifted))
    pieces = _split(z)
    clean = True
    for v, w, _, _ in pieces:
        for a in mats:
            if not _generator_is_primary(w @ a @ v, max_norm(a)):
                clean = False
                break
        if not clean:
            break
    return z, pieces, clean


def _refine(pieces, mats, depth=0):
    """Split pieces further by individual generators until each is primary."""
    out = []
    for v, w, cen, size in pieces:
        for a in mats:
            r = w @ a @ v
            if not _generator_is_primary(r, max_norm(a)):
                if depth > 2 * len(mats) + 2:
                    out.append((v, w, cen, size))
                    break
                sub = [(v @ vs, ws @ w, cen, sz) for vs, ws, _, sz in _split(r)]
                out.extend(_refine(sub, mats, depth + 1))
                break
        else:
            out.append((v, w, cen, size))
    return out


def compute_normal_form(family, tol=DEFAULT_TOL, seed=0):
    mats = as_family(family)
    if not mats:
        raise NormalFormError("empty family")
    pair = first_noncommuting_pair(mats, tol)
    if pair is not None:
        raise NonCommutingError(pair)
    shifted = [_shifted(a, tol) for a in mats]

    used_seed = seed
    for attempt in range(N_SEEDS):
        used_seed = seed + attempt
        z, pieces, clean = _primary_decomposition(mats, shifted, used_seed)
        if clean:
            break
    warnings = []
    if not clean:
        log.info("generic element failed to separate joint eigenvalues; refining by generator")
        pieces = _refine(pieces, mats)

    blocks = []
    for v, w, _, size in pieces:
        rs = [w @ a @ v for a in mats]
        zr = w @ z @ v
        zeig = np.linalg.eigvals(zr)
        scale = max(max_norm(r) for r in rs)
        is_complex = any(
            _is_complex_cluster(
                cluster_eigenvalues(np.linalg.eigvals(x), max(max_norm(x), 1e-300))[0][1],
                size,
                max(max_norm(x), 1e-300),
            )
            for x in rs + [zr]
        )
        f, kind, ok = _build_block(rs, scale, is_complex)
        if not ok:
            warnings.append(f"generators are not simultaneously triangularizable on a {size}-dim block")
        key_eig = zeig[np.argmax(zeig.imag)] if kind == "B" else complex(np.mean(zeig.real))
        blocks.append((kind, size, v @ f, key_eig))

    t_list = sorted((b for b in blocks if b[0] == "T"), key=lambda b: (-b[1], b[3].real))
    b_list = sorted((b for b in blocks if b[0] == "B"), key=lambda b: (-b[1], b[3].real, b[3].imag))
    part = BlockPartition(tuple(b[1] for b in t_list), tuple(b[1] // 2 for b in b_list))
    P = np.hstack([b[2] for b in t_list + b_list])
    P_inv = np.linalg.inv(P)
    transformed = [P_inv @ a @ P for a in mats]
    residual = _residual(transformed, part)
    certified = not warnings and residual <= max(1e-6, tol.structural_tol)
    if not certified:
        warnings.append(f"normal form residual {residual:.3g} exceeds tolerance")
    return NormalForm(P, P_inv, part, transformed, residual, certified, used_seed, warnings)


def _residual(transformed, part):
    return max(k_deviation(t, part) / max(1.0, max_norm(t)) for t in transformed)


def verify_normal_form(family, nf, tol=DEFAULT_TOL):
    mats = as_family(family)
    P = np.asarray(nf.P, dtype=float)
    if P.shape != (nf.partition.n, nf.partition.n):
        raise NormalFormError("P does not match the partition dimension")
    if abs(np.linalg.det(P)) <= tol.det_tol * max(max_norm(P), 1e-300) ** P.shape[0]:
        raise NormalFormError("P is singular")
    P_inv = np.linalg.inv(P)
    return _residual([P_inv @ a @ P for a in mats], nf.partition)


def identity_normal_form(family, part):
    """NormalForm with P = I for a family already claimed to be in K(part)."""
    mats = as_family(family)
    eye = np.eye(part.n)
    return NormalForm(eye, eye.copy(), part, [a.copy() for a in mats], _residual(mats, part))
