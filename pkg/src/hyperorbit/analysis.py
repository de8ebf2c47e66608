"""End-to-end hypercyclicity analysis of a commuting matrix family."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .density import EMPTY_INVERTIBLE, NOT_DENSE, DensityVerdict, density_verdict
from .matrix_core import DEFAULT_TOL, as_family, first_noncommuting_pair
from .normal_form import NonCommutingError, compute_normal_form
from .semigroup import (
    AdditiveSemigroup,
    compute_g2_v0,
    compute_index,
    invertible_part,
)

SCHEMA_VERSION = "1.0"


def family_digest(family):
    """sha256 over the canonical JSON form of the matrices."""
    mats = [np.asarray(a, dtype=float).tolist() for a in family]
    blob = json.dumps(mats, separators=(",", ":"), sort_keys=True)
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class AnalysisReport:
    input_digest: str
    n: int
    partition: object = None
    index: int | None = None
    r: int | None = None
    locally_hypercyclic: object = None
    hypercyclic: object = None
    verdict: DensityVerdict | None = None
    g2_v0: AdditiveSemigroup | None = None
    normal_form: object = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        nf = self.normal_form
        return {
            "schema_version": SCHEMA_VERSION,
            "input_digest": self.input_digest,
            "n": self.n,
            "partition": self.partition.to_dict() if self.partition is not None else None,
            "index": self.index,
            "r": self.r,
            "locally_hypercyclic": _tri(self.locally_hypercyclic),
            "hypercyclic": _tri(self.hypercyclic),
            "verdict": self.verdict.to_dict() if self.verdict is not None else None,
            "g2_v0": self.g2_v0.to_dict() if self.g2_v0 is not None else None,
            "normal_form": nf.to_dict() if nf is not None else None,
            "diagnostics": self.diagnostics,
        }


def _tri(x):
    return "unknown" if x is None else bool(x)


def analyze_family(family, tol=DEFAULT_TOL, seed=0, coverage=None, references=None):
    """commute check, invertible part, normal form, index, g^2_{v0}, verdict.

    ``references`` maps a label to (family, logs): when the input matches a
    reference family, A_k^2 is compared against the reference logs and the
    mismatch is reported under diagnostics.
    """
    mats = as_family(family)
    if not mats:
        raise ValueError("family has no generators")
    n = mats[0].shape[0]
    report = AnalysisReport(family_digest(mats), n)
    pair = first_noncommuting_pair(mats, tol)
    if pair is not None:
        raise NonCommutingError(pair)
    diag = report.diagnostics
    diag["warnings"] = []
    if references:
        diag["reference_checks"] = _reference_checks(mats, references)

    kept, warns = invertible_part(mats, tol)
    diag["warnings"].extend(warns)
    if not kept:
        report.verdict = DensityVerdict(NOT_DENSE, EMPTY_INVERTIBLE, {"p": 0}, False, False)
        report.locally_hypercyclic = False
        report.hypercyclic = False
        return report

    nf = compute_normal_form(kept, tol, seed)
    diag["warnings"].extend(nf.warnings)
    diag["normal_form_residual"] = nf.residual
    diag["normal_form_certified"] = nf.certified
    report.normal_form = nf
    report.partition = nf.partition
    report.r = nf.partition.r

    idx = compute_index(nf.transformed, nf.partition, tol)
    report.index = idx.index
    diag["sign_vectors"] = [list(v) for v in idx.sign_vectors]

    H = compute_g2_v0(kept, nf, tol)
    report.g2_v0 = H
    diag["exp_log_residuals"] = [float(x) for x in H.exp_residuals]

    verdict = density_verdict(H, idx, nf.partition, tol, coverage)
    report.verdict = verdict
    report.locally_hypercyclic = verdict.locally_hypercyclic
    report.hypercyclic = verdict.hypercyclic
    if not nf.certified and verdict.status != NOT_DENSE:
        # an uncertified normal form cannot back a positive claim
        if report.hypercyclic:
            report.hypercyclic = None
        if report.locally_hypercyclic:
            report.locally_hypercyclic = None
        diag["warnings"].append("normal form not certified: verdict downgraded")
    return report


def _reference_checks(mats, references):
    from .exp_log import exp_K
    from .matrix_core import max_norm

    out = []
    for label, (ref_family, ref_logs, part) in references.items():
        if len(ref_family) != len(mats) or any(
            r.shape != a.shape or max_norm(r - a) > 1e-12 * max(1.0, max_norm(r))
            for r, a in zip(ref_family, mats)
        ):
            continue
        for k, (a, b) in enumerate(zip(mats, ref_logs)):
            diff = a @ a - exp_K(b, part)
            i, j = np.unravel_index(np.argmax(np.abs(diff)), diff.shape)
            out.append(
                {
                    "reference": label,
                    "generator": k,
                    "square_vs_exp_mismatch": float(np.abs(diff).max()),
                    "worst_entry": [int(i), int(j)],
                    "consistent": bool(np.abs(diff).max() <= 1e-10 * max(1.0, max_norm(a @ a))),
                }
            )
    return out
