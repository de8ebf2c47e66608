"""Acceptance criteria 1-10. Each check prints one PASS/FAIL line.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import json
import math
import os
import subprocess
import sys
import time

import mpmath
import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from helpers import brute_force_index, commuting_K_family, random_conditioned, random_K  # noqa: E402

from hyperorbit.analysis import analyze_family  # noqa: E402
from hyperorbit.constructor import (  # noqa: E402
    build_generators,
    reference_checks_table,
    reference_example,
    reference_logs,
)
from hyperorbit.density import (  # noqa: E402
    COUNT_BOUND,
    DENSE,
    NOT_DENSE,
    empirical_coverage,
    integer_relation,
)
from hyperorbit.exp_log import exp_K, principal_log_K  # noqa: E402
from hyperorbit.matrix_core import (  # noqa: E402
    BlockPartition,
    commutator_residual,
    is_in_K,
    max_norm,
    partitions_of,
)
from hyperorbit.normal_form import compute_normal_form  # noqa: E402
from hyperorbit.semigroup import AdditiveSemigroup, compute_index, index_from_signs, is_invertible  # noqa: E402

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

SQ2, SQ3 = math.sqrt(2), math.sqrt(3)


def _record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def check_1():
    fam = reference_example("corrected")
    t0 = time.perf_counter()
    rep = analyze_family(fam)
    elapsed = time.perf_counter() - t0
    want = [2 * math.pi * np.array(v) for v in ([1, 0], [0, 1], [-SQ2, -SQ3])]
    got = rep.g2_v0.nat_generators
    gen_err = max(float(np.max(np.abs(g - w))) for g, w in zip(got, want)) if len(got) == 3 else math.inf
    ok = (
        rep.partition == BlockPartition((2,), ())
        and rep.index == 1
        and not rep.g2_v0.lattice_generators
        and gen_err <= 1e-10
        and rep.verdict.status == DENSE
        and rep.hypercyclic is True
        and elapsed < 1.0
    )
    return _record(
        1, ok,
        f"partition {rep.partition}, index {rep.index}, g2 error {gen_err:.2e}, "
        f"verdict {rep.verdict.status}, hypercyclic {rep.hypercyclic}, {elapsed:.3f}s",
    )


def check_2():
    part = BlockPartition((2,), ())
    b2 = reference_logs()[1]
    printed = reference_example("printed")[1]
    corrected = reference_example("corrected")[1]
    # direct multiplication oracle, independent of exp_K: B2 is nilpotent
    exp_b2 = np.eye(2) + b2
    diff_p = printed @ printed - exp_b2
    diff_c = corrected @ corrected - exp_b2
    worst = np.unravel_index(np.argmax(np.abs(diff_p)), diff_p.shape)
    mis_p, mis_c = float(np.abs(diff_p).max()), float(np.abs(diff_c).max())
    agree = abs(max_norm(printed @ printed - exp_K(b2, part)) - mis_p) < 1e-12
    rep = analyze_family(reference_example("printed"), references=reference_checks_table())
    flagged = [c for c in rep.diagnostics["reference_checks"] if not c["consistent"]]
    ok = (
        abs(mis_p - 4 * math.pi) <= 1e-12
        and worst == (1, 0)
        and mis_c <= 1e-10
        and agree
        and len(flagged) == 1
        and flagged[0]["generator"] == 1
        and abs(flagged[0]["square_vs_exp_mismatch"] - 4 * math.pi) <= 1e-12
    )
    return _record(
        2, ok,
        f"printed mismatch {mis_p:.12f} (4pi = {4 * math.pi:.12f}) at entry (2,1); "
        f"corrected mismatch {mis_c:.1e}; reported by analyze: {bool(flagged)}",
    )


def check_3():
    rng = np.random.default_rng(3)
    parts = [p for n in (2, 3, 4) for p in partitions_of(n)]
    worst, fails = 0.0, 0
    for trial in range(1000):
        part = parts[trial % len(parts)]
        b = random_K(rng, part, scale=3.0, angle_range=(-math.pi, math.pi))
        if trial % 50 == 0 and part.s:
            # include the closed end of the angle range
            sl = part.b_slices()[0]
            b[sl.start, sl.start + 1] = -math.pi
            b[sl.start + 1, sl.start] = math.pi
        back = principal_log_K(exp_K(b, part), part).B
        err = max_norm(back - b) / (1.0 + max_norm(b))
        worst = max(worst, err)
        fails += err > 1e-9
    return _record(3, fails == 0, f"1000 roundtrips, {fails} failures, worst relative error {worst:.2e}")


def _manufactured_family(rng):
    n = int(rng.choice([2, 3, 4]))
    parts = list(partitions_of(n))
    part = parts[rng.integers(len(parts))]
    fam = commuting_K_family(rng, part, int(rng.integers(2, 4)))
    Q = random_conditioned(rng, n, 1e3)
    Qi = np.linalg.inv(Q)
    return part, [Q @ a @ Qi for a in fam], np.linalg.cond(Q)


def _same_blocks(p, q):
    return sorted(p.t_blocks) == sorted(q.t_blocks) and sorted(p.b_blocks) == sorted(q.b_blocks)


def check_4():
    rng = np.random.default_rng(4)
    matched, bad_resid, worst = 0, 0, 0.0
    for _ in range(200):
        part, fam, cond = _manufactured_family(rng)
        nf = compute_normal_form(fam)
        if _same_blocks(nf.partition, part):
            matched += 1
            worst = max(worst, nf.residual / cond**2)
            bad_resid += nf.residual > 1e-8 * cond**2
    ok = matched >= 195 and bad_resid == 0
    return _record(
        4, ok,
        f"{matched}/200 partitions recovered, {bad_resid} residual violations, "
        f"worst residual/cond^2 {worst:.2e}",
    )


def check_5():
    rng = np.random.default_rng(5)
    agree = 0
    for _ in range(500):
        r = int(rng.integers(1, 6))
        k = int(rng.integers(1, 5))
        signs = [tuple(int(x) for x in rng.choice([-1, 1], size=r)) for _ in range(k)]
        fast, _ = index_from_signs(signs, r)
        agree += fast == brute_force_index(signs, r, max_len=8)
    return _record(5, agree == 500, f"{agree}/500 sign sets agree with word enumeration up to length 8")


def check_6():
    rng = np.random.default_rng(6)
    total = wrong = 0
    for n in range(1, 5):
        for part in partitions_of(n):
            # p runs up to n - s, which includes floor((n + 1) / 2) since 2s <= n
            for p in range(1, n - part.s + 1):
                fam = commuting_K_family(rng, part, p)
                Q = random_conditioned(rng, n, 10.0)
                fam = [Q @ a @ np.linalg.inv(Q) for a in fam]
                rep = analyze_family(fam)
                total += 1
                if not (rep.verdict.status == NOT_DENSE and rep.verdict.obstruction == COUNT_BOUND):
                    wrong += 1
    return _record(6, wrong == 0, f"{total - wrong}/{total} families with p + s <= n certified CountBound")


def check_7():
    t0 = time.perf_counter()
    total = bad = 0
    problems = []
    for n in range(1, 6):
        for part in partitions_of(n):
            total += 1
            try:
                rc = build_generators(part)
            except Exception as exc:  # a failed self-check is a failed criterion
                bad += 1
                problems.append(f"{part}: {exc}")
                continue
            A = rc.A
            comm = max((commutator_residual(a, b) for i, a in enumerate(A) for b in A[i + 1:]), default=0.0)
            sq = max(max_norm(a @ a - exp_K(b, part)) / max(1.0, max_norm(exp_K(b, part))) for a, b in zip(A, rc.B))
            ok = (
                len(A) == n - part.s + 1
                and comm <= 1e-9
                and all(is_in_K(a, part) and is_invertible(a) for a in A)
                and sq <= 1e-9
                and compute_index(A, part).index == part.r
                and analyze_family(A).verdict.status == DENSE
            )
            if not ok:
                bad += 1
                problems.append(str(part))
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 60
    detail = f"{total - bad}/{total} partitions of n <= 5 verified in {elapsed:.1f}s"
    if problems:
        detail += "; failing: " + ", ".join(problems[:5])
    return _record(7, ok, detail)


def check_8():
    rel = integer_relation([1.0, SQ2, math.sqrt(8)], 10**3)
    found = rel is not None and rel.coefficients == [0, 2, -1]
    with mpmath.workprec(200):
        vals = [mpmath.mpf(1), mpmath.sqrt(2), mpmath.sqrt(3)]
        none_hi = integer_relation(vals, 10**6) is None
    none_float = integer_relation([1.0, SQ2, SQ3], 10**6) is None
    rng = np.random.default_rng(8)
    recovered = 0
    for _ in range(100):
        k = int(rng.integers(3, 5))
        height = 10**3
        while True:
            c = rng.integers(-height // 10, height // 10 + 1, size=k)
            c = c // np.gcd.reduce(c) if np.any(c) else c
            if c[-1] != 0:
                break
        v = rng.uniform(-1, 1, size=k)
        v[-1] = -float(np.dot(c[:-1], v[:-1])) / c[-1]
        got = integer_relation(v.tolist(), height)
        if got is not None:
            g = np.array(got.coefficients)
            recovered += bool(np.array_equal(g, c) or np.array_equal(g, -c))
    ok = found and none_hi and none_float and recovered == 100
    return _record(
        8, ok,
        f"sqrt8 relation {rel.coefficients if rel else None}; (1, sqrt2, sqrt3) none at 1e6 "
        f"(200-bit: {none_hi}, double: {none_float}); planted {recovered}/100",
    )


def check_9():
    two_pi = 2 * math.pi
    dense = AdditiveSemigroup(
        [two_pi * np.array([1.0, 0.0]), two_pi * np.array([0.0, 1.0]), two_pi * np.array([-SQ2, -SQ3])], [], 2
    )
    plateau = AdditiveSemigroup([np.array([1.0, 0.0]), np.array([0.0, 1.0])], [], 2)
    box = 10 * math.pi
    cd = {c: empirical_coverage(dense, c, box, 50)["coverage"] for c in (50, 100, 200)}
    cp = {c: empirical_coverage(plateau, c, box, 50)["coverage"] for c in (50, 100, 200)}
    ok = cd[200] > cd[100] > cd[50] and cp[200] - cp[100] < 0.01
    return _record(
        9, ok,
        f"dense coverage {cd[50]:.4f} < {cd[100]:.4f} < {cd[200]:.4f}; "
        f"CountBound coverage {cp[100]:.4f} -> {cp[200]:.4f}",
    )


def check_10(tmp_dir):
    fam_path = os.path.join(tmp_dir, "family.json")
    with open(fam_path, "w") as fh:
        json.dump({"n": 2, "generators": [a.tolist() for a in reference_example()]}, fh)
    outs = []
    for _ in range(3):
        res = subprocess.run(
            [sys.executable, "-m", "hyperorbit.cli", "analyze", fam_path],
            capture_output=True,
            check=True,
        )
        outs.append(res.stdout)
    ok = len(set(outs)) == 1 and len(outs[0]) > 0
    return _record(10, ok, f"3 analyze runs, {len(set(outs))} distinct output(s), {len(outs[0])} bytes")


def test_criterion_1_reference_example_end_to_end():
    assert check_1()


def test_criterion_2_sign_variant_mismatch():
    assert check_2()


def test_criterion_3_exp_log_roundtrip():
    assert check_3()


def test_criterion_4_normal_form_recovery():
    assert check_4()


def test_criterion_5_index_oracle():
    assert check_5()


def test_criterion_6_minimality_lower_bounds():
    assert check_6()


def test_criterion_7_constructor_totality():
    assert check_7()


def test_criterion_8_integer_relations():
    assert check_8()


def test_criterion_9_coverage_monotonicity():
    assert check_9()


def test_criterion_10_determinism(tmp_path):
    assert check_10(str(tmp_path))


if __name__ == "__main__":
    import tempfile

    results = [check_1(), check_2(), check_3(), check_4(), check_5(), check_6(), check_7(), check_8(), check_9()]
    with tempfile.TemporaryDirectory() as d:
        results.append(check_10(d))
    sys.exit(0 if all(results) else 1)
