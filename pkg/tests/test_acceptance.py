"""Acceptance criteria 1-9, one pass/fail line each in the terminal summary."""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

from zetamellin import specialfn
from zetamellin.lambda_series import lambda1, lambda2
from zetamellin.mellin import IdentityId, mellin_numeric, rhs_closed_form
from zetamellin.residues import ORACLE, PAPER, residue_oracle
from zetamellin.specialfn import zeta
from zetamellin.verify import (RESOLUTION_S_GRID, default_grid, lambda2_series_sign,
                               measured_ratios, polynomial_table, resolve_sign, verify_identity,
                               verify_theorem2)

ROOT = Path(__file__).resolve().parent.parent
S_GRID = (0.2, 0.35, 0.5, 0.65, 0.8)
X_GRID = (0.0, 0.25, 0.5, 1.0, 2.0)


def log_line(log, n, ok, detail, elapsed, limit=None):
    budget = f" (limit {limit:g} s)" if limit else ""
    log.append(f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f} s{budget}]")
    return ok


def worst(records):
    errs = [r.rel_err for r in records if r.rel_err is not None]
    return max(errs) if len(errs) == len(records) else math.inf


def test_criterion_1_known_values(acceptance_log):
    t0 = time.perf_counter()
    gamma = float(mpmath.euler)
    checks = {
        "zeta(2)": (zeta(2.0), math.pi ** 2 / 6),
        "zeta(0)": (zeta(0.0), -0.5),
        "psi(1)": (specialfn.digamma(1.0), -gamma),
        "Gamma(1/2)": (specialfn.gamma(0.5), math.sqrt(math.pi)),
    }
    rel = {k: abs(float(np.real(v)) - w) / abs(w) for k, (v, w) in checks.items()}
    stj = {n: abs(specialfn.stieltjes(n) - float(mpmath.stieltjes(n))) for n in (0, 1, 2)}
    elapsed = time.perf_counter() - t0
    ok = max(rel.values()) <= 1e-12 and max(stj.values()) <= 1e-10 and elapsed < 5
    log_line(acceptance_log, 1, ok,
             f"max rel {max(rel.values()):.1e} (tol 1e-12), Stieltjes max abs {max(stj.values()):.1e} "
             f"(tol 1e-10)", elapsed, 5)
    assert ok, (rel, stj, elapsed)


def test_criterion_2_kernel_identities(acceptance_log):
    t0 = time.perf_counter()
    recs = verify_identity("eq1.4", S_GRID, 1e-6) + verify_identity("eq1.5", S_GRID, 1e-6)
    elapsed = time.perf_counter() - t0
    ok = len(recs) == 10 and all(r.passed for r in recs) and elapsed < 30
    log_line(acceptance_log, 2, ok, f"10 points, worst rel {worst(recs):.1e} (tol 1e-6)", elapsed, 30)
    assert ok


def test_criterion_3_digamma_kernel(acceptance_log):
    t0 = time.perf_counter()
    recs = verify_identity("eq1.1", S_GRID, 1e-6)
    elapsed = time.perf_counter() - t0
    ok = len(recs) == 5 and all(r.passed for r in recs)
    log_line(acceptance_log, 3, ok, f"5 points, worst rel {worst(recs):.1e} (tol 1e-6)", elapsed)
    assert ok


def test_criterion_4_residue_oracle(acceptance_log):
    t0 = time.perf_counter()
    cases = [
        (lambda s: 1.0 / (s - 1.0), 1.0),
        (lambda s: 1.0 / (s - 1.0) ** 2, 0.0),
        (lambda s: zeta(s) * 1.0 ** s, 1.0),
        (lambda s: zeta(s) * 2.0 ** s, 2.0),
    ]
    errs = [abs(residue_oracle(F, 1.0, r) - want) for F, want in cases for r in (0.1, 0.25)]
    spread = max(abs(residue_oracle(F, 1.0, 0.1) - residue_oracle(F, 1.0, 0.25)) for F, _ in cases)
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-10 and spread <= 1e-10
    log_line(acceptance_log, 4, ok, f"max abs err {max(errs):.1e}, radius spread {spread:.1e} "
             f"(tol 1e-10)", elapsed)
    assert ok


def test_criterion_5_inverse_line(acceptance_log):
    t0 = time.perf_counter()
    recs = verify_identity("eq1.6", (0.3, 0.5, 0.8, 1.5), 1e-5)
    elapsed = time.perf_counter() - t0
    ok = len(recs) == 4 and all(r.passed for r in recs)
    log_line(acceptance_log, 5, ok, f"c = -1/2, 4 points, worst rel {worst(recs):.1e} (tol 1e-5)",
             elapsed)
    assert ok


def test_criterion_6_power_series(acceptance_log):
    t0 = time.perf_counter()
    ps1 = verify_identity("ps1", default_grid("ps1"), 1e-7)
    ps2 = resolve_sign("ps2", default_grid("ps2"), 1e-7)
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in ps1) and len(ps1) == 9 and ps2.unique
    log_line(acceptance_log, 6, ok,
             f"PS1 worst rel {worst(ps1):.1e}; PS2 sigma = {ps2.sigma:+d}, unique = {ps2.unique} "
             f"(tol 1e-7)", elapsed)
    assert ok


def test_criterion_7_forward_transforms(acceptance_log):
    t0 = time.perf_counter()
    sigma2 = lambda2_series_sign()
    signs, errs = {}, {}
    for name, f, ident in (
        ("lambda1", lambda t: lambda1(t, ORACLE, 1), IdentityId.EQ1_2),
        ("lambda2", lambda t: lambda2(t, ORACLE, sigma2), IdentityId.EQ1_3),
    ):
        per_point = []
        for s in RESOLUTION_S_GRID:
            got = mellin_numeric(f, s).value.real
            want = rhs_closed_form(ident, s).real
            sign = 1 if abs(got - want) <= abs(got + want) else -1
            per_point.append((sign, abs(got - sign * want) / abs(want)))
        signs[name] = {p[0] for p in per_point}
        errs[name] = max(p[1] for p in per_point)
    table = polynomial_table()
    paper = {ident: all(r.passed for r in verify_identity(ident, RESOLUTION_S_GRID, 1e-5, PAPER,
                                                          sigma=sg))
             for ident, sg in (("eq1.2", 1), ("eq1.3", sigma2))}
    elapsed = time.perf_counter() - t0
    consistent = all(len(v) == 1 for v in signs.values())
    differs = table["lambda1"]["differs"] + table["lambda2"]["differs"]
    ok = consistent and max(errs.values()) <= 1e-5 and bool(differs) and elapsed < 300
    delta = ", ".join(f"{k}.{c} {table[k]['delta'][c]:+.6g}" for k in table for c in table[k]["differs"])
    log_line(acceptance_log, 7, ok,
             f"oracle polynomials, Lambda_2 series sign {sigma2:+d}: worst rel "
             f"{max(errs.values()):.1e} (tol 1e-5), signs {dict((k, sorted(v)) for k, v in signs.items())}; "
             f"printed brackets pass: eq1.2 {paper['eq1.2']}, eq1.3 {paper['eq1.3']}; "
             f"deltas (oracle - printed): {delta}", elapsed, 300)
    assert ok


def test_criterion_8_xi_integrals(acceptance_log):
    t0 = time.perf_counter()
    sigma2 = lambda2_series_sign()
    eq21 = verify_theorem2(1, X_GRID, 1e-4)
    eq22 = verify_theorem2(2, X_GRID, 1e-4, ORACLE, sigma=1)
    eq23 = verify_theorem2(3, X_GRID, 1e-4, ORACLE, sigma=sigma2)
    elapsed = time.perf_counter() - t0
    ok21 = all(r.passed for r in eq21)
    ok22 = all(r.passed for r in eq22)
    ok23 = all(r.passed for r in eq23)
    ok = ok21 and ok22 and ok23 and elapsed < 300
    r22, r23 = measured_ratios(eq22), measured_ratios(eq23)
    log_line(acceptance_log, 8, ok,
             f"eq2.1 {'pass' if ok21 else 'fail'} (worst rel {worst(eq21):.1e}); "
             f"eq2.2 [oracle, sigma +1] {'pass' if ok22 else 'fail'}, rhs/lhs = {r22['mean']:.10g} "
             f"(spread {r22['spread']:.1e}); "
             f"eq2.3 [oracle, sigma {sigma2:+d}] {'pass' if ok23 else 'fail'}, rhs/lhs = "
             f"{r23['mean']:.10g} (spread {r23['spread']:.1e})", elapsed, 300)
    assert ok21, "the digamma Xi identity must hold"
    assert ok22 and ok23, (
        f"Xi identities with Lambda weights differ by constant factors {r22['mean']:.12g} and "
        f"{r23['mean']:.12g}")


PROPERTY_SELECTION = " or ".join([
    "recurrence", "xi_even", "reflection_agrees", "halving_tolerances", "strip_symmetry",
    "removable_singularity", "window_edges", "round_trip", "pass_flag", "identical_across_worker",
    "sorted_and_deterministic", "exit_code_contract", "lhs_even",
])


def test_criterion_9_property_suites(acceptance_log):
    t0 = time.perf_counter()
    files = ["tests/test_specialfn.py", "tests/test_lambda_series.py", "tests/test_mellin.py",
             "tests/test_verify.py", "tests/test_cli.py", "tests/test_xi_integrals.py"]
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           "-k", PROPERTY_SELECTION, *files],
                          cwd=ROOT, capture_output=True, text=True,
                          env={**os.environ, "PYTHONHASHSEED": "0"})
    elapsed = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and elapsed < 900
    log_line(acceptance_log, 9, ok, f"property suites: {summary}", elapsed, 900)
    assert ok, proc.stdout[-3000:]
