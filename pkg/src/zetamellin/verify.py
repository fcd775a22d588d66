"""Identity verification over grids, sign resolution and the convention report."""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ZetaMellinError
from .lambda_series import (
    DEFAULT_CONFIG,
    LambdaConfig,
    lambda1,
    lambda1_integral_rep,
    lambda1_raw_sum,
    lambda2,
    lambda2_raw_sum,
    power_series,
)
from .mellin import (
    IdentityId,
    inverse_mellin_line,
    kloosterman_kernel,
    log_ratio_kernel,
    log_square_kernel,
    mellin_numeric,
    rhs_closed_form,
)
from .quadrature import QuadratureConfig
from .residues import KINDS, ORACLE, PAPER, subtraction_poly
from .specialfn import zeta_error_bound
from .xi_integrals import WeightConvention, XiIntegralSpec, lhs_xi_integral, rhs_weighted_integral

REL_FLOOR = 1e-300

# Identities whose sign convention is measured rather than assumed.
SIGN_AMBIGUOUS = frozenset({IdentityId.EQ1_3, IdentityId.PS2, IdentityId.EQ2_3, IdentityId.INTREP})
# Identities that involve a subtraction polynomial.
CONVENTION_DEPENDENT = frozenset({IdentityId.EQ1_2, IdentityId.EQ1_3, IdentityId.INTREP,
                                  IdentityId.EQ2_2, IdentityId.EQ2_3})
XI_IDENTITIES = {IdentityId.EQ2_1: 1, IdentityId.EQ2_2: 2, IdentityId.EQ2_3: 3}

DEFAULT_S_GRID = (0.2, 0.35, 0.5, 0.65, 0.8)
DEFAULT_X_GRIDS = {
    IdentityId.EQ1_6: (0.3, 0.5, 0.8, 1.5),
    IdentityId.PS1: tuple(round(0.1 * k, 1) for k in range(1, 10)),
    IdentityId.PS2: tuple(round(0.1 * k, 1) for k in range(1, 10)),
    IdentityId.INTREP: (0.1, 1.0, 10.0, 100.0),
    IdentityId.EQ2_1: (0.0, 0.25, 0.5, 1.0, 2.0),
    IdentityId.EQ2_2: (0.0, 0.25, 0.5, 1.0, 2.0),
    IdentityId.EQ2_3: (0.0, 0.25, 0.5, 1.0, 2.0),
}
RESOLUTION_S_GRID = (0.3, 0.5, 0.7)


def default_grid(ident: IdentityId) -> tuple[float, ...]:
    ident = IdentityId.parse(ident)
    return DEFAULT_S_GRID if ident.grid_variable == "s" else DEFAULT_X_GRIDS[ident]


def format_point(v: float) -> str:
    """17 significant digits: round-trips every double."""
    return format(float(v), ".17g")


def canonical_convention(name: str) -> str:
    if name in (PAPER, "paper"):
        return PAPER
    if name in (ORACLE, "oracle"):
        return ORACLE
    raise ValueError(f"unknown convention {name!r}")


@dataclass(frozen=True)
class VerificationRecord:
    id: str
    point: str
    lhs: float | None
    rhs: float | None
    abs_err: float | None
    rel_err: float | None
    tol: float
    passed: bool
    convention: str
    sigma: int
    lhs_quad_err: float | None
    rhs_quad_err: float | None
    abs_tol: float = 0.0
    error: str | None = None

    @classmethod
    def compare(cls, ident, point, lhs, rhs, lhs_err, rhs_err, tol, abs_tol, convention, sigma):
        lhs, rhs = float(lhs), float(rhs)
        abs_err = abs(lhs - rhs)
        rel_err = abs_err / max(abs(rhs), REL_FLOOR)
        passed = bool(rel_err <= tol or abs_err <= abs_tol)
        return cls(ident.value, format_point(point), lhs, rhs, abs_err, rel_err, tol, passed,
                   convention, sigma, float(lhs_err), float(rhs_err), abs_tol)

    @classmethod
    def failed(cls, ident, point, tol, abs_tol, convention, sigma, exc):
        return cls(ident.value, format_point(point), None, None, None, None, tol, False,
                   convention, sigma, None, None, abs_tol, f"{type(exc).__name__}: {exc}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass(frozen=True)
class EvalContext:
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    lam: LambdaConfig = DEFAULT_CONFIG
    line_c: float = -0.5


def _mellin_pair(f, s, ident, ctx):
    r = mellin_numeric(f, s, ctx.quad)
    rhs = rhs_closed_form(ident, s)
    rhs_err = 8 * zeta_error_bound(1.0 - s) * abs(rhs) if ident not in (
        IdentityId.EQ1_4, IdentityId.EQ1_5) else 4e-16 * abs(rhs)
    return r.value.real, rhs.real, r.total_error, rhs_err


def evaluate_point(ident: IdentityId, point: float, convention: str, sigma: int,
                   ctx: EvalContext) -> tuple[float, float, float, float]:
    """(lhs, rhs, lhs error, rhs error) for one identity at one grid point."""
    lam = ctx.lam
    if ident is IdentityId.EQ1_1:
        return _mellin_pair(kloosterman_kernel, point, ident, ctx)
    if ident is IdentityId.EQ1_4:
        return _mellin_pair(log_ratio_kernel, point, ident, ctx)
    if ident is IdentityId.EQ1_5:
        return _mellin_pair(log_square_kernel, point, ident, ctx)
    if ident is IdentityId.EQ1_2:
        return _mellin_pair(lambda t: lambda1(t, convention, sigma, lam), point, ident, ctx)
    if ident is IdentityId.EQ1_3:
        return _mellin_pair(lambda t: lambda2(t, convention, sigma, lam), point, ident, ctx)
    if ident is IdentityId.EQ1_6:
        lhs, lerr = lambda1_raw_sum(point, lam, return_error=True)
        rhs, rerr = inverse_mellin_line(ident, point, ctx.line_c, ctx.quad, return_error=True)
        return lhs, rhs, lerr, rerr
    if ident is IdentityId.PS1:
        lhs, lerr = power_series("lambda1", point, lam.ps_order, 1, return_error=True)
        rhs, rerr = lambda1_raw_sum(point, lam, return_error=True)
        return lhs, rhs, lerr, rerr
    if ident is IdentityId.PS2:
        lhs, lerr = power_series("lambda2", point, lam.ps_order, 1, return_error=True)
        rhs, rerr = lambda2_raw_sum(point, lam, return_error=True)
        return lhs, sigma * rhs, lerr, rerr
    if ident is IdentityId.INTREP:
        # Here sigma is the overall sign of Lambda_1, not the sign of its raw series.
        lhs, lerr = lambda1_integral_rep(point, return_error=True)
        rhs = sigma * lambda1(point, convention, 1, lam)
        _, rerr = lambda1_raw_sum(point, lam, return_error=True)
        return lhs, rhs, lerr, rerr
    if ident in XI_IDENTITIES:
        k = XI_IDENTITIES[ident]
        spec = XiIntegralSpec(k, point)
        left = lhs_xi_integral(spec)
        right = rhs_weighted_integral(k, point, WeightConvention(convention, sigma, lam))
        return float(left.value), float(right.value), left.total_error, right.total_error
    raise ValueError(f"no evaluator for {ident}")


def _record(args):
    ident, point, convention, sigma, tol, abs_tol, ctx = args
    try:
        lhs, rhs, le, re_ = evaluate_point(ident, point, convention, sigma, ctx)
        return VerificationRecord.compare(ident, point, lhs, rhs, le, re_, tol, abs_tol,
                                          convention, sigma)
    except (ZetaMellinError, ValueError, ArithmeticError) as exc:
        return VerificationRecord.failed(ident, point, tol, abs_tol, convention, sigma, exc)


def _run(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_record(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_record, tasks))


def _sort_key(rec: VerificationRecord):
    return (rec.id, rec.convention, -rec.sigma, float(rec.point))


@dataclass(frozen=True)
class SignResolution:
    id: str
    convention: str
    sigma: int
    all_pass: dict  # sigma -> bool
    median_rel_err: dict  # sigma -> float
    records: dict  # sigma -> list[VerificationRecord]

    @property
    def unique(self) -> bool:
        return sum(self.all_pass.values()) == 1


def _median_err(recs):
    errs = [r.rel_err if r.rel_err is not None else math.inf for r in recs]
    return statistics.median(errs) if errs else math.inf


def resolve_sign(ident, grid: Sequence[float], tol: float, convention: str = ORACLE,
                 abs_tol: float = 0.0, ctx: EvalContext | None = None,
                 workers: int = 1) -> SignResolution:
    """Evaluate a sign-ambiguous identity under both signs and pick one for the whole grid.

    The sign under which every point passes wins.  If neither (or both) do,
    the smaller median relative error decides, and ``unique`` is False.
    """
    ident = IdentityId.parse(ident)
    ctx = ctx or EvalContext()
    convention = canonical_convention(convention)
    tasks = [(ident, float(p), convention, sg, tol, abs_tol, ctx) for sg in (1, -1) for p in grid]
    out = _run(tasks, workers)
    n = len(grid)
    recs = {1: sorted(out[:n], key=_sort_key), -1: sorted(out[n:], key=_sort_key)}
    all_pass = {sg: bool(recs[sg]) and all(r.passed for r in recs[sg]) for sg in (1, -1)}
    med = {sg: _median_err(recs[sg]) for sg in (1, -1)}
    if all_pass[1] != all_pass[-1]:
        sigma = 1 if all_pass[1] else -1
    else:
        sigma = 1 if med[1] <= med[-1] else -1
    return SignResolution(ident.value, convention, sigma, all_pass, med, recs)


def verify_identity(ident, grid: Iterable[float] | None = None, tol: float = 1e-6,
                    convention: str = ORACLE, abs_tol: float = 0.0, sigma: int | None = None,
                    ctx: EvalContext | None = None, workers: int = 1) -> list[VerificationRecord]:
    """Records for one identity over a grid, ordered by grid point.

    Identities without a subtraction polynomial are tested as printed and
    labelled paper-printed whatever ``convention`` says.  Sign-ambiguous ones
    are resolved globally unless ``sigma`` is given.  Numerical failures
    become failed records instead of exceptions.
    """
    ident = IdentityId.parse(ident)
    ctx = ctx or EvalContext()
    grid = tuple(default_grid(ident) if grid is None else (float(p) for p in grid))
    convention = canonical_convention(convention)
    if ident not in CONVENTION_DEPENDENT:
        convention = PAPER
    if ident in XI_IDENTITIES:
        return verify_theorem2(XI_IDENTITIES[ident], grid, tol, convention, abs_tol, sigma, ctx, workers)
    if sigma is None and ident in SIGN_AMBIGUOUS:
        res = resolve_sign(ident, grid, tol, convention, abs_tol, ctx, workers)
        return res.records[res.sigma]
    sigma = 1 if sigma is None else sigma
    tasks = [(ident, p, convention, sigma, tol, abs_tol, ctx) for p in grid]
    return sorted(_run(tasks, workers), key=_sort_key)


@lru_cache(maxsize=64)
def _resolved_sigma(ident, grid, tol, convention, abs_tol, ctx) -> int:
    return resolve_sign(ident, grid, tol, convention, abs_tol, ctx).sigma


@lru_cache(maxsize=8)
def lambda2_series_sign(convention: str = ORACLE, ctx: EvalContext | None = None) -> int:
    """Sign of the raw Lambda_2 series fixed by the forward transform (1.3) on s = 0.3, 0.5, 0.7."""
    return _resolved_sigma(IdentityId.EQ1_3, RESOLUTION_S_GRID, 1e-5, canonical_convention(convention),
                           0.0, ctx or EvalContext())


def verify_theorem2(k: int, grid: Sequence[float] | None = None, tol: float = 1e-4,
                    convention: str = ORACLE, abs_tol: float = 0.0, sigma: int | None = None,
                    ctx: EvalContext | None = None, workers: int = 1) -> list[VerificationRecord]:
    """Xi-integral identity k as printed.

    k = 1 has no Lambda and is convention-free.  For k = 3 the raw-series sign
    is the one fixed by the forward transform of Lambda_2, not re-fitted here.
    """
    ctx = ctx or EvalContext()
    ident = {1: IdentityId.EQ2_1, 2: IdentityId.EQ2_2, 3: IdentityId.EQ2_3}[k]
    grid = tuple(default_grid(ident) if grid is None else (float(p) for p in grid))
    convention = PAPER if k == 1 else canonical_convention(convention)
    if sigma is None:
        sigma = lambda2_series_sign(convention, ctx) if k == 3 else 1
    tasks = [(ident, p, convention, sigma, tol, abs_tol, ctx) for p in grid]
    return sorted(_run(tasks, workers), key=_sort_key)


def measured_ratios(records: Sequence[VerificationRecord]) -> dict:
    """rhs / lhs per point plus its spread; a constant ratio means a normalization mismatch."""
    ratios = [r.rhs / r.lhs for r in records if r.lhs not in (None, 0.0) and r.rhs is not None]
    if not ratios:
        return {"ratios": [], "mean": None, "spread": None}
    mean = float(np.mean(ratios))
    spread = float(np.max(np.abs(np.array(ratios) - mean)) / max(abs(mean), REL_FLOOR))
    return {"ratios": [float(r) for r in ratios], "mean": mean, "spread": spread}


def polynomial_table() -> dict:
    """Paper-printed and residue-fitted coefficients with signed deltas (oracle - paper)."""
    out = {}
    for kind in KINDS:
        paper = subtraction_poly(kind, PAPER)
        oracle = subtraction_poly(kind, ORACLE)
        names = ("c0", "c1", "c2", "c3")
        out[kind] = {
            PAPER: dict(zip(names, paper.coefficients)),
            ORACLE: dict(zip(names, oracle.coefficients)),
            "delta": {n: o - p for n, o, p in zip(names, oracle.coefficients, paper.coefficients)},
            "fit_residual": oracle.fit_residual,
        }
        out[kind]["differs"] = [n for n, d in out[kind]["delta"].items() if abs(d) > 1e-9]
    return out


def resolve_conventions(ctx: EvalContext | None = None, workers: int = 1) -> dict:
    """The convention report: polynomials, deltas, resolved signs and printed-bracket verdicts."""
    ctx = ctx or EvalContext()
    report = {"polynomials": polynomial_table(), "sigma": {}, "paper_brackets": {}}

    plan = [
        (IdentityId.EQ1_3, RESOLUTION_S_GRID, 1e-5),
        (IdentityId.PS2, DEFAULT_X_GRIDS[IdentityId.PS2], 1e-7),
        (IdentityId.INTREP, DEFAULT_X_GRIDS[IdentityId.INTREP], 1e-6),
    ]
    for ident, grid, tol in plan:
        res = resolve_sign(ident, grid, tol, ORACLE, 0.0, ctx, workers)
        report["sigma"][ident.value] = {
            "sigma": res.sigma,
            "unique": res.unique,
            "all_pass": {str(k): v for k, v in res.all_pass.items()},
            "median_rel_err": {str(k): v for k, v in res.median_rel_err.items()},
            "grid": [format_point(p) for p in grid],
            "tol": tol,
        }

    # Lambda_2 enters the Xi identity with the series sign fixed above; the Xi
    # identity itself is checked for which sign gives an x-independent ratio.
    xs = (0.0, 0.5, 1.0)
    ratio_by_sigma = {}
    for sg in (1, -1):
        recs = verify_theorem2(3, xs, 1e-4, ORACLE, 0.0, sg, ctx, workers)
        ratio_by_sigma[str(sg)] = measured_ratios(recs)
        ratio_by_sigma[str(sg)]["all_pass"] = all(r.passed for r in recs)
    consistent = [int(k) for k, v in ratio_by_sigma.items()
                  if v["spread"] is not None and v["spread"] < 1e-6]
    report["sigma"][IdentityId.EQ2_3.value] = {
        "sigma": report["sigma"][IdentityId.EQ1_3.value]["sigma"],
        "unique": len(consistent) == 1,
        "all_pass": {k: v["all_pass"] for k, v in ratio_by_sigma.items()},
        "constant_ratio_sigmas": consistent,
        "ratios": {k: {"mean": v["mean"], "spread": v["spread"]} for k, v in ratio_by_sigma.items()},
        "grid": [format_point(p) for p in xs],
        "tol": 1e-4,
    }

    for ident in (IdentityId.EQ1_2, IdentityId.EQ1_3):
        sigma = 1 if ident is IdentityId.EQ1_2 else report["sigma"][IdentityId.EQ1_3.value]["sigma"]
        verdict = {}
        for conv in (PAPER, ORACLE):
            recs = verify_identity(ident, RESOLUTION_S_GRID, 1e-5, conv, 0.0, sigma, ctx, workers)
            verdict[conv] = {"all_pass": all(r.passed for r in recs),
                             "errors": sorted({r.error for r in recs if r.error})}
        report["paper_brackets"][ident.value] = verdict
    return report
