"""The Lambda_1 / Lambda_2 functions and their alternative representations.

Raw series
    S1(x) = x sum_n log(x/n) / (n (x - n))
    S2(x) = x sum_n (pi^2 + log^2(x/n)) / (n (x + n))

Lambda_k(x) = sigma * S_k(x) - P_k(log x), with P_k a subtraction polynomial
(paper-printed or residue-fitted) and sigma = +/-1.

Series are summed directly for n < N with N >= 4x, and the remainder is
expanded in powers of x/n; every power reduces to sums of n^-m log^q n,
which are summed by Euler-Maclaurin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._eulermaclaurin import logpoly_tail
from .errors import DomainError, TailBudgetError, UnsupportedError
from .quadrature import IntegralResult, decay_cutoff, integrate
from .residues import ORACLE, PAPER, SubtractionPolynomial, subtraction_poly
from .specialfn import digamma1p_minus_log, zeta_deriv_table

__all__ = [
    "LambdaConfig",
    "SubtractionPolynomial",
    "lambda1_raw_sum",
    "lambda2_raw_sum",
    "lambda1",
    "lambda2",
    "lambda1_integral_rep",
    "power_series",
    "subtraction_poly",
]

PI2 = math.pi ** 2
_EPS = np.finfo(float).eps
_BLOCK = 4_000_000  # max matrix entries per direct-summation block


@dataclass(frozen=True)
class LambdaConfig:
    max_terms: int = 2 ** 22
    singularity_window: float = 1e-3
    tail_tol: float = 1e-14
    ps_order: int = 200
    start_terms: int = 128

    def __post_init__(self):
        if not 100 <= self.max_terms <= 2 ** 24:
            raise ValueError("max_terms must lie in [100, 2**24]")
        if not 0 < self.singularity_window < 0.25:
            raise ValueError("singularity_window must lie in (0, 1/4)")
        if not 1e-14 <= self.tail_tol <= 1e-6:
            raise ValueError("tail_tol must lie in [1e-14, 1e-6]")
        if not 1 <= self.ps_order <= 200:
            raise ValueError("ps_order must lie in [1, 200]")
        if not 32 <= self.start_terms <= self.max_terms:
            raise ValueError("start_terms must lie in [32, max_terms]")


DEFAULT_CONFIG = LambdaConfig()

_K_MAX = 40


@lru_cache(maxsize=64)
def _scaled_moments(N: int, K: int):
    """N^(k+1) sum_{n>=N} log^q(n) / n^(k+2) for q = 0, 1, 2 and k = 0..K.

    Returns an array of shape (3, K+1) and the matching error estimates.
    """
    vals = np.empty((3, K + 1))
    errs = np.empty((3, K + 1))
    for k in range(K + 1):
        scale = float(N) ** (k + 1)
        for q in range(3):
            coeffs = [0.0] * q + [1.0]
            v, e = logpoly_tail(k + 2.0, coeffs, N)
            vals[q, k] = v * scale
            errs[q, k] = e * scale
    vals.setflags(write=False)
    errs.setflags(write=False)
    return vals, errs


def _plan(x, cfg):
    """Power-of-two truncation per point so that x / N <= 1/4."""
    need = np.maximum(4.0 * x, float(cfg.start_terms))
    N = np.power(2.0, np.ceil(np.log2(need)))
    N = np.maximum(N, float(cfg.start_terms)).astype(np.int64)
    N = np.where(N < cfg.start_terms, cfg.start_terms, N)
    if np.any(N > cfg.max_terms):
        raise TailBudgetError(
            f"x = {float(np.max(x)):g} needs {int(np.max(N))} terms, cap is {cfg.max_terms}")
    return N


def _terms_s1(x, n, eps_window):
    d = x - n
    delta = d / n
    near = np.abs(delta) < eps_window
    small = np.abs(delta) < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.where(small, np.log1p(np.where(small, delta, 0.0)), np.log(x / n))
        far_term = x * logr / (n * np.where(near, 1.0, d))
    series = x * (1.0 - delta / 2 + delta ** 2 / 3 - delta ** 3 / 4) / (n * n)
    return np.where(near, series, far_term)


def _terms_s2(x, n):
    logr = np.log(x / n)
    return (x / n) * (PI2 + logr * logr) / (x + n)


def _raw_sum(kind, x, cfg):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    flat = np.atleast_1d(x).ravel()
    if np.any(~(flat > 0)) or np.any(~np.isfinite(flat)):
        raise DomainError("the Lambda series are defined for finite x > 0")
    Ns = _plan(flat, cfg)
    out = np.empty_like(flat)
    err = np.empty_like(flat)
    for N in np.unique(Ns):
        N = int(N)
        idx = np.nonzero(Ns == N)[0]
        xs = flat[idx]
        n = np.arange(1, N, dtype=float)
        head = np.empty(xs.size)
        habs = np.empty(xs.size)
        rows = max(1, _BLOCK // N)
        for start in range(0, xs.size, rows):
            xb = xs[start:start + rows, None]
            if kind == 1:
                t = _terms_s1(xb, n[None, :], cfg.singularity_window)
            else:
                t = _terms_s2(xb, n[None, :])
            head[start:start + rows] = t.sum(axis=1)
            habs[start:start + rows] = np.abs(t).sum(axis=1)
        r = xs / N
        rmax = float(np.max(r))
        K = _K_MAX if rmax <= 0 else int(min(_K_MAX, max(1, math.ceil(
            math.log(cfg.tail_tol * 1e-2) / math.log(rmax)))))
        mom, mom_err = _scaled_moments(N, K)
        L = np.log(xs)
        powers = r[:, None] ** np.arange(1, K + 2)[None, :]  # r^(k+1)
        if kind == 1:
            coef = mom[1][None, :] - L[:, None] * mom[0][None, :]
            cerr = mom_err[1][None, :] + np.abs(L)[:, None] * mom_err[0][None, :]
        else:
            alt = (-1.0) ** np.arange(K + 1)
            coef = alt[None, :] * (mom[2][None, :] - 2 * L[:, None] * mom[1][None, :]
                                   + (PI2 + L * L)[:, None] * mom[0][None, :])
            cerr = (mom_err[2][None, :] + 2 * np.abs(L)[:, None] * mom_err[1][None, :]
                    + (PI2 + L * L)[:, None] * mom_err[0][None, :])
        tail = np.sum(powers * coef, axis=1)
        # Remainder of the x/n expansion: geometric beyond the last kept power.
        geo = np.abs(powers[:, -1] * coef[:, -1]) * r / (1.0 - r)
        tail_err = geo + np.sum(powers * cerr, axis=1)
        out[idx] = head + tail
        err[idx] = tail_err + 4.0 * _EPS * (habs + np.abs(tail)) * math.log2(N)
    out = out.reshape(np.shape(x)) if not scalar else out[0]
    err = err.reshape(np.shape(x)) if not scalar else err[0]
    if scalar:
        return float(out), float(err)
    return out, err


def lambda1_raw_sum(x, cfg: LambdaConfig = DEFAULT_CONFIG, return_error: bool = False):
    """x sum_{n>=1} log(x/n) / (n (x - n)); removable points x = n handled by expansion."""
    val, err = _raw_sum(1, x, cfg)
    if err is not None and np.any(np.asarray(err) > max(cfg.tail_tol, 1e-13) * (1 + np.abs(val))):
        raise TailBudgetError("tail estimate exceeds the configured tolerance")
    return (val, err) if return_error else val


def lambda2_raw_sum(x, cfg: LambdaConfig = DEFAULT_CONFIG, return_error: bool = False):
    """x sum_{n>=1} (pi^2 + log^2(x/n)) / (n (x + n))."""
    val, err = _raw_sum(2, x, cfg)
    if np.any(np.asarray(err) > max(cfg.tail_tol, 1e-13) * (1 + np.abs(val))):
        raise TailBudgetError("tail estimate exceeds the configured tolerance")
    return (val, err) if return_error else val


def _resolve_poly(kind, poly):
    if poly is None:
        return subtraction_poly(kind, ORACLE)
    if isinstance(poly, str):
        return subtraction_poly(kind, poly)
    if poly.kind != kind:
        raise ValueError(f"polynomial is for {poly.kind}, not {kind}")
    return poly


def _check_sigma(sigma):
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")


def lambda1(x, poly: SubtractionPolynomial | str | None = None, sigma: int = 1,
            cfg: LambdaConfig = DEFAULT_CONFIG):
    """sigma * S1(x) - P(log x); the oracle polynomial is used by default."""
    _check_sigma(sigma)
    p = _resolve_poly("lambda1", poly)
    return sigma * lambda1_raw_sum(x, cfg) - p(np.log(x))


def lambda2(x, poly: SubtractionPolynomial | str | None = None, sigma: int = -1,
            cfg: LambdaConfig = DEFAULT_CONFIG):
    """sigma * S2(x) - P(log x).

    sigma defaults to -1: with the printed cubic bracket only the negated
    series gives a function whose Mellin transform exists in 0 < Re s < 1.
    """
    _check_sigma(sigma)
    p = _resolve_poly("lambda2", poly)
    return sigma * lambda2_raw_sum(x, cfg) - p(np.log(x))


def lambda1_integral_rep(x: float, abs_tol: float = 1e-11, rel_tol: float = 1e-11,
                         return_error: bool = False):
    """int_0^inf (psi(t+1) - log t) / (x + t) dt, computed in u = log t."""
    x = float(x)
    if not x > 0:
        raise DomainError("the integral representation needs x > 0")
    logx = math.log(x)

    def g(u):
        t = np.exp(u)
        return t * digamma1p_minus_log(t) / (x + t)

    lo = decay_cutoff(g, min(logx, 0.0) - 5.0, -1.0, abs_tol / 10, -700.0)
    hi = decay_cutoff(g, max(logx, 0.0) + 5.0, 1.0, abs_tol / 10, 700.0)
    res = integrate(g, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                    points=sorted({logx, 0.0}), initial_panels=4)
    # Neglected ends: integrand decays at least like e^u|u| below and e^-u above.
    end_err = 2.0 * (abs(float(g(np.array([lo]))[0])) * (abs(lo) + 1)
                     + abs(float(g(np.array([hi]))[0])))
    value = float(res.value)
    if return_error:
        return value, res.error + end_err
    return value


def _ps_terms(kind, x, M):
    table = zeta_deriv_table(200)
    z0, z1, z2 = table[0, :M], table[1, :M], table[2, :M]
    L = math.log(x)
    n = np.arange(1, M + 1)
    if kind == "lambda1":
        coef = -(L * z0 + z1)
        powers = x ** n
        bound_coef = abs(L) * table[0, min(M, 199)] + abs(table[1, min(M, 199)])
    else:
        coef = z2 + 2 * L * z1 + PI2 * z0 + z0 * L * L
        powers = (-x) ** n
        bound_coef = (abs(table[2, min(M, 199)]) + 2 * abs(L) * abs(table[1, min(M, 199)])
                      + (PI2 + L * L) * table[0, min(M, 199)])
    return coef, powers, bound_coef


def power_series(kind: str, x: float, M: int | None = None, sigma: int = 1,
                 return_error: bool = False):
    """Small-x expansion of the raw Lambda sums, as printed, times sigma.

    lambda1: -sum (log x zeta(1+n) + zeta'(1+n)) x^n
    lambda2:  sum (zeta''(1+n) + 2 log x zeta'(1+n) + pi^2 zeta(1+n) + zeta(1+n) log^2 x) (-x)^n
    """
    _check_sigma(sigma)
    if kind not in ("lambda1", "lambda2"):
        raise UnsupportedError(f"unknown series kind {kind!r}")
    M = DEFAULT_CONFIG.ps_order if M is None else int(M)
    if not 1 <= M <= 200:
        raise ValueError("power-series order must lie in [1, 200]")
    x = float(x)
    if not 0 < x < 1:
        raise DomainError("the power series converge only for 0 < x < 1")
    coef, powers, bound_coef = _ps_terms(kind, x, M)
    value = sigma * math.fsum(coef * powers)
    # zeta^(k)(1+n) decrease in magnitude with n, so the next coefficient bounds the rest.
    remainder = bound_coef * x ** (M + 1) / (1.0 - x)
    if return_error:
        return value, float(remainder + 4 * _EPS * float(np.sum(np.abs(coef * powers))))
    return value


def paper_sources():
    """Both polynomial sources in a fixed order."""
    return (PAPER, ORACLE)
