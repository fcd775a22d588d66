"""Fourier-type integrals of the Riemann Xi function against cosh^-k kernels.

    LHS_k(x) = c_k int_0^inf Xi(t) / (1/4 + t^2) cos(x t) / cosh^k(pi t) dt,
               with c_1 = c_2 = 1 and c_3 = 2,
    RHS_k(x) = e^(x/2) int_0^inf w_k(t) exp(-pi t^2 e^(2x)) dt,
               with w_1 = psi(t+1) - log t, w_2 = Lambda_1, w_3 = Lambda_2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .lambda_series import LambdaConfig, DEFAULT_CONFIG, lambda1, lambda2
from .quadrature import IntegralResult, decay_cutoff, integrate
from .residues import ORACLE
from .specialfn import digamma1p_minus_log, xi_critical

PI = math.pi
X_MAX = 5.0


def default_truncation(k: int) -> float:
    return 30.0 if k == 1 else 20.0


@dataclass(frozen=True)
class XiIntegralSpec:
    k: int
    x: float
    T_t: float | None = None
    abs_tol: float = 1e-12
    rel_tol: float = 1e-11

    def __post_init__(self):
        if self.k not in (1, 2, 3):
            raise ValueError("cosh power k must be 1, 2 or 3")
        if not (math.isfinite(self.x) and abs(self.x) <= X_MAX):
            raise DomainError(f"|x| must not exceed {X_MAX:g}")
        if self.T_t is None:
            object.__setattr__(self, "T_t", default_truncation(self.k))
        if not 0 < self.T_t <= 60:
            raise ValueError("T_t must lie in (0, 60]")
        envelope = math.exp(-(self.k + 0.25) * PI * self.T_t)
        if envelope >= self.abs_tol:
            raise ValueError(
                f"T_t = {self.T_t:g} leaves an envelope of {envelope:.2g} above abs_tol")

    @property
    def prefactor(self) -> float:
        return 2.0 if self.k == 3 else 1.0


def xi_integrand(k: int, x: float, t):
    t = np.asarray(t, dtype=float)
    return xi_critical(t) / (0.25 + t * t) * np.cos(x * t) / np.cosh(PI * t) ** k


def lhs_xi_integral(spec: XiIntegralSpec) -> IntegralResult:
    """c_k int_0^T_t Xi(t)/(1/4 + t^2) cos(x t)/cosh^k(pi t) dt."""
    res = integrate(lambda t: xi_integrand(spec.k, spec.x, t), 0.0, spec.T_t,
                    abs_tol=spec.abs_tol, rel_tol=spec.rel_tol,
                    initial_panels=max(4, int(spec.T_t)))
    # Beyond T_t: |Xi(t)| / (1/4 + t^2) <= 1 on this range and cosh^-k <= 2^k e^(-k pi t).
    tail = 2.0 ** spec.k * math.exp(-spec.k * PI * spec.T_t) / (spec.k * PI)
    return IntegralResult(res.value, res.error, res.evaluations, tail).scaled(spec.prefactor)


@dataclass(frozen=True)
class WeightConvention:
    """Which Lambda enters the k = 2, 3 weights."""

    source: str = ORACLE
    sigma: int = 1
    lambda_cfg: LambdaConfig = field(default=DEFAULT_CONFIG)


def weight_function(k: int, conv: WeightConvention):
    if k == 1:
        return digamma1p_minus_log
    if k == 2:
        return lambda t: lambda1(t, conv.source, conv.sigma, conv.lambda_cfg)
    if k == 3:
        return lambda t: lambda2(t, conv.source, conv.sigma, conv.lambda_cfg)
    raise ValueError("k must be 1, 2 or 3")


def rhs_weighted_integral(k: int, x: float, conv: WeightConvention | None = None,
                          abs_tol: float = 1e-12, rel_tol: float = 1e-11) -> IntegralResult:
    """e^(x/2) int_0^inf w_k(t) exp(-pi t^2 e^(2x)) dt, integrated in u = log t."""
    conv = conv or WeightConvention()
    x = float(x)
    if not (math.isfinite(x) and abs(x) <= X_MAX):
        raise DomainError(f"|x| must not exceed {X_MAX:g}")
    w = weight_function(k, conv)
    a = PI * math.exp(2 * x)

    def g(u):
        t = np.exp(u)
        return np.asarray(w(t)) * t * np.exp(-a * t * t)

    # The Gaussian is below e^-40 once t > sqrt(40 / a).
    centre = 0.5 * math.log(1.0 / a)
    lo = decay_cutoff(g, centre - 2.0, -1.0, abs_tol / 10, -740.0)
    hi = decay_cutoff(g, centre + 1.0, 1.0, abs_tol / 10, centre + 10.0)
    res = integrate(g, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                    initial_panels=max(4, int(hi - lo)))
    return IntegralResult(res.value, res.error, res.evaluations, 2 * abs_tol / 10).scaled(
        math.exp(x / 2))
