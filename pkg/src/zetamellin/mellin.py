"""Numerical Mellin transforms, their closed forms, and the inverse line integral.

The forward transform int_0^inf t^(s-1) f(t) dt is split at t = 1 and at the
truncation point T.  Both finite pieces are integrated in u = log t, where
t^(s-1) dt becomes e^(s u) du.  Beyond T the integrand is replaced by a fitted
decay model

    f(t) ~ sum_{j in {0,1,2}} sum_{q <= Q} a_jq (t/T)^-(p+j) log^q(t/T)

whose contribution is integrated exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, NonConvergenceError, PoleError, StripError, TailModelError, UnsupportedError
from .quadrature import NODES, KRONROD_WEIGHTS, IntegralResult, QuadratureConfig, decay_cutoff, integrate
from .residues import fit_residue_polynomial, residue_oracle  # noqa: F401  (re-exported)
from .specialfn import digamma1p_minus_log, zeta

PI = math.pi


class IdentityId(enum.Enum):
    EQ1_1 = "eq1.1"
    EQ1_2 = "eq1.2"
    EQ1_3 = "eq1.3"
    EQ1_4 = "eq1.4"
    EQ1_5 = "eq1.5"
    EQ1_6 = "eq1.6"
    EQ2_1 = "eq2.1"
    EQ2_2 = "eq2.2"
    EQ2_3 = "eq2.3"
    PS1 = "ps1"
    PS2 = "ps2"
    INTREP = "intrep"

    @classmethod
    def parse(cls, text) -> "IdentityId":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", ".")
        for member in cls:
            if key in (member.value, member.name.lower().replace("_", ".")):
                return member
        raise UnsupportedError(f"unknown identity {text!r}")

    @property
    def grid_variable(self) -> str:
        return "s" if self in _S_IDENTITIES else "x"


_S_IDENTITIES = frozenset({IdentityId.EQ1_1, IdentityId.EQ1_2, IdentityId.EQ1_3,
                           IdentityId.EQ1_4, IdentityId.EQ1_5})


@dataclass(frozen=True)
class StripPoint:
    s: complex
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        s = complex(self.s)
        object.__setattr__(self, "s", s)
        if not (math.isfinite(s.real) and math.isfinite(s.imag)):
            raise StripError("s must be finite")
        if not self.lo < self.hi:
            raise StripError("strip bounds must satisfy lo < hi")
        if not self.lo < s.real < self.hi:
            if (self.lo, self.hi) == (0.0, 1.0):
                raise StripError(f"s outside critical strip: Re s = {s.real:g}")
            raise StripError(f"Re s = {s.real:g} outside the strip ({self.lo:g}, {self.hi:g})")


def _as_point(s) -> StripPoint:
    return s if isinstance(s, StripPoint) else StripPoint(s)


# --------------------------------------------------------------------------
# Kernels
# --------------------------------------------------------------------------

def log_ratio_kernel(t):
    """log t / (t - 1), equal to 1 at t = 1."""
    t = np.asarray(t, dtype=float)
    d = t - 1.0
    near = np.abs(d) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        far = np.log(t) / np.where(near, 1.0, d)
    # log(1+d)/d = 1 - d/2 + d^2/3 - d^3/4
    return np.where(near, 1.0 - d / 2 + d * d / 3 - d ** 3 / 4, far)


def log_square_kernel(t):
    """(pi^2 + log^2 t) / (t + 1)."""
    t = np.asarray(t, dtype=float)
    L = np.log(t)
    return (PI * PI + L * L) / (t + 1.0)


def kloosterman_kernel(t):
    """psi(t + 1) - log t."""
    return digamma1p_minus_log(t)


# --------------------------------------------------------------------------
# Tail model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TailFit:
    power: float
    coefficients: np.ndarray  # shape (J, Q+1), row j multiplies (t/T)^-(p+j)
    residual: float


_ROWS = 3


def _tail_basis(v, p, Q):
    cols = []
    for j in range(_ROWS):
        decay = np.exp(-(p + j) * v)
        for q in range(Q + 1):
            cols.append(decay * v ** q)
    return np.stack(cols, axis=1)


def _fit_at(p, v, fv, Q):
    A = _tail_basis(v, p, Q)
    scale = np.max(np.abs(A), axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, fv, rcond=None)
    coef = coef / scale
    resid = np.linalg.norm(A @ coef - fv) / max(np.linalg.norm(fv), 1e-300)
    return coef, float(resid)


def fit_tail(f, T: float, p_range: tuple[float, float], Q: int = 2, points: int = 41) -> TailFit:
    """Fit the decay model to f on [T/10, T]; v = log(t/T) runs over [-log 10, 0]."""
    v = np.linspace(-math.log(10.0), 0.0, points)
    fv = np.asarray(f(T * np.exp(v)), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise TailModelError("integrand is not finite on the fitting window")
    if np.all(fv == 0):
        return TailFit(p_range[0], np.zeros((_ROWS, Q + 1)), 0.0)
    lo, hi = p_range
    grid = np.linspace(lo, hi, int(round((hi - lo) / 0.05)) + 1)
    resids = np.array([_fit_at(p, v, fv, Q)[1] for p in grid])
    # With several decay rows, p and p - 1 describe an exact power equally well
    # (the leading row is simply unused).  Take the fastest decay that fits to
    # within twice the best residual; a looser tie lets noise pick the power.
    ok = np.nonzero(resids <= max(2.0 * resids.min(), 1e-13))[0]
    k = int(ok[-1])
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    # log-power columns absorb small shifts of p, so the optimizer's p is only
    # taken when it clearly beats the grid point; otherwise it drifts on noise.
    p = float(grid[k])
    if b > a and resids[k] > 1e-12:
        opt = minimize_scalar(lambda p: _fit_at(p, v, fv, Q)[1], bounds=(a, b),
                              method="bounded", options={"xatol": 1e-10})
        if opt.fun < 0.1 * resids[k]:
            p = float(opt.x)
    coef, resid = _fit_at(p, v, fv, Q)
    return TailFit(p, coef.reshape(_ROWS, Q + 1), resid)


def _tail_integral(fit: TailFit, s: complex, T: float, rows=None) -> complex:
    total = 0j
    rows = range(fit.coefficients.shape[0]) if rows is None else rows
    Q = fit.coefficients.shape[1] - 1
    for j in rows:
        rate = fit.power + j - s
        for q in range(Q + 1):
            total += fit.coefficients[j, q] * math.factorial(q) / rate ** (q + 1)
    return complex(np.exp(s * math.log(T)) * total)


# --------------------------------------------------------------------------
# Forward transform
# --------------------------------------------------------------------------

_FIT_RESIDUAL_MAX = 1e-6


def mellin_numeric(f: Callable[[np.ndarray], np.ndarray], s, cfg: QuadratureConfig | None = None,
                   tail: bool = True) -> IntegralResult:
    """int_0^inf t^(s-1) f(t) dt for s inside the strip carried by ``s``."""
    cfg = cfg or QuadratureConfig()
    point = _as_point(s)
    s = point.s
    T = cfg.upper_truncation
    logT = math.log(T)

    def g(u):
        return np.exp(s * u) * np.asarray(f(np.exp(u)), dtype=float)

    lo = decay_cutoff(g, -1.0, -1.0, cfg.abs_tol / 10.0, -740.0)
    lower = integrate(g, lo, 0.0, cfg.abs_tol / 2, cfg.rel_tol, cfg.max_subdivisions,
                      initial_panels=max(1, int(-lo / 4)))
    mid = logT - math.log(10.0)
    upper = integrate(g, 0.0, mid, cfg.abs_tol / 4, cfg.rel_tol, cfg.max_subdivisions,
                      initial_panels=max(1, int(mid / 2)))
    last = integrate(g, mid, logT, cfg.abs_tol / 4, cfg.rel_tol, cfg.max_subdivisions,
                     initial_panels=2)
    # Neglected piece below the cutoff: the integrand stays under abs_tol/10 over
    # the probing window and decays at least geometrically beyond it.
    cutoff_err = cfg.abs_tol / 10.0
    result = lower + upper + last
    if not tail:
        return IntegralResult(result.value, result.error + cutoff_err, result.evaluations)

    p_range = (point.hi - 1.0, point.hi + 2.0)
    fit = fit_tail(f, T, p_range, cfg.tail_order)
    if fit.residual > _FIT_RESIDUAL_MAX:
        raise TailModelError(
            f"decay model does not describe the integrand beyond t = {T / 10:g} "
            f"(relative residual {fit.residual:.2g})", estimate=result.value, error=result.error)
    if fit.power - s.real <= 0:
        raise TailModelError(
            f"integrand decays like t^-{fit.power:.3g}: the transform diverges at Re s = {s.real:g}",
            estimate=result.value, error=result.error)
    full = _tail_integral(fit, s, T)
    # Model error: redo the tail from T/10 with a fit one decade lower.  Model
    # error shrinks with T, but evaluation noise in f is shared by both fits, so
    # the gap is doubled to cover the fit from T as well.
    early = fit_tail(f, T / 10, p_range, cfg.tail_order)
    gap = abs(full + last.value - _tail_integral(early, s, T / 10))
    lead = _tail_integral(fit, s, T, rows=range(_ROWS - 1))
    scale = max(abs(full), 1e-300)
    tail_bound = 2.0 * max(gap, abs(full - lead)) + fit.residual * scale + 1e-16 * scale
    value = result.value + full
    if abs(value.imag) <= 1e-300 and s.imag == 0:
        value = complex(value.real, 0.0)
    return IntegralResult(value, result.error + cutoff_err, result.evaluations + 82, tail_bound)


# --------------------------------------------------------------------------
# Closed forms
# --------------------------------------------------------------------------

def rhs_closed_form(ident, s) -> complex:
    """Right-hand side of the forward-transform identities at s."""
    ident = IdentityId.parse(ident)
    point = _as_point(s)
    s = point.s
    if ident not in _S_IDENTITIES:
        raise UnsupportedError(f"{ident.value} has no closed form in s")
    if s.imag == 0 and float(s.real).is_integer():
        raise PoleError("sin(pi s) vanishes at integer s")
    sn = np.sin(PI * s)
    if ident is IdentityId.EQ1_4:
        return complex(PI ** 2 / sn ** 2)
    if ident is IdentityId.EQ1_5:
        return complex(2 * PI ** 3 / sn ** 3)
    z = complex(zeta(1.0 - s))
    if ident is IdentityId.EQ1_1:
        return complex(-PI * z / sn)
    if ident is IdentityId.EQ1_2:
        return complex(PI ** 2 * z / sn ** 2)
    return complex(2 * PI ** 3 * z / sn ** 3)


# --------------------------------------------------------------------------
# Inverse line integral
# --------------------------------------------------------------------------

def _line_transform(s):
    return PI ** 2 * zeta(1.0 - s) / np.sin(PI * s) ** 2


@lru_cache(maxsize=32)
def _line_nodes(c: float, H: float, panels: int):
    edges = np.linspace(-H, H, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    w = (half[:, None] * KRONROD_WEIGHTS[None, :]).ravel()
    F = np.asarray(_line_transform(c + 1j * y), dtype=complex)
    for arr in (y, w, F):
        arr.setflags(write=False)
    return y, w, F


def line_cutoff(c: float, xmax_power: float, abs_tol: float) -> float:
    """Height H beyond which the integrand is below abs_tol.

    |csc^2(pi s)| <= 4 e^(-2 pi |y|) / (1 - e^(-2 pi |y|))^2 and
    |zeta(1 - s)| <= zeta(1 - c) on Re s = c.
    """
    bound = 4.0 * PI ** 2 * float(zeta(1.0 - c)) * xmax_power
    H = max(1.0, math.log(bound / abs_tol) / (2 * PI))
    for _ in range(5):
        H = max(1.0, math.log(bound / (abs_tol * (1 - math.exp(-2 * PI * H)) ** 2)) / (2 * PI))
    return H


def inverse_mellin_line(ident, x, c: float = -0.5, cfg: QuadratureConfig | None = None,
                        return_error: bool = False):
    """(1/2 pi i) int_{Re s = c} pi^2 zeta(1-s) / sin^2(pi s) x^-s ds for -1 < c < 0.

    Vectorized over x.  The composite K15 rule on [-H, H] is refined by panel
    doubling until successive values agree to the tolerance.
    """
    cfg = cfg or QuadratureConfig()
    if IdentityId.parse(ident) is not IdentityId.EQ1_6:
        raise UnsupportedError("only eq1.6 has an inverse line representation")
    c = float(c)
    if not -1.0 < c < 0.0:
        raise StripError(f"line abscissa c = {c:g} must lie in (-1, 0)")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x).ravel()
    if np.any(~(xs > 0)) or np.any(~np.isfinite(xs)):
        raise DomainError("inverse_mellin_line needs x > 0")
    logx = np.log(xs)
    # abs_tol is measured in units of the envelope x^-c, so small x keeps its
    # relative accuracy instead of drowning in an absolute floor.
    envelope = np.exp(-c * logx)
    H = line_cutoff(c, max(1.0, float(np.max(envelope))), cfg.abs_tol)
    if H > 55.0:
        raise NonConvergenceError(f"truncation height {H:.3g} exceeds the zeta range")

    def evaluate(panels):
        y, w, F = _line_nodes(c, round(H, 12), panels)
        phase = np.exp(-np.outer(logx, c + 1j * y))
        return (phase * F[None, :]) @ w / (2 * PI)

    panels = 8
    prev = evaluate(panels)
    while True:
        panels *= 2
        cur = evaluate(panels)
        diff = np.abs(cur - prev)
        tol = np.maximum(cfg.abs_tol * envelope, cfg.rel_tol * np.abs(cur))
        if np.all(diff <= tol):
            break
        if panels > cfg.max_subdivisions:
            raise NonConvergenceError("inverse line integral did not settle",
                                      estimate=cur.real, error=float(np.max(diff)))
        prev = cur
    if np.any(np.abs(cur.imag) > 1e-9 * np.maximum(1.0, np.abs(cur.real))):
        raise NonConvergenceError("inverse line integral has a non-negligible imaginary part")
    val = cur.real
    err = diff + cfg.abs_tol * envelope
    if scalar:
        val, err = float(val[0]), float(err[0])
    else:
        val, err = val.reshape(x.shape), err.reshape(x.shape)
    return (val, err) if return_error else val
