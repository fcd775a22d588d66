"""Contour-integral residues and the log-polynomials they produce.

The polynomials subtracted from the Lambda series come from residues of
pi^2 csc^2(pi s) zeta(s) x^(s-1) and 2 pi^3 csc^3(pi s) zeta(s) x^(s-1) at s = 1.
They are extracted here numerically by the trapezoid rule on a circle, which
converges geometrically for integrands analytic in an annulus around the
contour, and then fitted as polynomials in L = log x.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FitResidualError, NonAnalyticError, OracleNotRunError, UnsupportedError
from .specialfn import stieltjes, zeta

PAPER = "paper-printed"
ORACLE = "oracle-resolved"
KINDS = ("lambda1", "lambda2")


@dataclass(frozen=True)
class SubtractionPolynomial:
    """P(L) = c3 L^3 + c2 L^2 + c1 L + c0 with L = log x."""

    kind: str
    c0: float
    c1: float
    c2: float
    c3: float
    provenance: str
    fit_residual: float = 0.0
    raw_c3: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedError(f"unknown Lambda kind {self.kind!r}")
        if self.provenance not in (PAPER, ORACLE):
            raise ValueError(f"provenance must be {PAPER!r} or {ORACLE!r}")
        if self.kind == "lambda1" and self.c3 != 0.0:
            raise ValueError("the lambda1 polynomial has no cubic term")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValueError("coefficients must be finite")

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.c0, self.c1, self.c2, self.c3)

    def __call__(self, L):
        L = np.asarray(L, dtype=float)
        out = ((self.c3 * L + self.c2) * L + self.c1) * L + self.c0
        return out.item() if out.ndim == 0 else out

    def at_x(self, x):
        return self(np.log(x))


def residue_oracle(F: Callable[[np.ndarray], np.ndarray], s0: complex, r: float = 0.25,
                   M: int = 64, check: bool = True) -> complex:
    """(1/2 pi i) times the contour integral of F around |s - s0| = r (M-point trapezoid).

    With ``check`` the computation is repeated at radius r/2; a disagreement
    beyond 1e-8 means F is not analytic on the punctured disk.
    """
    if not 0 < r <= 0.3:
        raise ValueError("contour radius must lie in (0, 0.3]")
    if M < 32:
        raise ValueError("at least 32 contour nodes are required")

    def ring(radius):
        theta = 2.0 * np.pi * np.arange(M) / M
        dz = radius * np.exp(1j * theta)
        vals = np.asarray(F(s0 + dz), dtype=complex)
        return complex(np.mean(vals * dz))

    res = ring(r)
    if check:
        res_half = ring(0.5 * r)
        if abs(res - res_half) > 1e-8 * max(1.0, abs(res)):
            raise NonAnalyticError(
                f"residue depends on the contour radius ({res} at r={r}, {res_half} at r={r / 2})")
    return res


def residue_integrand(kind: str, x: float) -> Callable[[np.ndarray], np.ndarray]:
    """F(s) whose residue at s = 1 is the subtraction polynomial at this x."""
    logx = math.log(x)
    if kind == "lambda1":
        return lambda s: (np.pi / np.sin(np.pi * s)) ** 2 * zeta(s) * np.exp((s - 1.0) * logx)
    if kind == "lambda2":
        return lambda s: 2.0 * (np.pi / np.sin(np.pi * s)) ** 3 * zeta(s) * np.exp((s - 1.0) * logx)
    raise UnsupportedError(f"unknown Lambda kind {kind!r}")


FIT_XS = tuple(np.geomspace(0.5, 20.0, 6))

_FIT_LOCK = threading.Lock()
_FITTED: dict[str, SubtractionPolynomial] = {}


def fit_residue_polynomial(kind: str, r: float = 0.25, M: int = 64) -> SubtractionPolynomial:
    """Least-squares cubic in log x through six contour residues on x in [0.5, 20]."""
    if kind not in KINDS:
        raise UnsupportedError(f"unknown Lambda kind {kind!r}")
    xs = np.array(FIT_XS)
    R = np.array([residue_oracle(residue_integrand(kind, x), 1.0, r, M) for x in xs])
    if np.max(np.abs(R.imag)) > 1e-9 * max(1.0, np.max(np.abs(R.real))):
        raise FitResidualError("residues of a real-symmetric integrand came out complex")
    L = np.log(xs)
    A = np.vander(L, 4, increasing=True)
    coef, *_ = np.linalg.lstsq(A, R.real, rcond=None)
    residual = float(np.max(np.abs(A @ coef - R.real)))
    if residual > 1e-8:
        raise FitResidualError(f"residue fit residual {residual:.3g} exceeds 1e-8")
    c0, c1, c2, c3 = (float(c) for c in coef)
    raw_c3 = c3
    if kind == "lambda1":
        if abs(c3) > 1e-9:
            raise FitResidualError(f"lambda1 residue has a cubic term {c3:.3g}")
        c3 = 0.0
    poly = SubtractionPolynomial(kind, c0, c1, c2, c3, ORACLE, residual, raw_c3)
    with _FIT_LOCK:
        _FITTED[kind] = poly
    return poly


def paper_polynomial(kind: str) -> SubtractionPolynomial:
    """The brackets exactly as printed, with the Stieltjes constants computed here."""
    g0, g1, g2 = stieltjes(0), stieltjes(1), stieltjes(2)
    pi2 = math.pi ** 2
    if kind == "lambda1":
        # (1/2)(L^2 - 2 g0 L - 2 g1 + pi^2/3)
        return SubtractionPolynomial(kind, -g1 + pi2 / 6.0, -g0, 0.5, 0.0, PAPER)
    if kind == "lambda2":
        # -g2 + 2 g1 L - L^3/3 - g0 (pi^2 + L^2) - pi^2 L
        return SubtractionPolynomial(kind, -g2 - g0 * pi2, 2.0 * g1 - pi2, -g0, -1.0 / 3.0, PAPER)
    raise UnsupportedError(f"unknown Lambda kind {kind!r}")


def subtraction_poly(kind: str, source: str = ORACLE, run_oracle: bool = True) -> SubtractionPolynomial:
    """Subtraction polynomial for a Lambda kind from either source.

    The oracle fit is cached after its first run; with ``run_oracle=False``
    asking for it before any fit raises OracleNotRunError.
    """
    if source in (PAPER, "paper"):
        return paper_polynomial(kind)
    if source not in (ORACLE, "oracle"):
        raise ValueError(f"unknown polynomial source {source!r}")
    if kind not in KINDS:
        raise UnsupportedError(f"unknown Lambda kind {kind!r}")
    with _FIT_LOCK:
        cached = _FITTED.get(kind)
    if cached is not None:
        return cached
    if not run_oracle:
        raise OracleNotRunError(f"fit_residue_polynomial({kind!r}) has not run")
    return fit_residue_polynomial(kind)


def _forget_fits():
    with _FIT_LOCK:
        _FITTED.clear()
