"""Gamma, digamma, zeta, zeta derivatives, Stieltjes constants and Xi.

All routines are double precision and accept either scalars or numpy arrays.
Scalars in give scalars out; real input gives real output where the function
is real on the real axis.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._eulermaclaurin import em_excess, logpoly_sum
from .errors import (
    AccuracyError,
    DomainError,
    GammaOverflowError,
    PoleError,
    UnsupportedError,
)

__all__ = [
    "PrecisionPolicy",
    "StieltjesTable",
    "EULER_GAMMA",
    "gamma",
    "loggamma",
    "digamma",
    "digamma1p_minus_log",
    "zeta",
    "zeta_deriv",
    "stieltjes",
    "stieltjes_table",
    "xi",
    "xi_critical",
]

# Cross-checked in the tests against stieltjes(0); used only where a literal
# constant is unavoidable (digamma at x=1 is derived, not looked up).
EULER_GAMMA = 0.57721566490153286061

_LOG_MAX = 709.78

# Rational Lanczos approximation (g = 6.0246800407767295..., 13 terms) in the
# "exp(g)-scaled" form used by Boost and cephes.  Coefficients are in
# descending powers of z.
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_NUM = np.array([
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
])
_LANCZOS_DEN = np.array([
    1,
    66,
    1925,
    32670,
    357423,
    2637558,
    13339535,
    45995730,
    105258076,
    150917976,
    120543840,
    39916800,
    0,
])


@dataclass(frozen=True)
class PrecisionPolicy:
    target_rel: float = 1e-13
    max_terms: int = 4096
    em_order: int = 8

    def __post_init__(self):
        if not 1e-15 <= self.target_rel <= 1e-6:
            raise ValueError("target_rel must lie in [1e-15, 1e-6]")
        if self.max_terms <= 0 or self.em_order <= 0:
            raise ValueError("term and order caps must be positive")


DEFAULT_POLICY = PrecisionPolicy()


def _prep(z, dtype=complex):
    arr = np.asarray(z)
    was_complex = np.iscomplexobj(arr)
    return arr.astype(dtype), arr.ndim == 0, was_complex


def _finish(out, scalar, keep_complex):
    if not keep_complex:
        out = out.real
    if scalar:
        return out.item()
    return out


# --------------------------------------------------------------------------
# Gamma
# --------------------------------------------------------------------------

def _lanczos_sum(z):
    return np.polyval(_LANCZOS_NUM, z) / np.polyval(_LANCZOS_DEN, z)


def _lanczos_loggamma(z):
    # Valid for Re z >= 1/2.
    zgh = z + _LANCZOS_G - 0.5
    return np.log(_lanczos_sum(z)) + (z - 0.5) * (np.log(zgh) - 1.0)


def _two_prod(a, b):
    # Dekker/Veltkamp: a*b == p + e exactly.
    p = a * b
    split = 134217729.0
    ca = split * a
    ah = ca - (ca - a)
    al = a - ah
    cb = split * b
    bh = cb - (cb - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _lanczos_gamma(z):
    """Gamma for Re z >= 1/2 with the exponent (z-1/2)(log(z+g-1/2) - 1) kept in double-double.

    The imaginary part of that exponent reaches ~150 at |z| = 50, so a plain
    exp(loggamma) loses ~1e-13 of relative accuracy to phase rounding.
    """
    w = z - 0.5
    L = np.log(z + _LANCZOS_G - 0.5) - 1.0
    p1, e1 = _two_prod(w.real, L.real)
    p2, e2 = _two_prod(w.imag, L.imag)
    p3, e3 = _two_prod(w.real, L.imag)
    p4, e4 = _two_prod(w.imag, L.real)
    re_hi = p1 - p2
    re_lo = ((p1 - re_hi) - p2) + (e1 - e2)
    im_hi = p3 + p4
    bb = im_hi - p3
    im_lo = ((p3 - (im_hi - bb)) + (p4 - bb)) + (e3 + e4)
    if np.any(re_hi > _LOG_MAX):
        raise GammaOverflowError("|gamma(z)| exceeds the double range")
    return np.exp(re_hi + 1j * im_hi) * np.exp(re_lo + 1j * im_lo) * _lanczos_sum(z)


def _check_poles(z):
    on_pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(on_pole):
        bad = z[on_pole].real.ravel()[0]
        raise PoleError(f"gamma has a pole at z = {bad:g}")


def loggamma(z):
    """Principal-branch-agnostic log Gamma (real part is log|Gamma|)."""
    z, scalar, was_complex = _prep(z)
    _check_poles(z)
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = _lanczos_loggamma(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = math.log(math.pi) - np.log(sinpi(zl)) - _lanczos_loggamma(1.0 - zl)
    return _finish(out, scalar, True)


def sinpi(z):
    """sin(pi z) with the integer part of Re z removed exactly first."""
    z = np.asarray(z, dtype=complex)
    n = np.round(z.real)
    sign = np.where(np.mod(n, 2) == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * (z - n))


def gamma(z):
    """Gamma function; reflection formula for Re z < 1/2."""
    z, scalar, was_complex = _prep(z)
    _check_poles(z)
    out = np.empty_like(z)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_gamma(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        with np.errstate(over="ignore"):
            out[left] = np.pi / (sinpi(zl) * _lanczos_gamma(1.0 - zl))
        if not np.all(np.isfinite(out[left])):
            raise GammaOverflowError("|gamma(z)| exceeds the double range")
    return _finish(out, scalar, was_complex)


# --------------------------------------------------------------------------
# Digamma
# --------------------------------------------------------------------------

# B_{2k} / (2k) for k = 1..7
_PSI_ASYMP = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)


def _psi_asymptotic_tail(x):
    """sum_k B_2k / (2k x^2k), the correction after log x - 1/(2x)."""
    inv2 = 1.0 / (x * x)
    acc = np.zeros_like(x)
    for c in reversed(_PSI_ASYMP):
        acc = (acc + c) * inv2
    return acc


def digamma(x):
    """psi(x) for real x > 0 via upward recurrence to x >= 10 and the asymptotic series."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x).copy()
    if np.any(~(x > 0)):
        raise DomainError("digamma is implemented for x > 0 only")
    shift = np.zeros_like(x)
    small = x < 10.0
    while np.any(small):
        shift[small] -= 1.0 / x[small]
        x[small] += 1.0
        small = x < 10.0
    out = np.log(x) - 0.5 / x - _psi_asymptotic_tail(x) + shift
    return out.item() if scalar else out


def digamma1p_minus_log(t):
    """psi(t+1) - log t for t > 0, free of cancellation at large t."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(~(t > 0)):
        raise DomainError("psi(t+1) - log t needs t > 0")
    out = np.empty_like(t)
    big = t >= 10.0
    tb = t[big]
    out[big] = 0.5 / tb - _psi_asymptotic_tail(tb)
    ts = t[~big]
    out[~big] = digamma(ts + 1.0) - np.log(ts)
    return out.item() if scalar else out


# --------------------------------------------------------------------------
# Zeta
# --------------------------------------------------------------------------

_BORWEIN_RATE = math.log(3.0 + math.sqrt(8.0))


@lru_cache(maxsize=64)
def _borwein_weights(n: int) -> np.ndarray:
    """e_k = (-1)^k (1 - d_k / d_n), k < n, from exact rational arithmetic."""
    terms = []
    for i in range(n + 1):
        terms.append(Fraction(n * math.factorial(n + i - 1) * 4**i,
                              math.factorial(n - i) * math.factorial(2 * i)))
    d = []
    acc = Fraction(0)
    for term in terms:
        acc += term
        d.append(acc)
    dn = d[n]
    w = [(-1) ** k * float(1 - d[k] / dn) for k in range(n)]
    w = np.array(w)
    w.setflags(write=False)
    return w


def _borwein_terms(tmax: float) -> int:
    return int(math.ceil((38.0 + 0.5 * math.pi * tmax) / _BORWEIN_RATE)) + 2


def _zeta_borwein(s):
    """Alternating-series (eta) evaluation with Borwein weights."""
    if s.size == 0:
        return s.copy()
    n = _borwein_terms(float(np.max(np.abs(s.imag))))
    w = _borwein_weights(n)
    logk = np.log(np.arange(1, n + 1, dtype=float))
    out = np.empty_like(s)
    flat_s = s.ravel()
    flat_out = out.ravel()
    chunk = max(1, 200000 // n)
    for start in range(0, flat_s.size, chunk):
        ss = flat_s[start:start + chunk]
        eta = np.exp(-np.outer(ss, logk)) @ w
        denom = -np.expm1((1.0 - ss) * math.log(2.0))
        flat_out[start:start + chunk] = eta / denom
    return flat_out.reshape(s.shape)


def _zeta_functional(s):
    """zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1-s) zeta(1-s)."""
    one_minus = 1.0 - s
    return (np.exp(s * math.log(2.0) + (s - 1.0) * math.log(math.pi))
            * sinpi(0.5 * s) * gamma(one_minus) * _zeta_borwein(one_minus))


def zeta(s):
    """Riemann zeta function for complex s != 1."""
    s, scalar, was_complex = _prep(s)
    if np.any(s == 1.0):
        raise PoleError("zeta has a pole at s = 1")
    flat = s.ravel()
    out = np.empty_like(flat)
    # 1 - 2^(1-s) vanishes on Re s = 1 away from s = 1; reflect there too.
    near_eta_zero = (np.abs(-np.expm1((1.0 - flat) * math.log(2.0))) < 0.25) & (np.abs(flat - 1.0) > 0.5)
    # The eta series is still accurate a little left of 0; reflecting there would
    # evaluate zeta(1 - s) next to its pole.
    reflect = (flat.real < -0.5) | near_eta_zero
    out[~reflect] = _zeta_borwein(flat[~reflect])
    if np.any(reflect):
        out[reflect] = _zeta_functional(flat[reflect])
    return _finish(out.reshape(s.shape), scalar, was_complex)


def zeta_error_bound(s) -> float:
    """Truncation bound of the alternating-series evaluation at s (relative scale)."""
    s = complex(s)
    n = _borwein_terms(abs(s.imag))
    t = abs(s.imag)
    return 3.0 * (1 + 2 * t) * math.exp(0.5 * math.pi * t - n * _BORWEIN_RATE) + 4e-16 * n


def zeta_deriv(k: int, sigma: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """k-th derivative of zeta on the real axis, k in {0, 1, 2}, sigma > 1."""
    if k not in (0, 1, 2):
        raise UnsupportedError(f"zeta_deriv supports k in {{0, 1, 2}}, got {k}")
    if not sigma > 1:
        raise DomainError("zeta_deriv needs sigma > 1")
    if k == 0:
        return float(zeta(float(sigma)))
    coeffs = [0.0] * k + [(-1.0) ** k]
    value, _ = logpoly_sum(float(sigma), coeffs, order=policy.em_order)
    return float(value)


@lru_cache(maxsize=8)
def zeta_deriv_table(nmax: int) -> np.ndarray:
    """Rows k = 0, 1, 2 of zeta^(k)(1 + n) for n = 1..nmax (column n-1)."""
    table = np.empty((3, nmax))
    for n in range(1, nmax + 1):
        for k in range(3):
            table[k, n - 1] = zeta_deriv(k, 1.0 + n)
    table.setflags(write=False)
    return table


# --------------------------------------------------------------------------
# Stieltjes constants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StieltjesTable:
    gamma0: float
    gamma1: float
    gamma2: float
    err0: float
    err1: float
    err2: float

    def __post_init__(self):
        if max(self.err0, self.err1, self.err2) > 1e-12:
            raise AccuracyError("Stieltjes table exceeds its error budget")
        if not (0.5 < self.gamma0 < 0.6 and -0.1 < self.gamma1 < 0 and -0.02 < self.gamma2 < 0):
            raise AccuracyError("Stieltjes constants fell outside their known ranges")

    def __getitem__(self, n: int) -> float:
        return (self.gamma0, self.gamma1, self.gamma2)[n]

    def error(self, n: int) -> float:
        return (self.err0, self.err1, self.err2)[n]


def _stieltjes_limit(n: int, N: int, order: int) -> tuple[float, float]:
    # gamma_n = sum_{k<N} log^n k / k - log^(n+1) N / (n+1) + EM excess at N
    k = np.arange(1, N, dtype=float)
    head = float(np.sum(np.log(k) ** n / k))
    coeffs = [0.0] * n + [1.0]
    excess, last = em_excess(1.0, coeffs, N, order)
    value = head - math.log(N) ** (n + 1) / (n + 1) + excess
    rounding = 8 * 2.2e-16 * (abs(head) + 1.0)
    return float(value), float(last + rounding)


_STIELTJES_LOCK = threading.Lock()
_STIELTJES: StieltjesTable | None = None


def stieltjes_table(policy: PrecisionPolicy = DEFAULT_POLICY) -> StieltjesTable:
    """Compute (once) gamma_0..gamma_2 from the accelerated defining limit."""
    global _STIELTJES
    if _STIELTJES is None:
        with _STIELTJES_LOCK:
            if _STIELTJES is None:
                vals = [_stieltjes_limit(n, 64, policy.em_order) for n in range(3)]
                _STIELTJES = StieltjesTable(
                    vals[0][0], vals[1][0], vals[2][0],
                    vals[0][1], vals[1][1], vals[2][1],
                )
    return _STIELTJES


def stieltjes(n: int) -> float:
    if n not in (0, 1, 2):
        raise UnsupportedError(f"stieltjes supports n in {{0, 1, 2}}, got {n}")
    return stieltjes_table()[n]


# --------------------------------------------------------------------------
# Riemann xi
# --------------------------------------------------------------------------

def xi(s):
    """xi(s) = s (s-1) pi^(-s/2) Gamma(s/2) zeta(s) / 2 (complex)."""
    s, scalar, _ = _prep(s)
    out = 0.5 * s * (s - 1.0) * np.exp(-0.5 * s * math.log(math.pi)) * gamma(0.5 * s) * zeta(s)
    return _finish(out, scalar, True)


def xi_critical(t, return_residue: bool = False):
    """Xi(t) = xi(1/2 + i t) for real |t| <= 60.

    The discarded imaginary part must stay within 1e-10 |Xi(t)| plus a floor
    of 1e-11 times the size of the Gamma prefactor, which keeps the check
    meaningful next to zeros of Xi where the value itself vanishes.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(np.abs(t) > 60):
        raise DomainError("xi_critical is supported for |t| <= 60")
    s = 0.5 + 1j * t
    pref = 0.5 * s * (s - 1.0) * np.exp(-0.5 * s * math.log(math.pi)) * gamma(0.5 * s)
    val = pref * zeta(s)
    budget = 1e-10 * np.abs(val.real) + 1e-11 * np.abs(pref)
    if np.any(np.abs(val.imag) > budget):
        raise AccuracyError("imaginary residue of Xi exceeds its budget")
    re = val.real
    res = np.abs(val.imag)
    if scalar:
        re, res = re.item(), res.item()
    return (re, res) if return_residue else re
