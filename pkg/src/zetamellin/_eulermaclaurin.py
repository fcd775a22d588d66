"""Euler-Maclaurin tails for sums of the form sum_{n>=N} n^(-m) P(log n).

Every derivative of f(n) = n^(-m) P(log n) keeps the same shape,
f^(j)(n) = n^(-m-j) P_j(log n), with P_{j+1} = -(m+j) P_j + P_j'.  That makes
the correction terms exact polynomial evaluations, no finite differences.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial


@lru_cache(maxsize=None)
def _bernoulli_even(kmax: int) -> tuple[float, ...]:
    """B_2, B_4, ..., B_{2 kmax} from the Akiyama-Tanigawa recurrence."""
    nmax = 2 * kmax
    a = [Fraction(0)] * (nmax + 1)
    out = {}
    for m in range(nmax + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out[m] = a[0]
    return tuple(float(out[2 * k]) for k in range(1, kmax + 1))


def _derivative_polys(m: float, poly: Polynomial, count: int) -> list[Polynomial]:
    polys = [poly]
    for j in range(count - 1):
        p = polys[-1]
        polys.append(-(m + j) * p + p.deriv())
    return polys


def em_excess(m: float, coeffs, N: int, order: int = 8) -> tuple[float, float]:
    """Return (sum_{n>=N} f(n) - int_N^inf f, last-term size) for f = n^-m P(log n).

    Valid for m >= 1 (the difference converges even when the integral alone
    does not).  ``coeffs`` are the coefficients of P in increasing degree.
    """
    poly = Polynomial(coeffs)
    bern = _bernoulli_even(order)
    polys = _derivative_polys(m, poly, 2 * order)
    L = math.log(N)
    total = 0.5 * N ** (-m) * poly(L)
    last = 0.0
    for k in range(1, order + 1):
        j = 2 * k - 1
        term = bern[k - 1] / math.factorial(2 * k) * N ** (-m - j) * polys[j](L)
        total -= term
        last = abs(term)
    return total, last


def integral_tail(m: float, coeffs, N: float) -> float:
    """int_N^inf n^-m P(log n) dn for m > 1."""
    if m <= 1:
        raise ValueError("integral diverges for m <= 1")
    poly = Polynomial(coeffs)
    a = m - 1.0
    U = math.log(N)
    acc = 0.0
    d = poly
    j = 0
    while True:
        acc += d(U) / a ** (j + 1)
        if d.degree() == 0:
            break
        d = d.deriv()
        j += 1
    return math.exp(-a * U) * acc


def safe_start(m: float, order: int = 8, floor: int = 16) -> int:
    """Smallest start index keeping the EM series comfortably convergent."""
    return max(floor, int(math.ceil((m + 2 * order + 2) / math.pi)) + 1)


def logpoly_sum(m: float, coeffs, N: int | None = None, order: int = 8) -> tuple[float, float]:
    """sum_{n>=1} n^-m P(log n) for m > 1, with an error estimate.

    Direct summation for n < N, Euler-Maclaurin beyond.
    """
    if m <= 1:
        raise ValueError("series diverges for m <= 1")
    if N is None:
        N = safe_start(m, order)
    n = np.arange(1, N, dtype=float)
    head = float(np.sum(n ** (-m) * Polynomial(coeffs)(np.log(n))))
    tail, err = logpoly_tail(m, coeffs, N, order)
    return head + tail, err + 4e-16 * abs(head)


def logpoly_tail(m: float, coeffs, N: int, order: int = 8) -> tuple[float, float]:
    """sum_{n>=N} n^-m P(log n) for m > 1, with an error estimate."""
    excess, last = em_excess(m, coeffs, N, order)
    return integral_tail(m, coeffs, N) + excess, last
