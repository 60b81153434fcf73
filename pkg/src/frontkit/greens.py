"""Exponentially weighted convolutions for the wave fixed-point operator.

The operator inverts  -d u'' + c u' + beta u  through its two-sided
exponential kernel: exponents nu1 < 0 < nu2 solve d nu^2 - c nu - beta = 0
and

    (G L)(xi) = [ int_{-inf}^{xi} e^{nu1 (xi - s)} L(s) ds
                + int_{xi}^{+inf} e^{nu2 (xi - s)} L(s) ds ] / (d (nu2 - nu1)).

On a uniform grid both integrals satisfy first-order recurrences whose cell
contributions are integrated exactly against the piecewise-linear
interpolant of L.  That keeps the scheme second order in h uniformly in
nu2*h: for stiff exponents (small d) the kernel collapses onto the grid
cell and naive product quadrature would be off by orders of magnitude.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter

__all__ = ["exponents", "green_apply"]


def exponents(d: float, c: float, beta: float) -> tuple[float, float]:
    """Roots nu1 < 0 < nu2 of d nu^2 - c nu - beta = 0 (stable formulas)."""
    if d <= 0 or beta <= 0:
        raise ValueError("need d > 0 and beta > 0")
    s = math.sqrt(c * c + 4.0 * beta * d)
    nu1 = -2.0 * beta / (c + s)
    nu2 = (c + s) / (2.0 * d)
    return nu1, nu2


def _left_cells(L: np.ndarray, h: float, nu1: float) -> np.ndarray:
    """Exact integrals int_{x_{j-1}}^{x_j} e^{nu1 (x_j - s)} L(s) ds for the
    piecewise-linear L; entry j corresponds to the cell ending at x_j."""
    e0 = math.expm1(nu1 * h) / nu1
    e1 = (h * math.exp(nu1 * h) - e0) / nu1
    return e0 * L[1:] + (e1 / h) * (L[:-1] - L[1:])


def _right_cells(L: np.ndarray, h: float, nu2: float) -> np.ndarray:
    """Exact integrals int_{x_j}^{x_{j+1}} e^{nu2 (x_j - s)} L(s) ds; entry j
    corresponds to the cell starting at x_j."""
    f0 = -math.expm1(-nu2 * h) / nu2
    f1 = (f0 - h * math.exp(-nu2 * h)) / nu2
    return f0 * L[:-1] + (f1 / h) * (L[1:] - L[:-1])


def green_apply(L: np.ndarray, h: float, d: float, c: float, beta: float,
                left_tail_integral: float = 0.0,
                right_tail_integral: float = 0.0) -> np.ndarray:
    """Apply the two-sided exponential kernel to grid values L.

    left_tail_integral must equal int_{-inf}^{x_0} e^{nu1 (x_0 - s)} L(s) ds
    (0 truncates the domain at x_0); right_tail_integral likewise for
    int_{x_N}^{inf} e^{nu2 (x_N - s)} L(s) ds.
    """
    L = np.asarray(L, dtype=float)
    nu1, nu2 = exponents(d, c, beta)

    a1 = math.exp(nu1 * h)
    cells = _left_cells(L, h, nu1)
    left = np.empty_like(L)
    left[0] = left_tail_integral
    left[1:], _ = lfilter([1.0], [1.0, -a1], cells, zi=[a1 * left[0]])

    a2 = math.exp(-nu2 * h)
    cells = _right_cells(L, h, nu2)
    right = np.empty_like(L)
    right[-1] = right_tail_integral
    rev, _ = lfilter([1.0], [1.0, -a2], cells[::-1], zi=[a2 * right[-1]])
    right[:-1] = rev[::-1]

    return (left + right) / (d * (nu2 - nu1))


def left_tail_exponential(amplitude: float, rate: float, x0: float,
                          nu1: float) -> float:
    """Exact int_{-inf}^{x0} e^{nu1 (x0 - s)} A e^{rate s} ds for rate > nu1.

    Covers the decaying left extension (rate > 0) and the constant one
    (rate = 0).
    """
    if amplitude == 0.0:
        return 0.0
    if rate <= nu1:
        raise ValueError("tail must decay slower than the kernel grows")
    return amplitude * math.exp(rate * x0) / (rate - nu1)
