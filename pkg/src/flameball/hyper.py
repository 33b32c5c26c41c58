"""Overflow-safe hyperbolic ratios used throughout the radial closed forms.

Every ratio of the form sinh(a*x)/sinh(a) or cosh combinations is evaluated
through exponentials of non-positive arguments, so the branch parameter can
grow like 1/sqrt(eps) without overflowing double precision.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "tanhc",
    "sinh_ratio",
    "cosh_ratio",
    "screened_laplace_kernel",
    "screened_laplace_kernel_deriv",
    "inv_x_sinh",
]

# Below this radius the kernel switches to its even Taylor expansion; the
# direct expm1 quotient would divide a subnormal by r.
_SERIES_RADIUS = 1e-4


def tanhc(x):
    """tanh(x)/x with the removable limit tanhc(0) = 1."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = np.abs(x) > 1e-150
    out[nz] = np.tanh(x[nz]) / x[nz]
    return float(out) if out.ndim == 0 else out


def sinh_ratio(a: float, x):
    """sinh(a*x)/sinh(a) for a >= 0 and x in [0, 1], overflow-safe.

    Evaluated as exp(a(x-1)) * expm1(-2ax)/expm1(-2a); all exponents are
    non-positive so arbitrarily large a is fine.
    """
    x = np.asarray(x, dtype=float)
    if a == 0.0:
        out = x.copy()
        return float(out) if out.ndim == 0 else out
    out = np.exp(a * (x - 1.0)) * np.expm1(-2.0 * a * x) / np.expm1(-2.0 * a)
    return float(out) if out.ndim == 0 else out


def cosh_ratio(a: float, x):
    """cosh(a*x)/sinh(a) for a > 0 and x in [0, 1], overflow-safe."""
    x = np.asarray(x, dtype=float)
    if a <= 0.0:
        raise ValueError("cosh_ratio requires a > 0")
    den = -np.expm1(-2.0 * a)
    out = np.exp(a * (x - 1.0)) * (1.0 + np.exp(-2.0 * a * x)) / den
    return float(out) if out.ndim == 0 else out


def inv_x_sinh(x: float) -> float:
    """1/(x*sinh(x)) without overflow for large x."""
    if x <= 0.0:
        raise ValueError("inv_x_sinh requires x > 0")
    if x > 30.0:
        return 2.0 * np.exp(-x) / (x * -np.expm1(-2.0 * x))
    return 1.0 / (x * np.sinh(x))


def screened_laplace_kernel(a: float, r):
    """Radial solution of the screened Laplace problem on the unit ball.

    Returns sinh(a*r)/(r*sinh(a)), the positive radial solution of
    ``lap(Z) = a^2 Z`` with Z(1) = 1; a = 0 gives the harmonic case Z == 1,
    and the removable singularity at r = 0 evaluates to a/sinh(a).
    Satisfies a/sinh(a) <= Z <= 1 on [0, 1].
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if np.any(r < 0) or np.any(r > 1.0 + 1e-12):
        raise ValueError("kernel radius must lie in [0, 1]")
    if a < 0:
        raise ValueError("kernel parameter must be nonnegative")
    out = np.empty_like(r)
    if a == 0.0:
        out[:] = 1.0
    else:
        small = r < _SERIES_RADIUS
        big = ~small
        out[big] = sinh_ratio(a, r[big]) / r[big]
        if np.any(small):
            # sinh(ar)/r = a(1 + (ar)^2/6 + (ar)^4/120 + ...); ar <= a*1e-4
            x2 = (a * r[small]) ** 2
            series = 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
            out[small] = a * series * _inv_sinh(a)
    return float(out[0]) if scalar else out


def screened_laplace_kernel_deriv(a: float, r):
    """d/dr of screened_laplace_kernel; the r = 0 limit is 0."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.zeros_like(r)
    if a == 0.0:
        return float(out[0]) if scalar else out
    small = r < _SERIES_RADIUS
    big = ~small
    rb = r[big]
    out[big] = (a * cosh_ratio(a, rb) - sinh_ratio(a, rb) / rb) / rb
    if np.any(small):
        # derivative of the even series: a^3 r/3 (1 + (ar)^2/10 + ...) / sinh(a)
        rs = r[small]
        x2 = (a * rs) ** 2
        series = 1.0 + x2 / 10.0 * (1.0 + x2 / 28.0)
        out[small] = a**3 * rs / 3.0 * series * _inv_sinh(a)
    return float(out[0]) if scalar else out


def _inv_sinh(a: float) -> float:
    if a > 30.0:
        return 2.0 * np.exp(-a) / -np.expm1(-2.0 * a)
    return 1.0 / np.sinh(a)
