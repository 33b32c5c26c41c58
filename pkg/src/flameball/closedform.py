"""Closed-form radial solutions for the indicator (on/off) ignition law.

With reaction rate equal to the indicator of u > theta, the rescaled system
on the unit ball reduces to transcendental matching conditions in the
parameters (eps, beta).  Two reaction geometries occur:

* ball mode    -- u > theta on the whole unit ball; one scalar matching
  condition ``ball_equation`` with zero, one or two roots in beta;
* annulus mode -- u > theta only on an annulus (eta, 1); two matching
  conditions solved for (beta, eta) by damped Newton.

All hyperbolic expressions are evaluated overflow-safe so beta may grow
like 1/sqrt(eps) along the annulus branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .hyper import (
    screened_laplace_kernel as _Z,
    screened_laplace_kernel_deriv as _dZ,
    tanhc,
)
from .profile import RadialProfile, SolveReport

__all__ = [
    "SingularParameterError",
    "DegenerateGeometryError",
    "CrossoverNotFoundError",
    "BallBranchPoint",
    "AnnulusBranchPoint",
    "AsymptoticLimits",
    "exterior_profile",
    "ball_gamma",
    "ball_equation",
    "ball_beta0",
    "beta_separator",
    "ball_roots",
    "ball_center_value",
    "ball_profile",
    "ball_validity",
    "ball_fold",
    "ball_crossover_eps0",
    "annulus_gamma",
    "annulus_delta",
    "annulus_coefficients",
    "annulus_residual",
    "annulus_solve",
    "annulus_profile",
    "asymptotic_limits",
]


class SingularParameterError(ValueError):
    """Closed forms are singular at eps = 1 (and meaningless beyond it)."""


class DegenerateGeometryError(ValueError):
    """Annulus formulas evaluated at a collapsed geometry."""


class CrossoverNotFoundError(RuntimeError):
    """Upper ball branch never attains u(0) = theta in the scanned range."""


@dataclass(frozen=True)
class BallBranchPoint:
    eps: float
    beta: float
    theta: float
    gamma: float


@dataclass(frozen=True)
class AnnulusBranchPoint:
    eps: float
    beta: float
    eta: float
    theta: float
    gamma: float
    delta: float
    coef_sinh: float   # coefficient E of sinh(a r)/r in the annulus piece
    coef_cosh: float   # coefficient F of cosh(a r)/r
    res1: float
    res2: float


@dataclass(frozen=True)
class AsymptoticLimits:
    """Limits of beta*sqrt(eps) and of the annulus width beta*(1-eta)."""

    theta: float
    a0: float
    x0: float


def _sech(x: float) -> float:
    x = abs(x)
    return 2.0 * np.exp(-x) / (1.0 + np.exp(-2.0 * x))


def _check_eps(eps: float, strict_upper: bool = False):
    if eps == 1.0:
        raise SingularParameterError("closed forms are singular at eps = 1")
    if strict_upper and not 0.0 < eps < 1.0:
        raise SingularParameterError(f"annulus formulas need eps in (0, 1), got {eps}")


# ---------------------------------------------------------------------------
# exterior (r >= 1): decaying u, harmonic v
# ---------------------------------------------------------------------------

def exterior_profile(theta: float, eps: float, beta: float, gamma: float, r):
    """Explicit exterior pair u = theta*exp(-a(r-1))/r, v = 1-(1-gamma)/r.

    Valid for r >= 1 with a = beta*sqrt(eps); u'(1+) = -theta(1+a) and
    v'(1+) = 1-gamma.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0 - 1e-12):
        raise ValueError("exterior profile is defined for r >= 1")
    a = beta * np.sqrt(eps)
    u = theta * np.exp(-a * (r - 1.0)) / r
    v = 1.0 - (1.0 - gamma) / r
    return u, v


def exterior_derivatives(theta: float, eps: float, beta: float, gamma: float, r):
    r = np.asarray(r, dtype=float)
    a = beta * np.sqrt(eps)
    du = -theta * np.exp(-a * (r - 1.0)) * (a * r + 1.0) / r**2
    dv = (1.0 - gamma) / r**2
    return du, dv


# ---------------------------------------------------------------------------
# ball mode
# ---------------------------------------------------------------------------

def ball_gamma(beta: float) -> float:
    """Boundary value v(1) = tanh(beta)/beta of the ball-mode profile."""
    return float(tanhc(beta))


def ball_equation(eps: float, beta: float, theta: float) -> float:
    """Matching residual for the full-ball reaction mode.

    theta(1-eps)(1+tanh(a)) + tanh(beta)/beta - tanh(a)/a with
    a = beta*sqrt(eps); the last term takes its limit 1 at eps = 0.
    A point (eps, beta) with zero residual carries a ball-mode solution.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    _check_eps(eps)
    a = beta * np.sqrt(eps)
    return float(theta * (1.0 - eps) * (1.0 + np.tanh(a)) + tanhc(beta) - tanhc(a))


def ball_beta0(theta: float) -> float:
    """Radius parameter of the zero-radiation ball solution: tanh(b)/b = 1-theta."""
    return brentq(lambda b: tanhc(b) - (1.0 - theta), 1e-8, 1e3, xtol=1e-14)


def beta_separator(theta: float) -> float:
    """Root of tanh(b)/b = (1-theta)/2, lying between the two ball roots."""
    return brentq(lambda b: tanhc(b) - 0.5 * (1.0 - theta), 1e-8, 1e3, xtol=1e-14)


def _beta_cap(eps: float, theta: float) -> float:
    # no root admits beta*sqrt(eps) > 1/theta; scan slightly past the bound
    return 1.2 / (theta * np.sqrt(eps))


def ball_roots(eps: float, theta: float, scan_points: int = 2000):
    """The two zeros (beta-, beta+) of the ball matching condition, or None.

    Scans a geometric beta-grid capped by the nonexistence bound
    beta*sqrt(eps) <= 1/theta and bisects every sign change; above the fold
    no sign change exists and None is returned.
    """
    if eps <= 0:
        raise ValueError("ball_roots needs eps > 0; use ball_beta0 at eps = 0")
    _check_eps(eps)
    bs = np.geomspace(1e-3, _beta_cap(eps, theta), scan_points)
    gv = np.array([ball_equation(eps, b, theta) for b in bs])
    roots = []
    for i in range(len(bs) - 1):
        if gv[i] == 0.0:
            roots.append(bs[i])
        elif gv[i] * gv[i + 1] < 0:
            roots.append(brentq(lambda b: ball_equation(eps, b, theta),
                                bs[i], bs[i + 1], xtol=1e-13, rtol=1e-15))
    if not roots:
        return None
    return float(min(roots)), float(max(roots))


def ball_center_value(eps: float, beta: float, theta: float) -> float:
    """u(0) of the ball-mode closed form (removable-singularity limit)."""
    _check_eps(eps)
    a = beta * np.sqrt(eps)
    gamma = ball_gamma(beta)
    z0 = a / np.sinh(a) if 0 < a <= 30 else (2 * a * np.exp(-a) if a > 30 else 1.0)
    return float(-_sech(beta) / (1.0 - eps) + (theta + gamma / (1.0 - eps)) * z0)


def ball_profile(eps: float, beta: float, theta: float, grid) -> RadialProfile:
    """Sampled ball-mode solution on the given radii (may extend past 1).

    Interior: v = gamma*Z_beta(r); u = -v/(1-eps) + (theta+gamma/(1-eps))
    * Z_a(r) with a = beta*sqrt(eps) and Z the screened-Laplace kernel.
    The exterior closed form is stitched for r > 1.
    """
    _check_eps(eps)
    grid = np.asarray(grid, dtype=float)
    a = beta * np.sqrt(eps)
    gamma = ball_gamma(beta)
    coef = theta + gamma / (1.0 - eps)
    inner = grid <= 1.0
    outer = ~inner
    u = np.empty_like(grid)
    v = np.empty_like(grid)
    du = np.empty_like(grid)
    dv = np.empty_like(grid)
    ri = grid[inner]
    v[inner] = gamma * _Z(beta, ri)
    dv[inner] = gamma * _dZ(beta, ri)
    u[inner] = -v[inner] / (1.0 - eps) + coef * _Z(a, ri)
    du[inner] = -dv[inner] / (1.0 - eps) + coef * _dZ(a, ri)
    if np.any(outer):
        ro = grid[outer]
        u[outer], v[outer] = exterior_profile(theta, eps, beta, gamma, ro)
        du[outer], dv[outer] = exterior_derivatives(theta, eps, beta, gamma, ro)
    pieces = (("ball", 0.0, 1.0),)
    if np.any(outer):
        pieces += (("exterior", 1.0, float(grid[-1])),)
    return RadialProfile(grid, u, v, du, dv, pieces)


def ball_validity(profile: RadialProfile, theta: float):
    """Check u > theta strictly on [0, 1); report the first violating radius."""
    mask = profile.r < 1.0
    bad = np.where(profile.u[mask] <= theta)[0]
    if len(bad) == 0:
        return True, None
    return False, float(profile.r[mask][bad[0]])


def _eps_on_ball_curve(beta: float, theta: float, eps_hi: float = 0.999):
    """The eps at which ball_equation vanishes for this beta, or None."""
    g0 = ball_equation(1e-14, beta, theta)
    if g0 >= 0:
        return None
    ghi = ball_equation(eps_hi, beta, theta)
    if ghi <= 0:
        return None
    return brentq(lambda e: ball_equation(e, beta, theta), 1e-14, eps_hi, xtol=1e-14)


def ball_fold(theta: float, tol: float = 1e-8):
    """Fold of the ball branch: the largest eps carrying a ball-mode root.

    Maximizes eps(beta) along the solution curve by coarse scan plus
    golden-section refinement; returns (eps_star, beta_star).
    """
    b0 = ball_beta0(theta)
    betas = np.geomspace(b0 * 1.0001, 60.0 / theta, 160)
    eps_vals = np.array([(_eps_on_ball_curve(b, theta) or -1.0) for b in betas])
    k = int(np.argmax(eps_vals))
    if eps_vals[k] <= 0:
        return None
    lo = betas[max(k - 1, 0)]
    hi = betas[min(k + 1, len(betas) - 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1 = _eps_on_ball_curve(x1, theta) or -1.0
    f2 = _eps_on_ball_curve(x2, theta) or -1.0
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = _eps_on_ball_curve(x2, theta) or -1.0
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = _eps_on_ball_curve(x1, theta) or -1.0
    beta_star = 0.5 * (lo + hi)
    return float(_eps_on_ball_curve(beta_star, theta)), float(beta_star)


def ball_crossover_eps0(theta: float, eps_min: float = 1e-9):
    """Critical eps where the upper ball branch has u(0) = theta exactly.

    Below this value the upper-branch ball formula dips under theta at the
    center and the valid solution switches to the annulus mode.  Located by
    bisection of u(0) - theta along the upper branch.
    """
    fold = ball_fold(theta)
    if fold is None:
        raise CrossoverNotFoundError("no ball branch exists for this theta")
    eps_star, _ = fold

    def center_gap(eps, scan_points=2000):
        roots = ball_roots(eps, theta, scan_points=scan_points)
        if roots is None:
            raise CrossoverNotFoundError(f"lost the upper branch at eps={eps}")
        return ball_center_value(eps, roots[1], theta) - theta

    # stay clear of the fold, where the two roots are too close to bracket;
    # the crossover sits well below it (about 0.09*eps_star at theta = 1/2)
    lo = eps_min
    hi = 0.98 * eps_star
    scan = 2000
    while center_gap(hi, scan) < 0:
        hi = 0.5 * (hi + eps_star)
        scan *= 4
        if scan > 2_000_000:
            raise CrossoverNotFoundError(
                "u(0) - theta does not change sign along the scanned upper branch")
    if center_gap(lo) > 0:
        raise CrossoverNotFoundError(
            "u(0) already exceeds theta at the smallest scanned eps")
    return float(brentq(center_gap, lo, hi, xtol=1e-13))


# ---------------------------------------------------------------------------
# annulus mode
# ---------------------------------------------------------------------------

def annulus_gamma(beta: float, eta: float) -> float:
    """Boundary value v(1) of the annulus-mode reactant profile.

    Equivalent to the tanh quotient obtained by eliminating the interior
    coefficients, rewritten over decaying exponentials:

        gamma = [eta*beta*(1+R) + (1-R)] / (beta*[eta*beta*(1-R) + (1+R)])

    with R = exp(-2*beta*(1-eta)); safe for arbitrarily large beta.
    """
    if not 0.0 < eta < 1.0:
        raise DegenerateGeometryError(f"eta must lie in (0, 1), got {eta}")
    if beta <= 0.0:
        raise DegenerateGeometryError("beta must be positive")
    R = np.exp(-2.0 * beta * (1.0 - eta))
    num = eta * beta * (1.0 + R) + (1.0 - R)
    den = beta * (eta * beta * (1.0 - R) + (1.0 + R))
    if den < np.finfo(float).tiny:
        raise DegenerateGeometryError("annulus geometry is numerically degenerate")
    return float(num / den)


def _annulus_v_parts(beta: float, eta: float):
    """Shared quantities for the annulus reactant piece."""
    x = beta * (1.0 - eta)
    R = np.exp(-2.0 * x)
    D = eta * beta * (1.0 - R) + (1.0 + R)
    return x, R, D


def annulus_delta(beta: float, eta: float) -> float:
    """Core reactant level delta = v(eta) of the annulus mode."""
    if not 0.0 < eta < 1.0:
        raise DegenerateGeometryError(f"eta must lie in (0, 1), got {eta}")
    x, R, D = _annulus_v_parts(beta, eta)
    return float(np.exp(-x) * (1.0 + (eta * beta - 1.0) * (1.0 + R) / D) / (beta * eta))


def _annulus_v(beta: float, eta: float, r):
    """v and v' on the annulus piece [eta, 1], overflow-safe.

    v(r) = [gamma*beta*cosh(beta(1-r)) - sinh(beta(1-r))]/(beta*r) written
    with exponents y - 2x <= -x <= 0 where y = beta(1-r), x = beta(1-eta).
    """
    r = np.asarray(r, dtype=float)
    x, R, D = _annulus_v_parts(beta, eta)
    y = beta * (1.0 - r)
    c = eta * beta - 1.0
    v = (np.exp(-y) + c * (np.exp(y - 2.0 * x) + np.exp(-y - 2.0 * x)) / D) / (beta * r)
    slope = np.exp(-y) - c * (np.exp(y - 2.0 * x) - np.exp(-y - 2.0 * x)) / D
    dv = slope / r - v / r
    return v, dv


def annulus_coefficients(eps: float, beta: float, eta: float, theta: float):
    """Coefficients (E, F) of the annulus temperature piece.

    u = v/(eps-1) + E*sinh(a r)/r + F*cosh(a r)/r with a = beta*sqrt(eps);
    E, F are fixed by u(1) = theta and u'(1) = -theta(1+a).
    """
    _check_eps(eps, strict_upper=True)
    a = beta * np.sqrt(eps)
    gamma = annulus_gamma(beta, eta)
    cosh_a, sinh_a = np.cosh(a), np.sinh(a)
    E = (cosh_a - gamma * a * sinh_a) / ((1.0 - eps) * a) - theta * (cosh_a + sinh_a)
    F = -(sinh_a - gamma * a * cosh_a) / ((1.0 - eps) * a) + theta * (cosh_a + sinh_a)
    return float(E), float(F)


def annulus_residual(eps: float, beta: float, eta: float, theta: float):
    """The two matching residuals of the annulus mode at (beta, eta).

    res1: value matching u(eta) = theta from the annulus side;
    res2: slope matching u'(eta-) (core closed form) = u'(eta+).
    Both vanish at a genuine annulus-mode branch point.
    """
    _check_eps(eps, strict_upper=True)
    if not 0.0 < eta < 1.0:
        raise DegenerateGeometryError(f"eta must lie in (0, 1), got {eta}")
    a = beta * np.sqrt(eps)
    E, F = annulus_coefficients(eps, beta, eta, theta)
    delta = annulus_delta(beta, eta)
    ae = a * eta
    sh, ch = np.sinh(ae), np.cosh(ae)
    res1 = delta / (eps - 1.0) + E * sh / eta + F * ch / eta - theta
    up_annulus = (E * (ae * ch - sh) + F * (ae * sh - ch)) / eta**2
    up_core = theta * (a / np.tanh(ae) - 1.0 / eta)
    return float(res1), float(up_annulus - up_core)


def _annulus_point(eps, beta, eta, theta) -> AnnulusBranchPoint:
    r1, r2 = annulus_residual(eps, beta, eta, theta)
    E, F = annulus_coefficients(eps, beta, eta, theta)
    return AnnulusBranchPoint(eps=eps, beta=float(beta), eta=float(eta), theta=theta,
                              gamma=annulus_gamma(beta, eta), delta=annulus_delta(beta, eta),
                              coef_sinh=E, coef_cosh=F, res1=r1, res2=r2)


def annulus_solve(eps: float, theta: float, init, tol: float = 1e-11,
                  max_iter: int = 60, max_halvings: int = 30):
    """Damped Newton for (beta, eta) on the two annulus matching conditions.

    Finite-difference Jacobian; step halving (up to ``max_halvings``) keeps
    eta inside (0, 1) and enforces residual decrease.  Residuals are
    normalized by their natural scales so ``tol`` is a relative tolerance.
    Returns (AnnulusBranchPoint, SolveReport); divergence is reported, not
    raised.
    """
    _check_eps(eps, strict_upper=True)
    x = np.array([float(init[0]), float(init[1])])
    # scales frozen at the initial iterate: a state-dependent normalization
    # would let the line search shrink the merit by inflating the scale
    a_init = x[0] * np.sqrt(eps)
    scale = np.array([theta, theta * (a_init + 1.0 / x[1])])

    def scaled_res(xv):
        r1, r2 = annulus_residual(eps, xv[0], xv[1], theta)
        return np.array([r1, r2]) / scale
    history = []
    for it in range(max_iter):
        res = scaled_res(x)
        nres = float(np.linalg.norm(res))
        history.append(nres)
        if nres < tol:
            return _annulus_point(eps, x[0], x[1], theta), SolveReport(
                converged=True, iterations=it, residual_norm=nres,
                residual_history=history)
        jac = np.zeros((2, 2))
        for j in range(2):
            step = 1e-7 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += step
            jac[:, j] = (scaled_res(xp) - res) / step
        try:
            newton = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        accepted = False
        for _ in range(max_halvings):
            xn = x + lam * newton
            if xn[0] > 0.0 and 0.0 < xn[1] < 1.0:
                if float(np.linalg.norm(scaled_res(xn))) < nres:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            break
        x = x + lam * newton
    nres = float(np.linalg.norm(scaled_res(x)))
    history.append(nres)
    return _annulus_point(eps, x[0], x[1], theta), SolveReport(
        converged=nres < tol, iterations=len(history) - 1, residual_norm=nres,
        residual_history=history, message="Newton stalled before reaching tolerance")


def annulus_profile(point: AnnulusBranchPoint, grid) -> RadialProfile:
    """Three-piece annulus-mode profile: constant-v core, annulus, exterior."""
    eps, beta, eta, theta = point.eps, point.beta, point.eta, point.theta
    a = beta * np.sqrt(eps)
    grid = np.asarray(grid, dtype=float)
    u = np.empty_like(grid)
    v = np.empty_like(grid)
    du = np.empty_like(grid)
    dv = np.empty_like(grid)

    core = grid <= eta
    mid = (grid > eta) & (grid <= 1.0)
    outer = grid > 1.0

    rc = grid[core]
    v[core] = point.delta
    dv[core] = 0.0
    # u = theta * Z_{a*eta}(r/eta): equals theta at eta, increasing in r
    u[core] = theta * _Z(a * eta, rc / eta)
    du[core] = theta / eta * _dZ(a * eta, rc / eta)

    rm = grid[mid]
    vm, dvm = _annulus_v(beta, eta, rm)
    v[mid] = vm
    dv[mid] = dvm
    E, F = point.coef_sinh, point.coef_cosh
    sh, ch = np.sinh(a * rm), np.cosh(a * rm)
    u[mid] = vm / (eps - 1.0) + E * sh / rm + F * ch / rm
    du[mid] = dvm / (eps - 1.0) + E * (a * ch / rm - sh / rm**2) + F * (a * sh / rm - ch / rm**2)

    if np.any(outer):
        ro = grid[outer]
        u[outer], v[outer] = exterior_profile(theta, eps, beta, point.gamma, ro)
        du[outer], dv[outer] = exterior_derivatives(theta, eps, beta, point.gamma, ro)

    pieces = (("core", 0.0, eta), ("annulus", eta, 1.0))
    if np.any(outer):
        pieces += (("exterior", 1.0, float(grid[-1])),)
    return RadialProfile(grid, u, v, du, dv, pieces)


# ---------------------------------------------------------------------------
# asymptotics of the annulus branch as beta -> infinity
# ---------------------------------------------------------------------------

def _width_equation_lhs(x: float) -> float:
    """1 - 1/(x tanh x) + 1/(x sinh x); increases from 1/2 to 1.

    Evaluated through the identity coth(x) - csch(x) = tanh(x/2), which is
    free of the small-x cancellation of the raw form.
    """
    if x <= 0:
        raise ValueError("width parameter must be positive")
    return 1.0 - np.tanh(0.5 * x) / x


def asymptotic_limits(theta: float) -> AsymptoticLimits:
    """Limits a0 of beta*sqrt(eps) and x0 of beta*(1-eta) along the branch.

    a0 is the unique root of theta*(a/tanh(a) - 1) + theta*(1+a) = 1 in
    (0, 1/theta - 1); x0 then solves the strictly increasing width equation
    1 - 1/(x tanh x) + 1/(x sinh x) = theta*(1+a0).
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")

    def eq_a(a):
        return theta * (a / np.tanh(a) - 1.0) + theta * (1.0 + a) - 1.0

    hi = 1.0 / theta - 1.0
    a0 = brentq(eq_a, 1e-12, hi * (1.0 - 1e-13), xtol=1e-15, rtol=8.9e-16)

    target = theta * (1.0 + a0)
    lo, hi_x = 1e-8, 1.0
    while _width_equation_lhs(hi_x) < target:
        hi_x *= 2.0
        if hi_x > 1e8:
            raise RuntimeError("width equation bracket failed to close")
    x0 = brentq(lambda x: _width_equation_lhs(x) - target, lo, hi_x,
                xtol=1e-14, rtol=8.9e-16)
    return AsymptoticLimits(theta=theta, a0=float(a0), x0=float(x0))


def annulus_seed(theta: float, eps: float, limits: AsymptoticLimits | None = None):
    """Small-eps starting guess (beta, eta) from the branch asymptotics."""
    lim = limits or asymptotic_limits(theta)
    beta = lim.a0 / np.sqrt(eps)
    eta = 1.0 - lim.x0 * np.sqrt(eps) / lim.a0
    if eta <= 0.0:
        eta = 0.5
    return beta, eta
