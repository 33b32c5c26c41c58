"""Bifurcation-curve tracing in the (eps, beta) plane and fold detection.

``trace_ball`` and ``trace_annulus`` walk the two indicator-law solution
families using the closed forms; ``trace_general`` runs pseudo-arclength
continuation on the shooting residual for a continuous nonlinearity and
passes through folds.  ``detect_fold`` locates the largest eps along a
traced curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import closedform as hv
from .nonlinearity import IgnitionFunction, eps1_bound
from .profile import SolveReport
from .shooting import (
    IntegratorConfig,
    ShootingState,
    boundary_residual,
    integrate_radial,
    solve_shooting,
)

__all__ = ["BranchPoint", "BifurcationCurve", "trace_ball", "trace_annulus",
           "trace_general", "detect_fold"]

# step control: consecutive points may not jump more than this in log beta
MAX_LOG_BETA_STEP = 0.2


@dataclass(frozen=True)
class BranchPoint:
    """One solution on a bifurcation curve, in any mode."""

    mode: str              # "ball-lower" | "ball-upper" | "annulus" | "general"
    eps: float
    beta: float
    theta: float
    eta: float = float("nan")
    gamma: float = float("nan")
    delta: float = float("nan")
    valid: bool = True
    res_norm: float = 0.0
    extra: dict = field(default_factory=dict)


@dataclass
class BifurcationCurve:
    points: list
    fold: tuple | None = None      # (eps_star, index)
    stalled: bool = False
    message: str = ""

    def epsilons(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    def betas(self) -> np.ndarray:
        return np.array([p.beta for p in self.points])


def _ball_point(eps: float, beta: float, theta: float, mode: str,
                validity_grid: np.ndarray) -> BranchPoint:
    prof = hv.ball_profile(eps, beta, theta, validity_grid)
    ok, _ = hv.ball_validity(prof, theta)
    res = abs(hv.ball_equation(eps, beta, theta))
    return BranchPoint(mode=mode, eps=eps, beta=beta, theta=theta,
                       gamma=hv.ball_gamma(beta), valid=ok, res_norm=res)


def trace_ball(theta: float, eps_grid) -> BifurcationCurve:
    """Both ball-mode sub-branches over an ascending eps grid.

    For each eps the two matching roots are bracketed and bisected; grid
    values above the fold simply contribute no points.  The returned curve
    is ordered as one connected path: lower branch by ascending eps, then
    the upper branch back down, with the fold metadata in between.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0) or np.any(np.diff(eps_grid) <= 0):
        raise ValueError("eps grid must be positive and ascending")
    vgrid = np.linspace(0.0, 1.0, 1025)
    lower, upper = [], []
    for eps in eps_grid:
        roots = hv.ball_roots(eps, theta)
        if roots is None:
            continue
        lower.append(_ball_point(eps, roots[0], theta, "ball-lower", vgrid))
        upper.append(_ball_point(eps, roots[1], theta, "ball-upper", vgrid))
    points = lower + upper[::-1]
    curve = BifurcationCurve(points=points)
    if lower:
        fold = hv.ball_fold(theta)
        if fold is not None:
            curve.fold = (fold[0], len(lower) - 1)
    return curve


def trace_annulus(theta: float, eps_start: float, eps_end: float,
                  n_steps: int = 48) -> BifurcationCurve:
    """Annulus branch marched from the asymptotic seed at small eps upward.

    Natural continuation in eps with a secant predictor in (beta, eta) and
    step halving on solver failure; returns the partial curve with a stall
    report if a step cannot be completed.  eps_end should not exceed the
    ball crossover, where eta reaches 0 and the annulus degenerates.
    """
    if not 0.0 < eps_start < eps_end:
        raise ValueError("need 0 < eps_start < eps_end")
    limits = hv.asymptotic_limits(theta)
    ladder = np.geomspace(eps_start, eps_end, n_steps)
    points = []
    prev = None          # (eps, beta, eta)
    prev2 = None
    lemma_cap = 1.0 / theta + 1e-12

    def solve_at(eps, guess):
        point, report = hv.annulus_solve(eps, theta, guess)
        if not report.converged:
            return None
        return point

    k = 0
    eps = ladder[0]
    guess = hv.annulus_seed(theta, eps, limits)
    stalled = False
    while k < len(ladder):
        eps = ladder[k]
        if prev is not None:
            if prev2 is not None and prev[0] != prev2[0]:
                w = (eps - prev[0]) / (prev[0] - prev2[0])
                guess = (prev[1] + w * (prev[1] - prev2[1]),
                         np.clip(prev[2] + w * (prev[2] - prev2[2]), 1e-6, 1 - 1e-6))
            else:
                guess = (prev[1], prev[2])
        point = solve_at(eps, guess)
        if point is None:
            if prev is None:
                return BifurcationCurve(points=[], stalled=True,
                                        message=f"seed solve failed at eps={eps}")
            # halve towards the last good eps
            mid = np.sqrt(prev[0] * eps)
            if abs(np.log(mid / eps)) < 1e-10:
                stalled = True
                break
            ladder = np.concatenate([ladder[:k], [mid], ladder[k:]])
            continue
        points.append(BranchPoint(
            mode="annulus", eps=float(eps), beta=point.beta, theta=theta,
            eta=point.eta, gamma=point.gamma, delta=point.delta,
            valid=point.beta * np.sqrt(eps) <= lemma_cap,
            res_norm=float(np.hypot(point.res1, point.res2))))
        prev2 = prev
        prev = (float(eps), point.beta, point.eta)
        k += 1
    return BifurcationCurve(points=points, stalled=stalled,
                            message="continuation stalled" if stalled else "")


def detect_fold(curve: BifurcationCurve, refine=None):
    """Locate the eps turning point along an ordered curve.

    Quadratic fit through the 5 points nearest the discrete eps-maximum;
    an optional ``refine`` callable (a 1-D eps-along-curve model, as the
    indicator-law tracer provides) sharpens the estimate.  A monotone curve
    yields None.
    """
    eps = curve.epsilons()
    if len(eps) < 3:
        return None
    k = int(np.argmax(eps))
    if k == 0 or k == len(eps) - 1:
        return None
    lo = max(0, k - 2)
    hi = min(len(eps), k + 3)
    s = np.arange(lo, hi, dtype=float)
    coeffs = np.polyfit(s, eps[lo:hi], 2)
    if coeffs[0] >= 0:
        eps_star = float(eps[k])
    else:
        s_star = -coeffs[1] / (2.0 * coeffs[0])
        s_star = float(np.clip(s_star, lo, hi - 1))
        eps_star = float(np.polyval(coeffs, s_star))
    if refine is not None:
        refined = refine()
        if refined is not None:
            eps_star = float(refined)
    return eps_star, k


def _shooting_residual(f, theta, x, cfg):
    """Residual of the extended unknown vector x = (u0, v0, log beta, eps)."""
    u0, v0, lb, eps = x
    state = ShootingState(u0=u0, v0=v0, beta=float(np.exp(lb)), eps=eps, theta=theta)
    prof = integrate_radial(f, state, 1.0, cfg)
    return boundary_residual(prof, theta, eps, state.beta)


def trace_general(f: IgnitionFunction, theta: float, eps_range,
                  seed: ShootingState | None = None, max_steps: int = 60,
                  ds: float = 0.1, corrector_tol: float = 1e-9,
                  cfg: IntegratorConfig | None = None) -> BifurcationCurve:
    """Pseudo-arclength continuation of shooting solutions through folds.

    Unknowns (u0, v0, log beta, eps); the arclength constraint weighs eps
    by the integral nonexistence bound and log beta by 1, so both axes
    contribute comparably across decades.  The corrector is a damped
    Newton on [boundary residual; arclength]; on divergence the step is
    halved, and a stall returns the partial curve.
    """
    if not f.is_continuous:
        raise ValueError("trace_general needs a continuous nonlinearity")
    cfg = cfg or IntegratorConfig(rtol=1e-10, atol=1e-12)
    eps_lo, eps_hi = float(min(eps_range)), float(max(eps_range))
    eps_scale = eps1_bound(f).eps1
    weights = np.array([1.0, 1.0, 1.0, 1.0 / eps_scale])

    if seed is None:
        roots = hv.ball_roots(eps_lo, theta)
        if roots is None:
            raise ValueError("no ball seed available at eps_lo")
        beta = roots[0]
        seed = ShootingState(u0=hv.ball_center_value(eps_lo, beta, theta),
                             v0=1.0 / np.cosh(beta), beta=beta, eps=eps_lo, theta=theta)
    state0, _, rep0 = solve_shooting(f, eps_lo, theta, seed, cfg=cfg, tol=corrector_tol)
    if not rep0.converged:
        return BifurcationCurve(points=[], stalled=True, message="seed solve failed")

    def make_point(x, res_norm):
        return BranchPoint(mode="general", eps=float(x[3]), beta=float(np.exp(x[2])),
                           theta=theta, valid=True, res_norm=res_norm,
                           extra={"u0": float(x[0]), "v0": float(x[1])})

    x = np.array([state0.u0, state0.v0, np.log(state0.beta), eps_lo])
    points = [make_point(x, rep0.residual_norm)]

    # initial tangent: nudge eps upward with a natural-parameter solve
    eps1 = min(eps_hi, eps_lo * 1.05 + 1e-12)
    s1, _, r1 = solve_shooting(f, eps1, theta,
                               ShootingState(x[0], x[1], np.exp(x[2]), eps1, theta),
                               cfg=cfg, tol=corrector_tol)
    if not r1.converged:
        return BifurcationCurve(points=points, stalled=True,
                                message="tangent bootstrap failed")
    x1 = np.array([s1.u0, s1.v0, np.log(s1.beta), eps1])
    points.append(make_point(x1, r1.residual_norm))
    tangent = (x1 - x) * weights
    tangent /= np.linalg.norm(tangent)
    x = x1

    stalled = False
    step = ds
    for _ in range(max_steps):
        predictor = x + step * tangent / weights
        xc = predictor.copy()
        ok = False
        for attempt in range(8):
            xc = predictor.copy()
            ok = True
            for _ in range(25):
                try:
                    res = _shooting_residual(f, theta, xc, cfg)
                except Exception:
                    ok = False
                    break
                arc = float(np.dot((xc - x) * weights, tangent) - step)
                full = np.concatenate([res, [arc]])
                if np.linalg.norm(res) < corrector_tol and abs(arc) < 1e-10:
                    break
                jac = np.zeros((4, 4))
                for j in range(4):
                    dxj = 1e-6 * max(1.0, abs(xc[j]))
                    xp = xc.copy()
                    xp[j] += dxj
                    resp = _shooting_residual(f, theta, xp, cfg)
                    arcp = float(np.dot((xp - x) * weights, tangent) - step)
                    jac[:, j] = (np.concatenate([resp, [arcp]]) - full) / dxj
                try:
                    delta = np.linalg.solve(jac, -full)
                except np.linalg.LinAlgError:
                    ok = False
                    break
                xc = xc + delta
                if not np.isfinite(xc).all() or xc[3] < 0:
                    ok = False
                    break
            else:
                ok = False
            if ok:
                try:
                    final = _shooting_residual(f, theta, xc, cfg)
                except Exception:
                    ok = False
                    final = None
                if ok and np.linalg.norm(final) < corrector_tol:
                    break
                ok = False
            step *= 0.5
            predictor = x + step * tangent / weights
        if not ok:
            stalled = True
            break
        if abs(xc[2] - x[2]) > MAX_LOG_BETA_STEP:
            step *= 0.5
            continue
        points.append(make_point(xc, float(np.linalg.norm(final))))
        new_tan = (xc - x) * weights
        new_tan /= np.linalg.norm(new_tan)
        tangent = new_tan
        x = xc
        step = min(step * 1.3, ds)
        if x[3] < eps_lo * 0.5 or x[3] > eps_hi or np.exp(x[2]) > 1.5 / (theta * np.sqrt(max(x[3], 1e-12))):
            break
    curve = BifurcationCurve(points=points, stalled=stalled,
                             message="corrector stalled" if stalled else "")
    curve.fold = detect_fold(curve)
    return curve
