"""Shooting solver for the rescaled radial system with a general ignition law.

Integrates u'' + (2/r)u' = eps*b^2*u - b^2*v*f(u), v'' + (2/r)v' = b^2*v*f(u)
outward from the center and adjusts (u(0), v(0), beta) by damped Newton so
the solution matches the decaying exterior at r = 1:

    u(1) = theta,  u'(1) = -theta*(1 + beta*sqrt(eps)),  v'(1) = 1 - v(1).

Discontinuous nonlinearities are not integrated directly; wrap them with
``smoothed(f, n)`` first (the CLI enforces this).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson, solve_ivp

from .nonlinearity import IgnitionFunction
from .profile import RadialProfile, SolveReport

__all__ = [
    "StiffnessError",
    "ShootingState",
    "IntegratorConfig",
    "integrate_radial",
    "boundary_residual",
    "solve_shooting",
    "flux_identity_check",
    "validity_checks",
]


class StiffnessError(RuntimeError):
    """Integration failed; carries the last radius reached."""

    def __init__(self, message: str, last_radius: float):
        super().__init__(message)
        self.last_radius = last_radius


@dataclass(frozen=True)
class ShootingState:
    """Center values and scaling parameter defining one shot."""

    u0: float
    v0: float
    beta: float
    eps: float
    theta: float


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "DOP853"
    r_start: float = 1e-6
    max_step: float = np.inf


def integrate_radial(f: IgnitionFunction, state: ShootingState, r_end: float = 1.0,
                     cfg: IntegratorConfig = IntegratorConfig(),
                     grid=None) -> RadialProfile:
    """Integrate the radial system from the center out to r_end.

    The coordinate singularity at r = 0 is bypassed by a series start at
    cfg.r_start: with zero slope at the center, u(r) = u0 + r^2*s_u/6 +
    O(r^4) where s_u is the right-hand side at the center (the 1/6 comes
    from the three-dimensional radial Laplacian acting on r^2).
    """
    eps, beta, theta = state.eps, state.beta, state.theta
    b2 = beta * beta

    def rhs(r, y):
        u, du, v, dv = y
        fu = float(f(u)) if u >= 0.0 else 0.0
        su = eps * b2 * u - b2 * v * fu
        sv = b2 * v * fu
        return (du, su - 2.0 * du / r, dv, sv - 2.0 * dv / r)

    r0 = cfg.r_start
    fu0 = float(f(state.u0)) if state.u0 >= 0.0 else 0.0
    cu = b2 * (eps * state.u0 - state.v0 * fu0)
    cv = b2 * state.v0 * fu0
    y0 = (state.u0 + cu * r0**2 / 6.0, cu * r0 / 3.0,
          state.v0 + cv * r0**2 / 6.0, cv * r0 / 3.0)

    t_eval = None
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        t_eval = grid[(grid >= r0) & (grid <= r_end)]
    sol = solve_ivp(rhs, (r0, r_end), y0, method=cfg.method, rtol=cfg.rtol,
                    atol=cfg.atol, max_step=cfg.max_step, t_eval=t_eval,
                    dense_output=False)
    if not sol.success:
        raise StiffnessError(f"integration stalled: {sol.message}", float(sol.t[-1]))

    r = np.concatenate(([0.0], sol.t))
    u = np.concatenate(([state.u0], sol.y[0]))
    du = np.concatenate(([0.0], sol.y[1]))
    v = np.concatenate(([state.v0], sol.y[2]))
    dv = np.concatenate(([0.0], sol.y[3]))
    keep = np.concatenate(([True], np.diff(r) > 0))
    return RadialProfile(r[keep], u[keep], v[keep], du[keep], dv[keep],
                         (("integrated", 0.0, r_end),))


def boundary_residual(profile: RadialProfile, theta: float, eps: float,
                      beta: float) -> np.ndarray:
    """Mismatch against the decaying exterior at r = 1.

    Components: u(1) - theta; u'(1) + theta(1 + beta*sqrt(eps));
    v'(1) - (1 - v(1)), the flux of the harmonic exterior 1 - (1-gamma)/r.
    """
    if profile.r[-1] < 1.0 - 1e-9:
        raise ValueError("profile must reach r = 1")
    i = int(np.argmin(np.abs(profile.r - 1.0)))
    a = beta * np.sqrt(eps)
    return np.array([
        profile.u[i] - theta,
        profile.du[i] + theta * (1.0 + a),
        profile.dv[i] - (1.0 - profile.v[i]),
    ])


def solve_shooting(f: IgnitionFunction, eps: float, theta: float,
                   guess: ShootingState, cfg: IntegratorConfig | None = None,
                   tol: float = 1e-9, max_iter: int = 40,
                   max_halvings: int = 30):
    """Damped Newton on (u0, v0, log beta) driving the boundary residual to zero.

    The finite-difference Jacobian uses steps well above the integration
    noise floor; beta is solved in log scale because it spans decades along
    the upper branch.  Returns (state, profile, report); a converged state
    violating the nonexistence bound beta*sqrt(eps) <= 1/theta is flagged
    in the report checks rather than raised.
    """
    if not f.is_continuous:
        raise ValueError("shooting needs a continuous nonlinearity; wrap it with smoothed(f, n)")
    cfg = cfg or IntegratorConfig(rtol=1e-11, atol=1e-13)

    def residual(x):
        state = ShootingState(u0=x[0], v0=x[1], beta=float(np.exp(x[2])),
                              eps=eps, theta=theta)
        prof = integrate_radial(f, state, 1.0, cfg)
        return boundary_residual(prof, theta, eps, state.beta), prof, state

    x = np.array([guess.u0, guess.v0, np.log(guess.beta)])
    history = []
    res, prof, state = residual(x)
    nres = float(np.linalg.norm(res))
    history.append(nres)
    it = 0
    message = ""
    for it in range(1, max_iter + 1):
        if nres < tol:
            break
        jac = np.zeros((3, 3))
        for j in range(3):
            # FD step must dominate integrator noise (~rtol) for a usable column
            step = 1e-6 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += step
            rp, _, _ = residual(xp)
            jac[:, j] = (rp - res) / step
        try:
            newton = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            message = "singular shooting Jacobian"
            break
        lam = 1.0
        accepted = False
        for _ in range(max_halvings):
            xn = x + lam * newton
            try:
                rn, profn, staten = residual(xn)
            except StiffnessError:
                lam *= 0.5
                continue
            if float(np.linalg.norm(rn)) < nres:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            message = "line search stalled"
            break
        x, res, prof, state, nres = xn, rn, profn, staten, float(np.linalg.norm(rn))
        history.append(nres)

    converged = nres < tol
    checks = {}
    if converged:
        a = state.beta * np.sqrt(eps)
        checks["lemma_beta_sqrt_eps"] = a <= 1.0 / theta + 1e-12
        if not checks["lemma_beta_sqrt_eps"]:
            message = ("converged state violates beta*sqrt(eps) <= 1/theta; "
                       "likely a numerical artifact")
    report = SolveReport(converged=converged, iterations=it, residual_norm=nres,
                         checks=checks, residual_history=history, message=message)
    return state, prof, report


def _theta_segments(r, u, theta):
    """Split [0, 1] indices into maximal segments where u - theta keeps a sign."""
    sign = u > theta
    cuts = np.where(sign[:-1] != sign[1:])[0]
    bounds = [0] + [int(c) + 1 for c in cuts] + [len(r)]
    return [(bounds[k], bounds[k + 1]) for k in range(len(bounds) - 1)]


def flux_identity_check(profile: RadialProfile, f: IgnitionFunction,
                        beta: float) -> float:
    """Residual of beta^2 * int_0^1 s^2 v f(u) ds = v'(1).

    The identity follows from integrating the reactant equation over the
    unit ball and holds exactly for exact solutions.  For a discontinuous f
    the quadrature is split at the theta-crossings of u and the integrand
    endpoints take one-sided limits, so each Simpson panel sees a smooth
    integrand.
    """
    m = profile.r <= 1.0 + 1e-12
    r, u, v = profile.r[m], profile.u[m], profile.v[m]
    i1 = int(np.argmin(np.abs(profile.r - 1.0)))
    vp1 = profile.dv[i1]

    if f.is_continuous:
        integral = simpson(r**2 * v * f(np.maximum(u, 0.0)), x=r)
    else:
        integral = 0.0
        for lo, hi in _theta_segments(r, u, f.theta):
            seg = slice(lo, hi)
            rs, us, vs = r[seg], u[seg], v[seg]
            if len(rs) < 2:
                continue
            # one-sided limits at segment endpoints: sample u a hair inside
            us = us.copy()
            us[0] = np.interp(rs[0] + 1e-9 * max(rs[-1] - rs[0], 1e-9), r, u)
            us[-1] = np.interp(rs[-1] - 1e-9 * max(rs[-1] - rs[0], 1e-9), r, u)
            integral += simpson(rs**2 * vs * f(np.maximum(us, 0.0)), x=rs)
    return float(beta**2 * integral - vp1)


def validity_checks(profile: RadialProfile, theta: float, eps: float,
                    beta: float, tol: float = 1e-12) -> SolveReport:
    """A-priori bounds every genuine solution must satisfy.

    Bounds 0 <= u, v <= 1 and u + v <= 1; monotone decay of u past its
    last theta-crossing; the nonexistence bound beta*sqrt(eps) <= 1/theta;
    and the slope bound 0 <= (u+v)' <= eps*beta^2*r obtained by integrating
    the equation for u + v from the center.
    """
    r, u, v = profile.r, profile.u, profile.v
    z = u + v
    dz = profile.du + profile.dv
    checks = {
        "bounds_u": bool(np.all(u >= -tol) and np.all(u <= 1.0 + tol)),
        "bounds_v": bool(np.all(v >= -tol) and np.all(v <= 1.0 + tol)),
        "bound_sum": bool(np.all(z <= 1.0 + tol)),
        "lemma_beta_sqrt_eps": bool(beta * np.sqrt(eps) <= 1.0 / theta + 1e-12),
    }
    above = np.where(u >= theta)[0]
    if len(above) > 0 and above[-1] < len(r) - 1:
        tail = u[above[-1]:]
        checks["decay_after_crossing"] = bool(np.all(np.diff(tail) <= 1e-10))
    else:
        checks["decay_after_crossing"] = True
    slope_tol = 1e-8 * max(1.0, eps * beta**2)
    inner = r <= 1.0
    checks["sum_slope"] = bool(
        np.all(dz[inner] >= -slope_tol)
        and np.all(dz[inner] <= eps * beta**2 * r[inner] + slope_tol))
    return SolveReport(converged=all(checks.values()), checks=checks,
                       residual_norm=0.0)
