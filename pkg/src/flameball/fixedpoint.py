"""Iterative solver built on the compact solution-update operator.

One application of the operator maps a state (u_tilde, beta_tilde), where
u_tilde is the temperature excess over theta on the unit ball with
u_tilde(1) = 0, to a new state by three sub-steps:

1. solve the reactant problem lap(v) = bt^2 v f_t(u~ + theta) with the
   Robin condition v(1) + v'(1) = 1 (second-order FD, ghost node);
2. update beta^2 from the explicit quotient obtained by weighing the
   temperature equation against the screened-Laplace kernel, which encodes
   the Neumann datum u'(1) = -theta(1 + bt*sqrt(eps));
3. solve the linear temperature problem with the new beta and Dirichlet
   u(1) = 0, reporting the achieved u'(1) against the Neumann target.

Fixed points of the operator are exactly the radial solutions of the
rescaled system.  ``picard_solve`` iterates with under-relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded

from .hyper import screened_laplace_kernel
from .nonlinearity import IgnitionFunction, homotopy
from .profile import RadialProfile, SolveReport

__all__ = [
    "RadialGrid",
    "OperatorState",
    "solve_v_robin",
    "beta_update",
    "solve_u_linear",
    "apply_T",
    "picard_solve",
    "reconstruct_profile",
]


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes on [0, 1] with the second-order radial stencil.

    The interior stencil discretizes u'' + (2/r)u' and is exact on
    quadratics at every node including the center row, which uses the
    symmetric limit lap(u)(0) = 3 u''(0).
    """

    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid needs at least 8 intervals")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    def laplacian_rows(self, coeff: np.ndarray):
        """Banded rows of -lap(u) + coeff*u; boundary rows left to callers.

        Returns (lower, diag, upper) with the convention of
        scipy.linalg.solve_banded: lower[i-1], diag[i], upper[i+1] multiply
        u_{i-1}, u_i, u_{i+1} in row i.
        """
        n, h = self.n, self.h
        nodes = self.nodes
        lower = np.zeros(n + 1)
        diag = np.zeros(n + 1)
        upper = np.zeros(n + 1)
        diag[0] = 6.0 / h**2 + coeff[0]
        upper[1] = -6.0 / h**2
        r = nodes[1:n]
        lower[0:n - 1] = -(1.0 / h**2 - 1.0 / (r * h))
        diag[1:n] = 2.0 / h**2 + coeff[1:n]
        upper[2:n + 1] = -(1.0 / h**2 + 1.0 / (r * h))
        return lower, diag, upper

    def apply_laplacian(self, u: np.ndarray) -> np.ndarray:
        """Interior radial Laplacian of sampled values (rows 0..n-1)."""
        n, h = self.n, self.h
        out = np.empty(n)
        out[0] = 6.0 * (u[1] - u[0]) / h**2
        r = self.nodes[1:n]
        out[1:] = (u[2:n + 1] - 2.0 * u[1:n] + u[0:n - 1]) / h**2 \
            + (u[2:n + 1] - u[0:n - 1]) / (r * h)
        return out

    def ball_integral(self, values: np.ndarray) -> float:
        """Radial unit-ball integral int_0^1 r^2 * values dr (Simpson).

        Normalized by the sphere area, i.e. the full solid-angle integral
        divided by 4*pi, consistent with the unit-weight surface term in
        the beta update.
        """
        return float(simpson(self.nodes**2 * values, x=self.nodes))


@dataclass
class OperatorState:
    """Temperature excess over theta (vanishing at r = 1) and its beta."""

    u_tilde: np.ndarray
    beta_tilde: float

    def __post_init__(self):
        self.u_tilde = np.asarray(self.u_tilde, dtype=float)
        if abs(self.u_tilde[-1]) > 1e-10:
            raise ValueError("state requires u_tilde(1) = 0")


def _solve_tridiag(lower, diag, upper, rhs):
    ab = np.zeros((3, len(diag)))
    ab[0, 1:] = upper[1:]
    ab[1, :] = diag
    ab[2, :-1] = lower[:-1]
    return solve_banded((1, 1), ab, rhs)


def solve_v_robin(f_t: IgnitionFunction, beta_tilde: float, u_tilde: np.ndarray,
                  grid: RadialGrid) -> np.ndarray:
    """Reactant sub-problem: lap(v) = bt^2 c(r) v, v(1) + v'(1) = 1.

    c(r) = f_t(u_tilde + theta) >= 0.  The discrete operator is an
    M-matrix, so the solution inherits the continuous bounds 0 <= v <= 1
    (constant 0 and 1 are sub/supersolutions).
    """
    c = f_t(np.maximum(u_tilde + f_t.theta, 0.0))
    coeff = beta_tilde**2 * c
    lower, diag, upper = grid.laplacian_rows(coeff)
    rhs = np.zeros(grid.n + 1)
    # Robin row via ghost node at r = 1: v'(1) = (v_{n+1} - v_{n-1})/(2h) = 1 - v_n
    n, h = grid.n, grid.h
    a_n = -(1.0 / h**2 - 1.0 / h)   # r = 1
    c_n = -(1.0 / h**2 + 1.0 / h)
    b_n = 2.0 / h**2 + coeff[n]
    lower[n - 1] = a_n + c_n
    diag[n] = b_n - 2.0 * h * c_n
    rhs[n] = -2.0 * h * c_n
    return _solve_tridiag(lower, diag, upper, rhs)


def beta_update(v: np.ndarray, f_t: IgnitionFunction, u_tilde: np.ndarray,
                beta_tilde: float, eps: float, theta: float,
                grid: RadialGrid) -> float:
    """Explicit new beta^2 enforcing the Neumann datum of the temperature step.

    Weighing the temperature equation with the screened-Laplace kernel
    K(r) = sinh(a r)/(r sinh a), a = bt*sqrt(eps) (the kernel killed by
    -lap + eps*bt^2), turns the two-point boundary data into

        beta^2 = [theta (1 + sqrt(eps) bt) + bt^2 (eps theta + 1) I_K]
                 / I_{(v f + 1) K}

    with I_g the r^2-weighted unit-ball integral.  The denominator is
    bounded below by the kernel bound a/sinh(a) <= K, so the quotient is
    finite and strictly positive.
    """
    a = beta_tilde * np.sqrt(eps)
    K = screened_laplace_kernel(a, grid.nodes)
    c = f_t(np.maximum(u_tilde + theta, 0.0))
    i_kernel = grid.ball_integral(K)
    i_den = grid.ball_integral((v * c + 1.0) * K)
    num = theta * (1.0 + np.sqrt(eps) * beta_tilde) + beta_tilde**2 * (eps * theta + 1.0) * i_kernel
    return float(num / i_den)


def solve_u_linear(v: np.ndarray, f_t: IgnitionFunction, u_tilde: np.ndarray,
                   beta_tilde: float, beta_new_sq: float, eps: float,
                   theta: float, grid: RadialGrid):
    """Temperature sub-problem with the updated beta and u(1) = 0.

    -lap(u) + eps*bt^2 u = b^2 v f_t(u~+theta) - eps*bt^2*theta + (b^2 - bt^2).
    Returns (u_new, neumann_residual) where the residual compares the
    achieved u'(1) with the target -theta(1 + bt*sqrt(eps)); it vanishes to
    discretization order exactly when beta_new_sq came from ``beta_update``.
    """
    c = f_t(np.maximum(u_tilde + theta, 0.0))
    coeff = eps * beta_tilde**2 * np.ones(grid.n + 1)
    lower, diag, upper = grid.laplacian_rows(coeff)
    rhs = beta_new_sq * v * c - eps * beta_tilde**2 * theta + (beta_new_sq - beta_tilde**2)
    n, h = grid.n, grid.h
    diag[n] = 1.0
    lower[n - 1] = 0.0
    rhs[n] = 0.0
    u = _solve_tridiag(lower, diag, upper, rhs)
    up1 = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h)
    target = -theta * (1.0 + beta_tilde * np.sqrt(eps))
    return u, float(up1 - target)


def apply_T(state: OperatorState, eps: float, t: float, f: IgnitionFunction,
            grid: RadialGrid):
    """One operator application: reactant solve, beta update, temperature solve.

    Returns (new_state, info) with info carrying the reactant profile and
    the Neumann consistency residual.
    """
    f_t = homotopy(f, t)
    v = solve_v_robin(f_t, state.beta_tilde, state.u_tilde, grid)
    b2 = beta_update(v, f_t, state.u_tilde, state.beta_tilde, eps, f.theta, grid)
    u_new, neumann_res = solve_u_linear(v, f_t, state.u_tilde, state.beta_tilde,
                                        b2, eps, f.theta, grid)
    new_state = OperatorState(u_tilde=u_new, beta_tilde=float(np.sqrt(b2)))
    return new_state, {"v": v, "neumann_residual": neumann_res}


def picard_solve(eps: float, t: float, f: IgnitionFunction, init: OperatorState,
                 grid: RadialGrid, max_iter: int = 4000, tol: float = 1e-12,
                 relax: float = 0.5):
    """Under-relaxed fixed-point iteration state <- (1-w) state + w T(state).

    The relaxation weight backs off geometrically when the update norm
    grows.  Success means the successive-iterate norm dropped below tol;
    divergence or stalling is reported in the SolveReport, never raised.
    """
    state = OperatorState(u_tilde=np.array(init.u_tilde, dtype=float),
                          beta_tilde=init.beta_tilde)
    omega = relax
    history = []
    last_delta = np.inf
    info = {"neumann_residual": float("nan")}
    if max_iter == 0:
        return state, SolveReport(converged=False, iterations=0,
                                  residual_norm=float("inf"),
                                  message="no iterations requested")
    for it in range(1, max_iter + 1):
        new_state, info = apply_T(state, eps, t, f, grid)
        delta = float(np.max(np.abs(new_state.u_tilde - state.u_tilde))
                      + abs(new_state.beta_tilde - state.beta_tilde))
        history.append(delta)
        if delta > 4.0 * last_delta and omega > 1e-3:
            omega *= 0.5  # geometric backoff on divergence
        last_delta = delta
        state = OperatorState(
            u_tilde=(1.0 - omega) * state.u_tilde + omega * new_state.u_tilde,
            beta_tilde=(1.0 - omega) * state.beta_tilde + omega * new_state.beta_tilde)
        if delta < tol:
            return state, SolveReport(converged=True, iterations=it,
                                      residual_norm=delta,
                                      residual_history=history,
                                      checks={"neumann_consistency":
                                              abs(info["neumann_residual"]) < 1e-3})
    return state, SolveReport(converged=False, iterations=max_iter,
                              residual_norm=history[-1] if history else float("inf"),
                              residual_history=history,
                              message="fixed-point iteration did not reach tolerance")


def reconstruct_profile(state: OperatorState, eps: float, t: float,
                        f: IgnitionFunction, grid: RadialGrid,
                        r_max: float = 1.0) -> RadialProfile:
    """Full (u, v) profile of a state: add theta, attach the exterior tail."""
    f_t = homotopy(f, t)
    v = solve_v_robin(f_t, state.beta_tilde, state.u_tilde, grid)
    u = state.u_tilde + f.theta
    h = grid.h
    du = np.gradient(u, h, edge_order=2)
    dv = np.gradient(v, h, edge_order=2)
    r = grid.nodes
    pieces = (("fixed-point", 0.0, 1.0),)
    if r_max > 1.0:
        gamma = float(v[-1])
        beta = state.beta_tilde
        a = beta * np.sqrt(eps)
        r_out = np.linspace(1.0 + h, r_max, max(8, int((r_max - 1.0) / h)))
        u_out = f.theta * np.exp(-a * (r_out - 1.0)) / r_out
        v_out = 1.0 - (1.0 - gamma) / r_out
        du_out = -f.theta * np.exp(-a * (r_out - 1.0)) * (a * r_out + 1.0) / r_out**2
        dv_out = (1.0 - gamma) / r_out**2
        r = np.concatenate([r, r_out])
        u = np.concatenate([u, u_out])
        v = np.concatenate([v, v_out])
        du = np.concatenate([du, du_out])
        dv = np.concatenate([dv, dv_out])
        pieces += (("exterior", 1.0, r_max),)
    return RadialProfile(r, u, v, du, dv, pieces)
