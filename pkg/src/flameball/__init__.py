"""Radial flame-ball solutions of a reaction-diffusion system with heat loss.

The package computes radially symmetric solution branches of the coupled
temperature/reactant system on R^3, rescaled to the unit ball:

* closed forms for the indicator ignition law (ball and annulus reaction
  geometries, branch asymptotics, nonexistence bounds);
* a shooting solver for general continuous ignition laws;
* an iterative fixed-point solver used as an independent cross-check;
* bifurcation-curve tracing with fold detection, and a CLI that emits
  plot-ready CSV.
"""

from .profile import RadialProfile, SolveReport
from .closedform import (
    AnnulusBranchPoint,
    AsymptoticLimits,
    BallBranchPoint,
    annulus_profile,
    annulus_residual,
    annulus_solve,
    asymptotic_limits,
    ball_crossover_eps0,
    ball_equation,
    ball_profile,
    ball_roots,
    ball_validity,
    exterior_profile,
)
from .shooting import (
    IntegratorConfig,
    ShootingState,
    boundary_residual,
    flux_identity_check,
    integrate_radial,
    solve_shooting,
    validity_checks,
)
from .fixedpoint import OperatorState, RadialGrid, apply_T, picard_solve
from .continuation import (
    BifurcationCurve,
    BranchPoint,
    detect_fold,
    trace_annulus,
    trace_ball,
    trace_general,
)

from .nonlinearity import (
    EpsilonBounds,
    IgnitionFunction,
    eps0_bound,
    eps1_bound,
    heaviside,
    homotopy,
    lower_envelope,
    parse_nonlinearity,
    ramp,
    smoothed,
    tabulated,
)

__version__ = "0.1.0"
