"""Command-line interface.

Subcommands: heaviside-trace, shoot, asymptotics, eps-bounds, fixed-point,
validate.  A single JSON config file can hold everything; command-line
flags override config values.  Exit codes: 0 success, 1 validation
failure, 2 solver non-convergence, 3 config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import closedform as hv
from . import io as fio
from .continuation import BifurcationCurve, trace_annulus, trace_ball
from .fixedpoint import OperatorState, RadialGrid, picard_solve, reconstruct_profile
from .nonlinearity import (
    IgnitionFunction,
    eps0_bound,
    eps1_bound,
    heaviside,
    parse_nonlinearity,
)
from .shooting import (
    IntegratorConfig,
    ShootingState,
    flux_identity_check,
    solve_shooting,
    validity_checks,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CONFIG = 3


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError("config", f"file not found: {path}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
    for key in ("theta", "eps", "eps_min", "eps_max", "tol"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    if args.out_dir is not None:
        cfg["out_dir"] = args.out_dir
    return cfg


def _theta(cfg: dict, default: float | None = None) -> float:
    theta = cfg.get("theta", default)
    if theta is None:
        raise ConfigError("theta", "required")
    theta = float(theta)
    if not 0.0 < theta < 1.0:
        raise ConfigError("theta", f"must lie in (0, 1), got {theta}")
    return theta


def _nonlinearity(cfg: dict) -> IgnitionFunction:
    spec = cfg.get("nonlinearity")
    if spec is None:
        return heaviside(_theta(cfg))
    try:
        f = parse_nonlinearity(spec)
    except ValueError as exc:
        raise ConfigError("nonlinearity", str(exc)) from None
    if "theta" in cfg and abs(float(cfg["theta"]) - f.theta) > 1e-15:
        raise ConfigError("theta", "conflicts with nonlinearity.theta")
    return f


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg.get("out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_heaviside_trace(cfg: dict) -> int:
    """Compose the indicator-law bifurcation curve and its summary."""
    theta = _theta(cfg)
    bounds = eps1_bound(heaviside(theta))
    eps_min = float(cfg.get("eps_min", 1e-4))
    eps_max = float(cfg.get("eps_max", min(bounds.eps1, 0.999)))
    n_eps = int(cfg.get("n_eps", 200))
    if eps_min <= 0 or eps_min >= eps_max:
        raise ConfigError("eps_min", "need 0 < eps_min < eps_max")
    out = _out_dir(cfg)

    # grid uniform in sqrt(eps), the natural curve parameter
    eps_grid = np.linspace(np.sqrt(eps_min), np.sqrt(eps_max), n_eps) ** 2
    ball = trace_ball(theta, eps_grid)
    eps0x = hv.ball_crossover_eps0(theta)
    annulus = trace_annulus(theta, eps_min, eps0x * (1.0 - 1e-9),
                            n_steps=int(cfg.get("n_annulus", 48)))
    limits = hv.asymptotic_limits(theta)
    fold = hv.ball_fold(theta)

    lower = [p for p in ball.points if p.mode == "ball-lower"]
    upper = sorted((p for p in ball.points if p.mode == "ball-upper"),
                   key=lambda p: p.eps)
    upper_valid = [p for p in upper if p.eps >= eps0x]
    composite = annulus.points + upper_valid + lower[::-1]
    curve = BifurcationCurve(points=composite,
                             fold=(fold[0], len(annulus.points) + len(upper_valid) - 1)
                             if fold else None)

    fio.write_curve_csv(out / "curve.csv", curve)
    summary = {
        "eps_star": fold[0] if fold else None,
        "eps0_crossover": eps0x,
        "a0": limits.a0,
        "x0": limits.x0,
        "beta0": hv.ball_beta0(theta),
    }
    fio.write_json(out / "summary.json", summary)
    fio.write_json(out / "curve.meta.json", {"theta": theta, "eps_min": eps_min,
                                             "eps_max": eps_max, "n_eps": n_eps})
    print(f"wrote {out / 'curve.csv'} ({len(composite)} points) and summary.json")
    return EXIT_OK


def _shoot_guess(cfg, f, eps, theta) -> ShootingState:
    if "guess" in cfg:
        g = cfg["guess"]
        return ShootingState(u0=float(g["u0"]), v0=float(g["v0"]),
                             beta=float(g["beta"]), eps=eps, theta=theta)
    base_is_indicator = f.kind == "smoothed" and f.base.kind == "heaviside"
    if base_is_indicator and eps > 0:
        roots = hv.ball_roots(eps, theta)
        if roots is not None:
            beta = roots[0]
            return ShootingState(u0=hv.ball_center_value(eps, beta, theta),
                                 v0=2.0 * np.exp(-beta) / (1.0 + np.exp(-2.0 * beta)),
                                 beta=beta, eps=eps, theta=theta)
    # zero-radiation seed: u + v = 1 and a logistic-like hump
    u0 = theta + 0.7 * (1.0 - theta)
    return ShootingState(u0=u0, v0=1.0 - u0,
                         beta=1.2 * np.pi / np.sqrt(1.0 - theta), eps=eps, theta=theta)


def cmd_shoot(cfg: dict) -> int:
    f = _nonlinearity(cfg)
    theta = f.theta
    eps = float(cfg.get("eps", 0.0))
    if eps < 0:
        raise ConfigError("eps", "must be nonnegative")
    if not f.is_continuous:
        raise ConfigError(
            "nonlinearity",
            "shooting will not integrate a discontinuous law; wrap it as "
            '{"kind": "smoothed", "theta": ..., "n": 10000}')
    out = _out_dir(cfg)
    cap = eps0_bound(f)
    if eps > cap:
        print(f"refusing: eps={eps} exceeds the nonexistence bound eps0={cap:.6g}; "
              "only the trivial state exists there", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    guess = _shoot_guess(cfg, f, eps, theta)
    tol = float(cfg.get("tol", 1e-9))
    state, prof, report = solve_shooting(f, eps, theta, guess, tol=tol)
    checks = validity_checks(prof, theta, eps, state.beta)
    flux = flux_identity_check(prof, f, state.beta)
    report.checks.update(checks.checks)
    report.checks["flux_identity"] = abs(flux) < 1e-6

    fio.write_profile_csv(out / "profile.csv", prof)
    payload = report.to_dict()
    payload["flux_residual"] = flux
    payload["beta"] = state.beta
    payload["u0"] = state.u0
    payload["v0"] = state.v0
    fio.write_json(out / "report.json", payload)
    fio.write_json(out / "profile.meta.json",
                   {"theta": theta, "eps": eps, "beta": state.beta,
                    "nonlinearity": cfg.get("nonlinearity")})
    if not report.converged:
        print(f"shooting did not converge: |residual|={report.residual_norm:.3e}",
              file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(f"converged: beta={state.beta:.12g}  residual={report.residual_norm:.3e}")
    return EXIT_OK


def cmd_asymptotics(cfg: dict) -> int:
    theta = _theta(cfg)
    lim = hv.asymptotic_limits(theta)
    lo, hi = (1.0 - theta) / (2.0 * theta), 1.0 / theta - 1.0
    res_a = theta * (lim.a0 / np.tanh(lim.a0) - 1.0) + theta * (1.0 + lim.a0) - 1.0
    res_x = hv._width_equation_lhs(lim.x0) - theta * (1.0 + lim.a0)
    payload = {
        "a0": lim.a0,
        "x0": lim.x0,
        "checks": {
            "a0_bracket": bool(lo <= lim.a0 <= hi),
            "a0_residual": float(res_a),
            "x0_residual": float(res_x),
            "target_in_range": bool(0.5 < theta * (1.0 + lim.a0) < 1.0),
        },
    }
    out = _out_dir(cfg)
    fio.write_json(out / "asymptotics.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_eps_bounds(cfg: dict) -> int:
    f = _nonlinearity(cfg)
    b = eps1_bound(f)
    payload = {"eps0": b.eps0, "eps1": b.eps1, "a_eps": b.a_eps, "b_eps": b.b_eps}
    out = _out_dir(cfg)
    fio.write_json(out / "eps_bounds.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_fixed_point(cfg: dict) -> int:
    f = _nonlinearity(cfg)
    theta = f.theta
    eps = float(cfg.get("eps", 0.0))
    t = float(cfg.get("t", 0.0))
    grid = RadialGrid(int(cfg.get("grid_n", 2048)))
    nodes = grid.nodes
    init = OperatorState(u_tilde=0.5 * (1.0 - theta) * (1.0 - nodes**2),
                         beta_tilde=1.2 * np.pi / np.sqrt(1.0 - theta))
    state, report = picard_solve(eps, t, f, init, grid,
                                 max_iter=int(cfg.get("max_iter", 4000)),
                                 tol=float(cfg.get("tol", 1e-12)),
                                 relax=float(cfg.get("relax", 0.5)))
    out = _out_dir(cfg)
    prof = reconstruct_profile(state, eps, t, f, grid, r_max=float(cfg.get("r_max", 2.0)))
    fio.write_profile_csv(out / "fixed_point_profile.csv", prof)
    payload = report.to_dict()
    payload["beta"] = state.beta_tilde
    fio.write_json(out / "fixed_point_report.json", payload)
    fio.write_json(out / "fixed_point_profile.meta.json",
                   {"theta": theta, "eps": eps, "beta": state.beta_tilde, "t": t})
    if not report.converged:
        print("fixed-point iteration did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(f"converged: beta={state.beta_tilde:.12g} in {report.iterations} iterations")
    return EXIT_OK


def cmd_validate(cfg: dict, profile_path: str) -> int:
    try:
        prof = fio.read_profile_csv(profile_path)
    except fio.CsvFormatError as exc:
        print(f"parse error in {profile_path}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    meta_path = Path(profile_path).with_suffix(".meta.json")
    meta = {}
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    theta = float(cfg.get("theta", meta.get("theta", 0.5)))
    eps = float(cfg.get("eps", meta.get("eps", 0.0)))
    beta = float(cfg.get("beta", meta.get("beta", 0.0)))
    if beta <= 0:
        raise ConfigError("beta", "required (flag, config, or profile sidecar)")
    spec = cfg.get("nonlinearity") or meta.get("nonlinearity")
    f = parse_nonlinearity(spec) if spec else heaviside(theta)

    report = validity_checks(prof, theta, eps, beta)
    flux = flux_identity_check(prof, f, beta)
    report.checks["flux_identity"] = abs(flux) < float(cfg.get("flux_tol", 1e-6))
    for name, ok in sorted(report.checks.items()):
        print(f"{name}: {'pass' if ok else 'fail'}")
    print(f"flux_residual: {flux:.3e}")
    return EXIT_OK if report.all_checks_pass else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=float, default=None)
    common.add_argument("--eps", type=float, default=None)
    common.add_argument("--eps-min", dest="eps_min", type=float, default=None)
    common.add_argument("--eps-max", dest="eps_max", type=float, default=None)
    common.add_argument("--config", type=str, default=None, help="JSON config file")
    common.add_argument("--out-dir", dest="out_dir", type=str, default=None)
    common.add_argument("--tol", type=float, default=None)

    parser = argparse.ArgumentParser(prog="flameball",
                                     description="Radial flame-ball solution toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("heaviside-trace", parents=[common],
                   help="trace the indicator-law bifurcation curve")
    sub.add_parser("shoot", parents=[common], help="shooting solve at one eps")
    sub.add_parser("asymptotics", parents=[common],
                   help="large-beta limits of the annulus branch")
    sub.add_parser("eps-bounds", parents=[common],
                   help="scalar nonexistence bounds for the radiation coefficient")
    sub.add_parser("fixed-point", parents=[common],
                   help="under-relaxed fixed-point iteration")
    val = sub.add_parser("validate", parents=[common],
                         help="validity and flux-identity checks on a profile CSV")
    val.add_argument("profile", type=str)
    val.add_argument("--beta", type=float, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if getattr(args, "beta", None) is not None:
            cfg["beta"] = args.beta
        if args.command == "heaviside-trace":
            return cmd_heaviside_trace(cfg)
        if args.command == "shoot":
            return cmd_shoot(cfg)
        if args.command == "asymptotics":
            return cmd_asymptotics(cfg)
        if args.command == "eps-bounds":
            return cmd_eps_bounds(cfg)
        if args.command == "fixed-point":
            return cmd_fixed_point(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, args.profile)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
