"""Sampled radial solution profiles and solver reports."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RadialProfile", "SolveReport"]


@dataclass
class RadialProfile:
    """Radial samples (r, u, v, u', v') with optional per-segment provenance.

    ``pieces`` lists (tag, r_lo, r_hi) for analytically distinct segments,
    e.g. ("core", 0, eta), ("annulus", eta, 1), ("exterior", 1, r_max).
    Integrated profiles carry a single ("integrated", ...) piece.
    """

    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    pieces: tuple = ()

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.du = np.asarray(self.du, dtype=float)
        self.dv = np.asarray(self.dv, dtype=float)
        if not (len(self.r) == len(self.u) == len(self.v) == len(self.du) == len(self.dv)):
            raise ValueError("profile columns must share one length")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("radii must be strictly increasing")
        if not np.all(np.isfinite(self.u)) or not np.all(np.isfinite(self.v)):
            raise ValueError("profile values must be finite")

    def at(self, r):
        """Linear interpolation of (u, v) at radius r."""
        return np.interp(r, self.r, self.u), np.interp(r, self.r, self.v)

    def restrict(self, r_lo: float, r_hi: float) -> "RadialProfile":
        m = (self.r >= r_lo - 1e-15) & (self.r <= r_hi + 1e-15)
        return RadialProfile(self.r[m], self.u[m], self.v[m], self.du[m], self.dv[m],
                             tuple(p for p in self.pieces if p[2] > r_lo and p[1] < r_hi))


@dataclass
class SolveReport:
    """Outcome of an iterative solve or of a validity-check bundle."""

    converged: bool
    iterations: int = 0
    residual_norm: float = float("nan")
    checks: dict = field(default_factory=dict)
    residual_history: list = field(default_factory=list)
    message: str = ""

    @property
    def all_checks_pass(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "residual_norm": float(self.residual_norm),
            "checks": {k: ("pass" if ok else "fail") for k, ok in self.checks.items()},
        }
