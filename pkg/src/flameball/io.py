"""Deterministic CSV/JSON serialization for profiles, branch points and curves.

Floats are written with 17 significant digits so every file round-trips
bit-exactly through ``float()``.  Data files never contain timestamps;
run metadata goes to a separate sidecar.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .continuation import BifurcationCurve, BranchPoint
from .profile import RadialProfile

__all__ = [
    "CsvFormatError",
    "format_float",
    "write_profile_csv",
    "read_profile_csv",
    "write_branch_csv",
    "write_curve_csv",
    "read_curve_csv",
    "write_json",
]

PROFILE_HEADER = ["r", "u", "v", "du", "dv"]
BRANCH_HEADER = ["mode", "theta", "eps", "beta", "eta", "gamma", "delta", "res1", "res2"]
CURVE_HEADER = ["mode", "eps", "sqrt_eps", "beta", "eta", "valid", "res_norm"]


class CsvFormatError(ValueError):
    """Malformed CSV input; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def write_profile_csv(path, profile: RadialProfile):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PROFILE_HEADER)
        for row in zip(profile.r, profile.u, profile.v, profile.du, profile.dv):
            w.writerow([format_float(x) for x in row])


def read_profile_csv(path) -> RadialProfile:
    path = Path(path)
    cols = {name: [] for name in PROFILE_HEADER}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PROFILE_HEADER:
            raise CsvFormatError(f"expected header {','.join(PROFILE_HEADER)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(PROFILE_HEADER):
                raise CsvFormatError(f"expected {len(PROFILE_HEADER)} fields, got {len(row)}", lineno)
            try:
                values = [float(x) for x in row]
            except ValueError as exc:
                raise CsvFormatError(str(exc), lineno) from None
            for name, val in zip(PROFILE_HEADER, values):
                cols[name].append(val)
    if len(cols["r"]) < 2:
        raise CsvFormatError("profile needs at least two rows", 2)
    try:
        return RadialProfile(*(np.array(cols[name]) for name in PROFILE_HEADER))
    except ValueError as exc:
        raise CsvFormatError(str(exc), 2) from None


def write_branch_csv(path, rows):
    """Rows are dicts (or branch-point-like) with the BRANCH_HEADER fields."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BRANCH_HEADER)
        for row in rows:
            get = row.get if isinstance(row, dict) else lambda k, d=float("nan"): getattr(row, k, d)
            w.writerow([
                get("mode", ""),
                *(format_float(get(k, float("nan"))) for k in BRANCH_HEADER[1:]),
            ])


def write_curve_csv(path, curve: BifurcationCurve):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_HEADER)
        for p in curve.points:
            w.writerow([
                p.mode,
                format_float(p.eps),
                format_float(np.sqrt(p.eps)),
                format_float(p.beta),
                format_float(p.eta),
                "1" if p.valid else "0",
                format_float(p.res_norm),
            ])


def read_curve_csv(path) -> BifurcationCurve:
    path = Path(path)
    points = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CURVE_HEADER:
            raise CsvFormatError(f"expected header {','.join(CURVE_HEADER)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CURVE_HEADER):
                raise CsvFormatError(f"expected {len(CURVE_HEADER)} fields", lineno)
            try:
                points.append(BranchPoint(
                    mode=row[0], eps=float(row[1]), beta=float(row[3]),
                    theta=float("nan"), eta=float(row[4]),
                    valid=row[5] == "1", res_norm=float(row[6])))
            except ValueError as exc:
                raise CsvFormatError(str(exc), lineno) from None
    return BifurcationCurve(points=points)


def write_json(path, payload: dict):
    path = Path(path)
    with path.open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
