"""Power-law fits on log-log data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ScalingFit:
    """``value ~ prefactor * N**exponent`` fitted by least squares on logs."""

    exponent: float
    prefactor: float
    r_squared: float
    points: tuple[tuple[float, float], ...]
    exponent_se: float = float("nan")

    def predict(self, x) -> np.ndarray:
        return self.prefactor * np.asarray(x, dtype=float) ** self.exponent

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "exponent_se": self.exponent_se,
            "prefactor": self.prefactor,
            "r_squared": self.r_squared,
            "points": [list(p) for p in self.points],
        }


def fit_power_law(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Ordinary least squares of ``log y`` on ``log x``."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("a power-law fit needs at least 3 points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(~np.isfinite(x)) or np.any(~np.isfinite(y)):
        raise ValueError("points must be finite")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fits need positive x and y")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise ValueError("x values must not all be equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    ss_res = float((resid**2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    se = float(np.sqrt(ss_res / (len(pts) - 2) / ((lx - lx.mean()) ** 2).sum()))
    return ScalingFit(float(slope), float(np.exp(intercept)), r2, tuple(pts), se)
