"""Weighted least-squares EVI estimates from a BM curve.

Under an exponential-type tail MPMR grows like xi log n and EMR like
xi H_n, so xi is the slope of either curve against the matching regressor,
fitted over the plateau range.  Weights are the derivatives of the
regressors: 1/n for log n and psi'(n + 1) for H_n.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateError, InsufficientDataError
from .specfun import harmonic_real

__all__ = ["EviFit", "weighted_line", "wlse_emr", "wlse_mpmr"]

MIN_POINTS = 3


@dataclass(frozen=True)
class EviFit:
    method: str
    xi_hat: float
    intercept: float
    n_range: tuple
    points_used: int
    weighted_r2: float

    def predict(self, regressor):
        return self.intercept + self.xi_hat * np.asarray(regressor, dtype=float)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        return d


def weighted_line(x, y, w) -> tuple[float, float, float]:
    """Weighted least-squares fit y ~ a + b x; returns (b, a, weighted R^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    sw = w.sum()
    xm = np.dot(w, x) / sw
    ym = np.dot(w, y) / sw
    dx = x - xm
    dy = y - ym
    sxx = float(np.dot(w, dx * dx))
    if sxx <= 0.0:
        raise DegenerateError("regressor is constant over the fitted range")
    slope = float(np.dot(w, dx * dy)) / sxx
    intercept = float(ym - slope * xm)
    syy = float(np.dot(w, dy * dy))
    resid = dy - slope * dx
    sse = float(np.dot(w, resid * resid))
    r2 = 1.0 if syy == 0.0 else 1.0 - sse / syy
    return slope, intercept, r2


def _select(curve, plateau):
    mask = plateau.contains(curve.grid)
    used = int(mask.sum())
    if used < MIN_POINTS:
        raise InsufficientDataError(
            f"only {used} grid points inside [{plateau.n_min:.6g}, {plateau.n_max:.6g}], need {MIN_POINTS}"
        )
    return mask, used


def wlse_mpmr(curve, plateau) -> EviFit:
    """Slope of MPMR against log n, weights 1/n."""
    mask, used = _select(curve, plateau)
    n = curve.grid[mask].astype(float)
    slope, intercept, r2 = weighted_line(np.log(n), curve.mpmr[mask], curve.mpmr_weights[mask])
    return EviFit("mpmr_wlse", slope, intercept, (plateau.n_min, plateau.n_max), used, r2)


def wlse_emr(curve, plateau) -> EviFit:
    """Slope of EMR against the harmonic number H_n, weights psi'(n + 1)."""
    mask, used = _select(curve, plateau)
    h = np.array([harmonic_real(float(n)) for n in curve.grid[mask]])
    slope, intercept, r2 = weighted_line(h, curve.emr[mask], curve.emr_weights[mask])
    if not math.isfinite(slope):
        raise DegenerateError("non-finite EMR slope")
    return EviFit("emr_wlse", slope, intercept, (plateau.n_min, plateau.n_max), used, r2)
