"""Extremal index from rolling-window block maxima.

For a block maximum M_n of a stationary series with marginal F, both
n (1 - F(M_n)) and -n log F(M_n) are approximately exponential with mean
1/theta, so theta is estimated by the reciprocal of their sample mean.  The
block size is chosen where the spread of Z peaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .distributions import ecdf
from .errors import DegenerateError, DomainError, InsufficientDataError, SsbmError
from .subsample import geometric_grid

__all__ = ["EiCurve", "default_step", "rolling_bm", "sojourn_time", "theta_curve", "z_stats"]

VARIANTS = ("bb", "northrop")


def default_step(n: int) -> int:
    # round half up; Python's round() would send sqrt(n) = k + 0.5 to even
    return max(1, int(math.floor(math.sqrt(n) + 0.5)))


def rolling_bm(series, n: int, step: int | None = None) -> np.ndarray:
    """Maxima of windows [t, t + n) for t = 0, step, 2 step, ..."""
    x = np.asarray(series, dtype=float).ravel()
    n = int(n)
    if n < 1:
        raise DomainError(f"block size must be positive, got {n}")
    if x.size < n:
        raise InsufficientDataError(f"series of length {x.size} is shorter than the block size {n}")
    step = default_step(n) if step is None else int(step)
    if step < 1:
        raise DomainError(f"step must be positive, got {step}")
    windows = sliding_window_view(x, n)[::step]
    return windows.max(axis=1)


def z_stats(maxima, cdf, n: int, variant: str = "bb") -> np.ndarray:
    """Z_BB = n (1 - F(M)) or Z_Northrop = -n log F(M)."""
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    u = np.asarray(cdf(np.asarray(maxima, dtype=float)), dtype=float)
    if np.any(~(u > 0.0)) or np.any(~(u < 1.0)):
        raise DomainError("marginal CDF must lie strictly inside (0, 1) at every block maximum")
    if variant == "bb":
        return n * (1.0 - u)
    return -n * np.log(u)


def sojourn_time(theta: float) -> float:
    """Mean cluster duration 1/theta."""
    if not 0.0 < theta <= 1.0:
        raise DomainError(f"extremal index must lie in (0, 1], got {theta!r}")
    return 1.0 / theta


@dataclass
class EiCurve:
    grid: np.ndarray
    theta_hat: np.ndarray
    z_sd: np.ndarray
    selected_n: int
    selected_theta: float
    raw_theta: float
    variant: str
    clamped: bool = False
    meta: dict = field(default_factory=dict)

    def rows(self):
        for j in range(self.grid.size):
            yield int(self.grid[j]), float(self.theta_hat[j]), float(self.z_sd[j])

    @property
    def sojourn(self) -> float:
        return sojourn_time(self.selected_theta)

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "selected_n": int(self.selected_n),
            "selected_theta": float(self.selected_theta),
            "raw_theta": float(self.raw_theta),
            "clamped": bool(self.clamped),
            "sojourn_time": self.sojourn,
        }


def _cdf_of(marginal):
    if hasattr(marginal, "cdf"):
        return marginal.cdf
    if callable(marginal):
        return marginal
    raise DomainError("marginal must provide a cdf")


def theta_curve(series, marginal=None, grid=None, variant: str = "bb", points: int = 32) -> EiCurve:
    """theta estimates over a block-size grid; selection at the largest sd of Z.

    ``marginal`` defaults to the empirical CDF of the series.  The default
    grid has ``points`` geometric block sizes from 4 to length / 4.
    """
    x = np.asarray(series, dtype=float).ravel()
    if x.size < 16:
        raise InsufficientDataError(f"theta_curve needs at least 16 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("series contains non-finite values")
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    limit = x.size // 4
    if grid is None:
        grid = geometric_grid(4, limit, points)
    grid = np.asarray(grid, dtype=int)
    if grid.size == 0 or grid.min() < 1 or grid.max() > limit:
        raise DomainError(f"block sizes must lie in [1, {limit}] (length / 4)")
    cdf = _cdf_of(ecdf(x) if marginal is None else marginal)

    theta, spread = [], []
    for n in grid:
        n = int(n)
        try:
            z = z_stats(rolling_bm(x, n), cdf, n, variant)
        except SsbmError as exc:
            raise type(exc)(f"at block size n={n}: {exc}") from exc
        theta.append(1.0 / float(np.mean(z)))
        spread.append(float(np.std(z, ddof=1)) if z.size > 1 else 0.0)
    theta = np.array(theta)
    spread = np.array(spread)
    if not np.any(spread > 0.0):
        raise DegenerateError("Z has zero spread at every block size; no block size can be selected")
    j = int(np.argmax(spread))  # first maximum, i.e. the smallest n among ties
    raw = float(theta[j])
    return EiCurve(
        grid=grid,
        theta_hat=theta,
        z_sd=spread,
        selected_n=int(grid[j]),
        selected_theta=min(raw, 1.0),
        raw_theta=raw,
        variant=variant,
        clamped=raw > 1.0,
    )
