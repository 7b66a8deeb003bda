"""Plateau search on the BM standard-deviation curve g(n).

n* minimises (dg/dlog n)^2 for n >= n0; the block-size range used by the
regressions is the stretch around n* over which g stays within the band
[(1 - delta) g(n*), (1 + delta) g(n*)].  Each end is the nearest exit from
the band, whichever edge g leaves through.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, InsufficientDataError

__all__ = ["PlateauRange", "SdSpline", "find_plateau", "fit_sd_spline", "resolvable_limit"]

PLATEAU_FOUND = "plateau_found"
MONOTONE_NO_PLATEAU = "monotone_no_plateau"
CLIPPED_AT_BOUNDARY = "clipped_at_boundary"

DENSE_POINTS = 1024
# min/max squared-slope ratio above which a decreasing g has no flat stretch
MONOTONE_RATIO = 1e-4


@dataclass(frozen=True)
class PlateauRange:
    n_star: float
    n_min: float
    n_max: float
    delta: float
    diagnostic: str

    def contains(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        eps = 1e-9 * self.n_max
        return (n >= self.n_min - eps) & (n <= self.n_max + eps)

    def to_dict(self) -> dict:
        return asdict(self)


class SdSpline:
    """Shape-preserving cubic Hermite interpolant of sd against log n."""

    def __init__(self, grid, sd, n_raw: int | None = None):
        grid = np.asarray(grid, dtype=float)
        sd = np.asarray(sd, dtype=float)
        if grid.size < 4:
            raise InsufficientDataError(f"sd spline needs at least 4 grid points, got {grid.size}")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        self.grid = grid
        self.sd = sd
        self.n_raw = int(n_raw if n_raw is not None else grid[-1])
        self._log_lo = math.log(grid[0])
        self._log_hi = math.log(grid[-1])
        self._interp = PchipInterpolator(np.log(grid), sd, extrapolate=False)
        self._deriv = self._interp.derivative()

    @property
    def n_lo(self) -> float:
        return float(self.grid[0])

    @property
    def n_hi(self) -> float:
        return float(self.grid[-1])

    def _log(self, n):
        return np.clip(np.log(np.asarray(n, dtype=float)), self._log_lo, self._log_hi)

    def __call__(self, n):
        out = self._interp(self._log(n))
        return out if np.ndim(out) else float(out)

    def dlog(self, n):
        """dg / dlog n."""
        out = self._deriv(self._log(n))
        return out if np.ndim(out) else float(out)


def fit_sd_spline(curve) -> SdSpline:
    return SdSpline(curve.grid, curve.sd, getattr(curve, "n_raw", None))


def _band_exit(g, n_from: float, n_to: float, lo_level: float, hi_level: float):
    """First n moving from ``n_from`` toward ``n_to`` where g leaves the band.

    Returns ``None`` if g stays inside all the way.
    """
    path = np.geomspace(n_from, n_to, DENSE_POINTS)
    vals = g(path)
    outside = (vals > hi_level) | (vals < lo_level)
    hits = np.flatnonzero(outside)
    if hits.size == 0:
        return None
    j = int(hits[0])
    if j == 0:
        return float(path[0])
    level = hi_level if vals[j] > hi_level else lo_level
    a, b = math.log(path[j - 1]), math.log(path[j])
    root = brentq(lambda t: g(math.exp(t)) - level, a, b, xtol=1e-12)
    return math.exp(root)


def resolvable_limit(n_raw: int, delta: float) -> float:
    """Largest block size at which sd noise stays below the band width.

    The relative sampling error of the sub-sample sd is roughly
    1/sqrt(N_eff) with N_eff = 1/sum(p^2) ~ 2N/n, so it exceeds delta once
    n > 2 N delta^2.
    """
    return 2.0 * n_raw * delta * delta


def find_plateau(g: SdSpline, delta: float = 0.1, n0: float | None = None,
                 n_cap: float | None = None) -> PlateauRange:
    """Locate n* and the surrounding [n_min, n_max] on the sd spline.

    The n* search and the monotonicity diagnostic look at block sizes up to
    ``n_cap`` (default ``resolvable_limit``).  If nothing above n0 is
    resolvable the search collapses to n* = n0.  The band crossings are
    searched over the whole grid.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    lo, hi = g.n_lo, g.n_hi
    if n0 is None:
        n0 = math.sqrt(g.n_raw)
    n0 = float(min(max(n0, lo), hi))
    if n_cap is None:
        n_cap = resolvable_limit(g.n_raw, delta)
    top = float(min(max(n_cap, n0), hi))

    # diagnostic: strictly decreasing with no flat stretch
    full = np.geomspace(lo, top, DENSE_POINTS)
    slope_full = g.dlog(full)
    sq_full = slope_full ** 2
    monotone = bool(np.all(slope_full < 0.0)) and float(sq_full.min()) > MONOTONE_RATIO * float(sq_full.max())

    # n*: argmin of the squared slope on n >= n0, ties to the smallest n
    if top > n0:
        search = np.geomspace(n0, top, DENSE_POINTS)
        sq = g.dlog(search) ** 2
        j = int(np.argmin(sq))
        n_star = float(search[j])
        if sq[j] > 0.0:
            a = math.log(search[max(j - 1, 0)])
            b = math.log(search[min(j + 1, search.size - 1)])
            if b > a:
                res = minimize_scalar(lambda t: float(g.dlog(math.exp(t))) ** 2, bounds=(a, b),
                                      method="bounded", options={"xatol": 1e-10})
                if float(g.dlog(math.exp(res.x))) ** 2 < sq[j]:
                    n_star = float(math.exp(res.x))
    else:
        n_star = n0

    level = float(g(n_star))
    band = ((1.0 - delta) * level, (1.0 + delta) * level)
    clipped = False
    n_min = _band_exit(g, n_star, lo, *band) if n_star > lo else None
    if n_min is None:
        n_min, clipped = lo, True
    n_max = _band_exit(g, n_star, hi, *band) if n_star < hi else None
    if n_max is None:
        n_max, clipped = hi, True

    if monotone:
        diagnostic = MONOTONE_NO_PLATEAU
    elif clipped:
        diagnostic = CLIPPED_AT_BOUNDARY
    else:
        diagnostic = PLATEAU_FOUND
    return PlateauRange(n_star=n_star, n_min=float(n_min), n_max=float(n_max), delta=float(delta),
                        diagnostic=diagnostic)
