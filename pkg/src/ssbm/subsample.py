"""Sub-sampling block maxima.

For a sorted sample x_[1] <= ... <= x_[N], the maximum of a size-n subset
drawn without replacement equals x_[i] with probability

    p_{n,i} = C(i-1, n-1) / C(N, n),    i = n..N.

Expectations over *all* C(N, n) subsets are therefore plain weighted sums, so
no resampling is needed.  EMR is the weighted mean, the BM variance the
weighted variance, and MPMR the mode of the weighted Gaussian KDE found by
mean shift.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConvergenceError, DegenerateError, DomainError, InsufficientDataError, SsbmError
from .specfun import trigamma

__all__ = [
    "BmCurve",
    "SortedSample",
    "SubsampleWeights",
    "bm_curve",
    "emr_hat",
    "geometric_grid",
    "moments_hat",
    "mpmr_hat",
    "weights",
]

TRANSFORMS = ("identity", "log", "logloss")

MEANSHIFT_MAX_ITER = 500
MEANSHIFT_RTOL = 1e-8


@dataclass(frozen=True)
class SortedSample:
    """Ascending observations plus the transform that produced them."""

    values: np.ndarray
    transform: str = "identity"

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        if v.size < 2:
            raise InsufficientDataError(f"need at least 2 observations, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError("sample contains non-finite values")
        if self.transform not in TRANSFORMS:
            raise DomainError(f"unknown transform {self.transform!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_raw(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n_raw


@dataclass(frozen=True)
class SubsampleWeights:
    """log p_{n,i} for i = n..N (1-based ranks)."""

    n: int
    log_p: np.ndarray

    @property
    def N(self) -> int:
        return self.n + self.log_p.size - 1

    @property
    def p(self) -> np.ndarray:
        return np.exp(self.log_p)


def weights(N: int, n: int) -> SubsampleWeights:
    N, n = int(N), int(n)
    if N < 1 or not 1 <= n <= N:
        raise DomainError(f"block size must satisfy 1 <= n <= N, got n={n}, N={N}")
    i = np.arange(n, N + 1, dtype=float)
    # log C(i-1, n-1), normalised by its log-sum (= log C(N, n), hockey-stick)
    log_c = gammaln(i) - gammaln(i - n + 1.0) - gammaln(float(n))
    log_p = log_c - logsumexp(log_c)
    # gammaln loses ~1e-16 * |log_c| absolute accuracy; a second pass with an
    # exactly rounded sum restores the normalisation
    log_p -= math.log(math.fsum(np.exp(log_p)))
    return SubsampleWeights(n=n, log_p=log_p)


def _as_sorted(sample) -> SortedSample:
    return sample if isinstance(sample, SortedSample) else SortedSample(np.asarray(sample))


def _weighted_top(sample, n: int):
    s = _as_sorted(sample)
    w = weights(s.n_raw, n)
    return s.values[n - 1 :], w.p


def emr_hat(sample, n: int) -> float:
    """Expected block maximum over all size-n subsets."""
    x, p = _weighted_top(sample, n)
    return float(np.dot(p, x))


def moments_hat(sample, n: int) -> tuple[float, float, float]:
    """(mean, variance, sd) of the sub-sample block maximum."""
    x, p = _weighted_top(sample, n)
    mean = float(np.dot(p, x))
    var = max(float(np.dot(p, (x - mean) ** 2)), 0.0)
    return mean, var, math.sqrt(var)


def _mean_shift(x, p, h, start, tol):
    """Fixed-point mean shift with Steffensen (Aitken) acceleration.

    An extrapolated point is accepted only if it does not lower the kernel
    density, so the iterates stay monotone like plain mean shift.  Each kernel
    pass counts as one iteration against the cap.
    """
    inv2h2 = 0.5 / (h * h)

    def step(m):
        d = x - m
        k = p * np.exp(-(d * d) * inv2h2)
        total = float(k.sum())
        if total <= 0.0:
            return None, 0.0
        return float(np.dot(k, x)) / total, total

    m0 = start
    used = 0
    while used < MEANSHIFT_MAX_ITER:
        m1, _ = step(m0)
        used += 1
        if m1 is None:
            return None
        if abs(m1 - m0) <= tol:
            return m1
        m2, dens2 = step(m1)
        used += 1
        if m2 is None:
            return None
        if abs(m2 - m1) <= tol:
            return m2
        denom = m2 - 2.0 * m1 + m0
        nxt = m2
        if denom != 0.0:
            acc = m0 - (m1 - m0) ** 2 / denom
            if math.isfinite(acc):
                d = x - acc
                if float(np.sum(p * np.exp(-(d * d) * inv2h2))) >= dens2:
                    nxt = acc
                used += 1
        m0 = nxt
    return None


def mpmr_hat(sample, n: int) -> float:
    """Mode of the p_{n,i}-weighted Gaussian KDE of the sample (mean shift).

    Bandwidth is Scott's rule with the weighted standard deviation and the
    effective size 1 / sum(p^2).
    """
    s = _as_sorted(sample)
    span = float(s.values[-1] - s.values[0])
    if span == 0.0:
        raise DegenerateError("mpmr_hat is undefined for a constant sample")
    x, p = _weighted_top(s, n)
    mean = float(np.dot(p, x))
    sd = math.sqrt(max(float(np.dot(p, (x - mean) ** 2)), 0.0))
    if sd == 0.0:
        # all mass on a single value (n == N, or ties at the top)
        return mean
    n_eff = 1.0 / float(np.dot(p, p))
    h = sd * n_eff ** (-0.2)
    # drop weights that cannot move the iterate
    keep = p > p.max() * 1e-18
    x, p = x[keep], p[keep]
    tol = MEANSHIFT_RTOL * span
    mode = _mean_shift(x, p, h, mean, tol)
    if mode is None:
        for start in x[np.argsort(p)[::-1][:3]]:
            mode = _mean_shift(x, p, h, float(start), tol)
            if mode is not None:
                break
    if mode is None:
        raise ConvergenceError(f"mean shift did not converge in {MEANSHIFT_MAX_ITER} iterations (n={n})")
    return mode


def geometric_grid(lo: int, hi: int, points: int) -> np.ndarray:
    """Unique integers geometrically spaced on [lo, hi], endpoints included."""
    lo, hi = int(lo), int(hi)
    if lo < 1 or hi < lo:
        raise DomainError(f"invalid grid range [{lo}, {hi}]")
    if points < 2 or hi == lo:
        return np.array(sorted({lo, hi}), dtype=int)
    raw = np.geomspace(lo, hi, int(points))
    return np.unique(np.clip(np.rint(raw).astype(int), lo, hi))


@dataclass
class BmCurve:
    """EMR, MPMR and BM standard deviation along a block-size grid."""

    grid: np.ndarray
    emr: np.ndarray
    mpmr: np.ndarray
    sd: np.ndarray
    n_raw: int
    transform: str = "identity"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=int)
        for name in ("emr", "mpmr", "sd"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.grid.ndim != 1 or np.any(np.diff(self.grid) <= 0):
            raise DomainError("grid must be strictly increasing")

    def __len__(self):
        return int(self.grid.size)

    @property
    def mpmr_weights(self) -> np.ndarray:
        # d log(n) / dn
        return 1.0 / self.grid.astype(float)

    @property
    def emr_weights(self) -> np.ndarray:
        # d H_n / dn = pi^2/6 - sum_{i<=n} 1/i^2 = psi'(n + 1)
        return np.array([trigamma(n + 1.0) for n in self.grid])

    def rows(self):
        for j in range(len(self)):
            yield int(self.grid[j]), float(self.emr[j]), float(self.mpmr[j]), float(self.sd[j])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "emr", "mpmr", "sd"])
            for n, e, m, s in self.rows():
                writer.writerow([n, repr(e), repr(m), repr(s)])

    @classmethod
    def from_csv(cls, path, n_raw: int | None = None, transform: str = "identity") -> "BmCurve":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise InsufficientDataError(f"{path}: empty curve file")
        grid = [int(r["n"]) for r in rows]
        return cls(
            grid=grid,
            emr=[float(r["emr"]) for r in rows],
            mpmr=[float(r["mpmr"]) for r in rows],
            sd=[float(r["sd"]) for r in rows],
            n_raw=int(n_raw if n_raw is not None else grid[-1]),
            transform=transform,
        )


def bm_curve(sample, grid: Sequence[int] | None = None, points: int = 64) -> BmCurve:
    """Evaluate EMR, MPMR and BM sd for every block size of the grid.

    The default grid is ``points`` geometric block sizes from 2 to N.
    """
    s = _as_sorted(sample)
    N = s.n_raw
    if grid is None:
        grid = geometric_grid(2, N, points)
    grid = np.asarray(grid, dtype=int)
    if grid.size and (grid.min() < 1 or grid.max() > N):
        raise DomainError(f"grid block sizes must lie in [1, {N}]")
    emr, mpmr, sd = [], [], []
    for n in grid:
        try:
            mean, _, dev = moments_hat(s, int(n))
            mode = mpmr_hat(s, int(n))
        except SsbmError as exc:
            raise type(exc)(f"at block size n={int(n)}: {exc}") from exc
        emr.append(mean)
        mpmr.append(mode)
        sd.append(dev)
    return BmCurve(grid=grid, emr=emr, mpmr=mpmr, sd=sd, n_raw=N, transform=s.transform)
