"""Classical tail-index estimators used as benchmarks, plus MAPE."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, DegenerateError, DomainError, InsufficientDataError

__all__ = [
    "BenchEstimate",
    "default_k",
    "hill",
    "mape",
    "meerschaert_scheffler",
    "schultze_steinebach",
    "smith",
]

METHODS = ("hill", "schultze_steinebach", "meerschaert_scheffler", "smith")
SMITH_MIN_EXCEEDANCES = 10


@dataclass(frozen=True)
class BenchEstimate:
    method: str
    xi_hat: float
    k_used: int


def default_k(N: int) -> int:
    return int(math.isqrt(int(N)))


def _sorted_values(sample) -> np.ndarray:
    x = np.asarray(getattr(sample, "values", sample), dtype=float).ravel()
    return np.sort(x)


def _top_k(sample, k, positive=True):
    x = _sorted_values(sample)
    N = x.size
    k = default_k(N) if k is None else int(k)
    if not 2 <= k <= N - 1:
        raise DomainError(f"k must satisfy 2 <= k <= N - 1, got k={k}, N={N}")
    if positive and x[0] <= 0.0:
        raise DomainError("estimator requires strictly positive values")
    return x, N, k


def hill(sample, k: int | None = None) -> BenchEstimate:
    x, N, k = _top_k(sample, k)
    logs = np.log(x[N - k :])
    xi = float(np.mean(logs) - math.log(x[N - k - 1]))
    return BenchEstimate("hill", xi, k)


def schultze_steinebach(sample, k: int | None = None) -> BenchEstimate:
    """OLS slope of log x_[N-i+1] against log((N + 1)/i), i = 1..k."""
    x, N, k = _top_k(sample, k)
    i = np.arange(1, k + 1, dtype=float)
    u = np.log((N + 1.0) / i)
    v = np.log(x[::-1][:k])
    du = u - u.mean()
    xi = float(np.dot(du, v - v.mean()) / np.dot(du, du))
    return BenchEstimate("schultze_steinebach", xi, k)


def meerschaert_scheffler(sample) -> BenchEstimate:
    """log+(sum (x - mean)^2) / (2 log N)."""
    x = np.asarray(getattr(sample, "values", sample), dtype=float).ravel()
    N = x.size
    if N < 2:
        raise InsufficientDataError(f"need at least 2 observations, got {N}")
    if float(np.ptp(x)) == 0.0:
        raise DegenerateError("constant sample")
    ss = float(np.sum((x - x.mean()) ** 2))
    xi = max(0.0, math.log(ss)) / (2.0 * math.log(N)) if ss > 0.0 else 0.0
    return BenchEstimate("meerschaert_scheffler", xi, N)


def _gpd_profile(y: np.ndarray):
    """Profile log-likelihood of the GPD in tau = xi / sigma.

    For fixed tau the shape MLE is xi(tau) = mean log(1 + tau y), and the
    profile is -k [log(xi / tau) + xi + 1].  tau = 0 is the exponential limit.
    """
    k = y.size
    ybar = float(y.mean())

    def xi_of(tau):
        return float(np.mean(np.log1p(tau * y)))

    def loglik(tau):
        if abs(tau) * float(y.max()) < 1e-9:
            return -k * (math.log(ybar) + 1.0), 0.0
        xi = xi_of(tau)
        ratio = xi / tau
        if not ratio > 0.0:
            return -math.inf, xi
        return -k * (math.log(ratio) + xi + 1.0), xi

    return loglik


def smith(sample, k: int | None = None) -> BenchEstimate:
    """GPD maximum likelihood on the k exceedances over u = x_[N-k].

    The likelihood is profiled to one dimension in tau = xi / sigma and
    searched over z = log(1 + tau y_max), which maps the admissible tau
    range onto the real line; shapes below -1 are excluded.
    """
    x = _sorted_values(sample)
    N = x.size
    k = default_k(N) if k is None else int(k)
    if k < SMITH_MIN_EXCEEDANCES or k > N - 1:
        raise InsufficientDataError(
            f"smith needs {SMITH_MIN_EXCEEDANCES} <= k <= N - 1 exceedances, got k={k}, N={N}"
        )
    u = x[N - k - 1]
    y = x[N - k :] - u
    y_max = float(y.max())
    if y_max <= 0.0:
        raise DegenerateError("all exceedances are zero")
    loglik = _gpd_profile(y)

    def objective(z):
        tau = math.expm1(z) / y_max
        ll, xi = loglik(tau)
        if xi < -1.0 or not math.isfinite(ll):
            return math.inf
        return -ll

    zs = np.linspace(-30.0, 30.0, 2401)
    vals = np.array([objective(z) for z in zs])
    ok = np.isfinite(vals)
    if not ok.any():
        raise ConvergenceError("GPD likelihood is not finite anywhere on the search range")
    j = int(np.argmin(np.where(ok, vals, np.inf)))
    valid = np.flatnonzero(ok)
    if j in (valid[0], valid[-1]):
        raise ConvergenceError("GPD likelihood maximum lies on the boundary of the shape range")
    res = minimize_scalar(objective, bounds=(zs[j - 1], zs[j + 1]), method="bounded",
                          options={"xatol": 1e-12})
    z = float(res.x) if res.fun <= vals[j] else float(zs[j])
    tau = math.expm1(z) / y_max
    _, xi = loglik(tau)
    return BenchEstimate("smith", float(xi), k)


def mape(estimates, truth: float) -> float:
    """Mean absolute percentage error, in percent."""
    if truth == 0.0 or not math.isfinite(truth):
        raise DomainError(f"truth must be finite and nonzero, got {truth!r}")
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise InsufficientDataError("no estimates")
    return float(100.0 * np.mean(np.abs(est - truth) / abs(truth)))
