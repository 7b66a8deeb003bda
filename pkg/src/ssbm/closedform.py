"""Exact and asymptotic statistics of the block maximum M of n iid draws.

F_M(m) = F(m)^n and f_M(m) = n f(m) F(m)^{n-1}.  The block size ``n`` is a
positive real so that an extremal-index adjusted size n * theta can be used
in place of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .distributions import Family, TailModel
from .errors import ConvergenceError, DomainError, NonexistenceError
from .specfun import harmonic, harmonic_real, lambert_w0, log_beta, trigamma

__all__ = [
    "BmLaw",
    "bm_cdf",
    "bm_cdf_offset",
    "bm_moment_pareto",
    "bm_pdf",
    "bm_quantile",
    "bm_variance",
    "emr",
    "kld",
    "mpmr_asymptotic",
    "mpmr_exact",
    "offset_level",
]

GUMBEL_SD_FACTOR = math.pi / math.sqrt(6.0)


@dataclass(frozen=True)
class BmLaw:
    model: TailModel
    n: float

    def __post_init__(self):
        if not (self.n > 0.0 and math.isfinite(self.n)):
            raise DomainError(f"block size must be positive and finite, got {self.n!r}")

    @classmethod
    def with_extremal_index(cls, model: TailModel, block_size: float, theta: float) -> "BmLaw":
        if not 0.0 < theta <= 1.0:
            raise DomainError(f"extremal index must lie in (0, 1], got {theta!r}")
        return cls(model, block_size * theta)


def bm_cdf(law: BmLaw, m):
    f = np.asarray(law.model.cdf(m), dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(f > 0.0, np.exp(law.n * np.log1p(-np.asarray(law.model.sf(m)))), 0.0)
    return out if out.ndim else float(out)


def bm_logpdf(law: BmLaw, m):
    model = law.model
    out = math.log(law.n) + np.asarray(model.logpdf(m), dtype=float)
    if law.n != 1.0:
        sf = np.asarray(model.sf(m), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_cdf = np.where(sf < 1.0, np.log1p(-sf), -np.inf)
            out = out + (law.n - 1.0) * log_cdf
        # below the support logpdf is already -inf
        out = np.where(np.isnan(out), -np.inf, out)
    return out if out.ndim else float(out)


def bm_pdf(law: BmLaw, m):
    out = np.exp(bm_logpdf(law, m))
    return out if np.ndim(out) else float(out)


def bm_quantile(law: BmLaw, u: float) -> float:
    """Analytic inverse of F^n: the model quantile at u^{1/n}."""
    u = float(u)
    if not 0.0 < u < 1.0:
        raise DomainError(f"bm_quantile requires 0 < u < 1, got {u!r}")
    # 1 - u^{1/n} without cancellation
    q = -math.expm1(math.log(u) / law.n)
    if q >= 1.0:
        q = math.nextafter(1.0, 0.0)
    return law.model.quantile_sf(q)


def _eq2_residual(model: TailModel, n: float, m: float) -> float:
    # f'(m) F(m) + (n - 1) f(m)^2, divided by f(m) > 0
    return float(model.dlogpdf(m)) * float(model.cdf(m)) + (n - 1.0) * float(model.pdf(m))


def mpmr_exact(law: BmLaw) -> float:
    """Mode of the block maximum (most probable maximum risk)."""
    model, n = law.model, law.n
    if n < 1.0:
        raise DomainError(f"mpmr_exact requires n >= 1, got {n!r}")
    xi = model.param
    if model.family is Family.EXPONENTIAL:
        return xi * math.log(n)
    if model.family is Family.PARETO:
        return ((n + xi) / (xi + 1.0)) ** xi / xi
    if n == 1.0:
        return model.mode
    lo = model.mode
    hi = model.quantile_sf(1.0 / (10.0 * n))
    r_lo = _eq2_residual(model, n, lo)
    r_hi = _eq2_residual(model, n, hi)
    if not (r_lo > 0.0 > r_hi):
        raise ConvergenceError(
            f"no sign change for the mode equation on [{lo}, {hi}] (n={n}): residuals {r_lo}, {r_hi}"
        )
    return brentq(lambda m: _eq2_residual(model, n, m), lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def mpmr_asymptotic(law: BmLaw) -> float:
    model, n = law.model, law.n
    if n < 2.0:
        raise DomainError(f"mpmr_asymptotic requires n >= 2, got {n!r}")
    p = model.param
    if model.family is Family.GAUSSIAN:
        return p * math.sqrt(lambert_w0(n * n / (2.0 * math.pi)))
    if model.family is Family.HALFNORMAL:
        return p * math.sqrt(lambert_w0(2.0 * n * n / math.pi))
    if model.family is Family.PARETO:
        return (n / (p + 1.0)) ** p / p
    return p * math.log(n)


def _bm_quad(law: BmLaw, power: int, center: float = 0.0) -> float:
    lo = bm_quantile(law, 1e-15)
    hi = bm_quantile(law, 1.0 - 1e-15)
    mode = mpmr_exact(law) if law.n >= 1.0 else law.model.mode
    mode = min(max(mode, lo), hi)

    def integrand(m):
        return (m - center) ** power * bm_pdf(law, m)

    total = 0.0
    for a, b in ((lo, mode), (mode, hi)):
        if b > a:
            val, _ = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-11, limit=200)
            total += val
    return total


def emr(law: BmLaw) -> float:
    """Expected maximum risk E[M]."""
    model, n = law.model, law.n
    xi = model.param
    if model.family is Family.EXPONENTIAL:
        h = harmonic(int(n)) if float(n).is_integer() else harmonic_real(n)
        return xi * h
    if model.family is Family.PARETO:
        if xi >= 1.0:
            raise NonexistenceError(f"EMR does not exist for a Pareto tail with xi={xi} >= 1")
        return n / xi * math.exp(log_beta(n, 1.0 - xi))
    return _bm_quad(law, 1)


def bm_moment_pareto(law: BmLaw, k: int) -> float:
    """k-th raw moment n xi^{-k} B(n, 1 - k xi) of a Pareto block maximum."""
    if law.model.family is not Family.PARETO:
        raise DomainError("bm_moment_pareto requires a Pareto model")
    k = int(k)
    if k < 1:
        raise DomainError(f"moment order must be a positive integer, got {k!r}")
    xi = law.model.param
    if k * xi >= 1.0:
        raise NonexistenceError(f"moment of order {k} does not exist for xi={xi} (k xi >= 1)")
    return math.exp(math.log(law.n) - k * math.log(xi) + log_beta(law.n, 1.0 - k * xi))


def bm_variance(law: BmLaw) -> float:
    model, n = law.model, law.n
    xi = model.param
    if model.family is Family.EXPONENTIAL:
        return xi * xi / 6.0 * (math.pi ** 2 - 6.0 * trigamma(n + 1.0))
    if model.family is Family.PARETO:
        if xi >= 0.5:
            raise NonexistenceError(f"BM variance does not exist for xi={xi} >= 1/2")
        m1 = bm_moment_pareto(law, 1)
        m2 = bm_moment_pareto(law, 2)
        return m2 - m1 * m1
    return _bm_quad(law, 2, center=emr(law))


def bm_cdf_offset(xi: float, n: float, k: float) -> float:
    """F_M(m* + k xi pi/sqrt 6) for an exponential tail: (1 - e^{-k pi/sqrt 6}/n)^n.

    ``n = math.inf`` gives the Gumbel limit exp(-exp(-k pi/sqrt 6)).  The
    probability does not depend on xi; it is accepted to keep the call site
    explicit about which scale the offset is measured in.
    """
    if not xi > 0.0:
        raise DomainError(f"xi must be positive, got {xi!r}")
    if not n >= 1.0:
        raise DomainError(f"n must be >= 1, got {n!r}")
    a = math.exp(-k * GUMBEL_SD_FACTOR)
    if math.isinf(n):
        return math.exp(-a)
    if a >= n:
        return 0.0
    return math.exp(n * math.log1p(-a / n))


def offset_level(mpmr: float, xi: float, k: float) -> float:
    """Risk level m* + k xi pi/sqrt(6)."""
    return mpmr + k * xi * GUMBEL_SD_FACTOR


def kld(n_eff: float, direction: str = "M_to_X") -> float:
    """KL divergence between the block maximum and the underlying law.

    ``n_eff`` is the block size, or n * theta under clustering.
    """
    if not n_eff > 0.0:
        raise DomainError(f"n_eff must be positive, got {n_eff!r}")
    if direction == "M_to_X":
        return 1.0 / n_eff + math.log(n_eff) - 1.0
    if direction == "X_to_M":
        return n_eff - math.log(n_eff) - 1.0
    raise DomainError(f"unknown direction {direction!r}")
