"""Parametric tail models and the empirical CDF used as marginals.

The Pareto family is the one-parameter sub-family GPD(1/xi, 1, xi), i.e.
Pareto type I with scale 1/xi and tail index 1/xi:

    f(x) = (xi x)^{-(xi + 1)/xi},   x > 1/xi

so that log(xi Y) ~ Exp(mean xi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np
from scipy import special
from scipy.optimize import minimize_scalar

from .errors import DegenerateError, DomainError, InsufficientDataError
from .specfun import erfc_inv

__all__ = [
    "EmpiricalCdf",
    "Family",
    "TailModel",
    "cdf",
    "ecdf",
    "fit_marginal",
    "quantile",
]

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    HALFNORMAL = "halfnormal"
    PARETO = "pareto"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class TailModel:
    """A one-parameter family.

    ``param`` is sigma for the Gaussian and half-normal families and xi for the
    Pareto (shape) and exponential (mean) families.
    """

    family: Family
    param: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.param > 0.0 and math.isfinite(self.param)):
            raise DomainError(f"{self.family.value} parameter must be positive, got {self.param!r}")

    @classmethod
    def gaussian(cls, sigma: float) -> "TailModel":
        return cls(Family.GAUSSIAN, sigma)

    @classmethod
    def halfnormal(cls, sigma: float) -> "TailModel":
        return cls(Family.HALFNORMAL, sigma)

    @classmethod
    def pareto(cls, xi: float) -> "TailModel":
        return cls(Family.PARETO, xi)

    @classmethod
    def exponential(cls, xi: float) -> "TailModel":
        return cls(Family.EXPONENTIAL, xi)

    @property
    def support_min(self) -> float:
        if self.family is Family.GAUSSIAN:
            return -math.inf
        if self.family is Family.PARETO:
            return 1.0 / self.param
        return 0.0

    @property
    def mode(self) -> float:
        return self.support_min if self.family is Family.PARETO else 0.0

    @property
    def mean(self) -> float:
        p = self.param
        if self.family is Family.GAUSSIAN:
            return 0.0
        if self.family is Family.HALFNORMAL:
            return p * math.sqrt(2.0 / math.pi)
        if self.family is Family.EXPONENTIAL:
            return p
        if p >= 1.0:
            return math.inf
        return 1.0 / (p * (1.0 - p))

    def cdf(self, x):
        """Exact CDF; 0 below the support."""
        out = 1.0 - np.asarray(self.sf(x), dtype=float)
        return out if out.ndim else float(out)

    def sf(self, x):
        """Survival function 1 - F, computed without cancellation in the tail."""
        x = np.asarray(x, dtype=float)
        p = self.param
        fam = self.family
        if fam is Family.GAUSSIAN:
            out = 0.5 * special.erfc(x / (p * _SQRT2))
        elif fam is Family.HALFNORMAL:
            out = np.where(x > 0.0, special.erfc(np.maximum(x, 0.0) / (p * _SQRT2)), 1.0)
        elif fam is Family.EXPONENTIAL:
            out = np.where(x > 0.0, np.exp(-np.maximum(x, 0.0) / p), 1.0)
        else:
            z = np.maximum(p * x, 1.0)
            out = np.where(p * x > 1.0, z ** (-1.0 / p), 1.0)
        return out if out.ndim else float(out)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.param
        fam = self.family
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam is Family.GAUSSIAN:
                out = -0.5 * (x / p) ** 2 - math.log(p) - _LOG_SQRT_2PI
            elif fam is Family.HALFNORMAL:
                out = np.where(
                    x >= 0.0, -0.5 * (x / p) ** 2 - math.log(p) - _LOG_SQRT_2PI + math.log(2.0), -np.inf
                )
            elif fam is Family.EXPONENTIAL:
                out = np.where(x >= 0.0, -x / p - math.log(p), -np.inf)
            else:
                out = np.where(p * x >= 1.0, -((p + 1.0) / p) * np.log(p * x), -np.inf)
        return out if out.ndim else float(out)

    def pdf(self, x):
        out = np.exp(self.logpdf(x))
        return out if np.ndim(out) else float(out)

    def dlogpdf(self, x):
        """d/dx log f(x) inside the support."""
        x = np.asarray(x, dtype=float)
        p = self.param
        fam = self.family
        if fam in (Family.GAUSSIAN, Family.HALFNORMAL):
            out = -x / (p * p)
        elif fam is Family.EXPONENTIAL:
            out = np.full_like(x, -1.0 / p)
        else:
            out = -((p + 1.0) / p) / x
        return out if out.ndim else float(out)

    def quantile(self, u: float) -> float:
        u = float(u)
        if not 0.0 < u < 1.0:
            raise DomainError(f"quantile requires 0 < u < 1, got {u!r}")
        return self.quantile_sf(1.0 - u) if u > 0.5 else self._quantile_lower(u)

    def _quantile_lower(self, u: float) -> float:
        p = self.param
        fam = self.family
        if fam is Family.GAUSSIAN:
            return -p * _SQRT2 * erfc_inv(2.0 * u)
        if fam is Family.HALFNORMAL:
            return p * _SQRT2 * erfc_inv(1.0 - u)
        if fam is Family.EXPONENTIAL:
            return -p * math.log1p(-u)
        return math.exp(-p * math.log1p(-u)) / p

    def quantile_sf(self, q: float) -> float:
        """Quantile at upper-tail probability q = 1 - u (accurate for tiny q)."""
        q = float(q)
        if not 0.0 < q < 1.0:
            raise DomainError(f"quantile_sf requires 0 < q < 1, got {q!r}")
        p = self.param
        fam = self.family
        if fam is Family.GAUSSIAN:
            return p * _SQRT2 * erfc_inv(2.0 * q)
        if fam is Family.HALFNORMAL:
            return p * _SQRT2 * erfc_inv(q)
        if fam is Family.EXPONENTIAL:
            return -p * math.log(q)
        e = -p * math.log(q)
        return math.exp(e) / p if e < 709.0 else math.inf

    def loglik(self, x: np.ndarray) -> float:
        return float(np.sum(self.logpdf(x)))


def cdf(model: TailModel, x):
    return model.cdf(x)


def quantile(model: TailModel, u: float) -> float:
    return model.quantile(u)


@dataclass(frozen=True)
class EmpiricalCdf:
    """Step ECDF with Weibull plotting positions i/(N+1).

    Ties evaluate at the highest rank among equal values; values below the
    sample minimum map to 1/(N+1) and above the maximum to N/(N+1), so the
    result is always strictly inside (0, 1).
    """

    sorted_values: np.ndarray

    def __post_init__(self):
        values = np.sort(np.asarray(self.sorted_values, dtype=float))
        if values.size == 0:
            raise InsufficientDataError("ECDF needs a nonempty sample")
        object.__setattr__(self, "sorted_values", values)

    @property
    def size(self) -> int:
        return int(self.sorted_values.size)

    def evaluate(self, x):
        n = self.size
        rank = np.searchsorted(self.sorted_values, np.asarray(x, dtype=float), side="right")
        out = np.clip(rank, 1, n) / (n + 1.0)
        return out if np.ndim(out) else float(out)

    cdf = evaluate


def ecdf(sample) -> EmpiricalCdf:
    values = getattr(sample, "values", sample)
    return EmpiricalCdf(np.asarray(values, dtype=float))


def _fit_pareto(x: np.ndarray) -> float:
    # l(xi) = -(1 + 1/xi) sum log(xi x); support needs xi > 1/min(x)
    n = x.size
    s = float(np.sum(np.log(x)))
    floor = math.log(1.0 / float(x.min()))

    def negll(log_xi):
        xi = math.exp(log_xi)
        return (1.0 + 1.0 / xi) * (n * log_xi + s)

    res = minimize_scalar(negll, bounds=(floor, floor + 30.0), method="bounded",
                          options={"xatol": 1e-12})
    log_xi = float(res.x)
    # the constrained optimum may sit on the support boundary
    if negll(floor) <= negll(log_xi):
        log_xi = floor
    return math.exp(log_xi)


def fit_marginal(sample, families: Iterable[Family | str] = tuple(Family)):
    """Maximum-likelihood fit of each candidate family; best by AIC.

    Returns ``(model, table)`` where ``table`` maps family name to a dict with
    ``param``, ``loglik`` and ``aic`` (``None`` entries for families whose
    support excludes the data).
    """
    x = np.asarray(getattr(sample, "values", sample), dtype=float)
    if x.size < 30:
        raise InsufficientDataError(f"fit_marginal needs at least 30 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("sample contains non-finite values")
    if float(np.ptp(x)) == 0.0:
        raise DegenerateError("constant sample: zero variance, degenerate likelihood")

    x_min = float(x.min())
    table: dict[str, dict | None] = {}
    best = None
    for fam in (Family(f) for f in families):
        if fam is Family.GAUSSIAN:
            param = math.sqrt(float(np.mean(x * x)))
        elif fam is Family.HALFNORMAL:
            param = math.sqrt(float(np.mean(x * x))) if x_min >= 0.0 else None
        elif fam is Family.EXPONENTIAL:
            param = float(np.mean(x)) if x_min >= 0.0 else None
        else:
            param = _fit_pareto(x) if x_min > 0.0 else None
        if param is None:
            table[fam.value] = None
            continue
        model = TailModel(fam, param)
        ll = model.loglik(x)
        aic = 2.0 - 2.0 * ll
        table[fam.value] = {"param": param, "loglik": ll, "aic": aic}
        if math.isfinite(aic) and (best is None or aic < best[1]):
            best = (model, aic)
    if best is None:
        raise DomainError("sample lies outside the support of every candidate family")
    return best[0], table
