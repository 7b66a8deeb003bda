"""Scalar special functions used by the closed-form block-maxima formulas.

Everything here is a pure function of float arguments.  The implementations
lean on the ``math`` module only for ``erfc``/``lgamma``/``log1p``; the Lambert
W, inverse erfc, polygamma and large-argument log-beta evaluations are local
so their accuracy does not depend on an optional dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError

__all__ = [
    "CONSTANTS",
    "SpecialConstants",
    "digamma",
    "erfc_inv",
    "harmonic",
    "harmonic_real",
    "lambert_w0",
    "log_beta",
    "trigamma",
]


@dataclass(frozen=True)
class SpecialConstants:
    euler_gamma: float
    pi: float


CONSTANTS = SpecialConstants(euler_gamma=0.57721566490153286061, pi=math.pi)

_INV_E = math.exp(-1.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
# below this argument the asymptotic series are reached through recurrence
_ASYMPTOTIC_FROM = 10.0


def lambert_w0(x: float) -> float:
    """Principal branch W0 of the Lambert W function (w * exp(w) = x)."""
    x = float(x)
    if math.isnan(x) or x < -_INV_E:
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if x == -_INV_E:
        return -1.0
    if math.isinf(x):
        return math.inf

    if x > math.e:
        # w + log w = log x is well conditioned and never overflows
        log_x = math.log(x)
        w = log_x - math.log(log_x) + math.log(log_x) / log_x
        for _ in range(100):
            step = (w + math.log(w) - log_x) / (1.0 + 1.0 / w)
            w -= step
            if abs(step) <= 4e-16 * abs(w):
                break
        return w

    if x < -0.32:
        # branch-point series in p = sqrt(2(e x + 1))
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    else:
        w = math.log1p(x)

    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 4e-16 * (1.0 + abs(w)):
            break
    return max(w, -1.0)


def erfc_inv(y: float) -> float:
    """Inverse of the complementary error function on (0, 2)."""
    y = float(y)
    if not 0.0 < y < 2.0:
        raise DomainError(f"erfc_inv requires 0 < y < 2, got {y!r}")
    if y == 1.0:
        return 0.0
    if y > 1.0:
        return -erfc_inv(2.0 - y)

    # seed: linearisation near 0, asymptotic e^{-x^2}/(x sqrt(pi)) in the tail
    if y > 0.5:
        x = (1.0 - y) * math.sqrt(math.pi) / 2.0
    else:
        x = math.sqrt(-math.log(y))
        for _ in range(3):
            x = math.sqrt(max(1e-300, -math.log(y * x * math.sqrt(math.pi))))

    # Newton on log erfc(x) - log y, kept inside a bisection bracket
    lo, hi = 0.0, 27.3
    log_y = math.log(y)
    for _ in range(200):
        e = math.erfc(x)
        if e <= 0.0:
            hi = x
            x = 0.5 * (lo + hi)
            continue
        g = math.log(e) - log_y
        if g > 0.0:
            lo = x
        else:
            hi = x
        dg = -_TWO_OVER_SQRT_PI * math.exp(-x * x) / e
        x_new = x - g / dg
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-16 * max(1.0, x):
            return x_new
        x = x_new
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return x


def _stirling_tail(x: float) -> float:
    """log Gamma(x) - [(x - 1/2) log x - x + log(2 pi)/2], for x >= 10."""
    r = 1.0 / x
    r2 = r * r
    return r * (
        1.0 / 12.0
        - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0)))
    )


def log_beta(a: float, b: float) -> float:
    """log B(a, b) for a, b > 0, free of the lgamma cancellation at large a."""
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"log_beta requires a, b > 0, got ({a!r}, {b!r})")
    a, b = (float(a), float(b)) if a >= b else (float(b), float(a))
    if a < _ASYMPTOTIC_FROM:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    if b < _ASYMPTOTIC_FROM:
        diff = (
            -(a - 0.5) * math.log1p(b / a)
            - b * math.log(a + b)
            + b
            + _stirling_tail(a)
            - _stirling_tail(a + b)
        )
        return math.lgamma(b) + diff
    return (
        _HALF_LOG_2PI
        - (a - 0.5) * math.log1p(b / a)
        - b * math.log1p(a / b)
        - 0.5 * math.log(b)
        + _stirling_tail(a)
        + _stirling_tail(b)
        - _stirling_tail(a + b)
    )


def digamma(x: float) -> float:
    if not x > 0.0:
        raise DomainError(f"digamma requires x > 0, got {x!r}")
    shift = 0.0
    x = float(x)
    while x < _ASYMPTOTIC_FROM:
        shift -= 1.0 / x
        x += 1.0
    r2 = 1.0 / (x * x)
    series = r2 * (
        1.0 / 12.0
        - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0 - r2 * 691.0 / 32760.0))))
    )
    return shift + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """psi^(1)(x) by upward recurrence and the asymptotic Bernoulli series."""
    if not x > 0.0:
        raise DomainError(f"trigamma requires x > 0, got {x!r}")
    x = float(x)
    head = []
    while x < _ASYMPTOTIC_FROM:
        head.append(1.0 / (x * x))
        x += 1.0
    r = 1.0 / x
    r2 = r * r
    tail = r + 0.5 * r2 + r * r2 * (
        1.0 / 6.0
        - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * (5.0 / 66.0 - r2 * 691.0 / 2730.0))))
    )
    # smallest terms first
    for term in reversed(head):
        tail += term
    return tail


_HARMONIC_EXACT_MAX = 10**6


@lru_cache(maxsize=8192)
def harmonic(n: int) -> float:
    """n-th harmonic number; exact summation up to 10^6, asymptotic beyond."""
    n = int(n)
    if n < 1:
        raise DomainError(f"harmonic requires n >= 1, got {n!r}")
    if n <= _HARMONIC_EXACT_MAX:
        return math.fsum(1.0 / i for i in range(1, n + 1))
    return CONSTANTS.euler_gamma + math.log(n) + 0.5 / n - 1.0 / (12.0 * n * n)


def harmonic_real(x: float) -> float:
    """Analytic continuation H(x) = psi(x + 1) + gamma, for real x >= 0."""
    if x < 0.0:
        raise DomainError(f"harmonic_real requires x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if float(x).is_integer():
        return harmonic(int(x))
    return digamma(x + 1.0) + CONSTANTS.euler_gamma
