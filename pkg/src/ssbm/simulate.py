"""Simulation designs and the MAPE benchmark runner.

Every stream comes from ``rng.Xoshiro256StarStar``; replicate r of a run
with base seed s uses ``derive_seed(s, r)``.  The same replicate seed is
used for every (phi, xi) cell, so the cells are compared on common random
numbers.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import bench
from .errors import DomainError, SsbmError
from .evi import wlse_emr, wlse_mpmr
from .plateau import find_plateau, fit_sd_spline
from .rng import Xoshiro256StarStar, derive_seed
from .subsample import SortedSample, bm_curve

__all__ = [
    "BenchmarkTable",
    "SimulationConfig",
    "ar1_exp",
    "exponential_sample",
    "half_gaussian",
    "pareto_sample",
    "run_benchmark",
    "student_t_abs",
]

BURN_IN = 1000
DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class SimulationConfig:
    phi: float
    xi: float
    length: int = 365
    replicates: int = 50
    base_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0.0 <= self.phi < 1.0:
            raise DomainError(f"phi must lie in [0, 1), got {self.phi!r}")
        if not self.xi > 0.0:
            raise DomainError(f"xi must be positive, got {self.xi!r}")
        if self.length < 2 or self.replicates < 1:
            raise DomainError("length must be >= 2 and replicates >= 1")


def ar1_exp(config: SimulationConfig, replicate: int) -> np.ndarray:
    """Y = exp(X) with X_i = phi X_{i-1} + eps_i, eps ~ Exp(mean xi).

    X starts at 0 and runs ``BURN_IN`` steps before recording.
    """
    gen = Xoshiro256StarStar(derive_seed(config.base_seed, replicate))
    phi, xi = float(config.phi), float(config.xi)
    x = 0.0
    for _ in range(BURN_IN):
        x = phi * x + gen.exponential(xi)
    out = np.empty(config.length)
    for i in range(config.length):
        x = phi * x + gen.exponential(xi)
        out[i] = x
    return np.exp(out)


def _draw(n: int, seed: int, fn) -> np.ndarray:
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    gen = Xoshiro256StarStar(seed)
    return np.array([fn(gen) for _ in range(int(n))])


def student_t_abs(nu: float, N: int, seed: int) -> np.ndarray:
    if not nu > 0.0:
        raise DomainError(f"nu must be positive, got {nu!r}")
    return _draw(N, seed, lambda g: abs(g.student_t(nu)))


def half_gaussian(sigma: float, N: int, seed: int) -> np.ndarray:
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    return _draw(N, seed, lambda g: abs(sigma * g.normal()))


def exponential_sample(xi: float, N: int, seed: int) -> np.ndarray:
    if not xi > 0.0:
        raise DomainError(f"xi must be positive, got {xi!r}")
    return _draw(N, seed, lambda g: g.exponential(xi))


def pareto_sample(xi: float, N: int, seed: int) -> np.ndarray:
    """Pareto type I with scale 1/xi and tail index 1/xi (inverse CDF)."""
    if not xi > 0.0:
        raise DomainError(f"xi must be positive, got {xi!r}")
    return _draw(N, seed, lambda g: g.uniform_open() ** (-xi) / xi)


def _wlse_pair(y: np.ndarray) -> dict:
    curve = bm_curve(SortedSample(np.log(y), transform="log"))
    rng_ = find_plateau(fit_sd_spline(curve))
    return {"emr_wlse": wlse_emr(curve, rng_).xi_hat, "mpmr_wlse": wlse_mpmr(curve, rng_).xi_hat}


def default_estimators() -> dict[str, Callable[[np.ndarray], float]]:
    return {
        "hill": lambda y: bench.hill(y).xi_hat,
        "schultze_steinebach": lambda y: bench.schultze_steinebach(y).xi_hat,
        "meerschaert_scheffler": lambda y: bench.meerschaert_scheffler(y).xi_hat,
        "smith": lambda y: bench.smith(y).xi_hat,
    }


@dataclass
class BenchmarkTable:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def get(self, phi: float, xi: float, method: str) -> dict:
        for r in self.rows:
            if r["phi"] == phi and r["xi"] == xi and r["method"] == method:
                return r
        raise KeyError((phi, xi, method))

    def write_csv(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(["phi", "xi", "method", "mape", "failures", "replicates"])
        for r in self.rows:
            w.writerow([repr(r["phi"]), repr(r["xi"]), r["method"], repr(r["mape"]), r["failures"],
                        r["replicates"]])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def to_dict(self) -> dict:
        return {"meta": dict(self.meta), "rows": [dict(r) for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_benchmark(
    phis: Sequence[float],
    xis: Sequence[float],
    replicates: int = 50,
    length: int = 365,
    base_seed: int = DEFAULT_SEED,
    estimators: Mapping[str, Callable[[np.ndarray], float]] | None = None,
    include_wlse: bool = True,
) -> BenchmarkTable:
    """MAPE of every estimator on each (phi, xi) cell.

    Estimator errors on a replicate are counted as failures and left out of
    that cell's MAPE.  ``estimators`` maps a name to ``f(Y) -> xi_hat``; the
    two WLSE fits on log Y are added unless ``include_wlse`` is false.
    """
    ests = default_estimators() if estimators is None else dict(estimators)
    names = (["emr_wlse", "mpmr_wlse"] if include_wlse else []) + list(ests)
    table = BenchmarkTable(meta={"replicates": int(replicates), "length": int(length),
                                 "base_seed": int(base_seed), "burn_in": BURN_IN,
                                 "k_rule": "floor(sqrt(N))"})
    for phi in phis:
        for xi in xis:
            cfg = SimulationConfig(float(phi), float(xi), int(length), int(replicates), int(base_seed))
            found: dict[str, list] = {m: [] for m in names}
            failures = {m: 0 for m in names}
            for r in range(cfg.replicates):
                y = ar1_exp(cfg, r)
                if include_wlse:
                    try:
                        pair = _wlse_pair(y)
                    except (SsbmError, ArithmeticError, ValueError):
                        failures["emr_wlse"] += 1
                        failures["mpmr_wlse"] += 1
                    else:
                        for m, v in pair.items():
                            if math.isfinite(v):
                                found[m].append(v)
                            else:
                                failures[m] += 1
                for m, fn in ests.items():
                    try:
                        v = float(fn(y))
                    except (SsbmError, ArithmeticError, ValueError):
                        failures[m] += 1
                        continue
                    if math.isfinite(v):
                        found[m].append(v)
                    else:
                        failures[m] += 1
            for m in names:
                vals = found[m]
                table.rows.append({
                    "phi": cfg.phi,
                    "xi": cfg.xi,
                    "method": m,
                    "mape": bench.mape(vals, cfg.xi) if vals else math.nan,
                    "failures": failures[m],
                    "replicates": cfg.replicates,
                })
    return table
