import math

import numpy as np
import pytest

from ssbm.errors import DomainError, InsufficientDataError
from ssbm.plateau import (
    CLIPPED_AT_BOUNDARY,
    MONOTONE_NO_PLATEAU,
    PLATEAU_FOUND,
    PlateauRange,
    SdSpline,
    find_plateau,
    fit_sd_spline,
    resolvable_limit,
)
from ssbm.subsample import bm_curve, geometric_grid

GRID = geometric_grid(2, 10**6, 80)


def _inflection(n, center=1000.0, scale=3.0, level=2.0):
    t = (np.log(n) - math.log(center)) / scale
    return level - t ** 3


def test_constant_sd_is_clipped_everywhere():
    g = SdSpline(GRID, np.full(GRID.size, 1.3), n_raw=10**6)
    pr = find_plateau(g, n0=100, n_cap=10**6)
    assert pr.diagnostic == CLIPPED_AT_BOUNDARY
    assert pr.n_star == pytest.approx(100)
    assert pr.n_min == GRID[0] and pr.n_max == GRID[-1]


def test_cubic_inflection_located():
    g = SdSpline(GRID, _inflection(GRID), n_raw=10**6)
    pr = find_plateau(g, delta=0.1, n0=10, n_cap=10**6)
    assert pr.diagnostic == PLATEAU_FOUND
    assert pr.n_star == pytest.approx(1000, rel=0.03)
    # |t/3|^3 = 0.2 at the band edges
    half = 3.0 * 0.2 ** (1 / 3)
    assert pr.n_min == pytest.approx(1000 * math.exp(-half), rel=0.03)
    assert pr.n_max == pytest.approx(1000 * math.exp(half), rel=0.03)
    assert g(pr.n_min) == pytest.approx(1.1 * g(pr.n_star), rel=1e-9)
    assert g(pr.n_max) == pytest.approx(0.9 * g(pr.n_star), rel=1e-9)


@pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e4])
def test_scale_invariance(c):
    base = find_plateau(SdSpline(GRID, _inflection(GRID), 10**6), n0=10, n_cap=10**6)
    scaled = find_plateau(SdSpline(GRID, c * _inflection(GRID), 10**6), n0=10, n_cap=10**6)
    assert scaled.n_star == pytest.approx(base.n_star, rel=1e-8)
    assert scaled.n_min == pytest.approx(base.n_min, rel=1e-8)
    assert scaled.n_max == pytest.approx(base.n_max, rel=1e-8)
    assert scaled.diagnostic == base.diagnostic


def test_power_law_is_monotone():
    g = SdSpline(GRID, GRID.astype(float) ** -0.3, 10**6)
    assert find_plateau(g, n_cap=10**6).diagnostic == MONOTONE_NO_PLATEAU


def test_n0_bounds_search():
    g = SdSpline(GRID, _inflection(GRID), 10**6)
    for n0 in (10, 100, 500, 900):
        assert find_plateau(g, n0=n0, n_cap=10**6).n_star >= n0 - 1e-9
    # past the inflection the flattest point in range is n0 itself
    assert find_plateau(g, n0=5000, n_cap=10**6).n_star == pytest.approx(5000, rel=1e-6)


def test_cap_collapses_search_to_n0():
    g = SdSpline(GRID, _inflection(GRID), 10**6)
    pr = find_plateau(g, n0=300, n_cap=50)
    assert pr.n_star == 300


def test_range_contains_and_dict():
    pr = PlateauRange(100.0, 10.0, 1000.0, 0.1, PLATEAU_FOUND)
    assert list(pr.contains([9, 10, 500, 1000, 1001])) == [False, True, True, True, False]
    assert pr.to_dict()["diagnostic"] == PLATEAU_FOUND


def test_errors():
    with pytest.raises(InsufficientDataError):
        SdSpline([2, 3, 4], [1, 1, 1])
    with pytest.raises(DomainError):
        SdSpline([2, 4, 3, 5], [1, 1, 1, 1])
    g = SdSpline(GRID, _inflection(GRID), 10**6)
    with pytest.raises(DomainError):
        find_plateau(g, delta=1.5)


def test_resolvable_limit():
    assert resolvable_limit(50000, 0.1) == pytest.approx(1000.0)


def test_exponential_quantiles_level(exp_quantiles_50k):
    curve = bm_curve(exp_quantiles_50k, points=64)
    g = fit_sd_spline(curve)
    pr = find_plateau(g)
    assert pr.n_min < pr.n_star < pr.n_max
    assert g(pr.n_star) == pytest.approx(math.pi / math.sqrt(6), rel=0.05)
