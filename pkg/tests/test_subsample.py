import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssbm.errors import DegenerateError, DomainError, InsufficientDataError
from ssbm.subsample import (
    BmCurve,
    SortedSample,
    bm_curve,
    emr_hat,
    geometric_grid,
    moments_hat,
    mpmr_hat,
    weights,
)

from oracles import enumerate_block_maxima, weight_counts, weighted_kde_argmax


def test_weights_small_examples():
    assert np.allclose(weights(5, 2).p, [0.1, 0.2, 0.3, 0.4], atol=1e-15)
    assert np.allclose(weights(5, 5).p, [1.0])
    assert np.allclose(weights(5, 1).p, np.full(5, 0.2))


@pytest.mark.parametrize("N,n", [(6, 2), (8, 3), (10, 4), (9, 9), (7, 1)])
def test_weights_match_counting(N, n):
    assert np.allclose(weights(N, n).p, weight_counts(N, n), atol=1e-14)


def test_weights_domain():
    for N, n in ((5, 0), (5, 6), (0, 1)):
        with pytest.raises(DomainError):
            weights(N, n)


def test_weights_large_n_finite():
    w = weights(10**6, 5 * 10**5)
    assert np.all(np.isfinite(w.log_p))
    assert math.fsum(w.p) == pytest.approx(1.0, abs=1e-12)


def test_emr_examples(five):
    assert emr_hat(five, 1) == pytest.approx(3.0, abs=1e-15)
    assert emr_hat(five, 2) == pytest.approx(4.0, abs=1e-15)
    assert emr_hat(five, 5) == 5.0
    mean, var, sd = moments_hat(five, 2)
    assert var == pytest.approx(1.0, abs=1e-14)
    assert sd == pytest.approx(1.0, abs=1e-14)


def test_enumeration_random_samples():
    rng = np.random.default_rng(21)
    for N in range(4, 10):
        x = rng.standard_normal(N)
        for n in range(1, min(N, 4) + 1):
            m = enumerate_block_maxima(x, n)
            mean, var, _ = moments_hat(x, n)
            assert emr_hat(x, n) == pytest.approx(m.mean(), abs=1e-12)
            assert var == pytest.approx(m.var(), abs=1e-12)


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=30), st.randoms())
@settings(max_examples=50)
def test_permutation_invariance(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    for n in (1, 2, len(values)):
        assert emr_hat(values, n) == emr_hat(shuffled, n)


def test_mpmr_against_kde_scan():
    N = 1000
    x = -np.log1p(-np.arange(1, N + 1) / (N + 1.0))
    n = 50
    w = weights(N, n)
    top = x[n - 1 :]
    p = w.p
    mean = np.dot(p, top)
    sd = math.sqrt(np.dot(p, (top - mean) ** 2))
    h = sd * (1.0 / np.dot(p, p)) ** (-0.2)
    ref = weighted_kde_argmax(top, p, h)
    step = (top.max() - top.min()) / 100000
    assert mpmr_hat(x, n) == pytest.approx(ref, abs=2 * step)


def test_mpmr_near_log_n_for_exponential(exp_quantiles_50k):
    for n in (20, 100, 500):
        assert mpmr_hat(exp_quantiles_50k, n) == pytest.approx(math.log(n), abs=0.1)


def test_mpmr_degenerate_and_full_block():
    with pytest.raises(DegenerateError):
        mpmr_hat(np.full(10, 3.0), 2)
    assert mpmr_hat(np.arange(10.0), 10) == 9.0


def test_sorted_sample_validation():
    with pytest.raises(InsufficientDataError):
        SortedSample(np.array([1.0]))
    with pytest.raises(DomainError):
        SortedSample(np.array([1.0, np.nan]))
    s = SortedSample(np.array([3.0, 1.0, 2.0]))
    assert list(s.values) == [1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_geometric_grid():
    g = geometric_grid(2, 50000, 64)
    assert g[0] == 2 and g[-1] == 50000
    assert np.all(np.diff(g) > 0)
    assert list(geometric_grid(1, 4, 10)) == [1, 2, 3, 4]


def test_bm_curve_structure(exp_quantiles_50k, tmp_path):
    curve = bm_curve(exp_quantiles_50k, points=16)
    assert len(curve) <= 16
    assert curve.grid[0] == 2 and curve.grid[-1] == 50000
    assert np.all(np.diff(curve.emr) > 0)
    assert np.all(curve.sd >= 0)
    assert curve.emr_weights[0] == pytest.approx(math.pi ** 2 / 6 - 1 - 0.25, rel=1e-12)
    path = tmp_path / "curve.csv"
    curve.to_csv(path)
    back = BmCurve.from_csv(path, n_raw=curve.n_raw)
    assert np.array_equal(back.grid, curve.grid)
    assert np.array_equal(back.emr, curve.emr)
    assert np.array_equal(back.mpmr, curve.mpmr)
    assert np.array_equal(back.sd, curve.sd)


def test_bm_curve_rejects_bad_grid(five):
    with pytest.raises(DomainError):
        bm_curve(five, grid=[2, 6])
    with pytest.raises(DomainError):
        BmCurve(grid=[3, 2], emr=[0, 0], mpmr=[0, 0], sd=[0, 0], n_raw=5)


def test_bm_curve_tags_block_size():
    with pytest.raises(DegenerateError, match="n=2"):
        bm_curve(np.full(10, 1.0), grid=[2])
