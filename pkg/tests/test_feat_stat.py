import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gesturefusion.errors import WindowTooShortError
from gesturefusion.feat_stat import (
    FAMILIES,
    extract_statistical,
    feature_layout,
    percentile_index,
    statistical_features,
)
from oracles import close, random_windows, stat_oracle

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
windows = st.lists(finite, min_size=2, max_size=40)


def test_twenty_families_thirty_three_columns_at_three_samples():
    assert len(FAMILIES) == 20
    assert len(feature_layout(3)) == 33
    assert len(feature_layout(100)) == 40


def test_small_window_example():
    f = extract_statistical([1.0, 2.0, 3.0])
    assert (f["mean"], f["max"], f["min"], f["peak_to_peak"], f["median"]) == (2, 3, 1, 2, 2)
    assert f["abs_energy"] == 14
    assert math.isclose(f["variance"], 2 / 3, rel_tol=1e-15)
    assert math.isclose(f["rms"], math.sqrt(14 / 3), rel_tol=1e-15)
    assert f["skewness"] == 0
    assert math.isclose(f["kurtosis"], -1.5, rel_tol=1e-12)
    assert f["interquartile_range"] == 1.0
    assert [f[f"ecdf_{k}"] for k in range(3)] == [1, 2, 3]
    assert (f["ecdf_percentile_0"], f["ecdf_percentile_1"]) == (1, 3)
    assert (f["ecdf_percentile_count_0"], f["ecdf_percentile_count_1"]) == (1, 3)
    assert f["entropy"] == 1.0
    # duration defaults to two frame periods
    assert math.isclose(f["average_power"], 14 / 0.4, rel_tol=1e-15)


def test_constant_window():
    f = extract_statistical([5.0, 5.0, 5.0])
    assert f["entropy"] == 0 and f["variance"] == 0 and f["skewness"] == 0 and f["kurtosis"] == 0
    assert [f[f"histogram_{k}"] for k in range(10)] == [3] + [0] * 9


def test_constant_window_with_inexact_mean():
    f = extract_statistical([0.1, 0.1, 0.1])
    assert f["variance"] == 0 and f["skewness"] == 0 and f["mean_abs_deviation"] == 0


def test_short_window_rejected():
    with pytest.raises(WindowTooShortError):
        extract_statistical([1.0])


def test_percentile_index_rule():
    assert percentile_index(0.2, 3) == 0
    assert percentile_index(0.8, 3) == 2
    # 0.2 * 10 is exactly 2, not 2.0000000000000004
    assert percentile_index(0.2, 10) == 1
    assert percentile_index(0.8, 5) == 3


def test_ecdf_length_configurable():
    layout, values = statistical_features(np.arange(6.0), ecdf_len=4)
    assert [k for fam, k in layout if fam == "ecdf"] == [0, 1, 2, 3]
    assert values.shape == (len(layout),)


def test_vectorised_matches_single_window():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 5, 3))
    _, batch = statistical_features(x)
    _, one = statistical_features(x[2, 1])
    np.testing.assert_array_equal(batch[2, 1], one)


@pytest.mark.parametrize("n", [3, 7, 100])
def test_matches_oracle(n):
    rng = np.random.default_rng(n)
    for w in random_windows(rng, 120, n):
        duration = (n - 1) * 0.2
        got = extract_statistical(w, duration)
        want = stat_oracle(w, duration)
        assert got.keys() == want.keys()
        for key in want:
            assert close(got[key], want[key]), (key, w, got[key], want[key])


SHIFT_INVARIANT = (
    "variance",
    "std",
    "interquartile_range",
    "peak_to_peak",
    "mean_abs_deviation",
    "median_abs_deviation",
    "skewness",
    "kurtosis",
    "entropy",
)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=30), st.integers(-10**6, 10**6))
def test_shift_invariance(xs, c):
    # integer data keeps x + c exact, so invariance holds to rounding of the features themselves
    x = [float(v) for v in xs]
    a = extract_statistical(x)
    b = extract_statistical([v + c for v in x])
    for key in SHIFT_INVARIANT + tuple(f"histogram_{k}" for k in range(10)):
        assert math.isclose(a[key], b[key], rel_tol=1e-9, abs_tol=1e-9), key


@settings(max_examples=200, deadline=None)
@given(windows)
def test_order_statistics_and_counts(x):
    f = extract_statistical(x)
    assert f["min"] <= f["ecdf_percentile_0"] <= f["median"] <= f["ecdf_percentile_1"] <= f["max"]
    assert sum(f[f"histogram_{k}"] for k in range(10)) == len(x)
    assert math.isclose(f["rms"] ** 2 * len(x), f["abs_energy"], rel_tol=1e-9, abs_tol=1e-300)
    assert 0.0 <= f["entropy"] <= 1.0 + 1e-12
