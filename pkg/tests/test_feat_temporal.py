import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gesturefusion.errors import TimeOrderError, WindowTooShortError
from gesturefusion.feat_temporal import FAMILIES, extract_spatiotemporal, neighbourhood_peaks
from oracles import close, random_windows, temporal_oracle

T3 = [0.0, 0.2, 0.4]
finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_thirteen_families():
    assert len(FAMILIES) == 13


def test_single_peak_example():
    f = extract_spatiotemporal([0.0, 1.0, 0.0], T3)
    assert math.isclose(f["auc"], 0.2, rel_tol=1e-15)
    assert f["positive_turning_points"] == 1 and f["negative_turning_points"] == 0
    assert f["slope"] == 0 and f["sum_abs_diff"] == 2 and f["mean_diff"] == 0
    assert f["zero_crossing_rate"] == 0


@pytest.mark.parametrize("c", [0.0, 3.5, -2.0, 0.1])
def test_constant_window(c):
    f = extract_spatiotemporal([c, c, c], T3)
    for key in ("mean_diff", "mean_abs_diff", "median_diff", "median_abs_diff", "sum_abs_diff", "slope"):
        assert f[key] == 0, key
    assert f["positive_turning_points"] == f["negative_turning_points"] == 0
    assert f["zero_crossing_rate"] == 0 and f["neighbourhood_peaks"] == 0


def test_alternating_example():
    f = extract_spatiotemporal([1.0, -1.0, 1.0], T3)
    assert f["zero_crossing_rate"] == 1.0
    assert f["autocorrelation"] == -2
    assert f["negative_turning_points"] == 1


def test_zero_energy_centroid():
    assert extract_spatiotemporal([0.0, 0.0, 0.0], T3)["centroid"] == 0


def test_exact_zeros_are_not_crossings():
    assert extract_spatiotemporal([1.0, 0.0, -1.0], T3)["zero_crossing_rate"] == 0


def test_errors():
    with pytest.raises(WindowTooShortError):
        extract_spatiotemporal([1.0], [0.0])
    with pytest.raises(TimeOrderError):
        extract_spatiotemporal([1.0, 2.0, 3.0], [0.0, 0.4, 0.2])
    with pytest.raises(TimeOrderError):
        extract_spatiotemporal([1.0, 2.0, 3.0], [0.0, 0.0, 0.2])


def test_peak_radius_is_clipped_and_ends_excluded():
    assert neighbourhood_peaks(np.array([0.0, 1.0, 0.0])) == 1
    assert neighbourhood_peaks(np.array([5.0, 1.0, 0.0])) == 0
    x = np.zeros(30)
    x[3], x[20] = 2.0, 1.0  # 17 apart, so each is the top of its own neighbourhood
    assert neighbourhood_peaks(x) == 2
    x[12] = 1.5  # within radius of both: below 3, above 20
    assert neighbourhood_peaks(x) == 1


@pytest.mark.parametrize("n", [3, 7, 100])
def test_matches_oracle(n):
    rng = np.random.default_rng(100 + n)
    t = [i * 0.2 for i in range(n)]
    for w in random_windows(rng, 120, n):
        got = extract_spatiotemporal(w, t)
        want = temporal_oracle(w, t)
        assert got.keys() == want.keys()
        for key in want:
            assert close(got[key], want[key]), (key, w, got[key], want[key])


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=3, max_size=30))
def test_turning_points_reverse_and_bounds(x):
    t = [i * 0.2 for i in range(len(x))]
    a = extract_spatiotemporal(x, t)
    b = extract_spatiotemporal(x[::-1], t)
    assert a["positive_turning_points"] == b["positive_turning_points"]
    assert a["negative_turning_points"] == b["negative_turning_points"]
    assert 0 <= a["zero_crossing_rate"] <= 1
    for key in ("positive_turning_points", "negative_turning_points"):
        assert 0 <= a[key] <= len(x) - 2


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=2, max_size=30))
def test_auc_is_linear(pairs):
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    t = [i * 0.2 for i in range(len(x))]
    lhs = extract_spatiotemporal([a + b for a, b in zip(x, y)], t)["auc"]
    rhs = extract_spatiotemporal(x, t)["auc"] + extract_spatiotemporal(y, t)["auc"]
    scale = sum(abs(v) for v in x + y) * 0.2
    assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-12 * scale + 1e-300)


@settings(max_examples=200, deadline=None)
@given(st.floats(-100, 100), st.floats(-100, 100), st.integers(2, 50))
def test_slope_of_exact_line(a, b, n):
    t = [i * 0.2 for i in range(n)]
    x = [a * ti + b for ti in t]
    slope = extract_spatiotemporal(x, t)["slope"]
    assert math.isclose(slope, a, rel_tol=1e-9, abs_tol=1e-9 * (1 + abs(b)))
