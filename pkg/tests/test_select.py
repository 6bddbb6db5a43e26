import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gesturefusion.errors import (
    BoundsError,
    ClassCoverageError,
    InsufficientClassesError,
    SelectionEmptyError,
)
from gesturefusion.features import FeatureMatrix
from gesturefusion.select import (
    FeatureScore,
    anova_f,
    anova_f_columns,
    mean_top_n,
    rank_and_filter,
    read_ranked,
    select_raw_channels,
    top_n_table,
    write_ranked,
)
from gesturefusion.special import betainc, f_cdf, f_survival
from gesturefusion.synth import planted_roles, synth_gestures
from oracles import anova_oracle, pooled_t_squared

F_GRID = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0]
DOF = [1, 2, 5, 17, 3273]


def test_two_class_example():
    F, p = anova_f([1, 2, 2, 3], ["A", "A", "B", "B"])
    assert F == 2.0
    assert abs(p - 0.2928932188134524) < 1e-7
    assert anova_f([1, 2, 1, 2], ["A", "A", "B", "B"]) == (0.0, 1.0)
    assert anova_f([1, 1, 2, 2], ["A", "A", "B", "B"]) == (math.inf, 0.0)


def test_anova_errors():
    with pytest.raises(InsufficientClassesError):
        anova_f([1, 2, 3], ["A", "A", "A"])
    with pytest.raises(ClassCoverageError):
        anova_f([1, 2, 3], ["A", "A", "B"], classes=["A", "B", "C"])


def test_f_survival_examples():
    assert f_survival(0, 3, 4) == 1.0
    assert math.isclose(f_survival(2, 1, 2), 1 - 2**-0.5, rel_tol=1e-14)
    assert math.isclose(f_survival(1, 5, 5), 0.5, rel_tol=1e-12)
    assert f_survival(math.inf, 3, 4) == 0.0


def test_closed_form_incomplete_beta():
    # I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a
    for x in (0.01, 0.3, 0.5, 0.77, 0.999):
        for s in (0.5, 1.0, 2.5, 40.0):
            assert math.isclose(betainc(1.0, s, x), 1 - (1 - x) ** s, rel_tol=1e-12, abs_tol=1e-15)
            assert math.isclose(betainc(s, 1.0, x), x**s, rel_tol=1e-12, abs_tol=1e-15)


@pytest.mark.parametrize("d1", DOF)
@pytest.mark.parametrize("d2", DOF)
def test_f_survival_against_quadrature(d1, d2):
    from fquad import f_tail_by_quadrature

    for f in F_GRID:
        assert abs(f_survival(f, d1, d2) - f_tail_by_quadrature(f, d1, d2)) < 1e-8, f
        assert abs(f_survival(f, d1, d2) + f_cdf(f, d1, d2) - 1.0) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(0.01, 50.0), st.integers(1, 60), st.integers(1, 60))
def test_f_survival_strictly_decreasing(f, g, d1, d2):
    lo, hi = sorted((f, g))
    if hi - lo > 1e-6 * hi:
        a, b = f_survival(lo, d1, d2), f_survival(hi, d1, d2)
        assert a >= b
        if a > 1e-300:
            assert a > b or a == b == 0.0


def test_f_equals_t_squared():
    rng = np.random.default_rng(11)
    for _ in range(100):
        na, nb = rng.integers(2, 30, size=2)
        a = rng.normal(rng.normal(), rng.uniform(0.1, 3), na)
        b = rng.normal(rng.normal(), rng.uniform(0.1, 3), nb)
        F, _ = anova_f(np.r_[a, b], ["a"] * na + ["b"] * nb)
        assert math.isclose(F, pooled_t_squared(a.tolist(), b.tolist()), rel_tol=1e-9)


def test_matches_exact_oracle():
    rng = np.random.default_rng(12)
    for _ in range(50):
        k = int(rng.integers(2, 6))
        groups = [rng.normal(rng.normal(), 1.0, int(rng.integers(1, 9))).tolist() for _ in range(k)]
        if sum(map(len, groups)) == k:
            continue
        values = [v for g in groups for v in g]
        labels = [i for i, g in enumerate(groups) for _ in g]
        F, _ = anova_f(values, labels)
        assert math.isclose(F, anova_oracle(groups)[0], rel_tol=1e-9)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(-1000, 1000), min_size=6, max_size=40),
    st.floats(0.01, 100.0),
    st.floats(-1e4, 1e4),
    st.booleans(),
)
def test_affine_invariance(xs, a, b, negate):
    labels = [i % 3 for i in range(len(xs))]
    x = np.array(xs, dtype=float)
    F0, _ = anova_f(x, labels)
    F1, _ = anova_f((-a if negate else a) * x + b, labels)
    if math.isinf(F0) or F0 == 0.0:
        return
    assert math.isclose(F0, F1, rel_tol=1e-9)


def test_columns_vectorised():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 5))
    y = np.repeat(["p", "q", "r", "s"], 10)
    F, p = anova_f_columns(X, y)
    for j in range(5):
        assert (F[j], p[j]) == anova_f(X[:, j], y)


def _scores(fs, ps):
    return [FeatureScore(f"f{i}", f, p) for i, (f, p) in enumerate(zip(fs, ps))]


def test_rank_and_filter():
    ranked = rank_and_filter(_scores([5.0, 9.0, 7.0], [0.01, 0.2, 0.04]))
    assert [s.name for s in ranked] == ["f0", "f2"][::-1]
    assert [s.rank for s in ranked] == [1, 2]
    with pytest.raises(SelectionEmptyError):
        rank_and_filter(_scores([1.0, 2.0], [0.5, 0.06]))


def test_rank_order_inf_first_then_name():
    scores = [
        FeatureScore("b", 3.0, 0.0),
        FeatureScore("z", math.inf, 0.0),
        FeatureScore("a", 3.0, 0.0),
        FeatureScore("c", math.inf, 0.0),
        FeatureScore("d", 4.0, 0.05),
    ]
    assert [s.name for s in rank_and_filter(scores)] == ["c", "z", "d", "a", "b"]


def test_mean_top_n():
    ranked = rank_and_filter(_scores([10.0, 6.0, 2.0], [0.0] * 3))
    assert mean_top_n(ranked, 2) == 8
    assert mean_top_n(ranked, 1) == 10
    with pytest.raises(BoundsError):
        mean_top_n(ranked, 4)
    with_inf = rank_and_filter(_scores([math.inf, 6.0, 2.0], [0.0] * 3))
    assert mean_top_n(with_inf, 1) == 6
    assert top_n_table(with_inf, [1, 2, 3]) == [(1, 6.0, 1), (2, 4.0, 1)]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 1e300, allow_nan=False), min_size=1, max_size=60))
def test_mean_top_n_non_increasing(fs):
    ranked = rank_and_filter(_scores(fs, [0.0] * len(fs)))
    finite = sum(1 for s in ranked if math.isfinite(s.f_score))
    means = [mean_top_n(ranked, n) for n in range(1, finite + 1)]
    assert all(a >= b for a, b in zip(means, means[1:]))


def test_ranked_csv_round_trip(tmp_path):
    ranked = rank_and_filter(
        [FeatureScore("x", math.inf, 0.0, domain_tag="raw"), FeatureScore("y", 1 / 3, 0.01, domain_tag="raw")]
    )
    write_ranked(tmp_path / "r.csv", ranked)
    back = read_ranked(tmp_path / "r.csv")
    assert [(s.name, s.f_score, s.p_value, s.rank, s.domain_tag) for s in back] == [
        (s.name, s.f_score, s.p_value, s.rank, s.domain_tag) for s in ranked
    ]
    assert "inf" in (tmp_path / "r.csv").read_text()


def test_raw_selection_finds_informative_channels():
    hits = 0
    for seed in range(20):
        fs = synth_gestures(classes=6, recordings_per_class=30, channels=50, informative_fraction=0.2, null_channels=0, seed=seed)
        roles = planted_roles(fs.channels, 0.2, 0)
        informative = {n for n, r in roles.items() if r == "informative"}
        assert len(informative) == 10
        chosen = {c.stable_name for c in select_raw_channels(fs, top_k=10).channels}
        hits += chosen == informative
    assert hits >= 19


def test_raw_selection_clamps_with_warning():
    fs = synth_gestures(classes=4, recordings_per_class=20, channels=12, informative_fraction=0.5, null_channels=2, seed=3)
    sel = select_raw_channels(fs, top_k=50)
    assert sel.warning is not None
    assert len(sel.channels) == len(sel.ranked) < 12
    assert {s.name for s in sel.dropped}.isdisjoint(c.stable_name for c in sel.channels)


def test_score_matrix_names_columns():
    from gesturefusion.features import FeatureColumn
    from gesturefusion.ingest import ChannelDescriptor
    from gesturefusion.select import score_matrix

    col = FeatureColumn(ChannelDescriptor.parse("left_palm_yaw"), "mean", 0, "statistical")
    m = FeatureMatrix([col], np.array([[1.0], [2.0], [2.0], [3.0]]), ["A", "A", "B", "B"], ["w0", "w1", "w2", "w3"])
    (s,) = score_matrix(m)
    assert (s.name, s.f_score, s.domain_tag) == ("left_palm_yaw__mean", 2.0, "statistical")
