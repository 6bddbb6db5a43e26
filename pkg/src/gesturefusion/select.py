"""One-way ANOVA scoring, p-value filtering and rank ordering of features."""

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .csvio import fmt, read_rows, write_rows
from .errors import (
    BoundsError,
    ClassCoverageError,
    InsufficientClassesError,
    ParseError,
    SelectionEmptyError,
)
from .special import f_survival

log = logging.getLogger(__name__)

ALPHA = 0.05
RANKED_HEADER = ["stable_name", "domain_tag", "f_score", "p_value", "rank"]


@dataclass(frozen=True)
class FeatureScore:
    """ANOVA result for one feature or raw channel.

    ``rank`` is 0 until :func:`rank_and_filter` assigns 1..m.
    """

    name: str
    f_score: float
    p_value: float
    rank: int = 0
    domain_tag: str = ""
    column: object = None


def _group(labels, classes):
    labels = np.asarray(labels, dtype=object)
    present = list(dict.fromkeys(labels.tolist()))
    if classes is None:
        classes = present
    else:
        missing = [c for c in classes if c not in set(present)]
        if missing:
            raise ClassCoverageError(f"no samples for class(es): {', '.join(map(str, missing))}")
        extra = set(present).difference(classes)
        if extra:
            raise ClassCoverageError(f"labels outside the class list: {sorted(map(str, extra))}")
    if len(classes) < 2:
        raise InsufficientClassesError(f"ANOVA needs at least 2 classes, got {len(classes)}")
    code = {c: i for i, c in enumerate(classes)}
    return np.array([code[v] for v in labels.tolist()], dtype=np.int64), len(classes)


def anova_f_columns(X, labels, classes=None):
    """Column-wise one-way ANOVA F-scores and p-values.

    A column that is constant inside every class but varies between classes
    gets ``F = inf, p = 0``; a column with no between-class spread gets
    ``F = 0, p = 1``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y, k = _group(labels, classes)
    N = len(y)
    if N != X.shape[0]:
        raise ValueError("values and labels differ in length")

    order = np.argsort(y, kind="stable")
    Xs, ys = X[order], y[order]
    starts = np.flatnonzero(np.r_[True, ys[1:] != ys[:-1]])
    counts = np.diff(np.r_[starts, N]).astype(float)

    means = np.add.reduceat(Xs, starts, axis=0) / counts[:, None]
    # classes whose values are all identical contribute exactly zero
    const = np.maximum.reduceat(Xs, starts, axis=0) == np.minimum.reduceat(Xs, starts, axis=0)
    means = np.where(const, Xs[starts], means)
    dev = Xs - np.repeat(means, counts.astype(np.int64), axis=0)
    ssw = np.where(const, 0.0, np.add.reduceat(dev * dev, starts, axis=0)).sum(axis=0)

    grand = X.mean(axis=0)
    flat = X.max(axis=0) == X.min(axis=0)
    ssb = np.where(flat, 0.0, (counts[:, None] * (means - grand) ** 2).sum(axis=0))

    F = np.empty(X.shape[1])
    p = np.empty(X.shape[1])
    df1, df2 = k - 1, N - k
    for j in range(X.shape[1]):
        if ssb[j] == 0.0:
            F[j], p[j] = 0.0, 1.0
        elif ssw[j] == 0.0:
            F[j], p[j] = math.inf, 0.0
        else:
            F[j] = (ssb[j] / df1) / (ssw[j] / df2)
            p[j] = f_survival(F[j], df1, df2)
    return F, p


def anova_f(values, labels, classes=None):
    """One-way ANOVA ``(F, p)`` of a single variable across label groups."""
    F, p = anova_f_columns(np.asarray(values, dtype=float)[:, None], labels, classes)
    return float(F[0]), float(p[0])


def score_matrix(matrix, classes=None):
    """Unranked :class:`FeatureScore` for every column of a feature matrix."""
    F, p = anova_f_columns(matrix.values, matrix.labels, classes)
    return [
        FeatureScore(c.stable_name, float(f), float(q), 0, c.domain_tag, c)
        for c, f, q in zip(matrix.columns, F, p)
    ]


def _rank_key(score):
    f = score.f_score
    return (0 if math.isinf(f) else 1, -f if math.isfinite(f) else 0.0, score.name)


def rank_and_filter(scores, alpha=ALPHA):
    """Drop scores with ``p > alpha`` and rank the rest by F (descending).

    ``+inf`` ranks first; equal scores are ordered by name.
    """
    kept = [s for s in scores if s.p_value <= alpha]
    if not kept:
        raise SelectionEmptyError(f"no feature has p <= {alpha}")
    kept.sort(key=_rank_key)
    return [replace(s, rank=i) for i, s in enumerate(kept, start=1)]


def count_infinite(ranked):
    return sum(1 for s in ranked if math.isinf(s.f_score))


def mean_top_n(ranked, n):
    """Mean F of the ``n`` best finite scores (infinite F is left out).

    The sum is accumulated exactly, so the result is non-increasing in ``n``.
    """
    finite = [s.f_score for s in ranked if math.isfinite(s.f_score)]
    if not 1 <= n <= len(finite):
        raise BoundsError(f"n={n} outside 1..{len(finite)}")
    return float(sum(map(Fraction, finite[:n]), Fraction(0)) / n)


def top_n_table(ranked, ns):
    """Rows ``(n, mean_f, infinite_excluded)`` for each n that fits."""
    finite = [s.f_score for s in ranked if math.isfinite(s.f_score)]
    rows, total, upto = [], Fraction(0), 0
    inf_count = count_infinite(ranked)
    for n in sorted(set(ns)):
        if not 1 <= n <= len(finite):
            continue
        while upto < n:
            total += Fraction(finite[upto])
            upto += 1
        rows.append((n, float(total / n), inf_count))
    return rows


@dataclass(frozen=True)
class ChannelSelection:
    channels: tuple
    ranked: list
    dropped: list
    warning: str = None


def select_raw_channels(frames, top_k=50, alpha=ALPHA):
    """Rank raw channels by ANOVA over individual frames and keep the best ``top_k``."""
    F, p = anova_f_columns(frames.values, frames.labels)
    scores = [
        FeatureScore(c.stable_name, float(f), float(q), 0, "raw", c)
        for c, f, q in zip(frames.channels, F, p)
    ]
    ranked = rank_and_filter(scores, alpha)
    dropped = sorted((s for s in scores if s.p_value > alpha), key=lambda s: (s.p_value, s.name))
    warning = None
    if len(ranked) < top_k:
        warning = f"only {len(ranked)} channels have p <= {alpha}; requested {top_k}"
        log.warning(warning)
    chosen = tuple(s.column for s in ranked[:top_k])
    return ChannelSelection(chosen, ranked, dropped, warning)


def write_ranked(path, ranked):
    write_rows(
        path,
        RANKED_HEADER,
        ([s.name, s.domain_tag, fmt(s.f_score), fmt(s.p_value), s.rank] for s in ranked),
    )


def read_ranked(path):
    header, rows = read_rows(path)
    if header != RANKED_HEADER:
        raise ParseError(f"{path}: unexpected header {header}")
    return [FeatureScore(r[0], float(r[2]), float(r[3]), int(r[4]), r[1]) for r in rows]
