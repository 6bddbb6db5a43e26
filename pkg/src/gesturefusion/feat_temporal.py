"""Order- and time-dependent descriptors of a window.

Like :mod:`gesturefusion.feat_stat`, everything is vectorised over the last
axis.  ``t`` holds the sample timestamps and broadcasts against ``x``.
"""

import numpy as np

from .errors import TimeOrderError, WindowTooShortError

DOMAIN = "spatio_temporal"

PEAK_RADIUS = 10

FAMILIES = (
    "auc",
    "autocorrelation",
    "centroid",
    "mean_diff",
    "mean_abs_diff",
    "median_diff",
    "median_abs_diff",
    "positive_turning_points",
    "negative_turning_points",
    "neighbourhood_peaks",
    "slope",
    "sum_abs_diff",
    "zero_crossing_rate",
)


def feature_layout(n):
    return [(fam, 0) for fam in FAMILIES]


def neighbourhood_peaks(x, radius=PEAK_RADIUS):
    """Count samples strictly above every neighbour within ``radius``.

    The neighbourhood is clipped to the window and the two end samples are
    never peaks.
    """
    n = x.shape[-1]
    peak = np.ones(x.shape, dtype=bool)
    peak[..., 0] = False
    peak[..., -1] = False
    for k in range(1, min(radius, n - 1) + 1):
        peak[..., k:] &= x[..., k:] > x[..., :-k]
        peak[..., :-k] &= x[..., :-k] > x[..., k:]
    return np.sum(peak, axis=-1)


def spatiotemporal_features(x, t):
    """Compute every spatio-temporal feature along the last axis.

    Returns ``(layout, values)`` like :func:`feat_stat.statistical_features`.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    n = x.shape[-1]
    if n < 2:
        raise WindowTooShortError(f"window of {n} samples; need at least 2")
    if t.shape[-1] != n:
        raise ValueError("timestamps and samples differ in length")
    dt = np.diff(t, axis=-1)
    if np.any(dt <= 0):
        raise TimeOrderError("timestamps must be strictly increasing")
    t = np.broadcast_to(t, x.shape)
    dt = np.broadcast_to(dt, x.shape[:-1] + (n - 1,))

    d = np.diff(x, axis=-1)
    ad = np.abs(d)
    energy = np.sum(x * x, axis=-1)
    weighted = np.sum(t * x * x, axis=-1)
    # least-squares slope in pairwise form, sum (tj - ti)(xj - xi) / sum (tj - ti)^2,
    # which avoids centring error: a constant or symmetric window gives exactly 0
    pt = t[..., None, :] - t[..., :, None]
    px = x[..., None, :] - x[..., :, None]
    mid, left, right = x[..., 1:-1], x[..., :-2], x[..., 2:]

    cols = [
        np.sum((x[..., :-1] + x[..., 1:]) / 2.0 * dt, axis=-1),
        np.sum(x[..., :-1] * x[..., 1:], axis=-1),
        np.where(energy > 0, weighted / np.where(energy > 0, energy, 1.0), 0.0),
        d.mean(axis=-1),
        ad.mean(axis=-1),
        np.median(d, axis=-1),
        np.median(ad, axis=-1),
        np.sum((left < mid) & (mid > right), axis=-1),
        np.sum((left > mid) & (mid < right), axis=-1),
        neighbourhood_peaks(x),
        np.sum(np.triu(pt * px, 1), axis=(-2, -1)) / np.sum(np.triu(pt * pt, 1), axis=(-2, -1)),
        ad.sum(axis=-1),
        np.sum(x[..., :-1] * x[..., 1:] < 0, axis=-1) / (n - 1),
    ]
    values = np.stack([np.asarray(c, dtype=float) for c in cols], axis=-1)
    return feature_layout(n), values


def extract_spatiotemporal(samples, timestamps):
    """Spatio-temporal features of one window as ``{family: value}``."""
    layout, values = spatiotemporal_features(samples, timestamps)
    return {fam: float(v) for (fam, _), v in zip(layout, values)}
