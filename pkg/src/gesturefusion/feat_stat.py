"""Order-independent descriptors of a window's value distribution.

All functions work on the last axis, so one call can process an array of
shape ``(windows, channels, n)``.  Conventions:

* moments are population (biased) moments; kurtosis is excess (Fisher);
  skewness and kurtosis are 0 when the window is constant;
* ECDF values are the sorted samples (first ``min(ecdf_len, n)``);
* the ECDF percentile at ``p`` is the sorted sample at 0-based index
  ``ceil(p * n) - 1``, and its count is the number of samples <= it;
* entropy uses value-count probabilities in bits, divided by
  ``log2(#distinct)``, and is 0 for a constant window;
* the histogram has 10 equal-width bins over [min, max] with the max
  counted in the last bin; a constant window puts everything in bin 0.
"""

import math
from fractions import Fraction

import numpy as np

from .errors import WindowTooShortError
from .ingest import FRAME_PERIOD

DOMAIN = "statistical"

ECDF_LEN = 10
PERCENTILES = (0.2, 0.8)
HIST_BINS = 10
MULTI_OUTPUT = frozenset({"ecdf", "ecdf_percentile", "ecdf_percentile_count", "histogram"})

FAMILIES = (
    "abs_energy",
    "average_power",
    "ecdf",
    "ecdf_percentile",
    "ecdf_percentile_count",
    "entropy",
    "histogram",
    "interquartile_range",
    "kurtosis",
    "max",
    "mean",
    "mean_abs_deviation",
    "median",
    "median_abs_deviation",
    "min",
    "peak_to_peak",
    "rms",
    "skewness",
    "std",
    "variance",
)


def percentile_index(p, n):
    """0-based index of the ECDF percentile ``p`` in a sorted sample of ``n``."""
    return max(0, math.ceil(Fraction(str(p)) * n) - 1)


def feature_layout(n, ecdf_len=ECDF_LEN):
    """``(family, sub_index)`` pairs emitted for windows of length ``n``."""
    width = {
        "ecdf": min(ecdf_len, n),
        "ecdf_percentile": len(PERCENTILES),
        "ecdf_percentile_count": len(PERCENTILES),
        "histogram": HIST_BINS,
    }
    return [(fam, k) for fam in FAMILIES for k in range(width.get(fam, 1))]


def _central(x, mean):
    d = x - mean[..., None]
    # a constant window must give exactly zero deviations even when the
    # float mean is off by an ulp
    const = (x.max(axis=-1) == x.min(axis=-1))[..., None]
    return np.where(const, 0.0, d)


def entropy(x):
    """Normalised Shannon entropy of the value counts along the last axis."""
    n = x.shape[-1]
    counts = np.sum(x[..., :, None] == x[..., None, :], axis=-1)
    h = np.log2(n) - np.sum(np.log2(counts), axis=-1) / n
    distinct = np.rint(np.sum(1.0 / counts, axis=-1))
    norm = np.log2(np.maximum(distinct, 2.0))
    return np.where(distinct > 1, h / norm, 0.0)


def histogram(x, bins=HIST_BINS):
    lo = x.min(axis=-1, keepdims=True)
    width = x.max(axis=-1, keepdims=True) - lo
    safe = np.where(width > 0, width, 1.0)
    idx = np.floor((x - lo) * bins / safe)
    idx = np.where(width > 0, np.clip(idx, 0, bins - 1), 0).astype(np.int64)
    return np.stack([np.sum(idx == b, axis=-1) for b in range(bins)], axis=-1).astype(float)


def statistical_features(x, duration=None, ecdf_len=ECDF_LEN):
    """Compute every statistical feature along the last axis of ``x``.

    ``duration`` is the window span ``t_n - t_1`` (broadcast against the
    leading axes); it defaults to ``(n - 1)`` frame periods.  Returns
    ``(layout, values)`` with ``values.shape == x.shape[:-1] + (len(layout),)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if n < 2:
        raise WindowTooShortError(f"window of {n} samples; need at least 2")
    if duration is None:
        duration = (n - 1) * FRAME_PERIOD
    duration = np.asarray(duration, dtype=float)

    s = np.sort(x, axis=-1)
    mean = x.mean(axis=-1)
    d = _central(x, mean)
    m2 = np.mean(d * d, axis=-1)
    # shape moments from deviations scaled into [-1, 1]; scale-free, and tiny
    # variances cannot underflow
    span = np.max(np.abs(d), axis=-1)
    pos = span > 0
    u = d / np.where(pos, span, 1.0)[..., None]
    u2 = np.mean(u * u, axis=-1)
    u2 = np.where(pos, u2, 1.0)
    energy = np.sum(x * x, axis=-1)
    median = np.median(x, axis=-1)
    q25, q75 = np.quantile(x, [0.25, 0.75], axis=-1)

    pct_idx = [percentile_index(p, n) for p in PERCENTILES]
    pct = s[..., pct_idx]
    pct_count = np.stack([np.sum(x <= pct[..., [i]], axis=-1) for i in range(len(PERCENTILES))], axis=-1)

    cols = {
        "abs_energy": energy,
        "average_power": energy / duration,
        "ecdf": s[..., : min(ecdf_len, n)],
        "ecdf_percentile": pct,
        "ecdf_percentile_count": pct_count.astype(float),
        "entropy": entropy(x),
        "histogram": histogram(x),
        "interquartile_range": q75 - q25,
        "kurtosis": np.where(pos, np.mean(u**4, axis=-1) / u2**2 - 3.0, 0.0),
        "max": s[..., -1],
        "mean": mean,
        "mean_abs_deviation": np.mean(np.abs(d), axis=-1),
        "median": median,
        "median_abs_deviation": np.median(np.abs(x - median[..., None]), axis=-1),
        "min": s[..., 0],
        "peak_to_peak": s[..., -1] - s[..., 0],
        "rms": np.sqrt(energy / n),
        "skewness": np.where(pos, np.mean(u**3, axis=-1) / u2**1.5, 0.0),
        "std": np.sqrt(m2),
        "variance": m2,
    }
    lead = x.shape[:-1]
    blocks = [cols[f] if f in MULTI_OUTPUT else np.broadcast_to(cols[f], lead)[..., None] for f in FAMILIES]
    return feature_layout(n, ecdf_len), np.concatenate(blocks, axis=-1)


def extract_statistical(samples, duration=None, ecdf_len=ECDF_LEN):
    """Statistical features of one window as ``{name: value}``.

    Multi-output families are suffixed with their sub-index
    (``ecdf_0``, ``histogram_9``, ...).
    """
    layout, values = statistical_features(np.asarray(samples, dtype=float), duration, ecdf_len)
    return {feature_key(fam, k): float(v) for (fam, k), v in zip(layout, values)}


def feature_key(family, sub_index):
    return f"{family}_{sub_index}" if family in MULTI_OUTPUT else family
