"""Seeded CART random forest (Gini impurity), compiled with numba.

Randomness: tree ``i`` of a forest seeded with ``seed`` draws from a
splitmix64 stream whose initial state is
``SeedSequence([seed, i]).generate_state(1, uint64)[0]``.  The stream is
consumed first by the bootstrap sample (``n`` draws) and then by the
per-node feature shuffles, so each tree depends only on ``(data, seed, i)``
and trees can be built in any order or in parallel.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import DegenerateTrainingError, ModelFormatError, ShapeError
from ..ingest import ordered_classes

MODEL_FORMAT = "gesturefusion-forest"
MODEL_VERSION = 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

SCAN_RATIO = 16  # nodes holding at least n / SCAN_RATIO samples use the presorted scan


@njit(cache=True, nogil=True)
def _next(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return state, z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def _below(state, k):
    state, r = _next(state)
    return state, np.int64(r % np.uint64(k))


@njit(cache=True, nogil=True)
def _build_tree(X, order, y, n_classes, mtry, seed, scan_ratio):
    """Grow one tree; ``order[:, f]`` is the ascending row order of column ``f``.

    Large nodes find splits by scanning the presorted order and keeping rows
    that belong to the node; small nodes sort their own samples.  Both visit
    candidate thresholds in the same ascending order with the same class
    counts, so the chosen split does not depend on the route taken.
    """
    n, d = X.shape
    state = seed

    idx = np.empty(n, np.int64)
    weight = np.zeros(n, np.int64)
    for i in range(n):
        state, idx[i] = _below(state, n)
        weight[idx[i]] += 1
    node_of = np.full(n, -1, np.int64)
    for i in range(n):
        node_of[idx[i]] = 0

    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    counts = np.zeros((cap, n_classes), np.int32)

    feats = np.arange(d)
    stack_node = np.empty(cap, np.int64)
    stack_lo = np.empty(cap, np.int64)
    stack_hi = np.empty(cap, np.int64)
    stack_node[0], stack_lo[0], stack_hi[0] = 0, 0, n
    top = 1
    n_nodes = 1

    vals = np.empty(n, np.float64)
    cls = np.empty(n, np.int64)
    cl = np.zeros(n_classes, np.int64)
    cr = np.zeros(n_classes, np.int64)
    buf = np.empty(n, np.int64)

    while top > 0:
        top -= 1
        node, lo, hi = stack_node[top], stack_lo[top], stack_hi[top]
        m = hi - lo
        for i in range(lo, hi):
            counts[node, y[idx[i]]] += 1
        nonzero = 0
        sq_parent = 0.0
        for c in range(n_classes):
            if counts[node, c] > 0:
                nonzero += 1
            sq_parent += float(counts[node, c]) * counts[node, c]
        if m < 2 or nonzero < 2:
            continue
        scan = m * scan_ratio >= n

        best_score = -1.0
        best_f = -1
        best_thr = 0.0
        for j in range(d):
            if j >= mtry and best_f >= 0:
                break
            state, r = _below(state, d - j)
            k = j + r
            feats[j], feats[k] = feats[k], feats[j]
            f = feats[j]
            for c in range(n_classes):
                cl[c] = 0
                cr[c] = counts[node, c]
            sq_l = 0.0
            sq_r = sq_parent
            n_l = 0
            if scan:
                prev = 0.0
                for q in range(n):
                    row = order[q, f]
                    if node_of[row] != node:
                        continue
                    v = X[row, f]
                    if n_l > 0 and prev < v:
                        score = sq_l / n_l + sq_r / (m - n_l)
                        if score > best_score:
                            best_score = score
                            best_f = f
                            thr = prev + (v - prev) / 2.0
                            if thr >= v:
                                thr = prev
                            best_thr = thr
                    c = y[row]
                    w = weight[row]
                    sq_l += w * (2.0 * cl[c] + w)
                    cl[c] += w
                    sq_r -= w * (2.0 * cr[c] - w)
                    cr[c] -= w
                    n_l += w
                    prev = v
            else:
                for i in range(m):
                    vals[i] = X[idx[lo + i], f]
                srt = np.argsort(vals[:m])
                for i in range(m):
                    cls[i] = y[idx[lo + srt[i]]]
                for p in range(m - 1):
                    c = cls[p]
                    sq_l += 2.0 * cl[c] + 1.0
                    cl[c] += 1
                    sq_r -= 2.0 * cr[c] - 1.0
                    cr[c] -= 1
                    a = vals[srt[p]]
                    b = vals[srt[p + 1]]
                    if a < b:
                        n_l = p + 1
                        score = sq_l / n_l + sq_r / (m - n_l)
                        if score > best_score:
                            best_score = score
                            best_f = f
                            thr = a + (b - a) / 2.0
                            if thr >= b:
                                thr = a
                            best_thr = thr
        if best_f < 0:
            continue

        l_id = n_nodes
        r_id = n_nodes + 1
        n_nodes += 2
        # stable partition of idx[lo:hi] on the chosen split
        n_l = 0
        for i in range(lo, hi):
            if X[idx[i], best_f] <= best_thr:
                idx[lo + n_l] = idx[i]
                node_of[idx[i]] = l_id
                n_l += 1
            else:
                buf[i - lo - n_l] = idx[i]
                node_of[idx[i]] = r_id
        for i in range(m - n_l):
            idx[lo + n_l + i] = buf[i]

        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = l_id
        right[node] = r_id
        stack_node[top], stack_lo[top], stack_hi[top] = r_id, lo + n_l, hi
        top += 1
        stack_node[top], stack_lo[top], stack_hi[top] = l_id, lo, lo + n_l
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        counts[:n_nodes].copy(),
    )


@njit(cache=True, nogil=True)
def _vote(X, feature, threshold, left, right, leaf_class, roots, n_classes):
    rows = X.shape[0]
    votes = np.zeros((rows, n_classes), np.int64)
    for t in range(roots.shape[0]):
        for i in range(rows):
            node = roots[t]
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            votes[i, leaf_class[node]] += 1
    return votes


def tree_seed(seed, index):
    return np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)[0]


def n_candidate_features(d):
    """Features sampled per node: ceil(sqrt(d))."""
    return math.isqrt(d - 1) + 1 if d > 1 else 1


@dataclass(frozen=True, eq=False)
class ForestModel:
    """Trained forest; nodes of all trees live in flat arrays.

    ``left``/``right`` hold global node indices and ``roots[i]`` is the root
    of tree ``i``.  Leaves have ``feature == -1`` and keep their bootstrap
    class histogram in ``counts``.
    """

    feature_names: tuple
    classes: tuple
    seed: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    roots: np.ndarray

    @property
    def n_estimators(self):
        return len(self.roots)

    @property
    def leaf_class(self):
        return np.argmax(self.counts, axis=1).astype(np.int64)

    def votes(self, X):
        X = np.ascontiguousarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ShapeError(f"expected rows of {len(self.feature_names)} features, got shape {X.shape}")
        return _vote(X, self.feature, self.threshold, self.left, self.right, self.leaf_class, self.roots, len(self.classes))

    def predict_codes(self, X):
        # argmax keeps the first maximum: vote ties go to the earlier class
        return np.argmax(self.votes(X), axis=1)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        codes = self.predict_codes(X[None, :] if single else X)
        labels = np.array(self.classes, dtype=object)[codes]
        return labels[0] if single else labels

    def save(self, path):
        meta = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "seed": int(self.seed),
            "feature_names": list(self.feature_names),
            "classes": list(self.classes),
        }
        with open(path, "wb") as fh:
            np.savez(
                fh,
                meta=np.array(json.dumps(meta, sort_keys=True)),
                feature=self.feature,
                threshold=self.threshold,
                left=self.left,
                right=self.right,
                counts=self.counts,
                roots=self.roots,
            )

    @classmethod
    def load(cls, path):
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            if meta.get("format") != MODEL_FORMAT or meta.get("version") != MODEL_VERSION:
                raise ModelFormatError(f"{path}: not a version {MODEL_VERSION} forest model")
            return cls(
                tuple(meta["feature_names"]),
                tuple(meta["classes"]),
                meta["seed"],
                z["feature"],
                z["threshold"],
                z["left"],
                z["right"],
                z["counts"],
                z["roots"],
            )


def fit_forest(X, y, n_classes, estimators=100, seed=1, jobs=1, scan_ratio=SCAN_RATIO):
    """Grow ``estimators`` trees on integer class codes ``y``; returns raw node arrays."""
    X = np.asfortranarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    mtry = n_candidate_features(X.shape[1])
    order = np.asfortranarray(np.argsort(X, axis=0, kind="stable"))
    seeds = [tree_seed(seed, i) for i in range(estimators)]

    def grow(s):
        return _build_tree(X, order, y, n_classes, mtry, s, scan_ratio)

    if jobs > 1 and estimators > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trees = list(pool.map(grow, seeds))
    else:
        trees = [grow(s) for s in seeds]

    offsets = np.cumsum([0] + [len(t[0]) for t in trees[:-1]])
    feature = np.concatenate([t[0] for t in trees])
    threshold = np.concatenate([t[1] for t in trees])
    left = np.concatenate([np.where(t[2] >= 0, t[2] + o, -1) for t, o in zip(trees, offsets)])
    right = np.concatenate([np.where(t[3] >= 0, t[3] + o, -1) for t, o in zip(trees, offsets)])
    counts = np.concatenate([t[4] for t in trees])
    return feature, threshold, left, right, counts, offsets.astype(np.int64)


def train_forest(matrix, estimators=100, seed=1, jobs=1, classes=None):
    """Train a forest on a :class:`FeatureMatrix` (or an ``(X, labels)`` pair)."""
    if isinstance(matrix, tuple):
        X, labels = matrix
        names = tuple(f"f{i}" for i in range(np.shape(X)[1]))
    else:
        X, labels, names = matrix.values, matrix.labels, tuple(matrix.names)
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=object)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise ShapeError(f"training matrix needs >= 2 rows and >= 1 column, got {X.shape}")
    if classes is None:
        classes = ordered_classes(labels)
    if len(set(labels.tolist())) < 2:
        raise DegenerateTrainingError("training data contains a single class")
    code = {c: i for i, c in enumerate(classes)}
    y = np.array([code[v] for v in labels.tolist()], dtype=np.int64)
    arrays = fit_forest(X, y, len(classes), estimators, seed, jobs)
    return ForestModel(names, tuple(classes), seed, *arrays)
