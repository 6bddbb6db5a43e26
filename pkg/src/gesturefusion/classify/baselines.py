"""ZeroR (modal class) and OneR (best single binned attribute) baselines."""

from dataclasses import dataclass

import numpy as np

from ..ingest import ordered_classes

ONE_RULE_BINS = 10


def _codes(labels, classes):
    code = {c: i for i, c in enumerate(classes)}
    return np.array([code[v] for v in np.asarray(labels, dtype=object).tolist()], dtype=np.int64)


def modal_class(labels, classes=None):
    """Most frequent label; ties go to the class listed first in ``classes``."""
    labels = np.asarray(labels, dtype=object)
    if len(labels) == 0:
        raise ValueError("no labels")
    classes = ordered_classes(labels) if classes is None else tuple(classes)
    counts = np.bincount(_codes(labels, classes), minlength=len(classes))
    best = int(np.argmax(counts))
    return classes[best], int(counts[best])


def zero_rule(labels, classes=None):
    """``(modal_class, accuracy_percent)`` of always predicting the modal class."""
    label, hits = modal_class(labels, classes)
    return label, 100.0 * hits / len(labels)


@dataclass(frozen=True)
class ZeroRuleModel:
    label: object

    def predict(self, X):
        return np.full(len(X), self.label, dtype=object)


def bin_index(x, lo, hi, bins=ONE_RULE_BINS):
    """Equal-width bin of each value on [lo, hi]; out-of-range values clip to the end bins."""
    x = np.asarray(x, dtype=float)
    width = hi - lo
    if width <= 0:
        return np.zeros(x.shape, dtype=np.int64)
    return np.clip(np.floor((x - lo) * bins / width), 0, bins - 1).astype(np.int64)


@dataclass(frozen=True)
class OneRule:
    """Single-attribute rule: bin the column, predict the bin's class."""

    column: int
    name: str
    lo: float
    hi: float
    bin_labels: tuple

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        col = X[:, self.column] if X.ndim == 2 else X
        return np.array(self.bin_labels, dtype=object)[bin_index(col, self.lo, self.hi, len(self.bin_labels))]


@dataclass(frozen=True)
class OneRuleResult:
    name: str
    rule: OneRule
    accuracy: float
    correct: int
    total: int


def one_rule(matrix, classes=None, bins=ONE_RULE_BINS, names=None):
    """Pick the column whose binned majority rule has the lowest training error.

    Each column is cut into ``bins`` equal-width bins over its range; every
    bin predicts its majority class (empty bins predict the global modal
    class).  Ties in error go to the lexicographically smallest column name.
    ``matrix`` is a :class:`FeatureMatrix` or an ``(X, labels)`` pair.
    """
    if isinstance(matrix, tuple):
        X, labels = matrix
        X = np.asarray(X, dtype=float)
        names = names or [f"f{i}" for i in range(X.shape[1])]
    else:
        X, labels, names = matrix.values, matrix.labels, matrix.names
    if X.shape[1] < 1:
        raise ValueError("one_rule needs at least one column")
    classes = ordered_classes(labels) if classes is None else tuple(classes)
    y = _codes(labels, classes)
    k = len(classes)
    default, _ = modal_class(labels, classes)
    default_code = classes.index(default)

    lo = X.min(axis=0)
    hi = X.max(axis=0)
    width = hi - lo
    safe = np.where(width > 0, width, 1.0)
    B = np.where(width > 0, np.clip(np.floor((X - lo) * bins / safe), 0, bins - 1), 0).astype(np.int64)

    best = None
    for j in range(X.shape[1]):
        table = np.bincount(B[:, j] * k + y, minlength=bins * k).reshape(bins, k)
        correct = int(table.max(axis=1).sum())
        key = (-correct, names[j])
        if best is None or key < best[0]:
            best = (key, j, table)
    (neg_correct, name), j, table = best
    bin_codes = [int(np.argmax(row)) if row.sum() > 0 else default_code for row in table]
    rule = OneRule(j, name, float(lo[j]), float(hi[j]), tuple(classes[c] for c in bin_codes))
    correct = -neg_correct
    return OneRuleResult(name, rule, 100.0 * correct / len(y), correct, len(y))
