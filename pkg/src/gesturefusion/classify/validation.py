"""Stratified k-fold cross-validation and macro-averaged fold metrics."""

from dataclasses import dataclass, fields

import numpy as np

from ..errors import StratificationError
from ..ingest import ordered_classes
from .baselines import ZeroRuleModel, modal_class, one_rule
from .forest import train_forest

FOLD_STREAM = 0x5F0D  # mixed into the seed so folds and trees use distinct streams


@dataclass(frozen=True)
class FoldMetrics:
    accuracy: float  # percent
    precision: float
    recall: float
    f1: float

    def as_tuple(self):
        return tuple(getattr(self, f.name) for f in fields(self))


@dataclass(frozen=True)
class CVResult:
    mean: FoldMetrics
    std: FoldMetrics
    folds: tuple

    def __iter__(self):
        return iter((self.mean, self.std))


def confusion_matrix(y_true, y_pred, classes):
    code = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(np.asarray(y_true, dtype=object).tolist(), np.asarray(y_pred, dtype=object).tolist()):
        cm[code[t], code[p]] += 1
    return cm


def fold_metrics(y_true, y_pred, classes=None):
    """Accuracy (percent) and macro precision/recall/F1 over the classes seen.

    A class never predicted has precision 0; a class that never occurs has
    recall 0; F1 is 0 when precision + recall is 0.
    """
    if classes is None:
        classes = ordered_classes(np.concatenate([np.asarray(y_true, dtype=object), np.asarray(y_pred, dtype=object)]))
    cm = confusion_matrix(y_true, y_pred, classes)
    tp = np.diag(cm).astype(float)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return FoldMetrics(
        accuracy=100.0 * tp.sum() / cm.sum(),
        precision=float(precision.mean()),
        recall=float(recall.mean()),
        f1=float(f1.mean()),
    )


def stratified_folds(labels, k=10, seed=1):
    """Fold number (0..k-1) for every row, preserving class proportions.

    Each class's rows are shuffled, then dealt round-robin; the dealing
    position carries over from one class to the next so fold sizes differ
    by at most one.
    """
    labels = np.asarray(labels, dtype=object)
    if k < 2:
        raise StratificationError("k must be at least 2")
    classes = ordered_classes(labels)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), FOLD_STREAM])))
    fold = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for c in classes:
        rows = np.flatnonzero(labels == c)
        if len(rows) < k:
            raise StratificationError(f"class {c!r} has {len(rows)} rows; {k}-fold needs at least {k}")
        rows = rows[rng.permutation(len(rows))]
        fold[rows] = (offset + np.arange(len(rows))) % k
        offset += len(rows)
    return fold


def summarize(metrics):
    arr = np.array([m.as_tuple() for m in metrics])
    return FoldMetrics(*arr.mean(axis=0).tolist()), FoldMetrics(*arr.std(axis=0).tolist())


def cross_validate(matrix, k=10, seed=1, trainer=None):
    """Mean and population std of fold metrics over stratified k folds.

    ``trainer(X, labels, seed)`` must return an object with ``predict(X)``;
    the default is a 100-tree forest.  ``matrix`` is a
    :class:`FeatureMatrix` or an ``(X, labels)`` pair.
    """
    if isinstance(matrix, tuple):
        X, labels = matrix
        X = np.asarray(X, dtype=float)
        labels = np.asarray(labels, dtype=object)
    else:
        X, labels = matrix.values, matrix.labels
    trainer = trainer or ForestTrainer()
    fold = stratified_folds(labels, k, seed)
    classes = ordered_classes(labels)
    results = []
    for f in range(k):
        test = fold == f
        model = trainer(X[~test], labels[~test], seed)
        pred = model.predict(X[test])
        results.append(fold_metrics(labels[test], pred, _seen(classes, labels[test], pred)))
    mean, std = summarize(results)
    return CVResult(mean, std, tuple(results))


def _seen(classes, y_true, y_pred):
    present = set(np.asarray(y_true, dtype=object).tolist()) | set(np.asarray(y_pred, dtype=object).tolist())
    return tuple(c for c in classes if c in present)


@dataclass(frozen=True)
class ForestTrainer:
    estimators: int = 100
    jobs: int = 1

    def __call__(self, X, labels, seed):
        return train_forest((X, labels), estimators=self.estimators, seed=seed, jobs=self.jobs)


def zero_rule_trainer(X, labels, seed):
    return ZeroRuleModel(modal_class(labels)[0])


def one_rule_trainer(X, labels, seed):
    return one_rule((X, labels)).rule
