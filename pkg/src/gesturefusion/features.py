"""Named feature matrices and their CSV / manifest formats."""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import feat_stat, feat_temporal
from .csvio import fmt, read_rows, write_rows
from .errors import ParseError, SchemaError
from .ingest import ChannelDescriptor

STATISTICAL = feat_stat.DOMAIN
SPATIO_TEMPORAL = feat_temporal.DOMAIN
DOMAINS = (STATISTICAL, SPATIO_TEMPORAL)

_FAMILY_DOMAIN = {f: STATISTICAL for f in feat_stat.FAMILIES}
_FAMILY_DOMAIN.update({f: SPATIO_TEMPORAL for f in feat_temporal.FAMILIES})

MANIFEST_HEADER = ["stable_name", "domain_tag", "family", "sub_index", "channel"]


@dataclass(frozen=True)
class FeatureColumn:
    channel: ChannelDescriptor
    family: str
    sub_index: int = 0
    domain_tag: str = STATISTICAL

    @property
    def stable_name(self):
        return f"{self.channel.stable_name}__{feat_stat.feature_key(self.family, self.sub_index)}"

    @classmethod
    def parse(cls, name):
        """Recover a column from ``<channel>__<family>[_<sub_index>]``."""
        chan, sep, feat = name.partition("__")
        if not sep:
            raise SchemaError(f"not a feature column name: {name!r}")
        if feat in _FAMILY_DOMAIN and feat not in feat_stat.MULTI_OUTPUT:
            family, sub = feat, 0
        else:
            family, _, sub = feat.rpartition("_")
            if family not in feat_stat.MULTI_OUTPUT or not sub.isdigit():
                raise SchemaError(f"unknown feature family in {name!r}")
            sub = int(sub)
        return cls(ChannelDescriptor.parse(chan), family, sub, _FAMILY_DOMAIN[family])


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Windows x named feature columns, with one label and window id per row."""

    columns: tuple
    values: np.ndarray
    labels: np.ndarray
    window_ids: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).reshape(len(self.labels), len(self.columns)))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=object))
        object.__setattr__(self, "window_ids", np.asarray(self.window_ids, dtype=object))
        names = self.names
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature column names")
        if len(self.window_ids) != len(self.labels):
            raise SchemaError("labels and window ids differ in length")

    @property
    def names(self):
        return [c.stable_name for c in self.columns]

    @property
    def shape(self):
        return self.values.shape

    def __len__(self):
        return len(self.labels)

    def take(self, indices):
        """Columns by position, in the order given."""
        indices = list(indices)
        return FeatureMatrix(
            [self.columns[i] for i in indices], self.values[:, indices], self.labels, self.window_ids
        )

    def select(self, names):
        """Columns by stable name, in the order given."""
        pos = {n: i for i, n in enumerate(self.names)}
        missing = [n for n in names if n not in pos]
        if missing:
            raise SchemaError(f"unknown feature column(s): {', '.join(missing[:5])}")
        return self.take(pos[n] for n in names)

    def rows(self, indices):
        indices = np.asarray(indices)
        return FeatureMatrix(self.columns, self.values[indices], self.labels[indices], self.window_ids[indices])

    def hstack(self, other):
        if not np.array_equal(self.window_ids, other.window_ids):
            raise SchemaError("cannot join matrices over different windows")
        return FeatureMatrix(
            self.columns + other.columns,
            np.hstack([self.values, other.values]),
            self.labels,
            self.window_ids,
        )

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (
            self.columns == other.columns
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.window_ids, other.window_ids)
        )

    __hash__ = None

    def to_csv(self, path):
        rows = (
            [fmt(v) for v in row] + [lab, wid]
            for row, lab, wid in zip(self.values.tolist(), self.labels, self.window_ids)
        )
        write_rows(path, self.names + ["label", "window_id"], rows)

    def write_manifest(self, path, append=False):
        rows = [
            [c.stable_name, c.domain_tag, c.family, c.sub_index, c.channel.stable_name]
            for c in self.columns
        ]
        path = Path(path)
        if append and path.exists():
            with open(path, "a", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)
        else:
            write_rows(path, MANIFEST_HEADER, rows)

    @classmethod
    def from_csv(cls, path, manifest=None):
        """Load a matrix; ``manifest`` (path) supplies column provenance if given."""
        header, rows = read_rows(path)
        if not header:
            raise ParseError(f"{path}: empty feature file")
        if header[-2:] != ["label", "window_id"]:
            raise SchemaError(f"{path}: last columns must be label, window_id")
        names = header[:-2]
        if manifest is not None:
            known = read_manifest(manifest)
            try:
                columns = [known[n] for n in names]
            except KeyError as exc:
                raise SchemaError(f"{path}: column {exc.args[0]!r} missing from manifest") from None
        else:
            columns = [FeatureColumn.parse(n) for n in names]
        try:
            values = np.array([r[:-2] for r in rows], dtype=float).reshape(len(rows), len(names))
        except ValueError:
            raise ParseError(f"{path}: non-numeric feature cell") from None
        return cls(columns, values, [r[-2] for r in rows], [r[-1] for r in rows])


def read_manifest(path):
    header, rows = read_rows(path)
    if header != MANIFEST_HEADER:
        raise SchemaError(f"{path}: unexpected manifest header {header}")
    out = {}
    for name, domain, family, sub, channel in rows:
        out[name] = FeatureColumn(ChannelDescriptor.parse(channel), family, int(sub), domain)
    return out


def build_feature_matrix(windows, domain, ecdf_len=feat_stat.ECDF_LEN):
    """Extract one feature domain from every channel of every window.

    Columns are channel-major: all features of the first channel, then the
    next channel, in the channel order of the underlying frames.
    """
    x = windows.values
    t = windows.timestamps
    if domain == STATISTICAL:
        duration = (t[:, -1] - t[:, 0])[:, None]
        layout, feats = feat_stat.statistical_features(x, duration, ecdf_len)
    elif domain == SPATIO_TEMPORAL:
        layout, feats = feat_temporal.spatiotemporal_features(x, t[:, None, :])
    else:
        raise ValueError(f"unknown domain {domain!r}")
    columns = [
        FeatureColumn(chan, fam, sub, domain)
        for chan in windows.frames.channels
        for fam, sub in layout
    ]
    values = feats.reshape(len(windows), -1)
    if not np.all(np.isfinite(values)):
        raise ValueError("feature extraction produced non-finite cells")
    return FeatureMatrix(columns, values, windows.labels, windows.window_ids)


def extract_features(windows, ecdf_len=feat_stat.ECDF_LEN):
    """``(statistical, spatio_temporal)`` matrices for a window set."""
    return (
        build_feature_matrix(windows, STATISTICAL, ecdf_len),
        build_feature_matrix(windows, SPATIO_TEMPORAL),
    )
