"""Frame-stream parsing, derived 3D angles and sliding windows.

A recording is a run of frames sampled at 5 Hz that all carry the same
gesture label.  Frames are held column-wise in a :class:`FrameSet` (one
float64 matrix of channel values plus per-row metadata); individual
:class:`FrameRecord` objects are materialised on indexing.
"""

import csv
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .csvio import fmt, open_text
from .errors import (
    DegenerateVectorError,
    IntegrityError,
    LabelError,
    ParseError,
    SchemaError,
)

log = logging.getLogger(__name__)

FRAME_RATE_HZ = 5.0
FRAME_PERIOD = 1.0 / FRAME_RATE_HZ
TIME_TOLERANCE = 1e-6

GESTURES = (
    "HELLO",
    "YOU",
    "ME",
    "NAME",
    "SORRY",
    "GOOD",
    "BAD",
    "EXCUSE_ME",
    "THANKS",
    "TIME",
    "AIRPORT",
    "BUS",
    "CAR",
    "AEROPLANE",
    "TAXI",
    "RESTAURANT",
    "DRINK",
    "FOOD",
)

SIDES = ("left", "right")
BODY_PARTS = ("arm", "elbow", "wrist", "palm", "finger", "finger_joint")
VECTOR_MEASUREMENTS = (
    "position",
    "start_position",
    "end_position",
    "velocity",
    "direction",
    "normal",
)
SCALAR_MEASUREMENTS = ("pitch", "yaw", "roll", "angle3d")
MEASUREMENTS = VECTOR_MEASUREMENTS + SCALAR_MEASUREMENTS
AXES = ("x", "y", "z")
SCALAR = "scalar"

META_COLUMNS = ("recording_id", "frame_index", "timestamp", "label")


def ordered_classes(labels):
    """Class vocabulary of ``labels``: gesture order first, unknown names sorted after."""
    present = set(np.asarray(labels, dtype=object).tolist())
    known = [g for g in GESTURES if g in present]
    extra = sorted(present.difference(GESTURES))
    return tuple(known + extra)


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite vector component in {self!r}")

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def dot(self, other):
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self):
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


def angle3d(a, b):
    """Angle in radians between two 3D vectors.

    The cosine is clamped into [-1, 1] before ``arccos`` because rounding in
    the dot product can push it a few ulps outside the valid range.
    """
    a = a if isinstance(a, Vec3) else Vec3(*map(float, a))
    b = b if isinstance(b, Vec3) else Vec3(*map(float, b))
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError(f"zero-magnitude vector in angle3d({tuple(a)}, {tuple(b)})")
    cos = a.dot(b) / (na * nb)
    return math.acos(min(1.0, max(-1.0, cos)))


def angle3d_many(a, b):
    """Row-wise :func:`angle3d` over two ``(..., 3)`` arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.sqrt(np.sum(a * a, axis=-1))
    nb = np.sqrt(np.sum(b * b, axis=-1))
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise DegenerateVectorError("zero-magnitude vector in angle3d")
    cos = np.sum(a * b, axis=-1) / (na * nb)
    return np.arccos(np.clip(cos, -1.0, 1.0))


@dataclass(frozen=True, order=True)
class ChannelDescriptor:
    """One scalar sensor stream, e.g. ``right_palm_velocity_z``.

    ``qualifier`` distinguishes repeated parts such as individual fingers or
    bones (``right_finger_index_velocity_x``); it is empty for unique parts.
    """

    side: str
    body_part: str
    measurement: str
    axis: str = SCALAR
    qualifier: str = ""

    def __post_init__(self):
        if self.side not in SIDES:
            raise SchemaError(f"unknown side {self.side!r}")
        if self.body_part not in BODY_PARTS:
            raise SchemaError(f"unknown body part {self.body_part!r}")
        if self.measurement not in MEASUREMENTS:
            raise SchemaError(f"unknown measurement {self.measurement!r}")
        if self.measurement in SCALAR_MEASUREMENTS and self.axis != SCALAR:
            raise SchemaError(f"{self.measurement} must be scalar, got axis {self.axis!r}")
        if self.measurement in VECTOR_MEASUREMENTS and self.axis not in AXES:
            raise SchemaError(f"{self.measurement} needs an x/y/z axis")

    @property
    def stable_name(self):
        parts = [self.side, self.body_part]
        if self.qualifier:
            parts.append(self.qualifier)
        parts.append(self.measurement)
        if self.axis != SCALAR:
            parts.append(self.axis)
        return "_".join(parts)

    def __str__(self):
        return self.stable_name

    @classmethod
    def parse(cls, name):
        """Bind ``<side>_<body_part>[_<qualifier>]_<measurement>[_<axis>]``."""
        tokens = name.split("_")
        if len(tokens) < 3 or any(not t for t in tokens):
            raise SchemaError(f"unknown column {name!r}")
        side, rest = tokens[0], tokens[1:]
        axis = SCALAR
        if rest[-1] in AXES:
            axis, rest = rest[-1], rest[:-1]
        if len(rest) >= 3 and "_".join(rest[-2:]) in MEASUREMENTS:
            measurement, rest = "_".join(rest[-2:]), rest[:-2]
        elif len(rest) >= 2 and rest[-1] in MEASUREMENTS:
            measurement, rest = rest[-1], rest[:-1]
        else:
            raise SchemaError(f"unknown column {name!r}: no measurement")
        if rest[:2] == ["finger", "joint"]:
            body_part, rest = "finger_joint", rest[2:]
        else:
            body_part, rest = rest[0], rest[1:]
        try:
            desc = cls(side, body_part, measurement, axis, "_".join(rest))
        except SchemaError as exc:
            raise SchemaError(f"unknown column {name!r}: {exc}") from None
        if desc.stable_name != name:
            raise SchemaError(f"unknown column {name!r}")
        return desc


@dataclass(frozen=True)
class FrameRecord:
    recording_id: str
    frame_index: int
    timestamp: float
    values: "MappingProxyType[ChannelDescriptor, float]"
    label: str


@dataclass(frozen=True)
class GestureWindow:
    frames: tuple
    label: str
    window_id: str


class FrameSet(Sequence):
    """Column-wise store of frames, grouped by recording in input order."""

    def __init__(self, channels, recording_ids, frame_index, timestamps, values, labels):
        self.channels = tuple(channels)
        self.recording_ids = np.asarray(recording_ids, dtype=object)
        self.frame_index = np.asarray(frame_index, dtype=np.int64)
        self.timestamps = np.asarray(timestamps, dtype=float)
        self.values = np.array(values, dtype=float).reshape(len(self.recording_ids), len(self.channels))
        self.labels = np.asarray(labels, dtype=object)
        n = len(self.recording_ids)
        if not (len(self.frame_index) == len(self.timestamps) == len(self.labels) == n):
            raise IntegrityError("frame metadata columns differ in length")
        names = [c.stable_name for c in self.channels]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate channel names")
        self.values.flags.writeable = False

    def __len__(self):
        return len(self.recording_ids)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        row = self.values[i]
        return FrameRecord(
            recording_id=self.recording_ids[i],
            frame_index=int(self.frame_index[i]),
            timestamp=float(self.timestamps[i]),
            values=MappingProxyType(dict(zip(self.channels, row.tolist()))),
            label=self.labels[i],
        )

    @property
    def channel_names(self):
        return [c.stable_name for c in self.channels]

    def channel_index(self, channel):
        name = channel if isinstance(channel, str) else channel.stable_name
        return self.channel_names.index(name)

    def recordings(self):
        """``(recording_id, start, stop)`` row spans, one per recording."""
        return _spans(self.recording_ids)

    def select_channels(self, channels):
        idx = [self.channel_index(c) for c in channels]
        return FrameSet(
            [self.channels[i] for i in idx],
            self.recording_ids,
            self.frame_index,
            self.timestamps,
            self.values[:, idx],
            self.labels,
        )

    def with_channels(self, channels, values):
        """A copy with extra channel columns appended."""
        values = np.asarray(values, dtype=float).reshape(len(self), len(channels))
        return FrameSet(
            self.channels + tuple(channels),
            self.recording_ids,
            self.frame_index,
            self.timestamps,
            np.hstack([self.values, values]),
            self.labels,
        )

    def __eq__(self, other):
        if not isinstance(other, FrameSet):
            return NotImplemented
        return (
            self.channels == other.channels
            and np.array_equal(self.recording_ids, other.recording_ids)
            and np.array_equal(self.frame_index, other.frame_index)
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None

    @classmethod
    def from_records(cls, records):
        records = list(records)
        if not records:
            raise ParseError("no frames")
        channels = tuple(records[0].values)
        return cls(
            channels,
            [r.recording_id for r in records],
            [r.frame_index for r in records],
            [r.timestamp for r in records],
            [[r.values[c] for c in channels] for r in records],
            [r.label for r in records],
        )


def _locate_bad_cell(rows, header_cols):
    for r, row in enumerate(rows):
        for c, text in enumerate(row):
            try:
                v = float(text)
            except ValueError:
                raise ParseError(
                    f"row {r + 2}, column {header_cols[c]!r}: not a number: {text!r}",
                    row=r + 2,
                    column=header_cols[c],
                ) from None
            if not math.isfinite(v):
                raise ParseError(
                    f"row {r + 2}, column {header_cols[c]!r}: non-finite value {text!r}",
                    row=r + 2,
                    column=header_cols[c],
                )
    raise ParseError("unreadable numeric block")  # pragma: no cover


def parse_frames(source, vocabulary=GESTURES):
    """Read a frame CSV into a :class:`FrameSet`.

    ``source`` may be a path, raw bytes, or an open file.  Required columns
    are ``recording_id`` and ``label``; ``frame_index`` and ``timestamp`` are
    optional (derived from row order at 5 Hz when absent); every other column
    must be a channel name.  Pass ``vocabulary=None`` to accept any label.
    """
    with open_text(source) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [row for row in reader if row]
    if not header:
        raise ParseError("no frames: empty input")
    if len(set(header)) != len(header):
        dup = sorted({h for h in header if header.count(h) > 1})
        raise SchemaError(f"duplicate column(s): {', '.join(dup)}")
    for required in ("recording_id", "label"):
        if required not in header:
            raise SchemaError(f"missing required column {required!r}")
    chan_cols = [i for i, h in enumerate(header) if h not in META_COLUMNS]
    channels = [ChannelDescriptor.parse(header[i]) for i in chan_cols]
    if not rows:
        raise ParseError("no frames: header only")

    width = len(header)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row {r + 2}: expected {width} cells, got {len(row)}", row=r + 2)

    col = {h: i for i, h in enumerate(header)}
    rec_ids = [row[col["recording_id"]] for row in rows]
    labels = [row[col["label"]] for row in rows]
    if vocabulary is not None:
        allowed = set(vocabulary)
        for r, lab in enumerate(labels):
            if lab not in allowed:
                raise LabelError(f"row {r + 2}: label {lab!r} is not in the gesture vocabulary")

    cells = [[row[i] for i in chan_cols] for row in rows]
    try:
        values = np.array(cells, dtype=float).reshape(len(rows), len(chan_cols))
    except ValueError:
        _locate_bad_cell(cells, [header[i] for i in chan_cols])
    if not np.all(np.isfinite(values)):
        _locate_bad_cell(cells, [header[i] for i in chan_cols])

    def numeric_meta(name, kind):
        out = []
        for r, row in enumerate(rows):
            text = row[col[name]]
            try:
                out.append(kind(text))
            except ValueError:
                raise ParseError(
                    f"row {r + 2}, column {name!r}: not a number: {text!r}", row=r + 2, column=name
                ) from None
        return out

    frame_index = numeric_meta("frame_index", int) if "frame_index" in col else None
    timestamps = numeric_meta("timestamp", float) if "timestamp" in col else None

    # stable regroup: recordings in order of first appearance
    first_seen = {}
    for rid in rec_ids:
        first_seen.setdefault(rid, len(first_seen))
    order = np.argsort([first_seen[rid] for rid in rec_ids], kind="stable")

    rec_ids = np.array(rec_ids, dtype=object)[order]
    labels = np.array(labels, dtype=object)[order]
    values = values[order]
    if frame_index is None:
        frame_index = np.zeros(len(rows), dtype=np.int64)
        for rid, start, stop in _spans(rec_ids):
            frame_index[start:stop] = np.arange(stop - start)
    else:
        frame_index = np.asarray(frame_index, dtype=np.int64)[order]
    if timestamps is None:
        timestamps = frame_index * FRAME_PERIOD
    else:
        timestamps = np.asarray(timestamps, dtype=float)[order]

    frames = FrameSet(channels, rec_ids, frame_index, timestamps, values, labels)
    validate_frames(frames)
    return frames


def _spans(rec_ids):
    spans, start, n = [], 0, len(rec_ids)
    for i in range(1, n + 1):
        if i == n or rec_ids[i] != rec_ids[start]:
            spans.append((rec_ids[start], start, i))
            start = i
    return spans


def validate_frames(frames):
    """Check timing and labelling invariants; raise :class:`IntegrityError`."""
    if np.any(frames.frame_index < 0):
        raise IntegrityError("negative frame_index")
    seen = set()
    for rid, start, stop in frames.recordings():
        if rid in seen:
            raise IntegrityError(f"recording {rid!r} is not contiguous")
        seen.add(rid)
        labs = frames.labels[start:stop]
        if np.any(labs != labs[0]):
            raise IntegrityError(f"recording {rid!r} mixes labels {sorted(set(labs))}")
        if stop - start > 1:
            if np.any(np.diff(frames.frame_index[start:stop]) != 1):
                raise IntegrityError(f"recording {rid!r}: frame_index values are not consecutive")
            dt = np.diff(frames.timestamps[start:stop])
            if np.any(np.abs(dt - FRAME_PERIOD) > TIME_TOLERANCE):
                raise IntegrityError(f"recording {rid!r}: frames are not {FRAME_PERIOD} s apart")


def write_frames(frames, dest):
    """Write frames as CSV (17 significant digits, so parsing is lossless)."""
    header = list(META_COLUMNS) + frames.channel_names
    with open_text(dest, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(frames)):
            writer.writerow(
                [
                    frames.recording_ids[i],
                    int(frames.frame_index[i]),
                    fmt(frames.timestamps[i]),
                    frames.labels[i],
                ]
                + [fmt(v) for v in frames.values[i].tolist()]
            )


def add_angle_channels(frames):
    """Append ``angle3d`` channels for every part that records start and end positions.

    Parts that already carry an ``angle3d`` channel are left untouched.
    """
    names = set(frames.channel_names)
    new_channels, columns = [], []
    groups = sorted({(c.side, c.body_part, c.qualifier) for c in frames.channels})
    for side, part, qual in groups:
        angle = ChannelDescriptor(side, part, "angle3d", SCALAR, qual)
        if angle.stable_name in names:
            continue
        ends = []
        for meas in ("start_position", "end_position"):
            axes = [ChannelDescriptor(side, part, meas, ax, qual).stable_name for ax in AXES]
            if not all(a in names for a in axes):
                break
            ends.append(frames.values[:, [frames.channel_index(a) for a in axes]])
        else:
            new_channels.append(angle)
            columns.append(angle3d_many(ends[0], ends[1]))
    if not new_channels:
        return frames
    log.info("derived %d angle3d channels", len(new_channels))
    return frames.with_channels(new_channels, np.column_stack(columns))


class WindowSet(Sequence):
    """Fixed-length windows over a :class:`FrameSet`, stored as row offsets."""

    def __init__(self, frames, starts, length):
        self.frames = frames
        self.starts = np.asarray(starts, dtype=np.int64)
        self.length = int(length)

    def __len__(self):
        return len(self.starts)

    @property
    def _rows(self):
        return self.starts[:, None] + np.arange(self.length)[None, :]

    @property
    def values(self):
        """Channel samples shaped ``(windows, channels, length)``."""
        return np.ascontiguousarray(self.frames.values[self._rows].transpose(0, 2, 1))

    @property
    def timestamps(self):
        return self.frames.timestamps[self._rows]

    @property
    def labels(self):
        return self.frames.labels[self.starts]

    @property
    def window_ids(self):
        rec = self.frames.recording_ids[self.starts]
        fi = self.frames.frame_index[self.starts]
        return np.array([f"{r}:{i}" for r, i in zip(rec, fi)], dtype=object)

    def __getitem__(self, i):
        start = int(self.starts[i])
        frames = tuple(self.frames[j] for j in range(start, start + self.length))
        return GestureWindow(frames=frames, label=frames[0].label, window_id=self.window_ids[i])


def windowize(frames, length=3, stride=1):
    """Sliding windows that never cross a recording boundary.

    A recording of ``n`` frames yields ``max(0, (n - length) // stride + 1)``
    windows; a trailing run shorter than ``length`` is dropped.
    """
    if length < 2:
        raise ValueError("window length must be at least 2")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    starts = []
    for rid, start, stop in frames.recordings():
        labs = frames.labels[start:stop]
        if np.any(labs != labs[0]):
            raise IntegrityError(f"recording {rid!r} mixes labels")
        starts.extend(range(start, stop - length + 1, stride))
    return WindowSet(frames, starts, length)
