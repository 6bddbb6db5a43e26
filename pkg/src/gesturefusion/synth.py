"""Synthetic 5 Hz gesture recordings with planted class structure.

Two generators:

``synth_gestures``
    Each channel is *informative* (class-specific level, sinusoid and drift
    plus per-recording jitter and sample noise), *null* (noise whose class
    means are forced to be identical, so it carries no mean information
    about the label) or pure *noise*.  Roles come from
    :func:`planted_roles`, which depends only on the channel list.

``synth_complementary``
    An 18-class problem split into 6 ordering patterns x 3 distribution
    shapes.  "Order" channels are permutations of the same three values, so
    their statistical features are label-free and only order-aware features
    see the pattern.  "Shape" channels hold skewed value triples in a mostly
    monotone order that hides the shape from difference-based features.
"""

import itertools

import numpy as np

from .ingest import (
    AXES,
    FRAME_PERIOD,
    GESTURES,
    SCALAR,
    ChannelDescriptor,
    FrameSet,
)

DEFAULT_RECORDINGS = (178, 183, 176, 181, 179, 311, 170, 172, 180, 175, 169, 171, 177, 174, 168, 173, 176, 178)
DEFAULT_PROFILE = dict(
    classes=18,
    recordings_per_class=DEFAULT_RECORDINGS,
    frames_per_recording=3,
    channels=64,
    informative_fraction=0.8,
    null_channels=4,
    noise=1.0,
)

_FINGERS = ("thumb", "index", "middle", "ring", "pinky")
_BONES = ("metacarpal", "proximal", "intermediate", "distal")

# (offset range, spread) per measurement, in sensor units
_SCALE = {
    "position": (150.0, 20.0),
    "start_position": (150.0, 20.0),
    "end_position": (200.0, 20.0),
    "velocity": (0.0, 60.0),
    "direction": (0.5, 0.15),
    "normal": (0.5, 0.15),
    "pitch": (0.0, 0.3),
    "yaw": (0.0, 0.3),
    "roll": (0.0, 0.3),
    "angle3d": (1.0, 0.2),
}


def channel_catalog():
    """Raw Leap-Motion-style channels (no derived angles), both hands interleaved."""
    templates = []
    for meas in ("pitch", "yaw", "roll"):
        templates.append(("palm", "", meas, (SCALAR,)))
    for meas in ("position", "velocity", "normal"):
        templates.append(("palm", "", meas, AXES))
    for meas in ("start_position", "end_position", "velocity"):
        templates.append(("arm", "", meas, AXES))
    templates.append(("elbow", "", "position", AXES))
    templates.append(("wrist", "", "position", AXES))
    for finger in _FINGERS:
        for meas in ("direction", "position", "velocity"):
            templates.append(("finger", finger, meas, AXES))
    for finger in _FINGERS:
        for bone in _BONES:
            for meas in ("start_position", "end_position", "direction", "position", "velocity"):
                templates.append(("finger_joint", f"{finger}_{bone}", meas, AXES))
    out = []
    for part, qual, meas, axes in templates:
        for axis in axes:
            for side in ("right", "left"):
                out.append(ChannelDescriptor(side, part, meas, axis, qual))
    return out


def pick_channels(n):
    catalog = channel_catalog()
    if not 1 <= n <= len(catalog):
        raise ValueError(f"channels must be in 1..{len(catalog)}")
    return catalog[:n]


def planted_roles(channels, informative_fraction, null_channels=0):
    """``{stable_name: 'informative' | 'null' | 'noise'}`` for a channel list."""
    n = len(channels)
    if not 0 <= null_channels <= n:
        raise ValueError("null_channels out of range")
    n_inf = int(round(informative_fraction * (n - null_channels)))
    order = np.random.default_rng(n).permutation(n)
    roles = ["noise"] * n
    for i in order[:null_channels]:
        roles[i] = "null"
    for i in order[null_channels : null_channels + n_inf]:
        roles[i] = "informative"
    return {c.stable_name: r for c, r in zip(channels, roles)}


def _class_counts(classes, recordings_per_class):
    if np.ndim(recordings_per_class) == 0:
        counts = [int(recordings_per_class)] * classes
    else:
        counts = [int(c) for c in recordings_per_class]
        if len(counts) != classes:
            raise ValueError("recordings_per_class must list one count per class")
    if classes < 1 or classes > len(GESTURES) or min(counts) < 1:
        raise ValueError("class and recording counts must be >= 1 (at most 18 classes)")
    return counts


def _assemble(channels, labels_per_rec, frames_per_recording, values):
    n_rec = len(labels_per_rec)
    rec_ids = np.repeat([f"r{i:05d}" for i in range(n_rec)], frames_per_recording)
    frame_index = np.tile(np.arange(frames_per_recording), n_rec)
    return FrameSet(
        channels,
        rec_ids.astype(object),
        frame_index,
        frame_index * FRAME_PERIOD,
        values,
        np.repeat(np.array(labels_per_rec, dtype=object), frames_per_recording),
    )


def synth_gestures(
    classes=18,
    recordings_per_class=DEFAULT_RECORDINGS,
    frames_per_recording=3,
    channels=64,
    informative_fraction=0.8,
    seed=1,
    null_channels=4,
    noise=1.0,
):
    """Generate a labelled frame set; identical arguments give identical output.

    ``recordings_per_class`` is one count for every class or a per-class
    list.  ``noise`` scales all within-class variation (phase, jitter and
    sample noise); at 0 every recording of a class is identical.
    """
    counts = _class_counts(classes, recordings_per_class)
    if frames_per_recording < 1:
        raise ValueError("frames_per_recording must be >= 1")
    chans = pick_channels(channels) if np.ndim(channels) == 0 else list(channels)
    roles = planted_roles(chans, informative_fraction, null_channels)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 0x5E7])))

    C = len(chans)
    offset = np.array([_SCALE[c.measurement][0] for c in chans])
    spread = np.array([_SCALE[c.measurement][1] for c in chans])
    offset = offset * rng.uniform(0.8, 1.2, C)

    level = rng.normal(0.0, 1.0, (classes, C)) * spread
    amp = rng.uniform(0.2, 0.8, (classes, C)) * spread
    freq = rng.uniform(0.2, 1.2, (classes, C))
    drift = rng.normal(0.0, 0.5, (classes, C)) * spread

    labels = [GESTURES[j] for j, n in enumerate(counts) for _ in range(n)]
    class_of = np.repeat(np.arange(classes), counts)
    n_rec = len(class_of)
    t = np.arange(frames_per_recording) * FRAME_PERIOD

    phase = noise * rng.uniform(0.0, 2 * np.pi, (n_rec, 1, C))
    jitter = noise * 0.3 * rng.normal(size=(n_rec, 1, C)) * spread
    eps = noise * 0.2 * rng.normal(size=(n_rec, frames_per_recording, C)) * spread
    base = rng.normal(size=(n_rec, frames_per_recording, C)) * spread

    tt = t[None, :, None]
    lv, am, fr, dr = level[class_of][:, None, :], amp[class_of][:, None, :], freq[class_of][:, None, :], drift[class_of][:, None, :]
    signal = lv + am * np.sin(2 * np.pi * fr * tt + phase) + dr * tt + jitter + eps

    role = np.array([roles[c.stable_name] for c in chans])
    values = np.where(role == "informative", signal, base)

    # null channels: remove every class mean, so between-class spread is zero
    for c in np.flatnonzero(role == "null"):
        block = values[:, :, c]
        for j in range(classes):
            rows = class_of == j
            block[rows] -= block[rows].mean()
    values = values + offset
    return _assemble(chans, labels, frames_per_recording, values.reshape(-1, C))


def synth_complementary(recordings_per_class=100, order_channels=6, shape_channels=6, seed=1):
    """Three-frame recordings whose class needs both order and shape information.

    Class ``3 * a + b`` combines ordering pattern ``a`` (one of the 6
    permutations of three distinct values) with shape ``b`` (value triples
    ``(0,0,1)``, ``(0,1,1)``, ``(0,.5,1)``).  Shape channels share one
    arrangement per recording: ascending (40%), descending (40%) or a
    non-monotone arrangement (20%).
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 0xC0])))
    patterns = list(itertools.permutations((-1.0, 0.0, 1.0)))
    shapes = [(0.0, 0.0, 1.0), (0.0, 1.0, 1.0), (0.0, 0.5, 1.0)]
    wavy = [sorted({p for p in itertools.permutations(s) if _turning(p)}) for s in shapes]

    chans = pick_channels(order_channels + shape_channels)
    n_rec = 18 * recordings_per_class
    cls = np.repeat(np.arange(18), recordings_per_class)
    a_of, b_of = cls // 3, cls % 3
    values = np.empty((n_rec, 3, len(chans)))
    for r in range(n_rec):
        arrangement = rng.choice(3, p=(0.4, 0.4, 0.2))
        for c in range(len(chans)):
            level = rng.uniform(50.0, 150.0)
            scale = rng.uniform(0.5, 1.5)
            if c < order_channels:
                triple = patterns[a_of[r]]
            else:
                shape = shapes[b_of[r]]
                if arrangement == 0:
                    triple = shape
                elif arrangement == 1:
                    triple = shape[::-1]
                else:
                    options = wavy[b_of[r]]
                    triple = options[rng.integers(len(options))]
            values[r, :, c] = level + scale * np.asarray(triple)
    labels = [GESTURES[j] for j in cls]
    return _assemble(chans, labels, 3, values.reshape(-1, len(chans)))


def _turning(p):
    return (p[1] > p[0] and p[1] > p[2]) or (p[1] < p[0] and p[1] < p[2])
