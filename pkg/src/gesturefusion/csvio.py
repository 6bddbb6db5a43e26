"""Small helpers shared by every CSV reader and writer in the package."""

import csv
import io
import math
import os
from contextlib import contextmanager
from pathlib import Path


def fmt(value):
    """Decimal text with 17 significant digits (round-trips any float64)."""
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "%.17g" % value


@contextmanager
def open_text(source, mode="r"):
    """Yield a text handle for a path, raw bytes, or an open (text or binary) file."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, mode, newline="", encoding="utf-8") as fh:
            yield fh
    elif isinstance(source, (bytes, bytearray)):
        yield io.StringIO(bytes(source).decode("utf-8"), newline="")
    elif isinstance(source, io.TextIOBase):
        yield source
    else:
        wrapper = io.TextIOWrapper(source, encoding="utf-8", newline="")
        try:
            yield wrapper
        finally:
            wrapper.flush()
            wrapper.detach()


def write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def read_rows(path):
    """Return (header, rows) for a CSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return [], []
        return header, list(reader)
