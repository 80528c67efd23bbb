"""CSV reading and writing, plus atomic file output.

Dialect: comma separated, one header row, UTF-8, ``.`` as decimal point,
numbers unquoted.  Floats are written with 17 significant digits so that a
write/read round trip is bit exact.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError
from .reduction import Dataset


def fmt(value) -> str:
    return format(float(value), ".17g")


def read_csv(path, target="last"):
    """Load a data split; ``target`` is a column name or ``"last"``.

    Returns the :class:`Dataset` and the feature column names.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    if len(header) < 2:
        raise InvalidInputError(f"{path}: need at least one feature column and a target")
    if target == "last":
        t_idx = len(header) - 1
    elif target in header:
        t_idx = header.index(target)
    else:
        raise InvalidInputError(f"{path}: no column named {target!r}")
    try:
        data = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: non-numeric or ragged data ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InvalidInputError(f"{path}: every row must have {len(header)} fields")
    names = [h for i, h in enumerate(header) if i != t_idx]
    X = np.delete(data, t_idx, axis=1)
    return Dataset(X, data[:, t_idx]), names


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    return str(value)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, data: Dataset, feature_names=None, target="y"):
    names = feature_names or [f"x{j + 1}" for j in range(data.p)]
    if len(names) != data.p:
        raise InvalidInputError("feature_names must have one entry per column")
    rows = ([*x, t] for x, t in zip(data.X, data.y))
    atomic_write(path, csv_text(list(names) + [target], rows))
