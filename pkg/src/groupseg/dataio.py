"""Window CSVs and dataset manifests.

A window CSV is UTF-8, comma-separated, with one header row of variable names
and one row per time step (ascending). A manifest is a JSON file::

    {"windows": ["w000.csv", ...], "variable_names": [...], "T": 96, "D": 9,
     "labels": [...]}            # labels optional

Window paths are resolved relative to the manifest's directory.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "IngestError",
    "Dataset",
    "read_window_csv",
    "write_window_csv",
    "load_manifest",
    "write_dataset",
    "atomic_write_text",
    "format_float",
]


class IngestError(ValueError):
    """Bad input data; the message names the file and, where known, row and column."""


@dataclass(frozen=True, eq=False)
class Dataset:
    windows: np.ndarray  # (N, T, D)
    variable_names: tuple[str, ...]
    labels: np.ndarray | None = None
    source: str = ""

    @property
    def T(self) -> int:
        return self.windows.shape[1]

    @property
    def D(self) -> int:
        return self.windows.shape[2]


def format_float(v: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(v))


def read_window_csv(path) -> tuple[list[str], np.ndarray]:
    """Parse one window CSV; rows and columns in errors are 1-based data positions."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"{path}: file not found")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise IngestError(f"{path}: row {i} has {len(row)} columns, header has {len(header)}")
        for j, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise IngestError(f"{path}: row {i}, column {j}: non-numeric value "
                                  f"{cell!r}") from None
            if not np.isfinite(v):
                raise IngestError(f"{path}: row {i}, column {j}: non-finite value {cell!r}")
            data[i - 1, j - 1] = v
    if data.shape[0] == 0:
        raise IngestError(f"{path}: no data rows")
    return header, data


def write_window_csv(path, window, names) -> None:
    x = np.asarray(window, dtype=float)
    lines = [",".join(names)]
    lines += [",".join(format_float(v) for v in row) for row in x]
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_manifest(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise IngestError(f"{path}: manifest not found")
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise IngestError(f"{path}: invalid JSON: {err}") from None
    for key in ("windows", "variable_names", "T", "D"):
        if key not in meta:
            raise IngestError(f"{path}: missing field {key!r}")
    names = [str(n) for n in meta["variable_names"]]
    T, D = int(meta["T"]), int(meta["D"])
    if len(names) != D:
        raise IngestError(f"{path}: {len(names)} variable names but D={D}")
    if not meta["windows"]:
        raise IngestError(f"{path}: no windows listed")
    windows = []
    for rel in meta["windows"]:
        wpath = path.parent / rel
        header, data = read_window_csv(wpath)
        if data.shape[1] != D:
            raise IngestError(f"{wpath}: {data.shape[1]} columns, manifest says D={D}")
        if data.shape[0] != T:
            raise IngestError(f"{wpath}: {data.shape[0]} rows, manifest says T={T}")
        if header != names:
            raise IngestError(f"{wpath}: header {header} does not match variable_names")
        windows.append(data)
    labels = meta.get("labels")
    if labels is not None:
        labels = np.asarray(labels, dtype=float)
        if labels.shape != (len(windows),):
            raise IngestError(f"{path}: {labels.shape[0]} labels for {len(windows)} windows")
    return Dataset(np.stack(windows), tuple(names), labels, str(path))


def write_dataset(directory, windows, names, stem: str = "w", manifest: str = "manifest.json",
                  labels=None) -> Path:
    """Write one CSV per window plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arr = np.asarray(windows, dtype=float)
    files = []
    for i, w in enumerate(arr):
        name = f"{stem}{i:03d}.csv"
        write_window_csv(directory / name, w, names)
        files.append(name)
    meta = {"windows": files, "variable_names": list(names), "T": int(arr.shape[1]),
            "D": int(arr.shape[2])}
    if labels is not None:
        meta["labels"] = [float(v) for v in labels]
    out = directory / manifest
    atomic_write_text(out, json.dumps(meta, indent=2) + "\n")
    return out


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
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
