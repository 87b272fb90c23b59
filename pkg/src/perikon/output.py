"""Writers for VTK legacy point clouds, CSV time series and run summaries."""

from __future__ import annotations

import csv
import json
import math
import os
import queue
import threading

import numpy as np

from .errors import PerikonError


class OutputError(PerikonError, OSError):
    """A result file could not be written."""


def ensure_dir(path) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise OutputError(f"output directory {path} is not writable")
    return str(path)


def _open(path, mode="w"):
    try:
        return open(path, mode, encoding="ascii" if "b" not in mode else None, newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None


def _fmt(x) -> str:
    return repr(float(x))


def write_vtk(path, points, point_data: dict, title: str = "perikon frame"):
    """Legacy ASCII VTK POLYDATA with one vertex per point.

    ``point_data`` maps names to arrays of shape (N,) (scalars) or (N, 3)
    (vectors). Integer arrays are written as ``int`` scalars.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    with _open(path) as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title.replace("\n", " ")[:255] + "\n")
        fh.write("ASCII\nDATASET POLYDATA\n")
        fh.write(f"POINTS {n} double\n")
        for p in points:
            fh.write(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
        fh.write(f"VERTICES {n} {2 * n}\n")
        for i in range(n):
            fh.write(f"1 {i}\n")
        if not point_data:
            return
        fh.write(f"POINT_DATA {n}\n")
        for name, values in point_data.items():
            a = np.asarray(values)
            if len(a) != n:
                raise ValueError(f"field {name!r} has {len(a)} entries for {n} points")
            if a.ndim == 2 and a.shape[1] == 3:
                fh.write(f"VECTORS {name} double\n")
                for row in a:
                    fh.write(f"{_fmt(row[0])} {_fmt(row[1])} {_fmt(row[2])}\n")
            elif np.issubdtype(a.dtype, np.integer):
                fh.write(f"SCALARS {name} int 1\nLOOKUP_TABLE default\n")
                fh.write("\n".join(str(int(v)) for v in a) + "\n")
            else:
                fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                fh.write("\n".join(_fmt(v) for v in a) + "\n")


def write_csv(path, header, rows):
    """RFC-4180 CSV (CRLF line ends); floats use ``repr`` so values round-trip exactly."""
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


class CsvLog:
    """Incrementally written CSV time series."""

    def __init__(self, path, header):
        self.path = path
        self._fh = _open(path)
        self._w = csv.writer(self._fh, lineterminator="\r\n")
        self._w.writerow(header)

    def write(self, row):
        self._w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def write_summary(path, summary: dict):
    """Metrics summary as indented JSON."""
    with _open(path) as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


class FrameWriter:
    """Writes VTK frames on a background thread through a bounded queue.

    Frames are written in submission order; errors surface on ``close``.
    """

    def __init__(self, directory, prefix="frame", maxsize=2):
        self.directory = ensure_dir(directory)
        self.prefix = prefix
        self.count = 0
        self.paths = []
        self._queue = queue.Queue(maxsize=maxsize)
        self._error = None
        self._thread = threading.Thread(target=self._work, daemon=True)
        self._thread.start()

    def _work(self):
        while True:
            item = self._queue.get()
            if item is None:
                return
            path, points, data, title = item
            try:
                if self._error is None:
                    write_vtk(path, points, data, title)
            except Exception as exc:
                self._error = exc

    def submit(self, points, data: dict, title="perikon frame") -> str:
        if self._error is not None:
            raise self._error
        path = os.path.join(self.directory, f"{self.prefix}_{self.count:05d}.vtk")
        self.count += 1
        self.paths.append(path)
        self._queue.put((path, np.array(points), {k: np.array(v) for k, v in data.items()}, title))
        return path

    def close(self):
        self._queue.put(None)
        self._thread.join()
        if self._error is not None:
            raise self._error
