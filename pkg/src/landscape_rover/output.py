"""Deterministic CSV / JSON writers for trajectories, spectra and manifests."""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np


def trajectory_header(dim: int) -> list[str]:
    return ["iter", "s", "J", "grad_norm", "rel_distance", "event"] + [f"x{i}" for i in range(dim)]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


class TrajectoryCSV:
    """Append-only trajectory log, flushed after every row.

    Use as a ``sink`` for the rover drivers.
    """

    def __init__(self, path: str, dim: int):
        self.path = path
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(trajectory_header(dim))
        self._fh.flush()

    def __call__(self, record) -> None:
        row = [_fmt(record.iter), _fmt(record.s), _fmt(record.j), _fmt(record.grad_norm),
               _fmt(record.rel_distance), record.event]
        row += [_fmt(v) for v in record.x]
        self._writer.writerow(row)
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trajectory_csv(path: str) -> list[dict]:
    """Rows as dicts with ``iter``, ``J`` and the control vector ``x``."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            xs = sorted((k for k in row if k.startswith("x") and k[1:].isdigit()),
                        key=lambda k: int(k[1:]))
            rows.append({
                "iter": int(row["iter"]),
                "J": float(row["J"]),
                "event": row["event"],
                "x": np.array([float(row[k]) for k in xs]),
            })
    return rows


def write_scan_csv(path: str, scan) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "J", "J_fit"])
        for t, j, f in zip(scan.t, scan.j, scan.fitted(scan.t)):
            w.writerow([_fmt(t), _fmt(j), _fmt(f)])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json_atomic(path: str, obj) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(dumps(obj))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
