"""On-disk artifacts: diagnostics CSV, report JSON, binary checkpoints, locks.

Checkpoint layout: the magic bytes ``PLSIM1``, a little-endian uint32
header length, a UTF-8 JSON header (format version, producing config hash,
time, grid geometry), then the payload as little-endian float64: one
(re, im) pair per grid point for the condensate, followed by one float per
point for the reservoir when present.

All writers are deterministic: identical inputs produce byte-identical
files (floats are serialized with shortest round-trip repr).
"""

from __future__ import annotations

import json
import os
from contextlib import contextmanager

import numpy as np

from .diagnostics import DiagnosticsSeries
from .grid import Field, make_grid

__all__ = [
    "CHECKPOINT_MAGIC",
    "CheckpointError",
    "write_checkpoint",
    "read_checkpoint",
    "write_diagnostics_csv",
    "read_diagnostics_csv",
    "write_json",
    "output_lock",
]

CHECKPOINT_MAGIC = b"PLSIM1"
CHECKPOINT_VERSION = 1

_CSV_COLUMNS = ("t", "mass", "l4_fourth", "n_integral", "n_sq_integral", "n_min")


class CheckpointError(ValueError):
    pass


def write_checkpoint(path, u: Field, n: Field | None, time: float, config_hash: str) -> None:
    header = {
        "format_version": CHECKPOINT_VERSION,
        "config_hash": config_hash,
        "time": time,
        "n_points": u.grid.n_points,
        "length": u.grid.length,
        "has_reservoir": n is not None,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = np.empty(2 * u.grid.n_points + (u.grid.n_points if n is not None else 0))
    payload[0 : 2 * u.grid.n_points : 2] = u.values.real
    payload[1 : 2 * u.grid.n_points : 2] = u.values.imag
    if n is not None:
        if n.grid != u.grid:
            raise ValueError("u and n must share a grid")
        payload[2 * u.grid.n_points :] = n.values.real
    with open(path, "wb") as handle:
        handle.write(CHECKPOINT_MAGIC)
        handle.write(np.array(len(header_bytes), dtype="<u4").tobytes())
        handle.write(header_bytes)
        handle.write(payload.astype("<f8").tobytes())


def read_checkpoint(path) -> tuple[Field, Field | None, dict]:
    with open(path, "rb") as handle:
        magic = handle.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}")
        (header_len,) = np.frombuffer(handle.read(4), dtype="<u4")
        try:
            header = json.loads(handle.read(int(header_len)).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as err:
            raise CheckpointError(f"{path}: corrupt header ({err})") from None
        if header.get("format_version") != CHECKPOINT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {header.get('format_version')}")
        n_points = header["n_points"]
        expected = 2 * n_points + (n_points if header["has_reservoir"] else 0)
        payload = np.frombuffer(handle.read(), dtype="<f8")
        if payload.size != expected:
            raise CheckpointError(
                f"{path}: payload length {payload.size} does not match header ({expected})"
            )
    grid = make_grid(n_points, header["length"])
    u = Field(grid, payload[0 : 2 * n_points : 2] + 1j * payload[1 : 2 * n_points : 2])
    n = None
    if header["has_reservoir"]:
        n = Field(grid, payload[2 * n_points :].astype(complex))
    return u, n, header


def write_diagnostics_csv(path, d: DiagnosticsSeries) -> None:
    columns = _CSV_COLUMNS[:3] + (_CSV_COLUMNS[3:] if d.has_reservoir else ())
    series = [d.times, d.mass, d.l4_fourth]
    if d.has_reservoir:
        series += [d.n_integral, d.n_sq_integral, d.n_min]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(columns) + "\n")
        for row in zip(*series):
            handle.write(",".join(repr(float(value)) for value in row) + "\n")


def read_diagnostics_csv(path) -> DiagnosticsSeries:
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
        rows = [line.strip().split(",") for line in handle if line.strip()]
    if header[:3] != list(_CSV_COLUMNS[:3]):
        raise ValueError(f"{path}: unexpected columns {header}")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    kwargs = {}
    if len(header) > 3:
        if header != list(_CSV_COLUMNS):
            raise ValueError(f"{path}: unexpected columns {header}")
        kwargs = {
            "n_integral": data[:, 3],
            "n_sq_integral": data[:, 4],
            "n_min": data[:, 5],
        }
    return DiagnosticsSeries(times=data[:, 0], mass=data[:, 1], l4_fourth=data[:, 2], **kwargs)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(obj, handle, indent=2, sort_keys=True)
        handle.write("\n")


@contextmanager
def output_lock(directory):
    """Exclusive advisory lock on an output directory (single writer)."""
    os.makedirs(directory, exist_ok=True)
    lock_path = os.path.join(directory, ".plsim.lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise RuntimeError(
            f"output directory {directory} is locked by another run "
            f"(remove {lock_path} if stale)"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        try:
            os.remove(lock_path)
        except FileNotFoundError:
            pass
