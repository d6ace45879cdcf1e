"""Plain-text matrix I/O: full-precision CSV and a JSON wrapper that carries
block sizes alongside the matrix."""

from __future__ import annotations

import json

import numpy as np


def save_matrix_csv(path, matrix) -> None:
    """Write a matrix as CSV, one row per line, %.17g precision."""
    arr = np.atleast_2d(np.asarray(matrix, dtype=float))
    np.savetxt(path, arr, fmt="%.17g", delimiter=",")


def load_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def save_block_matrix_json(path, matrix, block_sizes) -> None:
    """Write a matrix plus its block sizes as
    {"rows": .., "cols": .., "block_sizes": [..], "data": [row-major floats]}."""
    arr = np.atleast_2d(np.asarray(matrix, dtype=float))
    payload = {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "block_sizes": [int(s) for s in block_sizes],
        "data": [float(v) for v in arr.ravel(order="C")],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_block_matrix_json(path) -> tuple[np.ndarray, tuple[int, ...]]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = int(payload["rows"])
    cols = int(payload["cols"])
    sizes = tuple(int(s) for s in payload["block_sizes"])
    data = np.asarray(payload["data"], dtype=float)
    if data.size != rows * cols:
        raise ValueError(
            f"data length {data.size} does not match rows*cols = {rows * cols}"
        )
    if sum(sizes) != cols:
        raise ValueError(f"block sizes sum to {sum(sizes)}, expected {cols}")
    return data.reshape(rows, cols), sizes
