"""Reading and writing matrices, vectors and reports."""

import json
from pathlib import Path

import numpy as np


def read_matrix(path):
    """Load a header-free numeric CSV or a JSON nested array as a 2-D float array."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            obj = json.load(fh)
        if isinstance(obj, dict):
            for key in ("matrix", "data", "Sigma", "sigma"):
                if key in obj:
                    obj = obj[key]
                    break
        arr = np.asarray(obj, dtype=float)
    else:
        try:
            arr = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
        except ValueError as exc:
            raise ValueError(f"malformed CSV {path}: {exc}") from None
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{path}: expected a non-empty 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{path}: non-finite entries")
    return arr


def write_matrix(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path, "w") as fh:
            json.dump(M.tolist(), fh)
    else:
        np.savetxt(path, M, delimiter=",", fmt="%.17g")


def read_vector(path):
    """Load a vector from CSV (one row or one column) or JSON (``[...]`` or ``{"mu0": [...]}``)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            obj = json.load(fh)
        if isinstance(obj, dict):
            obj = obj["mu0"]
        return np.asarray(obj, dtype=float).ravel()
    return read_matrix(path).ravel()


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
