"""Dataset ingestion, synthesis and the median-heuristic bandwidth."""

from __future__ import annotations

import csv
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .exceptions import DataError, PreconditionError
from .features import Dataset
from .spherical import make_rng

__all__ = [
    "load_csv",
    "save_csv",
    "median_heuristic",
    "synthetic_gaussian",
    "synthetic_sphere",
    "subsample",
]


def load_csv(path, header: bool = False) -> Dataset:
    """Read a numeric CSV (one point per row).

    Errors name the 1-based row and column of the first bad cell. Rows are
    counted in the file, so a header line is row 1.
    """
    rows = []
    width = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        for i, rec in enumerate(csv.reader(fh), start=1):
            if header and i == 1:
                continue
            if not rec or all(not c.strip() for c in rec):
                continue
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise DataError(f"row {i}: expected {width} columns, found {len(rec)}")
            vals = []
            for j, cell in enumerate(rec, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"row {i}, column {j}: not a number: {cell.strip()!r}") from None
                if not np.isfinite(v):
                    raise DataError(f"row {i}, column {j}: non-finite value {cell.strip()!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows))


def save_csv(data: Dataset, path) -> None:
    with open(path, "w") as fh:
        for row in data.rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def median_heuristic(data, max_pairs: Optional[int] = 100_000, seed: int = 0) -> float:
    """Median pairwise Euclidean distance.

    All pairs are used when there are at most ``max_pairs`` of them;
    otherwise ``max_pairs`` pairs ``(i, j), i != j`` are drawn with a seeded
    generator.
    """
    X = data.rows if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, float))
    n = X.shape[0]
    if n < 2:
        raise PreconditionError("median heuristic needs at least two points")
    if max_pairs is None or n * (n - 1) // 2 <= max_pairs:
        dists = pdist(X)
    else:
        rng = make_rng(seed, 0)
        i = rng.integers(0, n, max_pairs)
        j = rng.integers(0, n - 1, max_pairs)
        j[j >= i] += 1
        dists = np.linalg.norm(X[i] - X[j], axis=1)
    sigma = float(np.median(dists))
    if sigma <= 0:
        raise DataError("median pairwise distance is 0; pass an explicit sigma")
    return sigma


def synthetic_gaussian(n: int, d: int, seed: int = 0, stream_id: int = 0) -> Dataset:
    """``n`` i.i.d. standard normal points in ``R^d``."""
    if n < 1 or d < 1:
        raise PreconditionError("need n >= 1 and d >= 1")
    return Dataset(make_rng(seed, stream_id).standard_normal((n, d)))


def synthetic_sphere(n: int, d: int, radius: float, seed: int = 0, stream_id: int = 0) -> Dataset:
    """``n`` uniform points on the sphere of the given radius (diameter ``2 radius``)."""
    if n < 1 or d < 2 or radius <= 0:
        raise PreconditionError("need n >= 1, d >= 2 and radius > 0")
    g = make_rng(seed, stream_id).standard_normal((n, d))
    return Dataset(radius * g / np.linalg.norm(g, axis=1, keepdims=True))


def subsample(data: Dataset, n: Optional[int], seed: int = 0) -> Dataset:
    """Seeded random subset of ``n`` rows (all rows, shuffled, if ``n`` is larger)."""
    if n is None or n >= data.n:
        return data
    idx = make_rng(seed, 1).permutation(data.n)[:n]
    labels = None if data.labels is None else data.labels[idx]
    return Dataset(data.rows[idx], labels)
