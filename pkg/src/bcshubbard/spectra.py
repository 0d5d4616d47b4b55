"""Helpers for comparing and storing complex eigenvalue multisets."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

_DENSE_LIMIT = 2048


def multiset_mismatch(a, b, radius: float = 1e-6) -> float:
    """Largest pairwise distance in a minimum-cost matching of ``a`` onto ``b``.

    Sets larger than ``_DENSE_LIMIT`` are split into clusters of values closer
    than ``radius`` and matched cluster by cluster; when the sets cannot be
    paired within ``radius`` the result is at least ``radius``.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return np.inf
    if a.size == 0:
        return 0.0
    if a.size <= _DENSE_LIMIT:
        cost = np.abs(a[:, None] - b[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max())

    pa = np.column_stack([a.real, a.imag])
    pb = np.column_stack([b.real, b.imag])
    pairs = cKDTree(pa).sparse_distance_matrix(cKDTree(pb), radius, output_type="ndarray")
    hausdorff = max(cKDTree(pb).query(pa)[0].max(), cKDTree(pa).query(pb)[0].max())
    if hausdorff >= radius:
        return float(hausdorff)
    # clusters of near-coincident values are small: match each one densely
    n = a.size
    adj = coo_matrix((np.ones(pairs.size), (pairs["i"], pairs["j"] + n)), shape=(2 * n, 2 * n))
    _, labels = connected_components(adj, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    worst = 0.0
    for members in np.split(order, bounds):
        ia, ib = members[members < n], members[members >= n] - n
        if ia.size != ib.size:
            return float(radius)
        cost = np.abs(a[ia][:, None] - b[ib][None, :])
        rows, cols = linear_sum_assignment(cost)
        worst = max(worst, float(cost[rows, cols].max()))
    return worst


def sort_spectrum(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex).ravel()
    return values[np.lexsort((values.imag, values.real))]


def write_spectrum_csv(path, values, digits: int = 15) -> None:
    """Write eigenvalues as ``re,im`` rows sorted by (re, im)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        for z in sort_spectrum(values):
            w.writerow([f"{z.real:.{digits}g}", f"{z.imag:.{digits}g}"])


def read_spectrum_csv(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
