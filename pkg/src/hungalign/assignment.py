"""Rectangular linear assignment (Kuhn-Munkres with potentials).

Pairs are returned as 0-based ``(source, target)`` tuples sorted by source
index.  The solver is a pure function of its input and keeps no state.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import perm

import numpy as np

__all__ = [
    "Assignment",
    "assignment_total",
    "brute_force_assignment",
    "check_profit_matrix",
    "solve_max_assignment",
    "solve_min_assignment",
]

Assignment = list[tuple[int, int]]

#: largest min(M, N) the enumeration oracle accepts
BRUTE_FORCE_LIMIT = 8
_MAX_ENUMERATION = 5_000_000


def check_profit_matrix(w) -> np.ndarray:
    """Validate ``w`` as a non-empty finite 2-D matrix, returned as float64."""
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"empty matrix of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or infinite entries")
    return arr


def _min_rows_le_cols(cost: np.ndarray) -> np.ndarray:
    """Shortest augmenting path Hungarian method for ``n <= m``.

    Returns ``col_of_row`` of length n.  Columns are scanned left to right and
    ``argmin`` takes the first minimum, which fixes the tie-breaking.
    """
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    # row_of_col[j] is the 1-based row matched to column j (0 = free); column 0
    # is a virtual column holding the row being inserted
    row_of_col = np.zeros(m + 1, dtype=np.intp)
    way = np.zeros(m + 1, dtype=np.intp)

    for i in range(1, n + 1):
        row_of_col[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_of_col[j0]
            free = ~used[1:]
            reduced = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            candidates = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(candidates)) + 1
            delta = candidates[j1 - 1]
            u[row_of_col[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if row_of_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            row_of_col[j0] = row_of_col[j1]
            j0 = j1

    col_of_row = np.empty(n, dtype=np.intp)
    for j in range(1, m + 1):
        if row_of_col[j]:
            col_of_row[row_of_col[j] - 1] = j - 1
    return col_of_row


def solve_min_assignment(cost) -> Assignment:
    """Minimum-cost assignment of size ``min(M, N)``.

    Tall matrices are transposed internally, so callers never need to
    pre-swap source and target.
    """
    cost = check_profit_matrix(cost)
    if cost.shape[0] <= cost.shape[1]:
        cols = _min_rows_le_cols(cost)
        return [(int(i), int(j)) for i, j in enumerate(cols)]
    rows = _min_rows_le_cols(cost.T)
    return sorted((int(i), int(j)) for j, i in enumerate(rows))


def solve_max_assignment(w) -> Assignment:
    """Maximum-profit injective assignment of size ``min(M, N)``.

    >>> solve_max_assignment([[0.9, 0.1], [0.8, 0.2]])
    [(0, 0), (1, 1)]
    """
    return solve_min_assignment(-check_profit_matrix(w))


def assignment_total(w, pairs: Assignment) -> float:
    """Sum of ``w[g, h]`` over the given pairs."""
    w = np.asarray(w, dtype=np.float64)
    total = 0.0
    for g, h in pairs:
        if not (0 <= g < w.shape[0] and 0 <= h < w.shape[1]):
            raise IndexError(f"pair ({g}, {h}) outside matrix of shape {w.shape}")
        total += w[g, h]
    return float(total)


@lru_cache(maxsize=64)
def _permutations(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n), k)), dtype=np.intp).reshape(-1, k)


def brute_force_assignment(w) -> Assignment:
    """Exhaustive maximum assignment; a test oracle for small matrices."""
    w = check_profit_matrix(w)
    transposed = w.shape[0] > w.shape[1]
    if transposed:
        w = w.T
    k, n = w.shape
    if k > BRUTE_FORCE_LIMIT or perm(n, k) > _MAX_ENUMERATION:
        raise ValueError(
            f"shape {w.shape} too large to enumerate (min side <= {BRUTE_FORCE_LIMIT} "
            f"and at most {_MAX_ENUMERATION} assignments)"
        )
    perms = _permutations(n, k)
    totals = w[np.arange(k), perms].sum(axis=1)
    best = perms[int(np.argmax(totals))]
    if transposed:
        return sorted((int(j), i) for i, j in enumerate(best))
    return [(i, int(j)) for i, j in enumerate(best)]
