"""Majorization between real vectors of possibly different lengths.

Partial sums are compared up to ``min(len(x), len(y))``; majorization adds
equality of the full totals. All comparisons carry an absolute tolerance.
"""
from __future__ import annotations

import numpy as np

MAJ_TOL = 1e-9


def sort_down(x) -> np.ndarray:
    """Entries of ``x`` in non-increasing order."""
    return -np.sort(-np.asarray(x, dtype=float))


def partial_sum_gaps(x, y) -> np.ndarray:
    """``cumsum(y_down) - cumsum(x_down)`` over the common length."""
    m = min(len(x), len(y))
    return np.cumsum(sort_down(y)[:m]) - np.cumsum(sort_down(x)[:m])


def first_failure(x, y, tol: float = MAJ_TOL) -> int | None:
    """Index ``j`` (1-based) of the first partial sum where ``x`` exceeds ``y``."""
    gaps = partial_sum_gaps(x, y)
    bad = np.flatnonzero(gaps < -tol)
    return int(bad[0]) + 1 if bad.size else None


def submajorizes_weak(x, y, tol: float = MAJ_TOL) -> bool:
    """True iff ``x`` is weakly submajorized by ``y``."""
    return first_failure(x, y, tol) is None


def majorizes(x, y, tol: float = MAJ_TOL) -> bool:
    """True iff ``x`` is majorized by ``y`` (x ≺ y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if abs(x.sum() - y.sum()) > tol:
        return False
    return submajorizes_weak(x, y, tol)


def strictly_majorizes(x, y, tol: float = MAJ_TOL) -> bool:
    """x ≺ y with at least one partial-sum gap larger than ``tol``."""
    return majorizes(x, y, tol) and bool(np.any(partial_sum_gaps(x, y) > tol))
