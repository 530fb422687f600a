"""Exact nearest-neighbor queries between point sets.

Small inputs use a dense distance matrix; larger ones a k-d tree. Either way
ties go to the lowest index in the reference set and the returned squared
distances are recomputed with :func:`squared_distances`, so both paths give
bit-identical results.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

BRUTE_FORCE_MAX = 64
_TREE_K = 4


def squared_distances(a, b):
    """Row-wise ``|a_i - b_i|^2`` summed as ``dx*dx + dy*dy + dz*dz``."""
    d = a - b
    return d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2]


def _brute(queries, ref):
    d2 = squared_distances(queries[:, None, :], ref[None, :, :])
    idx = np.argmin(d2, axis=1)
    return idx


def nearest(queries, ref, tree=None):
    """Index of and squared distance to the nearest ``ref`` point for each query."""
    queries = np.asarray(queries, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if len(ref) <= BRUTE_FORCE_MAX and len(queries) <= BRUTE_FORCE_MAX:
        idx = _brute(queries, ref)
    else:
        idx = _tree_nearest(queries, ref, tree)
    return idx, squared_distances(queries, ref[idx])


def _tree_nearest(queries, ref, tree):
    if tree is None:
        tree = cKDTree(ref)
    k = min(_TREE_K, len(ref))
    _, cand = tree.query(queries, k=k)
    cand = cand.reshape(len(queries), k)
    d2 = squared_distances(queries[:, None, :], ref[cand])
    best = d2.min(axis=1, keepdims=True)
    tied = d2 == best
    # lowest reference index among exact ties
    idx = np.where(tied, cand, np.iinfo(np.int64).max).min(axis=1)
    # every candidate tied: more ties may hide beyond k, resolve densely
    unresolved = np.flatnonzero(tied.all(axis=1)) if k < len(ref) else np.empty(0, int)
    if unresolved.size:
        idx[unresolved] = _brute(queries[unresolved], ref)
    return idx
