"""K-medoids (PAM) clustering on points in the complex plane."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ClusterSet:
    centers: np.ndarray         # medoid values, always members of the input set
    medoid_indices: np.ndarray  # indices of the medoids in the input
    assignments: np.ndarray     # cluster index per input point
    cost: float                 # sum of |point - assigned medoid|
    cost_history: np.ndarray    # cost after each assignment pass, non-increasing
    quadrants: int | None = None


def k_medoids(points, k: int, max_iter: int = 100, seed: int = 0) -> ClusterSet:
    """Alternate assignment / medoid-update under Euclidean distance.

    Initialization is seeded farthest-point: the first medoid is drawn from
    the pseudorandom stream, each further one is the point farthest from the
    medoids chosen so far.  Deterministic for a given seed.
    """
    pts = np.asarray(points, dtype=np.complex128).ravel()
    n = pts.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")
    rng = np.random.default_rng(seed)

    med = np.empty(k, dtype=np.int64)
    med[0] = rng.integers(n)
    dmin = np.abs(pts - pts[med[0]])
    for i in range(1, k):
        med[i] = int(np.argmax(dmin))
        dmin = np.minimum(dmin, np.abs(pts - pts[med[i]]))

    history = []
    assign = None
    for _ in range(max_iter):
        d = np.abs(pts[:, None] - pts[med][None, :])
        assign = np.argmin(d, axis=1)
        cost = float(d[np.arange(n), assign].sum())
        history.append(cost)
        if len(history) >= 2 and cost >= history[-2] - 1e-12:
            break
        new_med = med.copy()
        for c in range(k):
            members = np.flatnonzero(assign == c)
            if members.size == 0:
                continue
            sub = np.abs(pts[members][:, None] - pts[members][None, :])
            new_med[c] = members[int(np.argmin(sub.sum(axis=0)))]
        if np.array_equal(new_med, med):
            break
        med = new_med
    else:
        d = np.abs(pts[:, None] - pts[med][None, :])
        assign = np.argmin(d, axis=1)
        history.append(float(d[np.arange(n), assign].sum()))

    # Final bookkeeping against the final medoid set.
    d = np.abs(pts[:, None] - pts[med][None, :])
    assign = np.argmin(d, axis=1)
    cost = float(d[np.arange(n), assign].sum())
    return ClusterSet(
        centers=pts[med].copy(),
        medoid_indices=med.copy(),
        assignments=assign,
        cost=cost,
        cost_history=np.asarray(history, dtype=float),
    )
