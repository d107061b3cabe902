"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive brute force written from the problem
definitions, not from the library internals, so agreement is meaningful.
"""

from __future__ import annotations

import numpy as np


def linf(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def l2(a, b) -> float:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.sqrt(np.sum(d * d)))


def conflict_adjacency(points, labels, r, dist=linf):
    """Bitmask adjacency of the conflict graph: opposite labels within 2r."""
    n = len(points)
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if labels[i] != labels[j] and dist(points[i], points[j]) <= 2 * r:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def max_separated_subset_size(points, labels, r, dist=linf) -> int:
    """Exact maximum size of an r-separated subset (max independent set in
    the conflict graph), by branch and bound over vertex bitmasks."""
    n = len(points)
    adj = conflict_adjacency(points, labels, r, dist)
    memo: dict = {}

    def mis(mask: int) -> int:
        if mask == 0:
            return 0
        got = memo.get(mask)
        if got is not None:
            return got
        v = (mask & -mask).bit_length() - 1
        if adj[v] & mask == 0:
            # v has no conflicts left, always include it
            best = 1 + mis(mask & ~(1 << v))
        else:
            best = max(mis(mask & ~(1 << v)),
                       1 + mis(mask & ~((1 << v) | adj[v])))
        memo[mask] = best
        return best

    return mis((1 << n) - 1)


def knn_weights_oracle(points, query, k: int, dist=l2) -> np.ndarray:
    """Full-sort k-NN weights with the lowest-index tie rule."""
    n = len(points)
    order = sorted(range(n), key=lambda i: (dist(points[i], query), i))
    w = np.zeros(n)
    for i in order[:k]:
        w[i] = 1.0 / k
    return w


def kernel_weights_oracle(points, query, log_kernel, h: float, dist=l2) -> np.ndarray:
    """Direct kernel-ratio weights; callers pick scales where float64 ratios
    are safe without the max-division trick."""
    u = np.array([dist(p, query) for p in points]) / h
    vals = np.exp(log_kernel(u))
    return vals / vals.sum()


def grid_misprediction_radius(predict_fn, x, y: int, r: float, resolution: float):
    """Smallest grid radius at which predict_fn disagrees with y, or None.

    1-D and 2-D only; checks shells in increasing radius like the library's
    oracle but with an independent loop structure.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if predict_fn(x) != y:
        return 0.0
    steps = int(np.floor(r / resolution + 1e-12))
    d = x.shape[0]
    for k in range(1, steps + 1):
        if d == 1:
            offs = [np.array([-k * resolution]), np.array([k * resolution])]
        else:
            offs = []
            for i in range(-k, k + 1):
                for j in range(-k, k + 1):
                    if max(abs(i), abs(j)) == k:
                        offs.append(np.array([i, j]) * resolution)
        for off in offs:
            if predict_fn(x + off) != y:
                return k * resolution
    return None


def random_two_class(rng, n: int, d: int = 2, box: float = 1.0):
    """Random dataset guaranteed to contain both labels."""
    pts = rng.uniform(0.0, box, (n, d))
    labels = np.where(rng.random(n) < 0.5, 1, -1)
    if np.all(labels == labels[0]):
        labels[rng.integers(0, n)] *= -1
    return pts, labels
