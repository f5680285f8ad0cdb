"""Pure numpy implementations of the hot kernels.

Signatures and tie-breaking rules mirror ``_core.pyx`` exactly; the test suite
runs every kernel test against both.
"""
import numpy as np


def dominant_pair(a, start, tol, max_iter):
    """Power iteration on ``a^H a`` for the dominant singular triplet.

    Returns ``(sigma, u, v, iterations, converged)`` with ``a v = sigma u``.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    ah = a.conj().T
    v = np.asarray(start, dtype=np.complex128).copy()
    v /= np.linalg.norm(v)
    sigma = 0.0
    u = np.zeros(a.shape[0], dtype=np.complex128)
    for it in range(1, max_iter + 1):
        av = a @ v
        sigma = np.linalg.norm(av)
        if sigma == 0.0:
            return 0.0, u, v, it, False
        u = av / sigma
        w = ah @ u
        resid = np.linalg.norm(w - sigma * v)
        v = w / np.linalg.norm(w)
        if resid <= tol * sigma:
            # one more left update keeps a v = sigma u consistent with the new v
            av = a @ v
            sigma = np.linalg.norm(av)
            u = av / sigma
            return sigma, u, v, it, True
    return sigma, u, v, max_iter, False


def nearest_centroid(points, centroids):
    """Index of the closest centroid by squared Euclidean distance, lowest index on ties."""
    points = np.asarray(points, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    d = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d, axis=1).astype(np.intp)


def average_linkage(points, n_clusters):
    """UPGMA agglomeration down to ``n_clusters`` groups.

    Returns ``(merges, labels)``. ``merges[m] = (i, j)`` means slot ``j`` was
    folded into slot ``i`` (``i < j``) at step ``m``. Labels number the
    surviving slots 0.. in increasing slot order. Ties go to the
    lexicographically smallest ``(i, j)``.
    """
    points = np.asarray(points, dtype=np.float64)
    k = points.shape[0]
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    size = np.ones(k, dtype=np.float64)
    active = np.ones(k, dtype=bool)
    masked = np.where(np.triu(np.ones((k, k), dtype=bool), 1), dist, np.inf)
    merges = np.empty((k - n_clusters, 2), dtype=np.intp)
    parent = np.arange(k)
    for m in range(k - n_clusters):
        flat = int(np.argmin(masked))
        i, j = divmod(flat, k)
        merges[m] = (i, j)
        ni, nj = size[i], size[j]
        merged = (ni * dist[i] + nj * dist[j]) / (ni + nj)
        dist[i, :] = merged
        dist[:, i] = merged
        size[i] = ni + nj
        active[j] = False
        parent[parent == j] = i
        masked[j, :] = np.inf
        masked[:, j] = np.inf
        others = np.flatnonzero(active)
        lo = others[others < i]
        hi = others[others > i]
        masked[lo, i] = merged[lo]
        masked[i, hi] = merged[hi]
    slots = np.flatnonzero(active)
    relabel = np.full(k, -1, dtype=np.intp)
    relabel[slots] = np.arange(slots.size)
    return merges, relabel[parent]


def circular_resultant(phases, weights, labels, n_clusters):
    """Per-cluster weighted sum of ``exp(1j * phases)`` and member counts."""
    phases = np.asarray(phases, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    out = np.zeros((n_clusters, phases.shape[1]), dtype=np.complex128)
    np.add.at(out, labels, weights[:, None] * np.exp(1j * phases))
    counts = np.bincount(labels, minlength=n_clusters).astype(np.intp)
    return out, counts
