"""UE grouping under a budget of Z IRS configurations per frame.

Every policy returns a :class:`ClusteringOutcome`: a cluster label per UE and
one phase vector per cluster. Points live in the phase-vector space
``[0, 2pi)^N_I`` of the UEs' individually optimal configurations.

Capacity-weighted clustering (CWC) seeds the centroids with the optimal
configurations of the Z best UEs, assigns each UE to the centroid that
serves it best, and moves each centroid to the rate-weighted circular mean
of its members. The one-shot variant stops after the first assignment.
K-means, average-linkage agglomeration and random grouping are the
reference points; serving each UE with its own optimum is the upper bound.
"""
from dataclasses import dataclass, field
import enum

import numpy as np

from . import kernels
from .irs_opt import quantize, snr_matrix, wrap_phase


class Policy(str, enum.Enum):
    CWC = "cwc"
    OSCWC = "oscwc"
    KM = "km"
    HC = "hc"
    RANDOM = "random"
    UNCLUSTERED = "unclustered"


@dataclass
class ClusteringOutcome:
    assignment: np.ndarray
    centroids: np.ndarray
    policy: Policy
    iterations: int = 0
    merges: np.ndarray = field(default=None, repr=False)

    @property
    def n_clusters(self):
        return self.centroids.shape[0]

    def members(self, z):
        return np.flatnonzero(self.assignment == z)


def _check_z(Z, K):
    if not 1 <= Z <= K:
        raise ValueError(f"need 1 <= Z <= K, got Z={Z}, K={K}")


def _phases(links):
    return np.stack([l.phi_star for l in links])


def circular_centroids(phases, labels, n_clusters, weights=None, previous=None):
    """Weighted circular mean of member phase vectors, per cluster.

    Unit phasors are averaged with the given weights and projected back to
    unit modulus. Empty clusters, and components whose resultant vanishes,
    keep ``previous`` (or 0 when there is none).
    """
    phases = np.asarray(phases, dtype=np.float64)
    if weights is None:
        weights = np.ones(phases.shape[0])
    res, counts = kernels.circular_resultant(phases, weights, labels, n_clusters)
    out = wrap_phase(np.angle(res))
    keep = np.zeros((n_clusters, phases.shape[1])) if previous is None else np.asarray(previous, dtype=np.float64)
    dead = (np.abs(res) == 0.0) | (counts == 0)[:, None]
    return np.where(dead, keep, out)


def assign_to_best_centroid(link, centroids):
    """Cluster whose configuration costs this UE the least rate.

    ``log2((1+G*)/(1+G_z))`` is minimized by the largest ``G_z``, so this is
    the argmax of the UE's SNR over the centroids (first index on ties).
    """
    centroids = np.atleast_2d(centroids)
    if centroids.shape[0] == 0:
        raise ValueError("no centroids")
    return int(np.argmax(snr_matrix([link], centroids)[0]))


def _assign(links, centroids, pinned=None):
    gam = snr_matrix(links, centroids)
    labels = np.argmax(gam, axis=1)
    if pinned is not None:
        labels[pinned] = np.arange(pinned.size)
    rates = np.log2(1.0 + gam[np.arange(len(links)), labels])
    return labels, rates


def cwc(links, Z, bits=None, conv_tol=1e-4, max_iter=100, pin_seeds=False):
    """Capacity-weighted clustering.

    Iterates assignment and rate-weighted centroid updates until the frame
    sum-rate changes by less than ``conv_tol`` or ``max_iter`` assignment
    passes have run. The best (assignment, centroids) pair seen is
    returned. With ``bits`` the centroids are projected onto the codebook
    after every update. ``pin_seeds`` keeps the Z seed UEs in their own
    clusters.
    """
    K = len(links)
    _check_z(Z, K)
    phases = _phases(links)
    gamma_star = np.array([l.gamma_star for l in links])
    seeds = np.argsort(-gamma_star, kind="stable")[:Z]
    pinned = seeds if pin_seeds else None
    centroids = phases[seeds].copy()
    labels, rates = _assign(links, centroids, pinned)
    total = rates.sum()
    best = (total, labels, centroids, 1)
    it = 1
    while it < max_iter:
        centroids = circular_centroids(phases, labels, Z, weights=rates, previous=centroids)
        if bits is not None:
            centroids = quantize(centroids, bits)
        labels, rates = _assign(links, centroids, pinned)
        it += 1
        new_total = rates.sum()
        if new_total > best[0]:
            best = (new_total, labels, centroids, it)
        if abs(new_total - total) < conv_tol:
            break
        total = new_total
    _, labels, centroids, _ = best
    return ClusteringOutcome(labels, centroids, Policy.CWC, iterations=it)


def oscwc(links, Z, bits=None):
    """One-shot CWC: the Z best UEs' optima are the centroids, one assignment pass."""
    out = cwc(links, Z, bits=bits, max_iter=1)
    out.policy = Policy.OSCWC
    return out


def _lloyd_update(points, labels, centroids):
    Z = centroids.shape[0]
    new = centroids.copy()
    counts = np.bincount(labels, minlength=Z)
    sums = np.zeros_like(centroids)
    np.add.at(sums, labels, points)
    filled = counts > 0
    new[filled] = sums[filled] / counts[filled, None]
    taken = set()
    for j in np.flatnonzero(~filled):
        # re-seed an empty cluster at the point farthest from its stale centroid
        d = ((points - centroids[j]) ** 2).sum(axis=1)
        for idx in np.argsort(-d, kind="stable"):
            if idx not in taken:
                taken.add(int(idx))
                new[j] = points[idx]
                break
    return new


def kmeans(points, Z, seed, max_iter=100, circular=False):
    """Lloyd's algorithm on raw phase vectors (squared Euclidean distance).

    Initial centroids are Z distinct data points drawn at random. With
    ``circular=True`` points are embedded as (cos, sin) pairs first and
    centroids mapped back to angles; that variant is not one of the
    reference baselines.
    """
    points = np.asarray(points, dtype=np.float64)
    K = points.shape[0]
    _check_z(Z, K)
    data = np.hstack((np.cos(points), np.sin(points))) if circular else points
    rng = np.random.default_rng(seed)
    cent = data[rng.choice(K, size=Z, replace=False)].copy()
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        new = kernels.nearest_centroid(data, cent)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        cent = _lloyd_update(data, labels, cent)
    if circular:
        n = points.shape[1]
        cent = wrap_phase(np.arctan2(cent[:, n:], cent[:, :n]))
    return ClusteringOutcome(np.asarray(labels, dtype=np.intp), cent, Policy.KM, iterations=it)


def _mean_centroids(points, labels, Z):
    sums = np.zeros((Z, points.shape[1]))
    np.add.at(sums, labels, points)
    return sums / np.bincount(labels, minlength=Z)[:, None]


def hier_agglomerative(points, Z):
    """Average-linkage (UPGMA) agglomeration from singletons down to Z clusters."""
    points = np.asarray(points, dtype=np.float64)
    _check_z(Z, points.shape[0])
    merges, labels = kernels.average_linkage(points, Z)
    return ClusteringOutcome(
        np.asarray(labels, dtype=np.intp), _mean_centroids(points, labels, Z), Policy.HC,
        iterations=len(merges), merges=np.asarray(merges),
    )


def _stirling2(n, k):
    table = [[0] * (k + 1) for _ in range(n + 1)]
    table[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, min(i, k) + 1):
            table[i][j] = j * table[i - 1][j] + table[i - 1][j - 1]
    return table


def random_surjection(K, Z, rng):
    """Uniform draw from all maps of K UEs onto Z labels that leave no label empty.

    Same law as drawing labels uniformly and redrawing until every cluster is
    occupied, without the rejection loop.
    """
    _check_z(Z, K)
    s = _stirling2(K, Z)
    opens = np.zeros(K, dtype=bool)
    j = Z
    for i in range(K, 0, -1):
        # element i opens a new block with probability S(i-1, j-1) / S(i, j)
        if j > 0 and rng.random() * s[i][j] < s[i - 1][j - 1]:
            opens[i - 1] = True
            j -= 1
    block = np.empty(K, dtype=np.intp)
    n_open = 0
    for i in range(K):
        if opens[i]:
            block[i] = n_open
            n_open += 1
        else:
            block[i] = rng.integers(n_open)
    return rng.permutation(Z)[block]


def random_clustering(K, Z, seed, phases=None, circular=False):
    """Random partition into Z non-empty clusters.

    Centroids are the arithmetic mean of the member phase vectors, the same
    rule K-means and HC use; ``circular=True`` switches to the unweighted
    circular mean.
    """
    rng = np.random.default_rng(seed)
    labels = random_surjection(K, Z, rng)
    if phases is None:
        cent = np.zeros((Z, 0))
    elif circular:
        cent = circular_centroids(phases, labels, Z)
    else:
        cent = _mean_centroids(np.asarray(phases, dtype=np.float64), labels, Z)
    return ClusteringOutcome(labels, cent, Policy.RANDOM, iterations=1)


def unclustered(links):
    """Every UE alone with its own optimum: Z = K, the upper bound."""
    K = len(links)
    return ClusteringOutcome(np.arange(K), _phases(links).copy(), Policy.UNCLUSTERED, iterations=0)


def run_policy(policy, links, Z, seed=0, bits=None):
    """Dispatch one policy. With ``bits`` every centroid ends on the codebook."""
    policy = Policy(policy)
    if policy is Policy.CWC:
        return cwc(links, Z, bits=bits)
    if policy is Policy.OSCWC:
        return oscwc(links, Z, bits=bits)
    if policy is Policy.UNCLUSTERED:
        return unclustered(links)
    phases = _phases(links)
    if policy is Policy.KM:
        out = kmeans(phases, Z, seed)
    elif policy is Policy.HC:
        out = hier_agglomerative(phases, Z)
    else:
        out = random_clustering(len(links), Z, seed, phases)
    if bits is not None:
        out.centroids = quantize(out.centroids, bits)
    return out
