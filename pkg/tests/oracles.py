"""Brute-force reference implementations used only by the tests.

Nothing here imports the library's numerical code, so every check compares
two independent computations.
"""
import cmath
import itertools
import math

import numpy as np


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def triple_loop_matmul(a, b):
    n, m = len(a), len(a[0])
    p = len(b[0])
    out = [[0j] * p for _ in range(n)]
    for i in range(n):
        for j in range(p):
            acc = 0j
            for k in range(m):
                acc += a[i][k] * b[k][j]
            out[i][j] = acc
    return np.array(out)


def naive_snr(g, h, w_u, w_g, theta, sx, sn):
    """Materializes diag(e^{j theta}) and every product."""
    phi = np.diag(np.exp(1j * np.asarray(theta)))
    amp = w_u.reshape(1, -1) @ g @ phi @ h @ w_g.reshape(-1, 1)
    return abs(amp[0, 0]) ** 2 * sx / (np.sum(np.abs(w_u) ** 2) * sn)


def largest_eig_2x2_gram(a):
    """sigma_max^2 of a 2xN matrix from the characteristic polynomial of a a^H."""
    m = a @ a.conj().T
    tr = (m[0, 0] + m[1, 1]).real
    det = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real
    return (tr + math.sqrt(tr * tr - 4 * det)) / 2


def nearest_codeword(theta, bits):
    """Exhaustive search over the 2^b codewords, circular distance, first index on ties."""
    n = 2 ** bits
    best, best_d = None, math.inf
    for m in range(n):
        c = 2 * math.pi * m / n
        d = abs(math.remainder(theta - c, 2 * math.pi))
        if d < best_d - 1e-15:
            best, best_d = c, d
    return best


def exhaustive_best_power(coupling, bits):
    """max over every codebook configuration of |sum c_n e^{j theta_n}|^2.

    The first phase is pinned to 0: the codebook is closed under a common
    rotation by one step, which leaves the magnitude unchanged.
    """
    c = np.asarray(coupling)
    n = c.size
    levels = np.exp(2j * np.pi * np.arange(2 ** bits) / 2 ** bits)
    partial = np.array([c[0]])
    for k in range(1, n):
        partial = (partial[:, None] + c[k] * levels[None, :]).ravel()
    return float(np.max(np.abs(partial) ** 2))


def set_partitions(items, k):
    """All partitions of ``items`` into exactly ``k`` non-empty blocks."""
    items = list(items)
    if k == 1:
        yield [items]
        return
    if len(items) == k:
        yield [[x] for x in items]
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest, k - 1):
        yield [[first]] + p
    for p in set_partitions(rest, k):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def wcss(points, blocks):
    total = 0.0
    for b in blocks:
        pts = points[b]
        total += float(((pts - pts.mean(axis=0)) ** 2).sum())
    return total


def naive_upgma(points, n_clusters):
    """Recompute every average linkage from scratch at each step (O(K^3) per merge)."""
    clusters = [[i] for i in range(len(points))]
    seq = []
    while len(clusters) > n_clusters:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            d = np.mean([np.linalg.norm(points[i] - points[j]) for i in clusters[a] for j in clusters[b]])
            if best is None or d < best[0]:
                best = (d, a, b)
        _, a, b = best
        seq.append((frozenset(clusters[a]), frozenset(clusters[b])))
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    return seq, [sorted(c) for c in clusters]


def friis(distance, carrier_hz):
    lam = 299_792_458.0 / carrier_hz
    return (lam / (4 * math.pi * distance)) ** 2


def co_phased_amplitude(v, u):
    return sum(abs(x) * abs(y) for x, y in zip(v, u))


def circ_angle(z):
    return cmath.phase(z) % (2 * math.pi)
