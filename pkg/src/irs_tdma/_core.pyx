# cython: language_level=3
"""Compiled kernels. Same contracts as ``_core_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, INFINITY

cnp.import_array()

ctypedef double complex cplx


cdef inline double _abs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef double _matvec(const cplx[:, ::1] a, const cplx[::1] v, cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t r, c
    cdef cplx acc
    cdef double nrm = 0.0
    for r in range(a.shape[0]):
        acc = 0
        for c in range(a.shape[1]):
            acc = acc + a[r, c] * v[c]
        out[r] = acc
        nrm += _abs2(acc)
    return sqrt(nrm)


cdef double _rmatvec(const cplx[:, ::1] a, const cplx[::1] u, cplx[::1] out) noexcept nogil:
    # out = a^H u
    cdef Py_ssize_t r, c
    cdef double nrm = 0.0
    for c in range(a.shape[1]):
        out[c] = 0
    for r in range(a.shape[0]):
        for c in range(a.shape[1]):
            out[c] = out[c] + a[r, c].conjugate() * u[r]
    for c in range(a.shape[1]):
        nrm += _abs2(out[c])
    return sqrt(nrm)


def dominant_pair(a, start, double tol, Py_ssize_t max_iter):
    cdef cplx[:, ::1] am = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t m = am.shape[0], n = am.shape[1]
    v_arr = np.array(start, dtype=np.complex128)
    u_arr = np.zeros(m, dtype=np.complex128)
    w_arr = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] v = v_arr
    cdef cplx[::1] u = u_arr
    cdef cplx[::1] w = w_arr
    cdef double sigma = 0.0, wn, resid, vn = 0.0
    cdef Py_ssize_t it, i
    cdef bint converged = False
    for i in range(n):
        vn += _abs2(v[i])
    vn = sqrt(vn)
    for i in range(n):
        v[i] = v[i] / vn
    it = 0
    with nogil:
        while it < max_iter:
            it += 1
            sigma = _matvec(am, v, u)
            if sigma == 0.0:
                break
            for i in range(m):
                u[i] = u[i] / sigma
            wn = _rmatvec(am, u, w)
            resid = 0.0
            for i in range(n):
                resid += _abs2(w[i] - sigma * v[i])
            resid = sqrt(resid)
            for i in range(n):
                v[i] = w[i] / wn
            if resid <= tol * sigma:
                sigma = _matvec(am, v, u)
                for i in range(m):
                    u[i] = u[i] / sigma
                converged = True
                break
    return sigma, u_arr, v_arr, it, converged


def nearest_centroid(points, centroids):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t k = p.shape[0], z = c.shape[0], dim = p.shape[1]
    out = np.empty(k, dtype=np.intp)
    cdef Py_ssize_t[::1] lab = out
    cdef Py_ssize_t i, j, d, best
    cdef double dist, bestd, t
    with nogil:
        for i in range(k):
            best = 0
            bestd = INFINITY
            for j in range(z):
                dist = 0.0
                for d in range(dim):
                    t = p[i, d] - c[j, d]
                    dist += t * t
                if dist < bestd:
                    bestd = dist
                    best = j
            lab[i] = best
    return out


def average_linkage(points, Py_ssize_t n_clusters):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t k = p.shape[0], dim = p.shape[1]
    dist_arr = np.zeros((k, k), dtype=np.float64)
    cdef double[:, ::1] dist = dist_arr
    size_arr = np.ones(k, dtype=np.float64)
    cdef double[::1] size = size_arr
    active_arr = np.ones(k, dtype=np.uint8)
    cdef unsigned char[::1] active = active_arr
    parent_arr = np.arange(k, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_arr
    merges_arr = np.empty((k - n_clusters, 2), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] merges = merges_arr
    cdef Py_ssize_t a, b, d, step, bi = 0, bj = 0, q
    cdef double t, acc, best, ni, nj, merged
    with nogil:
        for a in range(k):
            for b in range(a + 1, k):
                acc = 0.0
                for d in range(dim):
                    t = p[a, d] - p[b, d]
                    acc += t * t
                dist[a, b] = sqrt(acc)
                dist[b, a] = dist[a, b]
        for step in range(k - n_clusters):
            best = INFINITY
            for a in range(k):
                if not active[a]:
                    continue
                for b in range(a + 1, k):
                    if active[b] and dist[a, b] < best:
                        best = dist[a, b]
                        bi = a
                        bj = b
            merges[step, 0] = bi
            merges[step, 1] = bj
            ni = size[bi]
            nj = size[bj]
            for q in range(k):
                if active[q] and q != bi and q != bj:
                    merged = (ni * dist[bi, q] + nj * dist[bj, q]) / (ni + nj)
                    dist[bi, q] = merged
                    dist[q, bi] = merged
            size[bi] = ni + nj
            active[bj] = 0
            for q in range(k):
                if parent[q] == bj:
                    parent[q] = bi
    relabel = np.full(k, -1, dtype=np.intp)
    slots = np.flatnonzero(active_arr)
    relabel[slots] = np.arange(slots.size)
    return merges_arr, relabel[parent_arr]


def circular_resultant(phases, weights, labels, Py_ssize_t n_clusters):
    cdef double[:, ::1] th = np.ascontiguousarray(phases, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t[::1] lab = np.ascontiguousarray(labels, dtype=np.intp)
    cdef Py_ssize_t k = th.shape[0], dim = th.shape[1], i, d, z
    out = np.zeros((n_clusters, dim), dtype=np.complex128)
    counts = np.zeros(n_clusters, dtype=np.intp)
    cdef cplx[:, ::1] res = out
    cdef Py_ssize_t[::1] cnt = counts
    cdef double wi
    with nogil:
        for i in range(k):
            z = lab[i]
            wi = w[i]
            cnt[z] += 1
            for d in range(dim):
                res[z, d].real = res[z, d].real + wi * cos(th[i, d])
                res[z, d].imag = res[z, d].imag + wi * sin(th[i, d])
    return out, counts
