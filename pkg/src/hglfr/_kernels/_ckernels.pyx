# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


def local_moves(const i64[::1] indptr, const i64[::1] indices, const f64[::1] weights,
                const f64[::1] strength, i64[::1] comm, const i64[::1] order,
                double gamma, double m2, Py_ssize_t max_sweeps=1000, double eps=1e-10):
    cdef Py_ssize_t n = strength.shape[0]
    cdef f64[::1] tot = np.zeros(n, dtype=np.float64)
    cdef f64[::1] nw = np.zeros(n, dtype=np.float64)
    cdef i64[::1] seen = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t i, j, p, t, count, sweep, oi
    cdef i64 c, ci, best
    cdef double ki, gain, best_gain
    cdef Py_ssize_t moves = 0, moved
    for i in range(n):
        tot[comm[i]] += strength[i]
    for sweep in range(max_sweeps):
        moved = 0
        for oi in range(order.shape[0]):
            i = order[oi]
            ci = comm[i]
            ki = strength[i]
            count = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                c = comm[j]
                if nw[c] == 0.0:
                    seen[count] = c
                    count += 1
                nw[c] += weights[p]
            tot[ci] -= ki
            best = ci
            best_gain = nw[ci] - gamma * ki * tot[ci] / m2
            for t in range(count):
                c = seen[t]
                gain = nw[c] - gamma * ki * tot[c] / m2
                if gain > best_gain + eps:
                    best_gain = gain
                    best = c
            for t in range(count):
                nw[seen[t]] = 0.0
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved += 1
        moves += moved
        if moved == 0:
            break
    return moves


def lp_sweep(const i64[::1] indptr, const i64[::1] indices, i64[::1] labels,
             const i64[::1] order, const f64[::1] u):
    cdef Py_ssize_t n = labels.shape[0]
    cdef i64[::1] cnt = np.zeros(n, dtype=np.int64)
    cdef i64[::1] seen = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t i, p, t, count, oi, ties, pick
    cdef i64 lab, top
    cdef Py_ssize_t changed = 0
    for oi in range(order.shape[0]):
        i = order[oi]
        if indptr[i] == indptr[i + 1]:
            continue
        count = 0
        for p in range(indptr[i], indptr[i + 1]):
            lab = labels[indices[p]]
            if cnt[lab] == 0:
                seen[count] = lab
                count += 1
            cnt[lab] += 1
        top = 0
        for t in range(count):
            if cnt[seen[t]] > top:
                top = cnt[seen[t]]
        ties = 0
        for t in range(count):
            if cnt[seen[t]] == top:
                ties += 1
        pick = <Py_ssize_t>(u[i] * ties)
        for t in range(count):
            if cnt[seen[t]] == top:
                if pick == 0:
                    if labels[i] != seen[t]:
                        labels[i] = seen[t]
                        changed += 1
                    break
                pick -= 1
        for t in range(count):
            cnt[seen[t]] = 0
    return changed


def lp_stable(const i64[::1] indptr, const i64[::1] indices, const i64[::1] labels):
    cdef Py_ssize_t n = labels.shape[0]
    cdef i64[::1] cnt = np.zeros(n, dtype=np.int64)
    cdef i64[::1] seen = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t i, p, t, count
    cdef i64 lab, top, own
    for i in range(n):
        if indptr[i] == indptr[i + 1]:
            continue
        count = 0
        for p in range(indptr[i], indptr[i + 1]):
            lab = labels[indices[p]]
            if cnt[lab] == 0:
                seen[count] = lab
                count += 1
            cnt[lab] += 1
        top = 0
        for t in range(count):
            if cnt[seen[t]] > top:
                top = cnt[seen[t]]
        own = cnt[labels[i]]
        for t in range(count):
            cnt[seen[t]] = 0
        if own < top:
            return False
    return True
