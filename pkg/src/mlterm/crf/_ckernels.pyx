# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch CRF kernels. Same array contract as _pykernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

ctypedef cnp.int64_t i64


cdef void _potentials(const double[::1] w, int T,
                      const i64[::1] u_ptr, const i64[::1] u_idx,
                      const i64[::1] e_ptr, const i64[::1] e_idx,
                      i64 start, i64 n,
                      double[:, ::1] emit, double[:, ::1] trans) noexcept nogil:
    cdef i64 i, p, k, b
    cdef int t, TT = T * T
    for i in range(n):
        p = start + i
        for t in range(T):
            emit[i, t] = 0.0
        for k in range(u_ptr[p], u_ptr[p + 1]):
            b = u_idx[k]
            for t in range(T):
                emit[i, t] += w[b + t]
        if i > 0:
            for t in range(TT):
                trans[i - 1, t] = 0.0
            for k in range(e_ptr[p], e_ptr[p + 1]):
                b = e_idx[k]
                for t in range(TT):
                    trans[i - 1, t] += w[b + t]


cdef double _forward_backward(int T, i64 n,
                              double[:, ::1] emit, double[:, ::1] trans,
                              double[:, ::1] alpha, double[:, ::1] beta,
                              double[::1] tmp) noexcept nogil:
    cdef i64 i
    cdef int a, b
    cdef double m, s, v
    for b in range(T):
        alpha[0, b] = emit[0, b]
    for i in range(1, n):
        for b in range(T):
            m = alpha[i - 1, 0] + trans[i - 1, b]
            for a in range(1, T):
                v = alpha[i - 1, a] + trans[i - 1, a * T + b]
                if v > m:
                    m = v
            s = 0.0
            for a in range(T):
                s += exp(alpha[i - 1, a] + trans[i - 1, a * T + b] - m)
            alpha[i, b] = m + log(s) + emit[i, b]
    for a in range(T):
        beta[n - 1, a] = 0.0
    i = n - 2
    while i >= 0:
        for b in range(T):
            tmp[b] = emit[i + 1, b] + beta[i + 1, b]
        for a in range(T):
            m = trans[i, a * T] + tmp[0]
            for b in range(1, T):
                v = trans[i, a * T + b] + tmp[b]
                if v > m:
                    m = v
            s = 0.0
            for b in range(T):
                s += exp(trans[i, a * T + b] + tmp[b] - m)
            beta[i, a] = m + log(s)
        i -= 1
    m = alpha[n - 1, 0]
    for a in range(1, T):
        if alpha[n - 1, a] > m:
            m = alpha[n - 1, a]
    s = 0.0
    for a in range(T):
        s += exp(alpha[n - 1, a] - m)
    return m + log(s)


def batch_loglik_grad(const double[::1] w, int T,
                      const i64[::1] sent_ptr,
                      const i64[::1] u_ptr, const i64[::1] u_idx,
                      const i64[::1] e_ptr, const i64[::1] e_idx,
                      const i64[::1] labels, double[::1] grad):
    cdef i64 S = sent_ptr.shape[0] - 1
    cdef i64 s, start, n, i, p, k, b, maxn = 1
    cdef int t, a, TT = T * T, ya, yb
    cdef double logz, score, total = 0.0, d
    for s in range(S):
        if sent_ptr[s + 1] - sent_ptr[s] > maxn:
            maxn = sent_ptr[s + 1] - sent_ptr[s]
    cdef double[:, ::1] emit = np.zeros((maxn, T))
    cdef double[:, ::1] trans = np.zeros((maxn, TT))
    cdef double[:, ::1] alpha = np.zeros((maxn, T))
    cdef double[:, ::1] beta = np.zeros((maxn, T))
    cdef double[::1] tmp = np.zeros(T)
    cdef double[::1] node = np.zeros(T)
    cdef double[::1] edge = np.zeros(TT)
    with nogil:
        for s in range(S):
            start = sent_ptr[s]
            n = sent_ptr[s + 1] - start
            if n == 0:
                continue
            _potentials(w, T, u_ptr, u_idx, e_ptr, e_idx, start, n, emit, trans)
            logz = _forward_backward(T, n, emit, trans, alpha, beta, tmp)
            score = emit[0, labels[start]]
            for i in range(1, n):
                score = score + trans[i - 1, labels[start + i - 1] * T + labels[start + i]]
                score = score + emit[i, labels[start + i]]
            total += score - logz
            for i in range(n):
                p = start + i
                for t in range(T):
                    node[t] = -exp(alpha[i, t] + beta[i, t] - logz)
                node[labels[p]] += 1.0
                for k in range(u_ptr[p], u_ptr[p + 1]):
                    b = u_idx[k]
                    for t in range(T):
                        grad[b + t] += node[t]
                if i > 0:
                    for a in range(T):
                        for t in range(T):
                            edge[a * T + t] = -exp(alpha[i - 1, a] + trans[i - 1, a * T + t]
                                                   + emit[i, t] + beta[i, t] - logz)
                    edge[labels[p - 1] * T + labels[p]] += 1.0
                    for k in range(e_ptr[p], e_ptr[p + 1]):
                        b = e_idx[k]
                        for t in range(TT):
                            grad[b + t] += edge[t]
    return total


def batch_viterbi(const double[::1] w, int T,
                  const i64[::1] sent_ptr,
                  const i64[::1] u_ptr, const i64[::1] u_idx,
                  const i64[::1] e_ptr, const i64[::1] e_idx,
                  i64[::1] out):
    cdef i64 S = sent_ptr.shape[0] - 1
    cdef i64 s, start, n, i, maxn = 1
    cdef int a, b, best, TT = T * T
    cdef double v, m
    for s in range(S):
        if sent_ptr[s + 1] - sent_ptr[s] > maxn:
            maxn = sent_ptr[s + 1] - sent_ptr[s]
    cdef double[:, ::1] emit = np.zeros((maxn, T))
    cdef double[:, ::1] trans = np.zeros((maxn, TT))
    cdef double[::1] delta = np.zeros(T)
    cdef double[::1] nxt = np.zeros(T)
    cdef i64[:, ::1] back = np.zeros((maxn, T), dtype=np.int64)
    scores_arr = np.zeros(S)
    cdef double[::1] scores = scores_arr
    with nogil:
        for s in range(S):
            start = sent_ptr[s]
            n = sent_ptr[s + 1] - start
            if n == 0:
                continue
            _potentials(w, T, u_ptr, u_idx, e_ptr, e_idx, start, n, emit, trans)
            for b in range(T):
                delta[b] = emit[0, b]
            for i in range(1, n):
                for b in range(T):
                    best = 0
                    m = delta[0] + trans[i - 1, b]
                    for a in range(1, T):
                        v = delta[a] + trans[i - 1, a * T + b]
                        if v > m:
                            m = v
                            best = a
                    back[i, b] = best
                    nxt[b] = m + emit[i, b]
                for b in range(T):
                    delta[b] = nxt[b]
            best = 0
            for b in range(1, T):
                if delta[b] > delta[best]:
                    best = b
            scores[s] = delta[best]
            out[start + n - 1] = best
            i = n - 1
            while i > 0:
                out[start + i - 1] = back[i, out[start + i]]
                i -= 1
    return scores_arr
