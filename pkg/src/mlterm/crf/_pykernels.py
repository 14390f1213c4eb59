"""Pure numpy implementation of the batch CRF kernels.

Batch layout shared with the compiled kernels (all index arrays int64):

``sent_ptr``  position offsets per sentence, length S + 1
``u_ptr``     per-position offsets into ``u_idx``, length P + 1
``u_idx``     base weight ids of active state features; a block of T weights
``e_ptr``     per-position offsets into ``e_idx`` (edge into that position)
``e_idx``     base weight ids of active edge features; a block of T*T weights
``labels``    gold tag ids, length P
"""

import numpy as np


def _lse(a, axis):
    m = np.max(a, axis=axis, keepdims=True)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def potentials(w, T, u_ptr, u_idx, e_ptr, e_idx, start, end):
    """State scores (n, T) and edge scores (n-1, T, T) of one sentence."""
    n = end - start
    emit = np.zeros((n, T))
    trans = np.zeros((max(n - 1, 0), T, T))
    tr = np.arange(T)
    tt = np.arange(T * T)
    for i in range(n):
        p = start + i
        ids = u_idx[u_ptr[p]:u_ptr[p + 1]]
        for b in ids:
            emit[i] += w[b + tr]
        if i:
            ids = e_idx[e_ptr[p]:e_ptr[p + 1]]
            for b in ids:
                trans[i - 1] += w[b + tt].reshape(T, T)
    return emit, trans


def forward_backward(emit, trans):
    n, T = emit.shape
    alpha = np.empty((n, T))
    beta = np.zeros((n, T))
    alpha[0] = emit[0]
    for i in range(1, n):
        alpha[i] = _lse(alpha[i - 1][:, None] + trans[i - 1], axis=0) + emit[i]
    for i in range(n - 2, -1, -1):
        beta[i] = _lse(trans[i] + (emit[i + 1] + beta[i + 1])[None, :], axis=1)
    return alpha, beta, float(_lse(alpha[-1], axis=0))


def viterbi(emit, trans):
    """Best path and its score; ties resolve to the lowest tag id."""
    n, T = emit.shape
    delta = emit[0].copy()
    back = np.zeros((n, T), dtype=np.int64)
    for i in range(1, n):
        cand = delta[:, None] + trans[i - 1]
        back[i] = np.argmax(cand, axis=0)
        delta = cand[back[i], np.arange(T)] + emit[i]
    path = np.empty(n, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for i in range(n - 1, 0, -1):
        path[i - 1] = back[i, path[i]]
    return path, float(delta[path[-1]])


def path_score(emit, trans, path):
    s = emit[0, path[0]]
    for i in range(1, len(path)):
        s = s + trans[i - 1, path[i - 1], path[i]]
        s = s + emit[i, path[i]]
    return float(s)


def batch_loglik_grad(w, T, sent_ptr, u_ptr, u_idx, e_ptr, e_idx, labels, grad):
    """Sum of log p(labels | sentence); adds empirical minus expected counts into grad."""
    total = 0.0
    tr = np.arange(T)
    tt = np.arange(T * T)
    for s in range(len(sent_ptr) - 1):
        start, end = int(sent_ptr[s]), int(sent_ptr[s + 1])
        if end == start:
            continue
        emit, trans = potentials(w, T, u_ptr, u_idx, e_ptr, e_idx, start, end)
        alpha, beta, logz = forward_backward(emit, trans)
        y = labels[start:end]
        total += path_score(emit, trans, y) - logz
        node = np.exp(alpha + beta - logz)
        for i in range(end - start):
            p = start + i
            d = -node[i]
            d[y[i]] += 1.0
            for b in u_idx[u_ptr[p]:u_ptr[p + 1]]:
                grad[b + tr] += d
            if i:
                edge = np.exp(alpha[i - 1][:, None] + trans[i - 1]
                              + (emit[i] + beta[i])[None, :] - logz)
                de = -edge.ravel()
                de[y[i - 1] * T + y[i]] += 1.0
                for b in e_idx[e_ptr[p]:e_ptr[p + 1]]:
                    grad[b + tt] += de
    return total


def batch_viterbi(w, T, sent_ptr, u_ptr, u_idx, e_ptr, e_idx, out):
    scores = np.zeros(len(sent_ptr) - 1)
    for s in range(len(sent_ptr) - 1):
        start, end = int(sent_ptr[s]), int(sent_ptr[s + 1])
        if end == start:
            continue
        emit, trans = potentials(w, T, u_ptr, u_idx, e_ptr, e_idx, start, end)
        path, scores[s] = viterbi(emit, trans)
        out[start:end] = path
    return scores
