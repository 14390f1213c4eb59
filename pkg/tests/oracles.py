"""Independent reference computations used by the tests.

Nothing here calls the package's inference code: path scores are summed
straight from feature strings and weights, and partition functions come from
enumerating every tag path.
"""

import itertools
import math

import numpy as np


def path_score_from_features(expanded, index, weights, T, path):
    s = 0.0
    for i, (unis, edges) in enumerate(expanded):
        for f in unis:
            if f in index:
                s += weights[index[f] + path[i]]
        if i:
            for f in edges:
                if f in index:
                    s += weights[index[f] + path[i - 1] * T + path[i]]
    return s


def all_paths(n, T):
    return itertools.product(range(T), repeat=n)


def brute_log_z(expanded, index, weights, T):
    scores = [path_score_from_features(expanded, index, weights, T, p)
              for p in all_paths(len(expanded), T)]
    m = max(scores)
    return m + math.log(sum(math.exp(s - m) for s in scores))


def brute_argmax(expanded, index, weights, T):
    best, best_path = -math.inf, None
    for p in all_paths(len(expanded), T):
        s = path_score_from_features(expanded, index, weights, T, p)
        if s > best:
            best, best_path = s, p
    return list(best_path), best


def brute_node_marginals(expanded, index, weights, T):
    n = len(expanded)
    logz = brute_log_z(expanded, index, weights, T)
    marg = np.zeros((n, T))
    for p in all_paths(n, T):
        pr = math.exp(path_score_from_features(expanded, index, weights, T, p) - logz)
        for i, t in enumerate(p):
            marg[i, t] += pr
    return marg


def random_instance(rng, T, n, n_obs=4, n_cols=2, edge_obs=False):
    """Random expanded sentence plus a feature index/weights covering it."""
    expanded = []
    index = {}
    size = 0
    for i in range(n):
        unis = [f"U:c{c}@0=v{rng.integers(n_obs)}" for c in range(n_cols)]
        edges = []
        if i:
            edges.append("B")
            if edge_obs:
                edges.append(f"B:c0@0=v{rng.integers(n_obs)}")
        expanded.append((unis, edges))
        for f in unis:
            if f not in index:
                index[f] = size
                size += T
        for f in edges:
            if f not in index:
                index[f] = size
                size += T * T
    weights = rng.normal(scale=1.5, size=size)
    return expanded, index, weights


def finite_difference(fun, w, h=1e-5):
    g = np.zeros_like(w)
    for j in range(len(w)):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = (fun(w + e) - fun(w - e)) / (2 * h)
    return g


def quantiles_by_hand(values, q):
    """Linear-interpolation quantile (numpy's default method) computed directly."""
    xs = sorted(values)
    pos = q * (len(xs) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])
