"""Time the compiled and pure-Python CRF kernels on the same synthetic batch.

    python benchmarks/bench_kernels.py [--sentences 500] [--repeat 5]
"""

import argparse
import time

import numpy as np

from mlterm.crf import _backend
from mlterm.crf.model import _index_size, compile_batch, default_templates, expand_features
from mlterm.features import FeatureConfig, extract_features, fit_binner, observations
from mlterm.synthetic import make_extraction_data
from mlterm.termhood import TermhoodTable


def build_batch(n_sentences, seed):
    data = make_extraction_data(n_sentences=n_sentences, seed=seed, n_background=1000)
    table = TermhoodTable.from_corpora(data.domain, data.background)
    matrix = extract_features(data.domain, table, FeatureConfig())
    binner = fit_binner(matrix)
    templates = default_templates(matrix.columns)
    expanded = [expand_features(rows, templates) for rows in observations(matrix, binner)]
    tags = {"B": 0, "I": 1, "O": 2}
    labels = [[tags[r.label] for r in rows] for rows in matrix.sentences]
    index = {}
    batch = compile_batch(expanded, index, 3, labels, grow=True)
    return batch, _index_size(index, 3)


def bench(kern, batch, w, repeat):
    grad = np.zeros_like(w)
    out = np.zeros(len(batch.labels), dtype=np.int64)
    args = (batch.sent_ptr, batch.u_ptr, batch.u_idx, batch.e_ptr, batch.e_idx)
    best_grad = best_vit = float("inf")
    for _ in range(repeat):
        grad[:] = 0
        t = time.perf_counter()
        ll = kern.batch_loglik_grad(w, 3, *args, batch.labels, grad)
        best_grad = min(best_grad, time.perf_counter() - t)
        t = time.perf_counter()
        kern.batch_viterbi(w, 3, *args, out)
        best_vit = min(best_vit, time.perf_counter() - t)
    return ll, grad.copy(), out.copy(), best_grad, best_vit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    batch, n_weights = build_batch(args.sentences, args.seed)
    w = np.random.default_rng(args.seed).normal(scale=0.1, size=n_weights)
    print(f"{batch.n_sentences} sentences, {len(batch.labels)} tokens, {n_weights} weights")

    results = {"python": bench(_backend.pure, batch, w, args.repeat)}
    if _backend.compiled is not None:
        results["cython"] = bench(_backend.compiled, batch, w, args.repeat)
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'backend':<8} {'loglik+grad (s)':>16} {'viterbi (s)':>12}")
    for name, (_, _, _, tg, tv) in results.items():
        print(f"{name:<8} {tg:>16.4f} {tv:>12.4f}")
    if "cython" in results:
        py, cy = results["python"], results["cython"]
        print(f"speed-up: loglik+grad x{py[3] / cy[3]:.1f}, viterbi x{py[4] / cy[4]:.1f}")
        agree = abs(py[0] - cy[0]) <= 1e-9 * abs(py[0]) and np.allclose(py[1], cy[1]) \
            and np.array_equal(py[2], cy[2])
        print("outputs agree" if agree else "OUTPUTS DIFFER")


if __name__ == "__main__":
    main()
