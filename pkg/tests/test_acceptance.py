"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected by ``conftest.py`` and printed in the terminal
summary; run ``pytest tests/test_acceptance.py`` to see just these.
"""

import math
import time

import numpy as np
import pytest

import oracles
from conftest import record_acceptance
from mlterm.align import (
    AlignmentCandidate,
    PairContingency,
    align,
    log_likelihood_ratio,
    precision_at_n,
    rank_candidates,
    termhood_weighted_association,
)
from mlterm.cli import main
from mlterm.corpus import Corpus, Sentence, build_frequency_table, side_corpus, write_column_corpus
from mlterm.crf.model import CrfModel, TagSet, compile_batch, forward_backward, penalized_objective, viterbi
from mlterm.eval import f1_score, kfold
from mlterm.features import FeatureConfig, extract_features
from mlterm.ngram import extract_ngrams
from mlterm.synthetic import make_alignment_data, make_extraction_data
from mlterm.termhood import TermhoodTable, relative_frequency, sentence_termhood


def _report(number, title, ok, detail, elapsed=None, budget=None):
    within = budget is None or elapsed < budget
    timing = "" if elapsed is None else f" [{elapsed:.2f}s" + (f" < {budget}s]" if budget else "]")
    status = "PASS" if ok and within else "FAIL"
    record_acceptance(f"{status}  criterion {number:>2}: {title}: {detail}{timing}")
    assert ok, detail
    assert within, f"runtime {elapsed:.2f}s exceeds {budget}s"


def test_criterion_01_termhood_oracle(toy_domain, toy_background):
    t0 = time.perf_counter()
    table = TermhoodTable.from_corpora(toy_domain, toy_background)
    rec = {w: table[w] for w in "abcd"}
    checks = [
        rec["a"].c_d == 2 and rec["b"].c_b == 2 and rec["d"].c_d == 0,
        abs(rec["a"].f_d - 0.5) <= 1e-12,
        abs(rec["a"].delta_f - 0.5) <= 1e-12,
        abs(rec["b"].delta_f + 0.25) <= 1e-12,
        abs(rec["a"].delta_r - 1.0) <= 1e-12,
        abs(rec["c"].delta_r) <= 1e-12,
        abs(rec["a"].delta_r_c - 2.0) <= 1e-12,
        abs(rec["b"].delta_r_c + 0.5) <= 1e-12,
    ]
    st_ = sentence_termhood(toy_domain.sentences[0], table)
    checks.append(abs(st_.delta_freq_sen - 0.75) <= 1e-12)
    checks.append(abs(st_.mean_delta_f - 0.1875) <= 1e-12)
    for corpus in (toy_domain, toy_background):
        freq = build_frequency_table(corpus)
        checks.append(abs(math.fsum(relative_frequency(freq, w) for w in freq.counts) - 1) <= 1e-12)
    elapsed = time.perf_counter() - t0
    _report(1, "termhood toy values", all(checks), f"{sum(checks)}/{len(checks)} checks", elapsed, 1)


def test_criterion_02_crf_inference_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    n_models, worst_rel, path_mismatch, score_mismatch = 120, 0.0, 0, 0
    for k in range(n_models):
        T = int(rng.integers(2, 5))
        n = int(rng.integers(1, 7))
        expanded, index, w = oracles.random_instance(rng, T, n, edge_obs=k % 2 == 0)
        model = CrfModel(TagSet(tuple(f"t{j}" for j in range(T))), [], index, w)
        ref = oracles.brute_log_z(expanded, index, w, T)
        got = forward_backward(model, expanded).log_z
        worst_rel = max(worst_rel, abs(got - ref) / max(1.0, abs(ref)))
        tags, score = viterbi(model, expanded)
        path, best = oracles.brute_argmax(expanded, index, w, T)
        path_mismatch += [model.tagset.index(t) for t in tags] != path
        # the two sums add the same terms in a different order
        score_mismatch += abs(score - best) > 1e-12 * max(1.0, abs(best))
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-10 and path_mismatch == 0 and score_mismatch == 0
    _report(2, "CRF logZ/Viterbi vs brute force",
            ok, f"{n_models} models, max logZ rel err {worst_rel:.1e}, "
                f"argmax mismatches {path_mismatch}, score mismatches {score_mismatch}", elapsed, 30)


def test_criterion_03_gradient_check():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    n_instances = 8
    for _ in range(n_instances):
        T = int(rng.integers(2, 5))
        expanded, labels, index, size = [], [], {}, 0
        for _ in range(int(rng.integers(1, 4))):
            n = int(rng.integers(1, 6))
            sent, _, _ = oracles.random_instance(rng, T, n, edge_obs=True)
            # one index shared by every sentence of the batch
            for unis, edges in sent:
                for f in unis:
                    if f not in index:
                        index[f], size = size, size + T
                for f in edges:
                    if f not in index:
                        index[f], size = size, size + T * T
            expanded.append(sent)
            labels.append([int(x) for x in rng.integers(T, size=n)])
        batch = compile_batch(expanded, index, T, labels)
        w = rng.normal(size=size)
        _, g = penalized_objective(w, T, batch, 10.0)
        fd = oracles.finite_difference(lambda x: penalized_objective(x, T, batch, 10.0)[0], w, h=1e-5)
        rel = np.abs(g - fd) / np.maximum(np.maximum(np.abs(g), np.abs(fd)), 1e-3)
        worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - t0
    _report(3, "gradient vs central differences", worst <= 1e-4,
            f"{n_instances} instances, max rel err {worst:.1e}", elapsed, 30)


def test_criterion_04_synthetic_extraction_trend():
    t0 = time.perf_counter()
    data = make_extraction_data(n_sentences=1000, seed=0)
    table = TermhoodTable.from_corpora(data.domain, data.background)
    f1 = {}
    for group in ("Word", "ΔFreq,ΔFreq_Sen", "all"):
        matrix = extract_features(data.domain, table, FeatureConfig.parse(group))
        f1[group] = kfold(matrix, k=10, seed=0).macro_f1
    elapsed = time.perf_counter() - t0
    ok = f1["ΔFreq,ΔFreq_Sen"] >= f1["Word"] and f1["Word"] >= 0.6 and f1["all"] >= 0.9
    detail = ", ".join(f"{g}={v:.4f}" for g, v in f1.items())
    _report(4, "termhood features beat Word-only (10-fold macro F1)", ok, detail, elapsed, 120)


def test_criterion_05_f1_arithmetic():
    got = f1_score(0.80098, 0.7422)
    # A reference value of 0.76851 circulates for this P and R; the formula
    # gives about 0.7705, so only the formula value is asserted.
    _report(5, "F1(0.80098, 0.7422)", abs(got - 0.7705) <= 5e-4,
            f"{got:.5f} (reference 0.76851 differs; not asserted)")


def test_criterion_06_logl_oracle():
    t0 = time.perf_counter()
    indep = log_likelihood_ratio(PairContingency(2, 8, 18, 72))
    perfect = log_likelihood_ratio(PairContingency(10, 0, 0, 10))
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        k = rng.integers(0, 100, size=4)
        if k.sum() == 0:
            k[0] = 1
        a = log_likelihood_ratio(PairContingency(*map(int, k)))
        b = log_likelihood_ratio(PairContingency(int(k[0]), int(k[2]), int(k[1]), int(k[3])))
        worst = max(worst, abs(a - b) / max(1.0, a))
    elapsed = time.perf_counter() - t0
    ok = abs(indep) <= 1e-9 and abs(perfect - 40 * math.log(2)) <= 1e-9 and worst <= 1e-12
    _report(6, "G^2 oracles and transposition symmetry", ok,
            f"independent={indep:.1e}, perfect={perfect:.9f}, max asym {worst:.1e}", elapsed, 5)


def _candidate(i, logl, t):
    return AlignmentCandidate((f"c{i}",), (f"e{i}",), PairContingency(1, 0, 0, 1), logl, t, t,
                              termhood_weighted_association(logl, t, t))


def test_criterion_07_weighted_association_algebra():
    rng = np.random.default_rng(8)
    raw = rng.uniform(0, 1000, 10_000)
    tc = rng.uniform(1e-6, 1.0, 10_000)
    te = rng.uniform(1e-6, 1.0, 10_000)
    worst = 0.0
    for r, a, b in zip(raw, tc, te):
        got = termhood_weighted_association(float(r), float(a), float(b))
        want = float(r) * min(a, b) ** 2
        worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    same_order = 0
    n_sets = 50
    for _ in range(n_sets):
        t = float(rng.uniform(1e-3, 1.0))
        cands = [_candidate(i, float(rng.integers(0, 20)), t) for i in range(30)]
        same_order += [c.key for c in rank_candidates(cands)] == \
            [c.key for c in rank_candidates(cands, by="logl")]
    ok = worst <= 1e-12 and same_order == n_sets
    _report(7, "weighted association == raw*min(Tc,Te)^2", ok,
            f"max rel err {worst:.1e}, equal-termhood rankings identical {same_order}/{n_sets}")


def test_criterion_08_synthetic_alignment_trend():
    t0 = time.perf_counter()
    data = make_alignment_data(n_pairs=2000, seed=0)
    src = side_corpus(data.pairs, "source")
    tgt = side_corpus(data.pairs, "target")
    src_terms = [c.tokens for c in extract_ngrams(src, data.src_background, max_n=1)]
    tgt_terms = [c.tokens for c in extract_ngrams(tgt, data.tgt_background, max_n=1)]
    weighted = align(data.pairs, src_terms, tgt_terms, src, data.src_background, tgt, data.tgt_background)
    raw = rank_candidates(weighted, by="logl")
    p_w = precision_at_n(weighted, data.gold, 50)
    p_r = precision_at_n(raw, data.gold, 50)
    elapsed = time.perf_counter() - t0
    _report(8, "termhood-weighted P@50 vs raw LogL", p_w >= p_r and p_w >= 0.9,
            f"weighted={p_w:.2f}, raw={p_r:.2f}", elapsed, 120)


def test_criterion_09_precision_at_500(tmp_path, capsys):
    t0 = time.perf_counter()
    ranked = [(f"c{i}", f"e{i}") for i in range(600)]
    rng = np.random.default_rng(9)
    # 342 correct among the first 500; pairs past the cutoff are all correct and must not count
    correct = set(rng.choice(500, size=342, replace=False).tolist()) | set(range(500, 600))
    gold = {p: i in correct for i, p in enumerate(ranked)}
    direct = precision_at_n(ranked, gold, 500)
    cands = tmp_path / "cands.tsv"
    cands.write_text("c\te\n" + "".join(f"{c}\t{e}\n" for c, e in ranked), encoding="utf-8")
    gold_file = tmp_path / "gold.tsv"
    gold_file.write_text("".join(f"{c}\t{e}\t{int(v)}\n" for (c, e), v in gold.items()), encoding="utf-8")
    code = main(["eval-align", "--candidates", str(cands), "--gold", str(gold_file), "-n", "500"])
    printed = capsys.readouterr().out.strip()
    elapsed = time.perf_counter() - t0
    ok = len(correct) == 442 and direct == 0.684 and code == 0 and printed == "P@500\t0.6840"
    _report(9, "P@500 with 342 correct", ok, f"{direct} / CLI prints {printed!r}", elapsed, 1)


def _pipeline(d, capsys):
    """Run every CLI stage once and return the bytes of every output."""
    args = [
        ["stats", "--corpus", f"dom={d / 'dom.col'}", "--background", d / "bg.col", "-o", d / "stats.tsv"],
        ["termhood", "--domain", d / "dom.col", "--background", d / "bg.col", "-o", d / "th.tsv"],
        ["features", "--corpus", d / "dom.col", "--background", d / "bg.col", "-o", d / "f.tsv"],
        ["train", "--input", d / "f.tsv", "--max-iterations", 30, "-o", d / "m.json"],
        ["tag", "--model", d / "m.json", "--input", d / "f.tsv", "-o", d / "t.tsv"],
        ["eval", "--system", d / "t.tsv", "--gold", d / "f.tsv", "-o", d / "e.tsv"],
        ["xval", "--input", d / "f.tsv", "--k", 3, "--max-iterations", 20, "-o", d / "x.tsv"],
        ["ngram", "--corpus", d / "dom.col", "--background", d / "bg.col", "-o", d / "n.tsv"],
        ["align", "--src", d / "src.txt", "--tgt", d / "tgt.txt", "--src-background", d / "sbg.txt",
         "--tgt-background", d / "tbg.txt", "--max-n", 1, "-o", d / "a.tsv"],
        ["eval-align", "--candidates", d / "a.tsv", "--gold", d / "gold.tsv", "-n", 20, "-o", d / "p.tsv"],
    ]
    out = {}
    for a in args:
        code = main([str(x) for x in a])
        assert code == 0, a[0]
        out[a[0] + ":stdout"] = capsys.readouterr().out.encode()
    for f in sorted(d.iterdir()):
        out[f.name] = f.read_bytes()
    return out


def test_criterion_10_determinism(tmp_path, capsys):
    ext = make_extraction_data(n_sentences=60, seed=3, n_background=200)
    write_column_corpus(ext.domain, tmp_path / "dom.col")
    write_column_corpus(ext.background, tmp_path / "bg.col")
    al = make_alignment_data(n_pairs=200, seed=3, n_background=200)
    lines = lambda sents: "".join(" ".join(s.words) + "\n" for s in sents)
    (tmp_path / "src.txt").write_text(lines(p.source for p in al.pairs), encoding="utf-8")
    (tmp_path / "tgt.txt").write_text(lines(p.target for p in al.pairs), encoding="utf-8")
    (tmp_path / "sbg.txt").write_text(lines(al.src_background), encoding="utf-8")
    (tmp_path / "tbg.txt").write_text(lines(al.tgt_background), encoding="utf-8")
    (tmp_path / "gold.tsv").write_text("".join(f"{c}\t{e}\t1\n" for c, e in al.gold), encoding="utf-8")

    first = _pipeline(tmp_path, capsys)
    second = _pipeline(tmp_path, capsys)
    differing = sorted(k for k in first if first[k] != second.get(k))
    stages = len([k for k in first if k.endswith(":stdout")])
    _report(10, "byte-identical reruns", not differing and first.keys() == second.keys(),
            f"{stages} stages, {len(first)} artifacts compared, differing: {differing or 'none'}")
