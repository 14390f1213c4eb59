"""Bilingual term alignment: co-occurrence G^2 reweighted by termhood."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, SentencePair
from .errors import ConfigError, EvaluationError, InputError
from .eval import decode_spans
from .ngram import unit_delta_f

EPSILON = 1e-9

Term = tuple[str, ...]


@dataclass(frozen=True)
class PairContingency:
    k11: int
    k12: int
    k21: int
    k22: int

    @property
    def n(self) -> int:
        return self.k11 + self.k12 + self.k21 + self.k22


@dataclass(frozen=True)
class AlignmentCandidate:
    source: Term
    target: Term
    table: PairContingency
    logl: float
    termhood_c: float
    termhood_e: float
    association: float

    @property
    def key(self) -> tuple[str, str]:
        return " ".join(self.source), " ".join(self.target)


def _present(words: Sequence[str], terms: set, lengths: Sequence[int]) -> set:
    found = set()
    for n in lengths:
        for i in range(len(words) - n + 1):
            g = tuple(words[i:i + n])
            if g in terms:
                found.add(g)
    return found


def cooccurrence_counts(
    pairs: Sequence[SentencePair],
    src_terms: Iterable[Sequence[str]],
    tgt_terms: Iterable[Sequence[str]],
    min_cooc: int = 2,
) -> dict[tuple[Term, Term], PairContingency]:
    """2x2 tables of sentence-pair presence for every (source, target) term pair
    co-occurring in at least ``min_cooc`` pairs. Terms match contiguously."""
    src = {tuple(t) for t in src_terms}
    tgt = {tuple(t) for t in tgt_terms}
    src_lens = sorted({len(t) for t in src})
    tgt_lens = sorted({len(t) for t in tgt})
    n_src: Counter = Counter()
    n_tgt: Counter = Counter()
    both: Counter = Counter()
    for p in pairs:
        cs = _present(p.source.words, src, src_lens)
        es = _present(p.target.words, tgt, tgt_lens)
        n_src.update(cs)
        n_tgt.update(es)
        for c in cs:
            for e in es:
                both[c, e] += 1
    n = len(pairs)
    out = {}
    for (c, e), k11 in sorted(both.items()):
        if k11 < min_cooc:
            continue
        k12 = n_src[c] - k11
        k21 = n_tgt[e] - k11
        out[c, e] = PairContingency(k11, k12, k21, n - k11 - k12 - k21)
    return out


def log_likelihood_ratio(t: PairContingency) -> float:
    """Log-likelihood ratio G^2 = 2 * sum k_ij ln(k_ij / E_ij); empty cells contribute 0."""
    n = t.n
    if n <= 0:
        raise InputError("contingency table is empty")
    rows = (t.k11 + t.k12, t.k21 + t.k22)
    cols = (t.k11 + t.k21, t.k12 + t.k22)
    cells = ((t.k11, 0, 0), (t.k12, 0, 1), (t.k21, 1, 0), (t.k22, 1, 1))
    g = 0.0
    for k, i, j in cells:
        if k:
            g += k * math.log(k * n / (rows[i] * cols[j]))
    return max(0.0, 2.0 * g)


def clamp_termhood(value: float, eps: float = EPSILON) -> float:
    return max(value, eps)


def termhood_weighted_association(raw: float, termhood_c: float, termhood_e: float) -> float:
    """Association divided by the larger termhood ratio and scaled by both termhoods."""
    ratio = max(termhood_e / termhood_c, termhood_c / termhood_e)
    return raw / ratio * (termhood_c * termhood_e)


def score_candidates(
    tables: Mapping[tuple[Term, Term], PairContingency],
    src_termhood: Mapping[Term, float],
    tgt_termhood: Mapping[Term, float],
    eps: float = EPSILON,
    ratio_cap: float | None = None,
) -> list[AlignmentCandidate]:
    """Score every table. ``ratio_cap`` drops pairs whose termhood ratio exceeds it."""
    out = []
    for (c, e), t in tables.items():
        tc = clamp_termhood(src_termhood.get(c, 0.0), eps)
        te = clamp_termhood(tgt_termhood.get(e, 0.0), eps)
        if ratio_cap is not None and max(tc, te) / min(tc, te) > ratio_cap:
            continue
        g2 = log_likelihood_ratio(t)
        out.append(AlignmentCandidate(c, e, t, g2, tc, te, termhood_weighted_association(g2, tc, te)))
    return out


def rank_candidates(
    candidates: Iterable[AlignmentCandidate],
    theta: float | None = None,
    top_k: int | None = None,
    by: str = "association",
) -> list[AlignmentCandidate]:
    """Descending score, ties by raw G^2 then (source, target) text.

    ``theta`` keeps scores >= theta; ``top_k`` truncates. ``by='logl'`` ranks
    on the unweighted statistic.
    """
    if by not in ("association", "logl"):
        raise ConfigError(f"unknown ranking key {by!r}")
    ranked = sorted(candidates, key=lambda a: (-getattr(a, by), -a.logl, a.key))
    if theta is not None:
        ranked = [a for a in ranked if getattr(a, by) >= theta]
    if top_k is not None:
        ranked = ranked[:top_k]
    return ranked


def precision_at_n(ranked: Sequence, gold: Mapping[tuple[str, str], bool], n: int) -> float:
    """Share of correct pairs among the first ``n``; pairs missing from gold count as wrong."""
    if n <= 0:
        raise EvaluationError("n must be positive")
    if n > len(ranked):
        raise EvaluationError(f"P@{n} requested but only {len(ranked)} ranked pairs")
    hits = 0
    for item in ranked[:n]:
        key = item.key if isinstance(item, AlignmentCandidate) else tuple(item)
        hits += bool(gold.get(key, False))
    return hits / n


def termhoods(terms: Iterable[Term], domain: Corpus, background: Corpus) -> dict[Term, float]:
    return unit_delta_f(terms, domain, background)


def align(
    pairs: Sequence[SentencePair],
    src_terms: Iterable[Sequence[str]],
    tgt_terms: Iterable[Sequence[str]],
    src_domain: Corpus,
    src_background: Corpus,
    tgt_domain: Corpus,
    tgt_background: Corpus,
    min_cooc: int = 2,
    eps: float = EPSILON,
    ratio_cap: float | None = None,
) -> list[AlignmentCandidate]:
    """Count, score and rank term pairs, each side's termhood taken from its
    own domain/background corpora."""
    src_terms = {tuple(t) for t in src_terms}
    tgt_terms = {tuple(t) for t in tgt_terms}
    tables = cooccurrence_counts(pairs, src_terms, tgt_terms, min_cooc)
    tc = termhoods({c for c, _ in tables}, src_domain, src_background)
    te = termhoods({e for _, e in tables}, tgt_domain, tgt_background)
    return rank_candidates(score_candidates(tables, tc, te, eps, ratio_cap))


def terms_from_labels(sentences: Sequence[Sequence[str]], labels: Sequence[Sequence[str]]) -> set[Term]:
    """Term strings covered by BIO spans."""
    out = set()
    for k, (words, labs) in enumerate(zip(sentences, labels)):
        for sp in decode_spans(labs, k):
            out.add(tuple(words[sp.start:sp.end]))
    return out


def candidates_tsv(cands: Sequence[AlignmentCandidate]) -> str:
    lines = ["c\te\tk11\tk12\tk21\tk22\tLogL\tTc\tTe\tassociation"]
    for a in cands:
        t = a.table
        c, e = a.key
        lines.append(f"{c}\t{e}\t{t.k11}\t{t.k12}\t{t.k21}\t{t.k22}\t{a.logl!r}\t"
                     f"{a.termhood_c!r}\t{a.termhood_e!r}\t{a.association!r}")
    return "\n".join(lines) + "\n"


def _tsv_rows(path):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        yield line.split("\t")


def read_ranked_pairs(path) -> list[tuple[str, str]]:
    """(c, e) pairs in file order from a candidate TSV."""
    rows = list(_tsv_rows(path))
    if rows and rows[0][:2] == ["c", "e"]:
        rows = rows[1:]
    bad = [r for r in rows if len(r) < 2]
    if bad:
        raise InputError(f"{path}: malformed candidate row {bad[0]}")
    return [(r[0], r[1]) for r in rows]


def read_gold_pairs(path) -> dict[tuple[str, str], bool]:
    gold = {}
    for r in _tsv_rows(path):
        if len(r) != 3 or r[2] not in ("0", "1"):
            if r[:2] == ["c", "e"]:
                continue
            raise InputError(f"{path}: gold rows need c, e, 0|1 (got {r})")
        gold[r[0], r[1]] = r[2] == "1"
    return gold
