"""N-gram term candidate baseline ranked by frequency difference."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Collection, Iterable, Sequence

from .corpus import Corpus
from .errors import ConfigError

NOUN_PREFIXES = ("n", "N")


@dataclass(frozen=True)
class NGramCandidate:
    tokens: tuple[str, ...]
    count: int
    background_count: int
    score: float

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def ngram_counts(corpus: Corpus | Iterable, max_n: int, keep: Collection | None = None):
    """Counts of every contiguous n-gram (n <= max_n) within sentences, and
    the number of n-gram positions per order."""
    counts: Counter = Counter()
    totals = [0] * (max_n + 1)
    for sent in corpus:
        words = sent.words
        L = len(words)
        for n in range(1, max_n + 1):
            if L < n:
                break
            totals[n] += L - n + 1
            for i in range(L - n + 1):
                g = tuple(words[i:i + n])
                if keep is None or g in keep:
                    counts[g] += 1
    return counts, totals


def unit_delta_f(terms: Iterable[Sequence[str]], domain: Corpus, background: Corpus) -> dict:
    """Frequency difference of each term counted as a single unit.

    An n-gram's relative frequency is its count over the number of n-gram
    positions of the same order, which reduces to plain relative frequency
    for single words.
    """
    terms = {tuple(t) for t in terms}
    if not terms:
        return {}
    max_n = max(len(t) for t in terms)
    cd, td = ngram_counts(domain, max_n, terms)
    cb, tb = ngram_counts(background, max_n, terms)
    out = {}
    for t in terms:
        n = len(t)
        fd = cd[t] / td[n] if td[n] else 0.0
        fb = cb[t] / tb[n] if tb[n] else 0.0
        out[t] = fd - fb
    return out


def extract_ngrams(
    corpus: Corpus,
    background: Corpus,
    max_n: int = 4,
    min_count: int = 2,
    stoplist: Collection[str] = frozenset(),
    noun_final: bool | None = None,
    noun_prefixes: Sequence[str] = NOUN_PREFIXES,
) -> list[NGramCandidate]:
    """Ranked n-gram candidates.

    Candidates may not start or end with a stopword. With ``noun_final`` the
    last token's POS must start with one of ``noun_prefixes``; the default
    (None) applies that filter only when the corpus carries POS tags. Ranking
    is by descending unit frequency difference, then count, then text.
    """
    if max_n < 1 or min_count < 1:
        raise ConfigError("max_n and min_count must be >= 1")
    if noun_final is None:
        noun_final = any(t.pos for s in corpus for t in s.tokens)
    counts: Counter = Counter()
    pos_ok: dict[tuple, bool] = {}
    for sent in corpus:
        words = sent.words
        for n in range(1, max_n + 1):
            for i in range(len(words) - n + 1):
                g = tuple(words[i:i + n])
                if g[0] in stoplist or g[-1] in stoplist:
                    continue
                counts[g] += 1
                if noun_final:
                    last = sent.tokens[i + n - 1].pos
                    ok = bool(last) and last.startswith(tuple(noun_prefixes))
                    pos_ok[g] = pos_ok.get(g, False) or ok
    kept = {g for g, c in counts.items() if c >= min_count and (not noun_final or pos_ok.get(g))}
    if not kept:
        return []
    _, td = ngram_counts(corpus, max_n, ())
    cb, tb = ngram_counts(background, max_n, kept)
    out = []
    for g in kept:
        n = len(g)
        fd = counts[g] / td[n]
        fb = cb[g] / tb[n] if tb[n] else 0.0
        out.append(NGramCandidate(g, counts[g], cb[g], fd - fb))
    out.sort(key=lambda c: (-c.score, -c.count, c.text))
    return out


def candidates_tsv(cands: Sequence[NGramCandidate]) -> str:
    lines = ["candidate\tlength\tcount_d\tcount_b\tdelta_f"]
    for c in cands:
        lines.append(f"{c.text}\t{len(c.tokens)}\t{c.count}\t{c.background_count}\t{c.score!r}")
    return "\n".join(lines) + "\n"
