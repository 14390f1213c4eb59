"""Word- and sentence-level termhood by domain/background corpus comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import (
    Corpus,
    FrequencyTable,
    RankTable,
    Sentence,
    build_frequency_table,
    build_rank_table,
)


@dataclass(frozen=True)
class TermhoodRecord:
    word: str
    c_d: int
    c_b: int
    f_d: float
    f_b: float
    r_d: float
    r_b: float

    @property
    def delta_f(self) -> float:
        return self.f_d - self.f_b

    @property
    def delta_r(self) -> float:
        return self.r_d - self.r_b

    @property
    def delta_r_c(self) -> float:
        return self.c_d * (self.r_d - self.r_b)


class TermhoodTable:
    """Termhood records over the union of the domain and background vocabularies.

    Lookups of words outside both vocabularies return an all-zero record.
    """

    def __init__(self, domain: FrequencyTable, background: FrequencyTable):
        self.domain = domain
        self.background = background
        self.domain_ranks: RankTable = build_rank_table(domain)
        self.background_ranks: RankTable = build_rank_table(background)
        words = set(domain.counts) | set(background.counts)
        self.records = {w: self._make(w) for w in sorted(words)}

    @classmethod
    def from_corpora(cls, domain: Corpus, background: Corpus) -> "TermhoodTable":
        return cls(build_frequency_table(domain), build_frequency_table(background))

    def _make(self, w: str) -> TermhoodRecord:
        return TermhoodRecord(
            w,
            self.domain[w],
            self.background[w],
            relative_frequency(self.domain, w),
            relative_frequency(self.background, w),
            self.domain_ranks[w],
            self.background_ranks[w],
        )

    def __getitem__(self, word: str) -> TermhoodRecord:
        rec = self.records.get(word)
        if rec is None:
            rec = TermhoodRecord(word, 0, 0, 0.0, 0.0, 0.0, 0.0)
        return rec

    def __contains__(self, word):
        return word in self.records

    def __len__(self):
        return len(self.records)

    def sorted_records(self) -> list[TermhoodRecord]:
        """Descending delta_f, ties broken by word."""
        return sorted(self.records.values(), key=lambda r: (-r.delta_f, r.word))


def relative_frequency(freq: FrequencyTable, word: str) -> float:
    if freq.total == 0:
        return 0.0
    return freq[word] / freq.total


def freq_difference(table: TermhoodTable, word: str) -> float:
    return table[word].delta_f


def rank_difference(table: TermhoodTable, word: str) -> float:
    return table[word].delta_r


def intensified_rank_difference(table: TermhoodTable, word: str) -> float:
    return table[word].delta_r_c


@dataclass(frozen=True)
class SentenceTermhood:
    freq_sen_d: float
    freq_sen_b: float
    rank_sen_d: float
    rank_sen_b: float
    delta_freq_sen: float
    delta_rank_sen: float
    mean_delta_f: float
    count_sen_d: int = 0
    count_sen_b: int = 0


def sentence_termhood(sentence: Sentence, table: TermhoodTable) -> SentenceTermhood:
    """Sums over every token of the sentence, duplicates included."""
    fd = fb = rd = rb = dfs = drs = 0.0
    cd = cb = 0
    for tok in sentence.tokens:
        rec = table[tok.surface]
        fd += rec.f_d
        fb += rec.f_b
        rd += rec.r_d
        rb += rec.r_b
        dfs += rec.delta_f
        drs += rec.delta_r
        cd += rec.c_d
        cb += rec.c_b
    n = len(sentence.tokens)
    return SentenceTermhood(fd, fb, rd, rb, dfs, drs, dfs / n if n else 0.0, cd, cb)


@dataclass(frozen=True)
class ReportRow:
    name: str
    sentences: int
    avg_freq_d: float
    avg_freq_b: float
    avg_count_d: float
    avg_count_b: float
    mean_termhood: float


def corpus_termhood_report(
    corpora: Sequence[tuple[str, Corpus]],
    background: Corpus,
    domain: Corpus | None = None,
) -> list[ReportRow]:
    """One row per named corpus, sorted by descending mean sentence termhood.

    Each corpus is compared with ``background``; when ``domain`` is given it
    supplies the domain-side statistics for every corpus instead of the
    corpus itself.
    """
    bg = build_frequency_table(background)
    shared = TermhoodTable(build_frequency_table(domain), bg) if domain is not None else None
    rows = []
    for name, corpus in corpora:
        table = shared if shared is not None else TermhoodTable(build_frequency_table(corpus), bg)
        sts = [sentence_termhood(s, table) for s in corpus if len(s)]
        n = len(sts)
        if n == 0:
            rows.append(ReportRow(name, 0, 0.0, 0.0, 0.0, 0.0, 0.0))
            continue
        rows.append(ReportRow(
            name,
            n,
            sum(s.freq_sen_d for s in sts) / n,
            sum(s.freq_sen_b for s in sts) / n,
            sum(s.count_sen_d for s in sts) / n,
            sum(s.count_sen_b for s in sts) / n,
            sum(s.mean_delta_f for s in sts) / n,
        ))
    rows.sort(key=lambda r: (-r.mean_termhood, r.name))
    return rows
