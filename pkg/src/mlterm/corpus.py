"""Tokenized corpora, parallel corpora, and the frequency/rank tables built from them."""

from __future__ import annotations

import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    AlignmentLengthError,
    CorpusFormatError,
    EmptyCorpusError,
    InputError,
    LabelError,
)

log = logging.getLogger(__name__)

BIO = ("B", "I", "O")
ROLES = ("domain", "background")
HEADER_PREFIX = "##"

_WS = re.compile(r"\s")


def normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str = ""

    def __post_init__(self):
        if not self.surface or _WS.search(self.surface):
            raise CorpusFormatError(f"invalid token surface {self.surface!r}")


@dataclass
class Sentence:
    tokens: list[Token]
    labels: list[str] | None = None

    def __post_init__(self):
        if self.labels is not None:
            if len(self.labels) != len(self.tokens):
                raise LabelError(
                    f"{len(self.labels)} labels for {len(self.tokens)} tokens"
                )
            bad = [lab for lab in self.labels if lab not in BIO]
            if bad:
                raise LabelError(f"labels outside B/I/O: {bad[:3]}")

    def __len__(self):
        return len(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @classmethod
    def from_words(cls, words: Iterable[str], labels=None) -> "Sentence":
        return cls([Token(normalize(w)) for w in words], labels)


@dataclass
class Corpus:
    sentences: list[Sentence]
    role: str = "domain"

    def __post_init__(self):
        if self.role not in ROLES:
            raise InputError(f"unknown corpus role {self.role!r}")

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def labeled(self) -> bool:
        return bool(self.sentences) and all(s.labels is not None for s in self.sentences)

    def check_nonempty(self):
        if not self.sentences or self.n_tokens == 0:
            raise EmptyCorpusError("corpus has no tokens")

    @classmethod
    def from_texts(cls, texts: Iterable[str], role: str = "domain") -> "Corpus":
        """Build from whitespace-tokenized strings, one sentence each (no POS)."""
        return cls([Sentence.from_words(t.split()) for t in texts if t.split()], role)


@dataclass(frozen=True)
class FrequencyTable:
    counts: dict[str, int]
    total: int
    vocab_size: int

    def __getitem__(self, word: str) -> int:
        return self.counts.get(word, 0)

    def __contains__(self, word: str) -> bool:
        return word in self.counts


@dataclass(frozen=True)
class RankTable:
    ranks: dict[str, float]
    vocab_size: int

    def __getitem__(self, word: str) -> float:
        return self.ranks.get(word, 0.0)


@dataclass
class SentencePair:
    source: Sentence
    target: Sentence

    def __post_init__(self):
        if not len(self.source) or not len(self.target):
            raise InputError("both sides of a sentence pair must be non-empty")


class ParallelCorpus(list):
    """List of SentencePair; ``skipped`` holds 1-based line numbers dropped as empty."""

    def __init__(self, pairs=(), skipped=()):
        super().__init__(pairs)
        self.skipped = list(skipped)


def build_frequency_table(corpus: Corpus | Iterable[Sentence]) -> FrequencyTable:
    counts = Counter()
    for sent in corpus:
        counts.update(t.surface for t in sent.tokens)
    counts = dict(counts)
    return FrequencyTable(counts, sum(counts.values()), len(counts))


def build_rank_table(freq: FrequencyTable) -> RankTable:
    """Reversed fractional ranks normalised by vocabulary size.

    Word types sorted by ascending count take positions 1..V; a tie group
    shares the mean of its positions. rank = position / V, so the most
    frequent type gets 1.0 and every rank lies in (0, 1].
    """
    by_count: dict[int, list[str]] = {}
    for w, c in freq.counts.items():
        by_count.setdefault(c, []).append(w)
    v = len(freq.counts)
    ranks = {}
    pos = 0
    for c in sorted(by_count):
        group = by_count[c]
        mean_pos = pos + (len(group) + 1) / 2
        for w in group:
            ranks[w] = mean_pos / v
        pos += len(group)
    return RankTable(ranks, v)


def _read_lines(path) -> list[str]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise CorpusFormatError(f"{path}: not valid UTF-8 ({e})") from None
    lines = text.splitlines()
    # leading "##" lines are output headers written by this package
    i = 0
    while i < len(lines) and lines[i].startswith(HEADER_PREFIX):
        i += 1
    return lines[i:]


def read_column_blocks(path) -> list[list[list[str]]]:
    """Split a column file into sentence blocks of whitespace-split rows."""
    blocks, cur = [], []
    for line in _read_lines(path):
        if not line.strip():
            if cur:
                blocks.append(cur)
                cur = []
            continue
        cur.append(line.split())
    if cur:
        blocks.append(cur)
    return blocks


def load_column_corpus(path, role: str = "domain", allow_empty: bool = False) -> Corpus:
    """Read ``token POS [BIO]`` rows; blank lines separate sentences."""
    blocks = read_column_blocks(path)
    widths = {len(row) for block in blocks for row in block}
    if not blocks:
        if allow_empty:
            return Corpus([], role)
        raise EmptyCorpusError(f"{path}: empty corpus")
    if not widths <= {2, 3}:
        raise CorpusFormatError(f"{path}: expected 2 or 3 columns, found widths {sorted(widths)}")
    if len(widths) > 1:
        raise CorpusFormatError(f"{path}: mixes 2- and 3-column lines")
    labeled = widths == {3}
    sentences = []
    for block in blocks:
        tokens = [Token(normalize(row[0]), normalize(row[1])) for row in block]
        labels = [row[2] for row in block] if labeled else None
        sentences.append(Sentence(tokens, labels))
    return Corpus(sentences, role)


def write_column_corpus(corpus: Corpus, path, header: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for h in header:
            f.write(f"{HEADER_PREFIX} {h}\n")
        for sent in corpus:
            for i, tok in enumerate(sent.tokens):
                cols = [tok.surface, tok.pos or "_"]
                if sent.labels is not None:
                    cols.append(sent.labels[i])
                f.write("\t".join(cols) + "\n")
            f.write("\n")


def parse_line(line: str) -> Sentence:
    """Parse one space-tokenized line; ``tok/POS`` is split only when every token has a slash."""
    parts = line.split()
    if parts and all(0 < p.rfind("/") < len(p) - 1 for p in parts):
        tokens = []
        for p in parts:
            word, _, pos = p.rpartition("/")
            tokens.append(Token(normalize(word), normalize(pos)))
        return Sentence(tokens)
    return Sentence([Token(normalize(p)) for p in parts])


def load_line_corpus(path, role: str = "domain", allow_empty: bool = False) -> Corpus:
    """One tokenized sentence per line; blank lines are ignored."""
    sentences = [parse_line(line) for line in _read_lines(path) if line.strip()]
    if not sentences and not allow_empty:
        raise EmptyCorpusError(f"{path}: empty corpus")
    return Corpus(sentences, role)


def load_parallel_corpus(src_path, tgt_path) -> ParallelCorpus:
    src = _read_lines(src_path)
    tgt = _read_lines(tgt_path)
    if len(src) != len(tgt):
        raise AlignmentLengthError(
            f"{src_path} has {len(src)} lines but {tgt_path} has {len(tgt)}"
        )
    pairs, skipped = [], []
    for i, (s, t) in enumerate(zip(src, tgt), start=1):
        if not s.strip() or not t.strip():
            skipped.append(i)
            continue
        pairs.append(SentencePair(parse_line(s), parse_line(t)))
    if skipped:
        log.warning("skipped %d empty sentence pair(s)", len(skipped))
    return ParallelCorpus(pairs, skipped)


def side_corpus(pairs: Sequence[SentencePair], side: str, role: str = "domain") -> Corpus:
    return Corpus([getattr(p, side) for p in pairs], role)
