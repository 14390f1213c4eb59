"""Seeded synthetic corpora with planted terminology, for trend checks and benchmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Sentence, SentencePair, Token

GENERAL_POS = ("v", "a", "d", "p", "u", "n", "r", "m")


def _zipf(rng, size, s=1.0):
    p = 1.0 / np.arange(1, size + 1) ** s
    return p / p.sum()


@dataclass
class ExtractionData:
    domain: Corpus       # labeled
    background: Corpus


def make_extraction_data(
    n_sentences: int = 1000,
    seed: int = 0,
    n_general: int = 150,
    n_morphemes: int = 1500,
    n_terms: int = 1500,
    n_background: int = 4000,
) -> ExtractionData:
    """Domain sentences of general words with 1-3 planted terms each.

    Terms are 1-3 morphemes that never occur in the background corpus; the
    general vocabulary is shared, so its words are frequent in both corpora.
    POS does not separate the classes: morphemes are tagged ``n`` and so are
    some general words.
    """
    rng = np.random.default_rng(seed)
    general = [f"g{i}" for i in range(n_general)]
    gpos = [GENERAL_POS[i % len(GENERAL_POS)] for i in range(n_general)]
    gp = _zipf(rng, n_general, 0.6)
    morphemes = [f"m{i}" for i in range(n_morphemes)]
    terms = []
    for _ in range(n_terms):
        k = int(rng.choice([1, 2, 3], p=[0.3, 0.5, 0.2]))
        terms.append([morphemes[j] for j in rng.choice(n_morphemes, size=k, replace=False)])
    tp = _zipf(rng, n_terms, 1.0)

    def general_tokens(k):
        idx = rng.choice(n_general, size=k, p=gp)
        return [Token(general[j], gpos[j]) for j in idx]

    sents = []
    for _ in range(n_sentences):
        n_planted = int(rng.integers(1, 4))
        gaps = rng.integers(1, 5, size=n_planted + 1)
        tokens, labels = [], []
        for slot in range(n_planted + 1):
            toks = general_tokens(int(gaps[slot]))
            tokens += toks
            labels += ["O"] * len(toks)
            if slot < n_planted:
                term = terms[int(rng.choice(n_terms, p=tp))]
                tokens += [Token(m, "n") for m in term]
                labels += ["B"] + ["I"] * (len(term) - 1)
        sents.append(Sentence(tokens, labels))
    bg = [Sentence(general_tokens(int(rng.integers(6, 16)))) for _ in range(n_background)]
    return ExtractionData(Corpus(sents, "domain"), Corpus(bg, "background"))


@dataclass
class AlignmentData:
    pairs: list[SentencePair]
    src_background: Corpus
    tgt_background: Corpus
    gold: dict[tuple[str, str], bool]


def make_alignment_data(
    n_pairs: int = 2000,
    seed: int = 0,
    n_term_pairs: int = 80,
    n_general_pairs: int = 25,
    n_filler: int = 200,
    n_background: int = 4000,
) -> AlignmentData:
    """Sentence pairs carrying planted translation pairs of two kinds.

    Term pairs occur only in the parallel (domain) text. General-word pairs
    co-occur even more often but are at least as frequent in each side's
    background corpus, so they have high raw association and low termhood.
    Fillers are drawn independently per side.
    """
    rng = np.random.default_rng(seed)
    term_src = [f"zt{i}" for i in range(n_term_pairs)]
    term_tgt = [f"et{i}" for i in range(n_term_pairs)]
    gen_src = [f"zg{i}" for i in range(n_general_pairs)]
    gen_tgt = [f"eg{i}" for i in range(n_general_pairs)]
    fill_src = [f"zf{i}" for i in range(n_filler)]
    fill_tgt = [f"ef{i}" for i in range(n_filler)]
    tp = _zipf(rng, n_term_pairs, 0.5)
    fp = _zipf(rng, n_filler, 0.8)
    gen_rate = 0.2

    pairs = []
    for _ in range(n_pairs):
        src, tgt = [], []
        for j in rng.choice(n_term_pairs, size=int(rng.integers(1, 3)), replace=False, p=tp):
            src.append(term_src[j])
            tgt.append(term_tgt[j])
        for j in np.flatnonzero(rng.random(n_general_pairs) < gen_rate):
            src.append(gen_src[j])
            tgt.append(gen_tgt[j])
        src += [fill_src[j] for j in rng.choice(n_filler, size=int(rng.integers(3, 8)), p=fp)]
        tgt += [fill_tgt[j] for j in rng.choice(n_filler, size=int(rng.integers(3, 8)), p=fp)]
        rng.shuffle(src)
        rng.shuffle(tgt)
        pairs.append(SentencePair(Sentence.from_words(src), Sentence.from_words(tgt)))

    def background(gen, fill):
        out = []
        for _ in range(n_background):
            words = [gen[j] for j in np.flatnonzero(rng.random(n_general_pairs) < 2 * gen_rate)]
            words += [fill[j] for j in rng.choice(n_filler, size=int(rng.integers(3, 8)), p=fp)]
            out.append(Sentence.from_words(words))
        return Corpus(out, "background")

    gold = {(s, t): True for s, t in zip(term_src, term_tgt)}
    return AlignmentData(pairs, background(gen_src, fill_src), background(gen_tgt, fill_tgt), gold)
