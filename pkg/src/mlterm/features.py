"""Per-token candidate-term features and their discretisation.

Sixteen features per token: the word and its length, POS and sentence
length, the word's frequency and rank in both corpora, the same values summed
over the enclosing sentence, and the domain-minus-background differences.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from .corpus import HEADER_PREFIX, Corpus, read_column_blocks
from .errors import ConfigError, CorpusFormatError, LabelError
from .termhood import TermhoodTable, sentence_termhood

FEATURE_NAMES = (
    "word", "len", "pos", "count",
    "freq_d", "freq_b", "rank_d", "rank_b",
    "freq_sen_d", "freq_sen_b", "rank_sen_d", "rank_sen_b",
    "delta_freq", "delta_rank", "delta_freq_sen", "delta_rank_sen",
)
CATEGORICAL = ("word", "len", "pos", "count")
NUMERIC = tuple(n for n in FEATURE_NAMES if n not in CATEGORICAL)
_INT_COLUMNS = ("len", "count")

DISPLAY_NAMES = dict(zip(FEATURE_NAMES, (
    "Word", "Len", "POS", "Count",
    "Freq_D", "Freq_B", "Rank_D", "Rank_B",
    "Freq_Sen_D", "Freq_Sen_B", "Rank_Sen_D", "Rank_Sen_B",
    "ΔFreq", "ΔRank", "ΔFreq_Sen", "ΔRank_Sen",
)))


def _key(name: str) -> str:
    k = "".join(name.split()).lower().replace("_", "").replace("+", ",")
    return k.replace("δ", "d").replace("delta", "d")


_ALIASES = {_key(n): n for n in FEATURE_NAMES}
_ALIASES.update({_key(d): n for n, d in DISPLAY_NAMES.items()})

# Named feature groups. Termhood groups sit on top of Word and POS; the bare
# baseline is Word alone.
_WP = ("word", "pos")
FEATURE_GROUPS: dict[str, tuple[tuple[str, ...], bool]] = {
    "Word": (("word",), False),
    "No Measurement of Termhood": (("word",), False),
    "Word,POS": (_WP, False),
    "Word,Freq_D,Freq_B": (("word", "freq_d", "freq_b"), False),
    "Word,Freq_D,Freq_B,POS": (_WP + ("freq_d", "freq_b"), False),
    "Word,ΔFreq,ΔFreq_Sen,POS": (_WP + ("delta_freq", "delta_freq_sen"), False),
    "Word,Freq_D,Freq_B,ΔFreq,ΔRank,POS": (_WP + ("freq_d", "freq_b", "delta_freq", "delta_rank"), False),
    "Word,ΔFreq,ΔRank,ΔFreq_Sen,ΔRank_Sen,POS": (
        _WP + ("delta_freq", "delta_rank", "delta_freq_sen", "delta_rank_sen"), False),
    "Freq_D,Freq_B": (_WP + ("freq_d", "freq_b"), False),
    "Rank_D,Rank_B": (_WP + ("rank_d", "rank_b"), False),
    "Freq_D,Freq_B,Rank_D,Rank_B": (_WP + ("freq_d", "freq_b", "rank_d", "rank_b"), False),
    "ΔFreq": (_WP + ("delta_freq",), False),
    "ΔRank": (_WP + ("delta_rank",), False),
    "Number-intensified ΔRank": (_WP + ("delta_rank",), True),
    "ΔFreq,ΔFreq_Sen": (_WP + ("delta_freq", "delta_freq_sen"), False),
    "ΔRank,ΔRank_Sen": (_WP + ("delta_rank", "delta_rank_sen"), False),
    "Freq_D,Freq_B,ΔFreq,ΔRank": (_WP + ("freq_d", "freq_b", "delta_freq", "delta_rank"), False),
    "Rank_D,Rank_B,ΔFreq,ΔRank": (_WP + ("rank_d", "rank_b", "delta_freq", "delta_rank"), False),
    "ΔFreq,ΔRank,ΔFreq_Sen,ΔRank_Sen": (
        _WP + ("delta_freq", "delta_rank", "delta_freq_sen", "delta_rank_sen"), False),
    "all": (FEATURE_NAMES, False),
}
_GROUP_KEYS = {_key(g): g for g in FEATURE_GROUPS}


@dataclass(frozen=True)
class FeatureConfig:
    """Which of the sixteen features to emit.

    ``intensify_rank`` puts the count-weighted rank difference in the
    ``delta_rank`` column.
    """

    columns: tuple[str, ...] = FEATURE_NAMES
    intensify_rank: bool = False

    def __post_init__(self):
        unknown = [c for c in self.columns if c not in FEATURE_NAMES]
        if unknown:
            raise ConfigError(f"unknown feature(s): {unknown}")
        if not self.columns:
            raise ConfigError("no features selected")
        # canonical order, no duplicates
        object.__setattr__(
            self, "columns", tuple(n for n in FEATURE_NAMES if n in set(self.columns))
        )

    @classmethod
    def parse(cls, spec: str) -> "FeatureConfig":
        """Accept a preset group name or a comma-separated list of feature names."""
        group = _GROUP_KEYS.get(_key(spec))
        if group is not None:
            cols, intensify = FEATURE_GROUPS[group]
            return cls(cols, intensify)
        cols = []
        for part in spec.replace("+", ",").split(","):
            if not part.strip():
                continue
            name = _ALIASES.get(_key(part))
            if name is None:
                raise ConfigError(f"unknown feature {part.strip()!r}")
            cols.append(name)
        return cls(tuple(cols))


@dataclass
class FeatureRow:
    word: str | None = None
    len: int | None = None
    pos: str | None = None
    count: int | None = None
    freq_d: float | None = None
    freq_b: float | None = None
    rank_d: float | None = None
    rank_b: float | None = None
    freq_sen_d: float | None = None
    freq_sen_b: float | None = None
    rank_sen_d: float | None = None
    rank_sen_b: float | None = None
    delta_freq: float | None = None
    delta_rank: float | None = None
    delta_freq_sen: float | None = None
    delta_rank_sen: float | None = None
    label: str | None = None


@dataclass
class FeatureMatrix:
    columns: tuple[str, ...]
    sentences: list[list[FeatureRow]] = field(default_factory=list)

    def __len__(self):
        return len(self.sentences)

    @property
    def n_rows(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def labeled(self) -> bool:
        return all(r.label is not None for s in self.sentences for r in s)

    def labels(self) -> list[list[str | None]]:
        return [[r.label for r in s] for s in self.sentences]

    def subset(self, indices: Iterable[int]) -> "FeatureMatrix":
        return FeatureMatrix(self.columns, [self.sentences[i] for i in indices])

    def with_labels(self, labels: Sequence[Sequence[str]]) -> "FeatureMatrix":
        out = []
        for rows, labs in zip(self.sentences, labels):
            new = []
            for r, lab in zip(rows, labs):
                d = {f.name: getattr(r, f.name) for f in fields(FeatureRow)}
                d["label"] = lab
                new.append(FeatureRow(**d))
            out.append(new)
        return FeatureMatrix(self.columns, out)


def extract_features(corpus: Corpus, table: TermhoodTable, config: FeatureConfig = FeatureConfig()) -> FeatureMatrix:
    cols = set(config.columns)
    sentences = []
    for sent in corpus:
        if not len(sent):
            continue
        st = sentence_termhood(sent, table)
        n = len(sent)
        rows = []
        for i, tok in enumerate(sent.tokens):
            rec = table[tok.surface]
            full = dict(
                word=tok.surface,
                len=len(tok.surface),
                pos=tok.pos or "_",
                count=n,
                freq_d=rec.f_d,
                freq_b=rec.f_b,
                rank_d=rec.r_d,
                rank_b=rec.r_b,
                freq_sen_d=st.freq_sen_d,
                freq_sen_b=st.freq_sen_b,
                rank_sen_d=st.rank_sen_d,
                rank_sen_b=st.rank_sen_b,
                delta_freq=rec.delta_f,
                delta_rank=rec.delta_r_c if config.intensify_rank else rec.delta_r,
                delta_freq_sen=st.delta_freq_sen,
                delta_rank_sen=st.delta_rank_sen,
            )
            row = FeatureRow(**{k: v for k, v in full.items() if k in cols})
            row.label = sent.labels[i] if sent.labels is not None else None
            rows.append(row)
        sentences.append(rows)
    return FeatureMatrix(config.columns, sentences)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_feature_matrix(matrix: FeatureMatrix, path, header: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for h in header:
            f.write(f"{HEADER_PREFIX} {h}\n")
        f.write(f"{HEADER_PREFIX} columns={','.join(matrix.columns)}\n")
        for rows in matrix.sentences:
            for r in rows:
                vals = [_fmt(getattr(r, c)) for c in matrix.columns]
                if r.label is not None:
                    vals.append(r.label)
                f.write("\t".join(vals) + "\n")
            f.write("\n")


def read_feature_matrix(path, columns: Sequence[str] | None = None) -> FeatureMatrix:
    if columns is None:
        with open(path, encoding="utf-8") as f:
            for line in f:
                if not line.startswith(HEADER_PREFIX):
                    break
                body = line[len(HEADER_PREFIX):].strip()
                if body.startswith("columns="):
                    columns = tuple(body[len("columns="):].split(","))
        if columns is None:
            raise CorpusFormatError(f"{path}: no columns header and no columns given")
    columns = FeatureConfig(tuple(columns)).columns
    k = len(columns)
    sentences = []
    for block in read_column_blocks(path):
        rows = []
        for vals in block:
            if len(vals) not in (k, k + 1):
                raise CorpusFormatError(f"{path}: expected {k} or {k + 1} columns, got {len(vals)}")
            row = FeatureRow()
            for c, v in zip(columns, vals):
                if c in _INT_COLUMNS:
                    v = int(v)
                elif c in NUMERIC:
                    v = float(v)
                setattr(row, c, v)
            if len(vals) == k + 1:
                if vals[-1] not in ("B", "I", "O"):
                    raise LabelError(f"{path}: label {vals[-1]!r} outside B/I/O")
                row.label = vals[-1]
            rows.append(row)
        sentences.append(rows)
    return FeatureMatrix(columns, sentences)


@dataclass(frozen=True)
class Binner:
    """Quantile bin boundaries per numeric feature.

    Bin ``k`` is the half-open interval ``[b[k-1], b[k])``; values outside the
    fitted range fall into the edge bins.
    """

    boundaries: dict[str, tuple[float, ...]]
    bin_count: int = 16

    def to_dict(self) -> dict:
        return {"bin_count": self.bin_count,
                "boundaries": {k: list(v) for k, v in self.boundaries.items()}}

    @classmethod
    def from_dict(cls, d: dict) -> "Binner":
        return cls({k: tuple(v) for k, v in d["boundaries"].items()}, d["bin_count"])


def fit_binner(matrix: FeatureMatrix, bin_count: int = 16) -> Binner:
    if bin_count < 2:
        raise ConfigError(f"bin_count must be >= 2, got {bin_count}")
    qs = np.arange(1, bin_count) / bin_count
    bounds = {}
    for col in matrix.columns:
        if col not in NUMERIC:
            continue
        values = np.sort(np.array([getattr(r, col) for s in matrix.sentences for r in s], dtype=float))
        if values.size == 0:
            bounds[col] = ()
            continue
        cuts = np.unique(np.quantile(values, qs))
        bounds[col] = tuple(float(c) for c in cuts if c > values[0])
    return Binner(bounds, bin_count)


def bin_value(binner: Binner, feature: str, value: float) -> int:
    try:
        b = binner.boundaries[feature]
    except KeyError:
        raise ConfigError(f"binner has no feature {feature!r}") from None
    return bisect.bisect_right(b, value)


def observations(matrix: FeatureMatrix, binner: Binner | None) -> list[list[dict[str, str]]]:
    """String-valued observations per token; numeric columns become bin ids."""
    out = []
    numeric = [c for c in matrix.columns if c in NUMERIC]
    if numeric and binner is None:
        raise ConfigError("numeric features need a fitted binner")
    for rows in matrix.sentences:
        sent = []
        for r in rows:
            obs = {}
            for c in matrix.columns:
                v = getattr(r, c)
                obs[c] = f"q{bin_value(binner, c, v)}" if c in NUMERIC else str(v)
            sent.append(obs)
        out.append(sent)
    return out
