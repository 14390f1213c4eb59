"""Linear-chain CRF: feature templates, compiled batches, inference and model files."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus import HEADER_PREFIX
from ..errors import ConfigError, InputError, ModelFormatError
from ..features import Binner
from . import _backend, _pykernels

FORMAT = "mlterm-crf"
FORMAT_VERSION = 1
BOS = "__BOS__"
EOS = "__EOS__"


@dataclass(frozen=True)
class TagSet:
    tags: tuple[str, ...] = ("B", "I", "O")

    def __post_init__(self):
        if not self.tags or len(set(self.tags)) != len(self.tags):
            raise ConfigError(f"bad tag set {self.tags}")

    def __len__(self):
        return len(self.tags)

    def index(self, tag: str) -> int:
        try:
            return self.tags.index(tag)
        except ValueError:
            raise InputError(f"tag {tag!r} not in tag set {self.tags}") from None


@dataclass(frozen=True)
class Template:
    """``unigram``: observation x tag. ``bigram``: tag x tag, optionally x observation."""

    kind: str
    column: str | None = None
    offset: int = 0

    def __post_init__(self):
        if self.kind not in ("unigram", "bigram"):
            raise ConfigError(f"unknown template kind {self.kind!r}")
        if self.kind == "unigram" and self.column is None:
            raise ConfigError("unigram template needs a column")

    @property
    def name(self) -> str:
        if self.kind == "bigram" and self.column is None:
            return "B"
        prefix = "U" if self.kind == "unigram" else "B"
        return f"{prefix}:{self.column}@{self.offset}"


def default_templates(columns: Sequence[str],
                      token_window=(-2, -1, 0, 1, 2),
                      numeric_window=(-1, 0, 1)) -> list[Template]:
    out = []
    for col in columns:
        window = token_window if col in ("word", "pos") else numeric_window
        out.extend(Template("unigram", col, off) for off in window)
    out.append(Template("bigram"))
    return out


def expand_features(rows: Sequence[dict[str, str]], templates: Sequence[Template]):
    """Active feature strings per position as ``(state_features, edge_features)``.

    Offsets falling outside the sentence read a boundary sentinel. Position 0
    has no incoming edge, so its edge list is empty.
    """
    n = len(rows)
    for t in templates:
        if t.column is not None and n and t.column not in rows[0]:
            raise ConfigError(f"template {t.name} reads column {t.column!r} which is not emitted")
    out = []
    for i in range(n):
        unis, edges = [], []
        for t in templates:
            if t.kind == "bigram" and i == 0:
                continue
            if t.column is None:
                edges.append(t.name)
                continue
            j = i + t.offset
            val = BOS if j < 0 else EOS if j >= n else rows[j][t.column]
            feat = f"{t.name}={val}"
            (unis if t.kind == "unigram" else edges).append(feat)
        out.append((unis, edges))
    return out


@dataclass
class CompiledBatch:
    sent_ptr: np.ndarray
    u_ptr: np.ndarray
    u_idx: np.ndarray
    e_ptr: np.ndarray
    e_idx: np.ndarray
    labels: np.ndarray

    @property
    def n_sentences(self) -> int:
        return len(self.sent_ptr) - 1


def compile_batch(expanded, index: dict[str, int], n_tags: int,
                  labels=None, grow: bool = False) -> CompiledBatch:
    """Map feature strings to weight blocks. With ``grow``, unseen features get new blocks."""
    T = n_tags
    size = [_index_size(index, T)]
    sent_ptr, u_ptr, u_idx, e_ptr, e_idx, labs = [0], [0], [], [0], [], []

    def lookup(f, width):
        b = index.get(f)
        if b is None and grow:
            b = index[f] = size[0]
            size[0] += width
        return b

    for s, sent in enumerate(expanded):
        for i, (unis, edges) in enumerate(sent):
            for f in unis:
                b = lookup(f, T)
                if b is not None:
                    u_idx.append(b)
            for f in edges:
                b = lookup(f, T * T)
                if b is not None:
                    e_idx.append(b)
            u_ptr.append(len(u_idx))
            e_ptr.append(len(e_idx))
        if labels is not None:
            labs.extend(labels[s])
        sent_ptr.append(len(u_ptr) - 1)
    if labels is None:
        labs = [0] * (len(u_ptr) - 1)
    a = lambda x: np.asarray(x, dtype=np.int64)
    return CompiledBatch(a(sent_ptr), a(u_ptr), a(u_idx), a(e_ptr), a(e_idx), a(labs))


def _block_width(name: str, T: int) -> int:
    return T if name.startswith("U:") else T * T


def _index_size(index: dict[str, int], T: int) -> int:
    if not index:
        return 0
    name, base = max(index.items(), key=lambda kv: kv[1])
    return base + _block_width(name, T)


@dataclass
class CrfModel:
    tagset: TagSet
    templates: list[Template]
    feature_index: dict[str, int]
    weights: np.ndarray
    l2_sigma2: float | None = 10.0
    columns: tuple[str, ...] = ()
    binner: Binner | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if len(self.weights) != _index_size(self.feature_index, len(self.tagset)):
            raise ModelFormatError("weight vector does not match the feature index")

    @property
    def n_tags(self) -> int:
        return len(self.tagset)

    def compile(self, expanded, labels=None) -> CompiledBatch:
        return compile_batch(expanded, self.feature_index, self.n_tags, labels)

    def config_hash(self) -> str:
        cfg = {k: v for k, v in self.meta.get("config", {}).items()}
        return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]

    def save(self, path, header: Sequence[str] = ()) -> None:
        doc = {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "tagset": list(self.tagset.tags),
            "templates": [asdict(t) for t in self.templates],
            "columns": list(self.columns),
            "l2_sigma2": self.l2_sigma2,
            "binner": self.binner.to_dict() if self.binner is not None else None,
            "config_hash": self.config_hash(),
            "meta": self.meta,
            "feature_index": self.feature_index,
            "weights": [float(x) for x in self.weights],
        }
        head = "".join(f"{HEADER_PREFIX} {h}\n" for h in header)
        Path(path).write_text(head + json.dumps(doc, ensure_ascii=False, indent=0) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "CrfModel":
        path = Path(path)
        if not path.is_file():
            raise InputError(f"no such model file: {path}")
        try:
            lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
            doc = json.loads("".join(l for l in lines if not l.startswith(HEADER_PREFIX)))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ModelFormatError(f"{path}: unreadable model ({e})") from None
        if doc.get("format") != FORMAT or doc.get("version") != FORMAT_VERSION:
            raise ModelFormatError(
                f"{path}: expected {FORMAT} v{FORMAT_VERSION}, "
                f"found {doc.get('format')} v{doc.get('version')}"
            )
        binner = Binner.from_dict(doc["binner"]) if doc["binner"] else None
        model = cls(
            TagSet(tuple(doc["tagset"])),
            [Template(**t) for t in doc["templates"]],
            doc["feature_index"],
            np.array(doc["weights"], dtype=np.float64),
            doc["l2_sigma2"],
            tuple(doc["columns"]),
            binner,
            doc["meta"],
        )
        if doc.get("config_hash") != model.config_hash():
            raise ModelFormatError(f"{path}: config hash mismatch")
        return model


@dataclass
class Lattice:
    emit: np.ndarray       # (n, T) state scores
    trans: np.ndarray      # (n-1, T, T) edge scores
    log_alpha: np.ndarray
    log_beta: np.ndarray
    log_z: float

    @property
    def log_z_backward(self) -> float:
        v = self.emit[0] + self.log_beta[0]
        m = v.max()
        return float(m + np.log(np.exp(v - m).sum()))

    def node_marginals(self) -> np.ndarray:
        return np.exp(self.log_alpha + self.log_beta - self.log_z)

    def edge_marginals(self) -> np.ndarray:
        a = self.log_alpha[:-1, :, None]
        b = (self.emit[1:] + self.log_beta[1:])[:, None, :]
        return np.exp(a + self.trans + b - self.log_z)


def lattice_from_potentials(emit, trans) -> Lattice:
    alpha, beta, logz = _pykernels.forward_backward(emit, trans)
    return Lattice(emit, trans, alpha, beta, logz)


def potentials(model: CrfModel, expanded_sentence):
    batch = model.compile([expanded_sentence])
    return _pykernels.potentials(model.weights, model.n_tags, batch.u_ptr, batch.u_idx,
                                 batch.e_ptr, batch.e_idx, 0, len(expanded_sentence))


def forward_backward(model: CrfModel, expanded_sentence) -> Lattice:
    return lattice_from_potentials(*potentials(model, expanded_sentence))


def viterbi(model: CrfModel, expanded_sentence, backend: str | None = None):
    """Best tag sequence and its score. Ties go to the lowest tag index."""
    if not expanded_sentence:
        return [], 0.0
    batch = model.compile([expanded_sentence])
    out = np.zeros(len(expanded_sentence), dtype=np.int64)
    scores = _backend.get(backend).batch_viterbi(
        model.weights, model.n_tags, batch.sent_ptr, batch.u_ptr, batch.u_idx,
        batch.e_ptr, batch.e_idx, out)
    return [model.tagset.tags[k] for k in out], float(scores[0])


def penalized_objective(w, n_tags, batch: CompiledBatch, sigma2, backend=None):
    """Penalised log-likelihood and its gradient for a compiled labeled batch."""
    kern = _backend.get(backend)
    grad = np.zeros_like(w)
    ll = kern.batch_loglik_grad(w, n_tags, batch.sent_ptr, batch.u_ptr, batch.u_idx,
                                batch.e_ptr, batch.e_idx, batch.labels, grad)
    if sigma2 is not None and np.isfinite(sigma2):
        ll -= float(w @ w) / (2.0 * sigma2)
        grad -= w / sigma2
    return ll, grad


def log_likelihood_and_gradient(model: CrfModel, batch, backend: str | None = None):
    """``batch`` is a list of ``(expanded_sentence, tag_list)``; every sentence must be labeled."""
    from ..errors import TrainingDataError

    expanded, labels = [], []
    for exp_sent, labs in batch:
        if labs is None or any(t is None for t in labs):
            raise TrainingDataError("unlabeled sentence in training batch")
        expanded.append(exp_sent)
        labels.append([model.tagset.index(t) for t in labs])
    compiled = model.compile(expanded, labels)
    return penalized_objective(model.weights, model.n_tags, compiled, model.l2_sigma2, backend)
