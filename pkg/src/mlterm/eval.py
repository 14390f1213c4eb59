"""Exact-span precision/recall/F1 and k-fold cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, EvaluationError
from .features import FeatureMatrix


@dataclass(frozen=True, order=True)
class TermSpan:
    sentence: int
    start: int
    end: int


def decode_spans(labels: Sequence[str], sentence: int = 0) -> list[TermSpan]:
    """Maximal ``B I*`` runs. An ``I`` with no open span starts a new one."""
    spans = []
    start = None
    for i, lab in enumerate(labels):
        if lab == "B" or (lab == "I" and start is None):
            if start is not None:
                spans.append(TermSpan(sentence, start, i))
            start = i
        elif lab == "O":
            if start is not None:
                spans.append(TermSpan(sentence, start, i))
            start = None
        elif lab != "I":
            raise EvaluationError(f"label {lab!r} outside B/I/O")
    if start is not None:
        spans.append(TermSpan(sentence, start, len(labels)))
    return spans


def encode_spans(spans: Sequence[TermSpan], length: int) -> list[str]:
    labels = ["O"] * length
    for sp in sorted(spans):
        if not 0 <= sp.start < sp.end <= length:
            raise EvaluationError(f"span {sp} out of range for length {length}")
        if any(lab != "O" for lab in labels[sp.start:sp.end]):
            raise EvaluationError(f"overlapping span {sp}")
        labels[sp.start] = "B"
        for i in range(sp.start + 1, sp.end):
            labels[i] = "I"
    return labels


@dataclass
class Contingency:
    a: int = 0  # system and gold
    b: int = 0  # system only
    c: int = 0  # gold only
    d: int = 0  # tokens outside any span on both sides

    def __add__(self, other: "Contingency") -> "Contingency":
        return Contingency(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    @property
    def precision(self) -> float:
        return self.a / (self.a + self.b) if self.a + self.b else 0.0

    @property
    def recall(self) -> float:
        return self.a / (self.a + self.c) if self.a + self.c else 0.0

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


def score(system: Sequence[Sequence[str]], gold: Sequence[Sequence[str]]) -> Contingency:
    """Exact span matching; repeated terms count once per occurrence."""
    if len(system) != len(gold):
        raise EvaluationError(f"{len(system)} system sentences vs {len(gold)} gold")
    tab = Contingency()
    for k, (sys_labs, gold_labs) in enumerate(zip(system, gold)):
        if len(sys_labs) != len(gold_labs):
            raise EvaluationError(f"sentence {k}: {len(sys_labs)} system tokens vs {len(gold_labs)} gold")
        s = set(decode_spans(sys_labs, k))
        g = set(decode_spans(gold_labs, k))
        tab.a += len(s & g)
        tab.b += len(s - g)
        tab.c += len(g - s)
        tab.d += sum(1 for x, y in zip(sys_labs, gold_labs) if x == "O" and y == "O")
    return tab


@dataclass
class FoldResult:
    fold: int
    n_test: int
    table: Contingency

    @property
    def p(self):
        return self.table.precision

    @property
    def r(self):
        return self.table.recall

    @property
    def f1(self):
        return self.table.f1


@dataclass
class EvalReport:
    folds: list[FoldResult] = field(default_factory=list)

    @property
    def macro_p(self) -> float:
        return float(np.mean([f.p for f in self.folds]))

    @property
    def macro_r(self) -> float:
        return float(np.mean([f.r for f in self.folds]))

    @property
    def macro_f1(self) -> float:
        """Mean of per-fold F1."""
        return float(np.mean([f.f1 for f in self.folds]))

    @property
    def f1_of_macro(self) -> float:
        """F1 computed from macro P and macro R."""
        return f1_score(self.macro_p, self.macro_r)

    @property
    def totals(self) -> Contingency:
        tab = Contingency()
        for f in self.folds:
            tab = tab + f.table
        return tab

    def to_tsv(self) -> str:
        lines = ["fold\tn_test\ta\tb\tc\tP\tR\tF1"]
        for f in self.folds:
            t = f.table
            lines.append(f"{f.fold}\t{f.n_test}\t{t.a}\t{t.b}\t{t.c}\t{f.p:.5f}\t{f.r:.5f}\t{f.f1:.5f}")
        t = self.totals
        n = sum(f.n_test for f in self.folds)
        lines.append(f"macro\t{n}\t{t.a}\t{t.b}\t{t.c}\t{self.macro_p:.5f}\t{self.macro_r:.5f}\t{self.macro_f1:.5f}")
        lines.append(f"f1_of_macro\t{n}\t{t.a}\t{t.b}\t{t.c}\t{self.macro_p:.5f}\t{self.macro_r:.5f}\t{self.f1_of_macro:.5f}")
        lines.append(f"micro\t{n}\t{t.a}\t{t.b}\t{t.c}\t{t.precision:.5f}\t{t.recall:.5f}\t{t.f1:.5f}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        out = [f"{'fold':>6}  {'P':>8}  {'R':>8}  {'F1':>8}"]
        for f in self.folds:
            out.append(f"{f.fold:>6}  {f.p:8.5f}  {f.r:8.5f}  {f.f1:8.5f}")
        out.append(f"{'macro':>6}  {self.macro_p:8.5f}  {self.macro_r:8.5f}  {self.macro_f1:8.5f}")
        out.append(f"F1 of macro P/R: {self.f1_of_macro:.5f}")
        return "\n".join(out) + "\n"


def fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    if n < k:
        raise ConfigError(f"{n} sentences cannot be split into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def kfold(matrix: FeatureMatrix, k: int = 10, seed: int = 0, config=None) -> EvalReport:
    """Shuffle sentences with ``seed``, split into ``k`` folds, train/tag/score each.

    The binner is refitted inside ``train`` for every fold, so test folds
    never influence discretisation.
    """
    from .crf import TrainConfig, tag, train

    config = config or TrainConfig()
    if not matrix.labeled:
        raise EvaluationError("cross-validation needs a fully labeled matrix")
    folds = fold_indices(len(matrix), k, seed)
    report = EvalReport()
    for i, test_idx in enumerate(folds):
        test_set = set(test_idx.tolist())
        train_idx = [j for j in range(len(matrix)) if j not in test_set]
        model = train(matrix.subset(train_idx), config)
        test = matrix.subset(test_idx)
        pred = tag(model, test)
        report.folds.append(FoldResult(i, len(test_idx), score(pred.labels(), test.labels())))
    return report
