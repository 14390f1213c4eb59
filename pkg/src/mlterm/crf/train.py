"""Batch L-BFGS training and Viterbi tagging over feature matrices."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from ..errors import ConfigError, NumericalError, TrainingDataError
from ..features import FeatureMatrix, fit_binner, observations
from . import _backend
from .model import (
    CrfModel,
    TagSet,
    _index_size,
    compile_batch,
    default_templates,
    expand_features,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    sigma2: float = 10.0
    max_iterations: int = 200
    tolerance: float = 1e-4
    memory: int = 10
    bin_count: int = 16
    token_window: tuple[int, ...] = (-2, -1, 0, 1, 2)
    numeric_window: tuple[int, ...] = (-1, 0, 1)
    backend: str | None = None

    def __post_init__(self):
        if self.sigma2 is not None and self.sigma2 <= 0:
            raise ConfigError("sigma2 must be positive")
        if self.max_iterations < 1 or self.memory < 1:
            raise ConfigError("max_iterations and memory must be >= 1")
        if self.bin_count < 2:
            raise ConfigError("bin_count must be >= 2")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["token_window"] = list(self.token_window)
        d["numeric_window"] = list(self.numeric_window)
        d.pop("backend")
        return d


def train(matrix: FeatureMatrix, config: TrainConfig = TrainConfig(), tagset: TagSet = TagSet()) -> CrfModel:
    """Fit a CRF on a labeled feature matrix.

    The binner is fitted here, on ``matrix`` only, and stored in the model.
    Stops when ``||grad|| / n_weights <= tolerance`` or after
    ``max_iterations`` accepted L-BFGS steps.
    """
    sents = [s for s in matrix.sentences if s]
    if not sents:
        raise TrainingDataError("no labeled sentences to train on")
    if not all(r.label is not None for s in sents for r in s):
        raise TrainingDataError("training matrix contains unlabeled rows")
    matrix = FeatureMatrix(matrix.columns, sents)

    binner = fit_binner(matrix, config.bin_count)
    templates = default_templates(matrix.columns, config.token_window, config.numeric_window)
    expanded = [expand_features(rows, templates) for rows in observations(matrix, binner)]
    labels = [[tagset.index(r.label) for r in rows] for rows in sents]
    index: dict[str, int] = {}
    batch = compile_batch(expanded, index, len(tagset), labels, grow=True)
    n_weights = _index_size(index, len(tagset))
    kern = _backend.get(config.backend)
    sigma2 = config.sigma2
    T = len(tagset)

    cache = {}
    history: list[float] = []

    def fun(w):
        grad = np.zeros_like(w)
        ll = kern.batch_loglik_grad(w, T, batch.sent_ptr, batch.u_ptr, batch.u_idx,
                                    batch.e_ptr, batch.e_idx, batch.labels, grad)
        if sigma2 is not None:
            ll -= float(w @ w) / (2.0 * sigma2)
            grad -= w / sigma2
        if not np.isfinite(ll) or not np.all(np.isfinite(grad)):
            raise NumericalError(
                f"non-finite objective {ll} (max |w| = {np.max(np.abs(w)):.3g}, "
                f"{len(history)} iterations)"
            )
        cache["x"], cache["g"] = w.copy(), grad
        return -ll, -grad

    def grad_norm(x):
        if "x" not in cache or not np.array_equal(cache["x"], x):
            fun(x)
        return float(np.linalg.norm(cache["g"]))

    def callback(intermediate_result):
        history.append(-float(intermediate_result.fun))
        if grad_norm(intermediate_result.x) / n_weights <= config.tolerance:
            raise StopIteration

    w0 = np.zeros(n_weights)
    obj0, _ = fun(w0)
    if grad_norm(w0) / n_weights <= config.tolerance:
        w, iters = w0, 0
    else:
        res = minimize(fun, w0, jac=True, method="L-BFGS-B", callback=callback,
                       options={"maxcor": config.memory, "maxiter": config.max_iterations,
                                "gtol": 0.0})
        w, iters = res.x, len(history)
    final = -fun(w)[0]
    log.info("trained %d weights in %d iterations, objective %.6g", n_weights, iters, final)
    meta = {
        "iterations": iters,
        "initial_objective": -obj0,
        "final_objective": final,
        "history": history,
        "config": config.as_dict(),
    }
    return CrfModel(tagset, templates, index, w, sigma2, matrix.columns, binner, meta)


def tag(model: CrfModel, matrix: FeatureMatrix, backend: str | None = None) -> FeatureMatrix:
    """Viterbi labels for every sentence, returned as a copy of ``matrix``."""
    missing = [c for c in model.columns if c not in matrix.columns]
    if missing:
        raise ConfigError(f"matrix lacks columns the model was trained on: {missing}")
    if not matrix.sentences:
        return FeatureMatrix(matrix.columns, [])
    sub = FeatureMatrix(model.columns, matrix.sentences)
    expanded = [expand_features(rows, model.templates) for rows in observations(sub, model.binner)]
    batch = model.compile(expanded)
    out = np.zeros(len(batch.labels), dtype=np.int64)
    _backend.get(backend).batch_viterbi(model.weights, model.n_tags, batch.sent_ptr, batch.u_ptr,
                                        batch.u_idx, batch.e_ptr, batch.e_idx, out)
    labels = []
    for s in range(batch.n_sentences):
        a, b = batch.sent_ptr[s], batch.sent_ptr[s + 1]
        labels.append([model.tagset.tags[k] for k in out[a:b]])
    return matrix.with_labels(labels)
