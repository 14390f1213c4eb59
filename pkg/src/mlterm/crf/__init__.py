"""Linear-chain CRF sequence labeler."""

from ._backend import BACKEND
from .model import (
    CompiledBatch,
    CrfModel,
    Lattice,
    TagSet,
    Template,
    compile_batch,
    default_templates,
    expand_features,
    forward_backward,
    log_likelihood_and_gradient,
    penalized_objective,
    viterbi,
)
from .train import TrainConfig, tag, train

__all__ = [
    "BACKEND", "CompiledBatch", "CrfModel", "Lattice", "TagSet", "Template",
    "TrainConfig", "compile_batch", "default_templates", "expand_features",
    "forward_backward", "log_likelihood_and_gradient", "penalized_objective",
    "tag", "train", "viterbi",
]
