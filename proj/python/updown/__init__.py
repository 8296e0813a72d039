"""Entity-augmented up-down composition for implicit discourse relations."""

import json

from ._updown import (
    Dataset,
    Embeddings,
    Model,
    UpdownError,
    binarize,
    compose,
    coref_subset_report,
    eval_binary,
    eval_multiclass,
    gradcheck,
    load_dataset,
    load_embeddings,
    load_model,
    param_count,
    run_cli,
    standardize,
    synth_generate,
)

__all__ = [
    "Dataset",
    "Embeddings",
    "Model",
    "UpdownError",
    "binarize",
    "compose",
    "coref_subset_report",
    "eval_binary",
    "eval_multiclass",
    "gradcheck",
    "load_dataset",
    "load_embeddings",
    "load_model",
    "param_count",
    "run_cli",
    "standardize",
    "synth_generate",
    "train",
]


def train(dataset, embeddings, **config):
    """Train a model; keyword arguments follow the JSON config keys.

    Returns (model, log) where log holds (epoch, mean objective, accuracy).
    """
    from . import _updown

    return _updown._train(dataset, embeddings, json.dumps(config))
