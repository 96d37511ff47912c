"""Nonparametric pachinko allocation topic models."""

from ._npam import (
    Corpus,
    GroundTruth,
    Hyperparams,
    InputError,
    NpamError,
    PamSnapshot,
    ParameterError,
    SpecError,
    SplitError,
    StateError,
    TopicSnapshot,
    Vocabulary,
    crp_weights,
    empirical_likelihood,
    export_topics,
    generate_document,
    generate_synthetic,
    ingest_text,
    load_bow,
    pam_train,
    score_structure,
    split_folds,
    train,
)

__all__ = [
    "Corpus",
    "GroundTruth",
    "Hyperparams",
    "InputError",
    "NpamError",
    "PamSnapshot",
    "ParameterError",
    "SpecError",
    "SplitError",
    "StateError",
    "TopicSnapshot",
    "Vocabulary",
    "crp_weights",
    "empirical_likelihood",
    "export_topics",
    "generate_document",
    "generate_synthetic",
    "ingest_text",
    "load_bow",
    "pam_train",
    "score_structure",
    "split_folds",
    "train",
]
