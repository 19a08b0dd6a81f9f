"""Attention-guided context compression."""

from ._core import (
    CompressionResult,
    CrossAttentionHead,
    Error,
    TrainConfig,
    attention,
    compress,
    compression_rate,
    evaluate,
    gradcheck,
    init_random,
    load_bundle,
    load_head,
    make_synthetic_dataset,
    normalize_and_match,
    normalize_answer,
    pearson,
    segment_scores,
    split_sentences,
    token_f1,
    train_synthetic,
)

__all__ = [
    "CompressionResult",
    "CrossAttentionHead",
    "Error",
    "TrainConfig",
    "attention",
    "compress",
    "compression_rate",
    "evaluate",
    "gradcheck",
    "init_random",
    "load_bundle",
    "load_head",
    "make_synthetic_dataset",
    "normalize_and_match",
    "normalize_answer",
    "pearson",
    "segment_scores",
    "split_sentences",
    "token_f1",
    "train_synthetic",
]
