from .vocab import PAD, UNK, BOS, EOS, Vocab, build_vocab
from .model import (
    EmbedderConfig,
    EncoderDecoderModel,
    embed,
    load_model,
    save_model,
    token_distributions,
)
from .training import (
    grad_check,
    read_embeddings,
    reconstruction_accuracy,
    sequence_loss,
    train,
    write_embeddings,
)

__all__ = [
    "PAD",
    "UNK",
    "BOS",
    "EOS",
    "Vocab",
    "build_vocab",
    "EmbedderConfig",
    "EncoderDecoderModel",
    "embed",
    "token_distributions",
    "save_model",
    "load_model",
    "train",
    "sequence_loss",
    "reconstruction_accuracy",
    "grad_check",
    "write_embeddings",
    "read_embeddings",
]
