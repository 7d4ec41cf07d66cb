"""Training loop, reconstruction scoring, and gradient verification."""
from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptyCorpus, NonFiniteLoss, SequenceTooLong
from .model import (
    EmbedderConfig,
    EncoderDecoderModel,
    PARAM_ORDER,
    backward,
    forward,
    init_params,
    sequence_ids,
)
from .vocab import Vocab, build_vocab


def _check_corpus(corpus: Sequence[Sequence[str]], max_len: int) -> None:
    if not corpus:
        raise EmptyCorpus("training corpus is empty")
    for i, seq in enumerate(corpus):
        if len(seq) > max_len:
            raise SequenceTooLong(
                f"corpus[{i}] has {len(seq)} tokens, exceeding max_len {max_len}"
            )


def train(
    corpus: Sequence[Sequence[str]],
    cfg: EmbedderConfig | None = None,
    vocab: Vocab | None = None,
) -> EncoderDecoderModel:
    """Train the autoencoder with per-sequence SGD.

    Deterministic for a fixed seed: initialization and the per-epoch
    shuffle both come from one seeded generator.
    """
    cfg = cfg or EmbedderConfig()
    _check_corpus(corpus, cfg.max_len)
    if vocab is None:
        distinct = {t for seq in corpus for t in seq}
        vocab = build_vocab(corpus, max_size=len(distinct) + 5)
    rng = np.random.default_rng(cfg.seed)
    params = init_params(vocab.size, cfg, rng)
    encoded = [sequence_ids(vocab, seq) for seq in corpus]
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(encoded))
        total = 0.0
        for j in order:
            eids, dids, tgt = encoded[j]
            loss, cache = forward(params, eids, dids, tgt)
            if not math.isfinite(loss):
                raise NonFiniteLoss(
                    f"loss became {loss} at epoch {epoch}, sequence {j}"
                )
            grads = backward(params, cache)
            for name in PARAM_ORDER:
                params[name] -= cfg.learning_rate * grads[name]
            total += loss
        history.append(total / len(encoded))
    return EncoderDecoderModel(
        params=params, vocab=vocab, config=cfg, loss_history=tuple(history)
    )


def sequence_loss(model: EncoderDecoderModel, seq: Sequence[str]) -> float:
    """Mean per-position cross-entropy of reconstructing seq."""
    eids, dids, tgt = sequence_ids(model.vocab, seq)
    loss, _ = forward(model.params, eids, dids, tgt)
    return loss


def reconstruction_accuracy(
    model: EncoderDecoderModel, corpus: Sequence[Sequence[str]]
) -> float:
    """Fraction of target tokens recovered by greedy argmax decoding."""
    correct = total = 0
    for seq in corpus:
        eids, dids, tgt = sequence_ids(model.vocab, seq)
        _, cache = forward(model.params, eids, dids, tgt)
        pred = cache["logits"].argmax(axis=1)
        correct += int((pred == tgt).sum())
        total += len(tgt)
    return correct / total if total else 0.0


def grad_check(
    model: EncoderDecoderModel,
    sample: Sequence[str],
    epsilon: float = 1e-5,
    n_params: int = 120,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Only parameters the sample actually reaches (nonzero analytic
    gradient) are compared; gradients below 1e-5 in magnitude are judged
    on an absolute scale to keep finite-difference noise out of the
    ratio.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon must be in [1e-7, 1e-3], got {epsilon}")
    if n_params < 100:
        raise ValueError(f"n_params must be >= 100, got {n_params}")
    params = model.params
    eids, dids, tgt = sequence_ids(model.vocab, sample)
    _, cache = forward(params, eids, dids, tgt)
    grads = backward(params, cache)

    reachable: list[tuple[str, int]] = []
    for name in PARAM_ORDER:
        flat = grads[name].ravel()
        for idx in np.nonzero(flat)[0]:
            reachable.append((name, int(idx)))
    rng = np.random.default_rng(seed)
    if len(reachable) > n_params:
        picks = rng.choice(len(reachable), size=n_params, replace=False)
        chosen = [reachable[int(i)] for i in picks]
    else:
        chosen = reachable

    worst = 0.0
    for name, idx in chosen:
        analytic = grads[name].flat[idx]
        original = params[name].flat[idx]
        params[name].flat[idx] = original + epsilon
        up, _ = forward(params, eids, dids, tgt)
        params[name].flat[idx] = original - epsilon
        down, _ = forward(params, eids, dids, tgt)
        params[name].flat[idx] = original
        numeric = (up - down) / (2.0 * epsilon)
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-5)
        worst = max(worst, rel)
    return worst


def write_embeddings(path, rows: Iterable[tuple[str, np.ndarray]]) -> None:
    ordered = sorted(rows, key=lambda r: r[0])
    with open(path, "w", encoding="utf-8") as fh:
        for mutant_id, vec in ordered:
            doc = {"mutant_id": mutant_id, "vector": [float(v) for v in vec]}
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def read_embeddings(path) -> list[tuple[str, np.ndarray]]:
    out: list[tuple[str, np.ndarray]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                doc = json.loads(line)
                out.append((doc["mutant_id"], np.array(doc["vector"], dtype=np.float64)))
    return out
