"""Single-head attention encoder-decoder over token sequences.

The encoder reads <bos> seq <eos> through one self-attention block and
one feed-forward block, both with residual connections; the sequence
embedding is the mean of the encoder outputs over non-PAD positions.
The decoder (teacher-forced, causally masked self-attention followed by
cross-attention over the encoder outputs) exists only to drive the
reconstruction loss during training. Positional encodings are learned.
All arithmetic is float64.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ConfigInvalid, SequenceTooLong
from .vocab import BOS, EOS, PAD, Vocab

_MAGIC = b"MIMEMBED"
_VERSION = 1

# Serialization order; also the canonical iteration order for SGD and
# gradient checking.
PARAM_ORDER = (
    "E",
    "Pe",
    "Pd",
    "Wqe",
    "Wke",
    "Wve",
    "W1e",
    "b1e",
    "W2e",
    "b2e",
    "Wqd",
    "Wkd",
    "Wvd",
    "Wqc",
    "Wkc",
    "Wvc",
    "W1d",
    "b1d",
    "W2d",
    "b2d",
    "Wo",
    "bo",
)


@dataclass(frozen=True)
class EmbedderConfig:
    max_len: int = 150
    embed_dim: int = 64
    hidden_dim: int = 128
    epochs: int = 10
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_len < 1:
            raise ConfigInvalid(f"max_len must be >= 1, got {self.max_len}")
        if self.embed_dim < 1 or self.hidden_dim < 1:
            raise ConfigInvalid("embed_dim and hidden_dim must be >= 1")
        if self.epochs < 1:
            raise ConfigInvalid(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ConfigInvalid(f"learning_rate must be positive, got {self.learning_rate}")
        if self.seed < 0:
            raise ConfigInvalid(f"seed must be non-negative, got {self.seed}")

    def to_json(self) -> dict:
        return {
            "max_len": self.max_len,
            "embed_dim": self.embed_dim,
            "hidden_dim": self.hidden_dim,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EmbedderConfig":
        return cls(
            max_len=obj["max_len"],
            embed_dim=obj["embed_dim"],
            hidden_dim=obj["hidden_dim"],
            epochs=obj["epochs"],
            learning_rate=obj["learning_rate"],
            seed=obj["seed"],
        )


@dataclass
class EncoderDecoderModel:
    params: dict[str, np.ndarray]
    vocab: Vocab
    config: EmbedderConfig
    loss_history: tuple[float, ...] = field(default=())

    def embed(self, seq: Sequence[str]) -> np.ndarray:
        return embed(self, seq)


def init_params(
    vocab_size: int, cfg: EmbedderConfig, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    d, h = cfg.embed_dim, cfg.hidden_dim
    ws = 1.0 / np.sqrt(d)
    hs = 1.0 / np.sqrt(h)

    def w(rows: int, cols: int, scale: float) -> np.ndarray:
        return rng.standard_normal((rows, cols)) * scale

    return {
        "E": w(vocab_size, d, 0.1),
        "Pe": w(cfg.max_len + 2, d, 0.1),
        "Pd": w(cfg.max_len + 1, d, 0.1),
        "Wqe": w(d, d, ws),
        "Wke": w(d, d, ws),
        "Wve": w(d, d, ws),
        "W1e": w(d, h, ws),
        "b1e": np.zeros(h),
        "W2e": w(h, d, hs),
        "b2e": np.zeros(d),
        "Wqd": w(d, d, ws),
        "Wkd": w(d, d, ws),
        "Wvd": w(d, d, ws),
        "Wqc": w(d, d, ws),
        "Wkc": w(d, d, ws),
        "Wvc": w(d, d, ws),
        "W1d": w(d, h, ws),
        "b1d": np.zeros(h),
        "W2d": w(h, d, hs),
        "b2d": np.zeros(d),
        "Wo": w(d, vocab_size, ws),
        "bo": np.zeros(vocab_size),
    }


def _softmax_rows(s: np.ndarray) -> np.ndarray:
    m = s.max(axis=1, keepdims=True)
    e = np.exp(s - m)
    return e / e.sum(axis=1, keepdims=True)


def sequence_ids(vocab: Vocab, seq: Sequence[str]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(encoder input, decoder input, targets) for one sequence."""
    ids = vocab.encode(seq)
    eids = np.array([BOS] + ids + [EOS], dtype=np.int64)
    dids = np.array([BOS] + ids, dtype=np.int64)
    tgt = np.array(ids + [EOS], dtype=np.int64)
    return eids, dids, tgt


def encode_states(params: dict[str, np.ndarray], eids: np.ndarray) -> np.ndarray:
    """Encoder outputs, one row per input position."""
    d = params["E"].shape[1]
    scale = 1.0 / np.sqrt(d)
    x = params["E"][eids] + params["Pe"][: len(eids)]
    q = x @ params["Wqe"]
    k = x @ params["Wke"]
    v = x @ params["Wve"]
    a = _softmax_rows((q @ k.T) * scale)
    x1 = x + a @ v
    f = np.maximum(x1 @ params["W1e"] + params["b1e"], 0.0)
    return x1 + f @ params["W2e"] + params["b2e"]


def forward(
    params: dict[str, np.ndarray],
    eids: np.ndarray,
    dids: np.ndarray,
    tgt: np.ndarray,
) -> tuple[float, dict]:
    """Reconstruction loss (mean per-position cross-entropy) plus cache."""
    d = params["E"].shape[1]
    scale = 1.0 / np.sqrt(d)
    ne, nd = len(eids), len(dids)

    x = params["E"][eids] + params["Pe"][:ne]
    q = x @ params["Wqe"]
    k = x @ params["Wke"]
    v = x @ params["Wve"]
    a = _softmax_rows((q @ k.T) * scale)
    h = a @ v
    x1 = x + h
    f_pre = x1 @ params["W1e"] + params["b1e"]
    f = np.maximum(f_pre, 0.0)
    m = x1 + f @ params["W2e"] + params["b2e"]

    y = params["E"][dids] + params["Pd"][:nd]
    qd = y @ params["Wqd"]
    kd = y @ params["Wkd"]
    vd = y @ params["Wvd"]
    sd = (qd @ kd.T) * scale
    sd = np.where(np.triu(np.ones((nd, nd), dtype=bool), k=1), -np.inf, sd)
    ad = _softmax_rows(sd)
    y1 = y + ad @ vd

    qc = y1 @ params["Wqc"]
    kc = m @ params["Wkc"]
    vc = m @ params["Wvc"]
    ac = _softmax_rows((qc @ kc.T) * scale)
    y2 = y1 + ac @ vc

    g_pre = y2 @ params["W1d"] + params["b1d"]
    g = np.maximum(g_pre, 0.0)
    y3 = y2 + g @ params["W2d"] + params["b2d"]

    logits = y3 @ params["Wo"] + params["bo"]
    mx = logits.max(axis=1, keepdims=True)
    lse = mx[:, 0] + np.log(np.exp(logits - mx).sum(axis=1))
    loss = float((lse - logits[np.arange(nd), tgt]).mean())

    cache = {
        "eids": eids,
        "dids": dids,
        "tgt": tgt,
        "x": x,
        "q": q,
        "k": k,
        "v": v,
        "a": a,
        "x1": x1,
        "f_pre": f_pre,
        "f": f,
        "m": m,
        "y": y,
        "qd": qd,
        "kd": kd,
        "vd": vd,
        "ad": ad,
        "y1": y1,
        "qc": qc,
        "kc": kc,
        "vc": vc,
        "ac": ac,
        "y2": y2,
        "g_pre": g_pre,
        "g": g,
        "y3": y3,
        "logits": logits,
    }
    return loss, cache


def _attention_backward(
    d_out: np.ndarray,
    a: np.ndarray,
    q: np.ndarray,
    k: np.ndarray,
    v: np.ndarray,
    scale: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients wrt q, k, v for h = softmax(q kᵀ · scale) v."""
    da = d_out @ v.T
    dv = a.T @ d_out
    ds = a * (da - (da * a).sum(axis=1, keepdims=True))
    dq = (ds @ k) * scale
    dk = (ds.T @ q) * scale
    return dq, dk, dv


def backward(params: dict[str, np.ndarray], cache: dict) -> dict[str, np.ndarray]:
    grads = {name: np.zeros_like(arr) for name, arr in params.items()}
    eids, dids, tgt = cache["eids"], cache["dids"], cache["tgt"]
    ne, nd = len(eids), len(dids)
    d = params["E"].shape[1]
    scale = 1.0 / np.sqrt(d)

    probs = _softmax_rows(cache["logits"])
    d_logits = probs
    d_logits[np.arange(nd), tgt] -= 1.0
    d_logits /= nd

    grads["Wo"] += cache["y3"].T @ d_logits
    grads["bo"] += d_logits.sum(axis=0)
    d_y3 = d_logits @ params["Wo"].T

    # decoder feed-forward
    d_y2 = d_y3.copy()
    d_g = d_y3 @ params["W2d"].T
    grads["W2d"] += cache["g"].T @ d_y3
    grads["b2d"] += d_y3.sum(axis=0)
    d_g_pre = d_g * (cache["g_pre"] > 0)
    grads["W1d"] += cache["y2"].T @ d_g_pre
    grads["b1d"] += d_g_pre.sum(axis=0)
    d_y2 += d_g_pre @ params["W1d"].T

    # cross-attention
    d_y1 = d_y2.copy()
    dqc, dkc, dvc = _attention_backward(
        d_y2, cache["ac"], cache["qc"], cache["kc"], cache["vc"], scale
    )
    grads["Wqc"] += cache["y1"].T @ dqc
    d_y1 += dqc @ params["Wqc"].T
    grads["Wkc"] += cache["m"].T @ dkc
    d_m = dkc @ params["Wkc"].T
    grads["Wvc"] += cache["m"].T @ dvc
    d_m += dvc @ params["Wvc"].T

    # decoder self-attention (mask is baked into the cached weights)
    d_y = d_y1.copy()
    dqd, dkd, dvd = _attention_backward(
        d_y1, cache["ad"], cache["qd"], cache["kd"], cache["vd"], scale
    )
    grads["Wqd"] += cache["y"].T @ dqd
    d_y += dqd @ params["Wqd"].T
    grads["Wkd"] += cache["y"].T @ dkd
    d_y += dkd @ params["Wkd"].T
    grads["Wvd"] += cache["y"].T @ dvd
    d_y += dvd @ params["Wvd"].T

    np.add.at(grads["E"], dids, d_y)
    grads["Pd"][:nd] += d_y

    # encoder feed-forward
    d_x1 = d_m.copy()
    d_f = d_m @ params["W2e"].T
    grads["W2e"] += cache["f"].T @ d_m
    grads["b2e"] += d_m.sum(axis=0)
    d_f_pre = d_f * (cache["f_pre"] > 0)
    grads["W1e"] += cache["x1"].T @ d_f_pre
    grads["b1e"] += d_f_pre.sum(axis=0)
    d_x1 += d_f_pre @ params["W1e"].T

    # encoder self-attention
    d_x = d_x1.copy()
    dq, dk, dv = _attention_backward(
        d_x1, cache["a"], cache["q"], cache["k"], cache["v"], scale
    )
    grads["Wqe"] += cache["x"].T @ dq
    d_x += dq @ params["Wqe"].T
    grads["Wke"] += cache["x"].T @ dk
    d_x += dk @ params["Wke"].T
    grads["Wve"] += cache["x"].T @ dv
    d_x += dv @ params["Wve"].T

    np.add.at(grads["E"], eids, d_x)
    grads["Pe"][:ne] += d_x

    return grads


def _check_length(cfg: EmbedderConfig, seq: Sequence[str]) -> None:
    if len(seq) > cfg.max_len:
        raise SequenceTooLong(f"sequence of {len(seq)} tokens exceeds max_len {cfg.max_len}")


def embed(model: EncoderDecoderModel, seq: Sequence[str]) -> np.ndarray:
    """Fixed-size embedding: mean of encoder outputs over non-PAD positions."""
    _check_length(model.config, seq)
    eids, _, _ = sequence_ids(model.vocab, seq)
    states = encode_states(model.params, eids)
    mask = eids != PAD
    return states[mask].mean(axis=0)


def token_distributions(model: EncoderDecoderModel, seq: Sequence[str]) -> np.ndarray:
    """Per-position probability over the vocabulary when reconstructing seq."""
    _check_length(model.config, seq)
    eids, dids, tgt = sequence_ids(model.vocab, seq)
    _, cache = forward(model.params, eids, dids, tgt)
    return _softmax_rows(cache["logits"])


def save_model(path, model: EncoderDecoderModel) -> None:
    header = {
        "config": model.config.to_json(),
        "vocab": model.vocab.to_json(),
        "params": [[name, list(model.params[name].shape)] for name in PARAM_ORDER],
        "loss_history": list(model.loss_history),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for name in PARAM_ORDER:
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())


def load_model(path) -> EncoderDecoderModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ConfigInvalid(f"not a model file (bad magic): {path}")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ConfigInvalid(f"unsupported model version {version} in {path}")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        params: dict[str, np.ndarray] = {}
        for name, shape in header["params"]:
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ConfigInvalid(f"truncated model file: {path}")
            params[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    for name, arr in params.items():
        if not np.isfinite(arr).all():
            raise ConfigInvalid(f"non-finite values in parameter {name}: {path}")
    return EncoderDecoderModel(
        params=params,
        vocab=Vocab.from_json(header["vocab"]),
        config=EmbedderConfig.from_json(header["config"]),
        loss_history=tuple(header.get("loss_history", ())),
    )
