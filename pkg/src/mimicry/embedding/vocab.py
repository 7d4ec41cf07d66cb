"""Token vocabulary with fixed special indices."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import ConfigInvalid, EmptyCorpus

PAD = 0
UNK = 1
BOS = 2
EOS = 3

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
BOS_TOKEN = "<bos>"
EOS_TOKEN = "<eos>"

SPECIALS = (PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN)


@dataclass(frozen=True)
class Vocab:
    """Dense token→index map; indices 0..3 are reserved for specials."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.tokens[: len(SPECIALS)] != SPECIALS:
            raise ConfigInvalid("vocabulary must start with the special tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ConfigInvalid("vocabulary contains duplicate tokens")
        object.__setattr__(
            self, "_index", {t: i for i, t in enumerate(self.tokens)}
        )

    @property
    def size(self) -> int:
        return len(self.tokens)

    def encode_token(self, token: str) -> int:
        return self._index.get(token, UNK)

    def encode(self, seq: Sequence[str]) -> list[int]:
        return [self._index.get(t, UNK) for t in seq]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    def to_json(self) -> list[str]:
        return list(self.tokens)

    @classmethod
    def from_json(cls, tokens: list[str]) -> "Vocab":
        return cls(tokens=tuple(tokens))


def build_vocab(corpus: Sequence[Sequence[str]], max_size: int) -> Vocab:
    """Keep the most frequent tokens, ties broken lexicographically.

    max_size counts the four special tokens; everything that doesn't fit
    encodes to UNK.
    """
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    if max_size < len(SPECIALS) + 1:
        raise ConfigInvalid(f"max_size must be > {len(SPECIALS)}, got {max_size}")
    counts: Counter[str] = Counter()
    for seq in corpus:
        counts.update(seq)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = [t for t, _ in ranked[: max_size - len(SPECIALS)]]
    return Vocab(tokens=SPECIALS + tuple(keep))
