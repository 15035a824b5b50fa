"""Token/id vocabularies shared between source and target sides."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

PAD, UNK, BOS, EOS = 0, 1, 2, 3
RESERVED = ["<pad>", "<unk>", "<bos>", "<eos>"]


@dataclass
class Vocabulary:
    tokens: list[str]
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if self.tokens[: len(RESERVED)] != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        self._index = {t: i for i, t in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def id(self, token: str) -> int:
        return self._index.get(token, UNK)

    def ids(self, tokens: Iterable[str]) -> list[int]:
        return [self.id(t) for t in tokens]

    def token(self, idx: int) -> str:
        return self.tokens[idx]

    def decode(self, ids: Iterable[int], stop_at_eos: bool = True) -> list[str]:
        out = []
        for i in ids:
            if i == EOS and stop_at_eos:
                break
            if i in (PAD, BOS):
                continue
            out.append(self.tokens[i])
        return out

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for t in self.tokens:
                fh.write(t + "\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
        return cls(tokens=tokens)


def build_vocab(corpora: Iterable[Iterable[str]], max_size: int | None = None) -> Vocabulary:
    """Frequency-ranked vocabulary, ties broken lexicographically; reserved
    ids 0..3 prepended. ``max_size`` caps the non-reserved portion."""
    counts = Counter()
    for sent in corpora:
        counts.update(sent)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [t for t, _ in ranked]
    if max_size is not None:
        kept = kept[:max_size]
    return Vocabulary(tokens=RESERVED + kept)
