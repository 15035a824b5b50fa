"""Byte pair encoding over whitespace tokens.

Merges are learned greedily on word-internal character pairs; continuation
pieces carry the "@@" suffix so the original token is recoverable by
concatenation.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

SEPARATOR = "@@"
END_OF_WORD = "</w>"


@dataclass
class BpeModel:
    merges: list[tuple[str, str]] = field(default_factory=list)
    separator: str = SEPARATOR

    def __post_init__(self):
        self._rank = {pair: i for i, pair in enumerate(self.merges)}
        if len(self._rank) != len(self.merges):
            raise ValueError("duplicate merge rules")

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for a, b in self.merges:
                fh.write(f"{a} {b}\n")

    @classmethod
    def load(cls, path: str) -> "BpeModel":
        merges = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                a, b = line.split(" ")
                merges.append((a, b))
        return cls(merges=merges)


def _word_symbols(token: str) -> tuple[str, ...]:
    return tuple(token[:-1]) + (token[-1] + END_OF_WORD,)


def train_bpe(corpus: Iterable[Iterable[str]], num_merges: int) -> BpeModel:
    """Learn ``num_merges`` merge rules by most-frequent-pair counting.

    Ties break lexicographically for reproducibility.
    """
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    word_freq = Counter()
    for sent in corpus:
        for tok in sent:
            if tok:
                word_freq[tok] += 1
    if not word_freq:
        raise ValueError("empty corpus")
    words = {w: _word_symbols(w) for w in word_freq}

    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        pairs = Counter()
        for w, syms in words.items():
            f = word_freq[w]
            for a, b in zip(syms, syms[1:]):
                pairs[(a, b)] += f
        if not pairs:
            break
        top = max(pairs.values())
        best_pair = min(p for p, c in pairs.items() if c == top)
        merges.append(best_pair)
        words = {w: _merge_word(syms, best_pair) for w, syms in words.items()}
    return BpeModel(merges=merges)


def _merge_word(syms: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    a, b = pair
    out = []
    i = 0
    while i < len(syms):
        if i + 1 < len(syms) and syms[i] == a and syms[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(syms[i])
            i += 1
    return tuple(out)


def apply_bpe(token: str, model: BpeModel) -> list[str]:
    """Segment one token; all pieces but the last carry the separator."""
    if not token:
        return []
    syms = _word_symbols(token)
    while len(syms) > 1:
        ranked = [
            (model._rank[(a, b)], (a, b))
            for a, b in zip(syms, syms[1:])
            if (a, b) in model._rank
        ]
        if not ranked:
            break
        _, pair = min(ranked)
        syms = _merge_word(syms, pair)
    pieces = [s[: -len(END_OF_WORD)] if s.endswith(END_OF_WORD) else s + model.separator
              for s in syms]
    # merge pieces emptied by end-of-word stripping (single-char final symbol)
    return [p for p in pieces if p]


def segment_sequence(tokens: Iterable[str], model: BpeModel) -> list[str]:
    out: list[str] = []
    for tok in tokens:
        out.extend(apply_bpe(tok, model))
    return out


def rejoin(pieces: Iterable[str], separator: str = SEPARATOR) -> list[str]:
    """Undo segmentation: glue continuation pieces back into full tokens."""
    words: list[str] = []
    buf = ""
    for p in pieces:
        if p.endswith(separator):
            buf += p[: -len(separator)]
        else:
            words.append(buf + p)
            buf = ""
    if buf:
        words.append(buf)
    return words
