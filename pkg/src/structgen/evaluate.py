"""Corpus BLEU, length ratio and bucketed reports by reentrancy count or
graph size. BLEU-4 uses raw clipped n-gram precisions (no smoothing) with
the standard brevity penalty; scores are on the 0..100 scale."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .amr import AmrGraph

REENTRANCY_BUCKETS = ((0, 0), (1, 2), (3, 5), (6, None))
SIZE_BUCKETS = ((1, 10), (11, 20), (21, 30), (31, 40), (41, None))


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    hypotheses: list[list[str]], references: list[list[str]], max_n: int = 4
) -> float:
    """Corpus-level BLEU in [0, 100]."""
    if not hypotheses or len(hypotheses) != len(references):
        raise ValueError("need equal-length non-empty hypothesis/reference lists")
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            h = _ngrams(hyp, n)
            r = _ngrams(ref, n)
            totals[n - 1] += max(len(hyp) - n + 1, 0)
            matches[n - 1] += sum(min(c, r[g]) for g, c in h.items())
    if any(t == 0 for t in totals) or any(m == 0 for m in matches):
        return 0.0
    log_prec = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / max(hyp_len, 1))
    if hyp_len == 0:
        return 0.0
    return 100.0 * bp * math.exp(log_prec)


def length_ratio(hypotheses: list[list[str]], references: list[list[str]]) -> float:
    ref_total = sum(len(r) for r in references)
    if ref_total == 0:
        raise ValueError("zero total reference length")
    return sum(len(h) for h in hypotheses) / ref_total


def graph_size(g: AmrGraph) -> int:
    return len(g.nodes)


@dataclass
class BucketReport:
    mode: str
    buckets: list[dict]

    def table(self) -> str:
        header = f"{'bucket':>10} {'count':>7} {'BLEU':>8} {'len ratio':>10}"
        lines = [header, "-" * len(header)]
        for b in self.buckets:
            lines.append(
                f"{b['label']:>10} {b['count']:>7} {b['bleu']:>8.2f} {b['length_ratio']:>10.3f}"
            )
        return "\n".join(lines)

    def csv(self) -> str:
        rows = ["bucket,count,bleu,length_ratio"]
        for b in self.buckets:
            rows.append(f"{b['label']},{b['count']},{b['bleu']:.4f},{b['length_ratio']:.4f}")
        return "\n".join(rows)


def bucket_report(
    graphs: list[AmrGraph],
    hypotheses: list[list[str]],
    references: list[list[str]],
    mode: str = "reentrancy",
    edges: tuple[tuple[int, int | None], ...] | None = None,
) -> BucketReport:
    """Per-bucket BLEU and length ratio; bucket populations partition the
    corpus. ``mode`` picks the key: reentrancy count or concept count."""
    if not (len(graphs) == len(hypotheses) == len(references)):
        raise ValueError("graphs, hypotheses and references must align")
    if mode == "reentrancy":
        key = lambda g: g.reentrancy_count()
        edges = edges or REENTRANCY_BUCKETS
    elif mode == "size":
        key = graph_size
        edges = edges or SIZE_BUCKETS
    else:
        raise ValueError(f"unknown bucket mode {mode!r}")

    groups: list[list[int]] = [[] for _ in edges]
    for idx, g in enumerate(graphs):
        value = key(g)
        for bi, (lo, hi) in enumerate(edges):
            if value >= lo and (hi is None or value <= hi):
                groups[bi].append(idx)
                break
        else:
            raise ValueError(f"value {value} falls outside every bucket")

    buckets = []
    for (lo, hi), idxs in zip(edges, groups):
        label = f"{lo}" if lo == hi else (f">{lo - 1}" if hi is None else f"{lo}-{hi}")
        if idxs:
            hyp = [hypotheses[i] for i in idxs]
            ref = [references[i] for i in idxs]
            score = bleu(hyp, ref)
            ratio = length_ratio(hyp, ref)
        else:
            score, ratio = 0.0, 0.0
        buckets.append(
            {"label": label, "count": len(idxs), "bleu": score, "length_ratio": ratio}
        )
    return BucketReport(mode=mode, buckets=buckets)
