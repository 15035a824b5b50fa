"""Graph-to-model preprocessing.

Two input views are produced from every AMR graph: the baseline
linearization (concepts, relation labels and brackets, reentrant nodes
re-emitted at each visit) and the structural view (concept-only sequence
plus the all-pairs PathMatrix). BPE segmentation extends the graph so each
sub-word piece is a node of its own.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .amr import AmrGraph
from .bpe import BpeModel, apply_bpe
from .paths import NONE_LABEL, PathMatrix, extract_paths
from .vocab import Vocabulary

ROOT_LABEL = ":root"

# label vocabulary reserved entries
PATH_PAD, PATH_UNK = 0, 1
PATH_RESERVED = ["<pad>", "<unk>"]


def linearize_full(g: AmrGraph) -> list[str]:
    """Depth-first linearization for the baseline: concepts, relation labels
    and brackets; a reentrant node's concept is re-emitted at every visit."""
    tokens: list[str] = []
    visited: set[str] = set()

    def walk(node: str, is_root: bool) -> None:
        children = g.children(node)
        revisit = node in visited
        visited.add(node)
        expand = children and not revisit
        if expand and not is_root:
            tokens.append("(")
        tokens.append(g.nodes[node])
        if expand:
            for rel, tgt in children:
                tokens.append(rel)
                walk(tgt, False)
            if not is_root:
                tokens.append(")")

    walk(g.root, True)
    return tokens


def linearize_concepts(g: AmrGraph) -> tuple[list[str], list[str]]:
    """Concept-only depth-first sequence; each node appears exactly once, at
    its first visit. Returns (concepts, node ids) with aligned positions."""
    concepts: list[str] = []
    order: list[str] = []
    visited: set[str] = set()

    def walk(node: str) -> None:
        if node in visited:
            return
        visited.add(node)
        concepts.append(g.nodes[node])
        order.append(node)
        for _, tgt in g.children(node):
            walk(tgt)

    walk(g.root)
    return concepts, order


def extend_graph_subwords(g: AmrGraph, seg: dict[str, list[str]]) -> AmrGraph:
    """Split every multi-piece node into a chain of sub-word nodes.

    The chain's internal edges copy the label of the original node's
    incoming edge (":root" for the root node); the original incoming edge
    attaches to the first piece, and outgoing edges stay on the first piece.
    """
    missing = set(g.nodes) - set(seg)
    if missing:
        raise ValueError(f"segmentation missing nodes: {sorted(missing)}")
    incoming: dict[str, str] = {}
    for src, rel, tgt in g.edges:
        incoming.setdefault(tgt, rel)

    nodes: dict[str, str] = {}
    extra_edges: list[tuple[str, str, str]] = []
    for nid in g.nodes:
        pieces = seg[nid]
        if not pieces:
            raise ValueError(f"empty segmentation for node {nid!r}")
        if len(pieces) == 1:
            nodes[nid] = pieces[0]
            continue
        chain_label = incoming.get(nid, ROOT_LABEL)
        prev = nid
        nodes[nid] = pieces[0]
        for k, piece in enumerate(pieces[1:], start=1):
            sub = f"{nid}~{k}"
            nodes[sub] = piece
            extra_edges.append((prev, chain_label, sub))
            prev = sub

    # original edges keep their endpoints (first pieces retain the node id);
    # chain edges are appended per node in traversal order
    edges = list(g.edges)
    by_src: dict[str, list[tuple[str, str, str]]] = {}
    for e in extra_edges:
        by_src.setdefault(e[0].split("~")[0], []).append(e)
    out: list[tuple[str, str, str]] = []
    for nid in g.nodes:
        out.extend(by_src.get(nid, []))
    return replace(g, nodes=nodes, edges=tuple(edges + out))


def segment_graph(g: AmrGraph, model: BpeModel) -> dict[str, list[str]]:
    return {nid: apply_bpe(concept, model) for nid, concept in g.nodes.items()}


@dataclass
class Record:
    """One preprocessed example: sub-word ids, flattened path-label ids
    (row-major, each path padded to max_len) and target ids."""

    src: list[int]
    tgt: list[int]
    n: int = 0
    paths: list[int] | None = None
    max_len: int = 0

    def to_json(self) -> str:
        d = {"src": self.src, "tgt": self.tgt}
        if self.paths is not None:
            d.update({"n": self.n, "max_len": self.max_len, "paths": self.paths})
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "Record":
        d = json.loads(line)
        return cls(
            src=d["src"],
            tgt=d["tgt"],
            n=d.get("n", 0),
            paths=d.get("paths"),
            max_len=d.get("max_len", 0),
        )


def build_path_label_vocab(matrices: list[PathMatrix]) -> list[str]:
    """Ordered label vocabulary over all directed labels seen, plus the
    None-label; reserved pad/unk entries prepended."""
    seen: set[str] = set()
    for pm in matrices:
        for row in pm.entries:
            for path in row:
                seen.update(path)
    seen.add(NONE_LABEL)
    return PATH_RESERVED + sorted(seen)


def encode_paths(pm: PathMatrix, label_index: dict[str, int], max_len: int) -> list[int]:
    """Flatten the n x n matrix row-major, each path padded with the
    PAD-label id to ``max_len``."""
    flat: list[int] = []
    for row in pm.entries:
        for path in row:
            ids = [label_index.get(lab, PATH_UNK) for lab in path[:max_len]]
            ids += [PATH_PAD] * (max_len - len(ids))
            flat.extend(ids)
    return flat


def structural_record(
    g: AmrGraph,
    bpe_model: BpeModel,
    vocab: Vocabulary,
    label_index: dict[str, int],
    target_pieces: list[str],
    max_len: int = 4,
    mask_indirect_pairs: bool = False,
) -> Record:
    from .paths import mask_indirect

    ext = extend_graph_subwords(g, segment_graph(g, bpe_model))
    concepts, order = linearize_concepts(ext)
    pm = extract_paths(ext, order, max_len=max_len)
    if mask_indirect_pairs:
        pm = mask_indirect(pm, ext)
    from .vocab import BOS, EOS

    return Record(
        src=vocab.ids(concepts),
        tgt=[BOS] + vocab.ids(target_pieces) + [EOS],
        n=len(concepts),
        paths=encode_paths(pm, label_index, max_len),
        max_len=max_len,
    )


def write_records(path: str, records: list[Record]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path: str) -> list[Record]:
    with open(path, encoding="utf-8") as fh:
        return [Record.from_json(line) for line in fh if line.strip()]
