"""AMR graphs in PENMAN notation: parsing, serialization, simplification.

Graphs are rooted, directed and labeled. Variable reuse in the PENMAN text
expresses reentrancy (a node with more than one parent). Attribute constants
(numbers, quoted strings) become ordinary nodes whose concept label is the
constant itself, so downstream path extraction treats them uniformly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator

Edge = tuple[str, str, str]  # (source id, relation label, target id)

_SENSE_RE = re.compile(r"-\d\d+$")
_TOKEN_RE = re.compile(r'\(|\)|/|"[^"]*"|[^\s()/]+')


class PenmanError(ValueError):
    """Raised when a PENMAN expression cannot be parsed."""


@dataclass(frozen=True)
class AmrGraph:
    """Rooted directed labeled graph of concepts.

    ``nodes`` maps node id to concept label; insertion order is the source
    order of the PENMAN text and defines the deterministic child order used
    by every traversal. ``edges`` is kept in source order as well.
    """

    nodes: dict[str, str]
    edges: tuple[Edge, ...]
    root: str
    sentence: str | None = field(default=None, compare=False)

    def children(self, node: str) -> list[tuple[str, str]]:
        return [(rel, tgt) for src, rel, tgt in self.edges if src == node]

    def parents(self, node: str) -> list[tuple[str, str]]:
        return [(rel, src) for src, rel, tgt in self.edges if tgt == node]

    def reentrancy_count(self) -> int:
        """Number of nodes with two or more incoming edges."""
        indeg: dict[str, int] = {}
        for _, _, tgt in self.edges:
            indeg[tgt] = indeg.get(tgt, 0) + 1
        return sum(1 for d in indeg.values() if d >= 2)

    def validate(self) -> None:
        if self.root not in self.nodes:
            raise PenmanError(f"root {self.root!r} is not a node")
        for src, rel, tgt in self.edges:
            if src not in self.nodes or tgt not in self.nodes:
                raise PenmanError(f"edge ({src}, {rel}, {tgt}) references unknown node")
            if not rel.startswith(":"):
                raise PenmanError(f"relation label {rel!r} must start with ':'")
        # connectivity over the undirected view
        seen = {self.root}
        frontier = [self.root]
        undirected: dict[str, list[str]] = {n: [] for n in self.nodes}
        for src, _, tgt in self.edges:
            undirected[src].append(tgt)
            undirected[tgt].append(src)
        while frontier:
            nxt = []
            for n in frontier:
                for m in undirected[n]:
                    if m not in seen:
                        seen.add(m)
                        nxt.append(m)
            frontier = nxt
        if seen != set(self.nodes):
            missing = sorted(set(self.nodes) - seen)
            raise PenmanError(f"nodes unreachable from root: {missing}")


@dataclass(frozen=True)
class SimplifyOptions:
    remove_wiki: bool = True
    remove_sense_tags: bool = True


def parse_penman(text: str) -> AmrGraph:
    """Parse one parenthesized PENMAN expression into an :class:`AmrGraph`.

    The first occurrence of a variable defines its concept; later bare
    occurrences are reentrant references. Constants become fresh nodes.
    """
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        raise PenmanError("empty input")
    stream = iter(tokens)
    nodes: dict[str, str] = {}
    edges: list[Edge] = []
    const_counter = [0]

    def parse_node(tok: str) -> str:
        # tok is "(" here; grammar: "(" var "/" concept (rel target)* ")"
        if tok != "(":
            raise PenmanError(f"expected '(', got {tok!r}")
        var = _next(stream, "variable")
        if var in ("(", ")", "/"):
            raise PenmanError(f"expected variable, got {var!r}")
        if _next(stream, "'/'") != "/":
            raise PenmanError(f"missing '/' after variable {var!r}")
        concept = _next(stream, "concept")
        if var in nodes and nodes[var] != concept:
            raise PenmanError(f"variable {var!r} redefined: {nodes[var]!r} vs {concept!r}")
        nodes.setdefault(var, concept)
        while True:
            tok = _next(stream, "')' or relation")
            if tok == ")":
                return var
            if not tok.startswith(":"):
                raise PenmanError(f"expected relation label, got {tok!r}")
            rel = tok
            tgt_tok = _next(stream, "relation target")
            if tgt_tok == "(":
                tgt = parse_node(tgt_tok)
            elif tgt_tok in nodes:
                tgt = tgt_tok  # reentrant reference
            else:
                # attribute constant: fresh node labeled by the constant
                tgt = f"_const{const_counter[0]}"
                const_counter[0] += 1
                nodes[tgt] = tgt_tok.strip('"')
            edges.append((var, rel, tgt))

    first = next(stream)
    root = parse_node(first)
    leftover = next(stream, None)
    if leftover is not None:
        raise PenmanError(f"trailing input after graph: {leftover!r}")
    g = AmrGraph(nodes=nodes, edges=tuple(edges), root=root)
    g.validate()
    return g


def _next(stream: Iterator[str], what: str) -> str:
    try:
        return next(stream)
    except StopIteration:
        raise PenmanError(f"unexpected end of input, expected {what}") from None


def serialize(g: AmrGraph) -> str:
    """Deterministic PENMAN serialization; inverse of :func:`parse_penman`
    up to graph isomorphism. Reentrant nodes reduce to bare variables after
    their first emission."""
    emitted: set[str] = set()

    def emit(node: str) -> str:
        if node in emitted:
            return node
        emitted.add(node)
        parts = [f"({node} / {g.nodes[node]}"]
        for rel, tgt in g.children(node):
            parts.append(f" {rel} {emit(tgt)}")
        parts.append(")")
        return "".join(parts)

    return emit(g.root)


def simplify(g: AmrGraph, opts: SimplifyOptions = SimplifyOptions()) -> AmrGraph:
    """Drop :wiki attributes and strip trailing sense tags from concepts.

    Idempotent; node identity and the remaining edge set are preserved.
    """
    drop: set[str] = set()
    edges = []
    for src, rel, tgt in g.edges:
        if opts.remove_wiki and rel == ":wiki" and not g.children(tgt):
            drop.add(tgt)
            continue
        edges.append((src, rel, tgt))
    nodes = {}
    for nid, concept in g.nodes.items():
        if nid in drop:
            continue
        if opts.remove_sense_tags:
            concept = _SENSE_RE.sub("", concept)
        nodes[nid] = concept
    return replace(g, nodes=nodes, edges=tuple(edges))


def read_amr_file(path: str) -> list[AmrGraph]:
    """Read a corpus file: blocks separated by blank lines, '# ::snt ' comment
    lines carrying the reference sentence, remaining lines one PENMAN graph."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_amr_blocks(text)


def parse_amr_blocks(text: str) -> list[AmrGraph]:
    graphs = []
    for blockno, block in enumerate(re.split(r"\n\s*\n", text)):
        if not block.strip():
            continue
        sentence = None
        lines = []
        for line in block.splitlines():
            if line.startswith("# ::snt "):
                sentence = line[len("# ::snt "):].strip()
            elif line.startswith("#"):
                continue
            else:
                lines.append(line)
        penman = "\n".join(lines).strip()
        if not penman:
            if sentence is not None:
                raise PenmanError(f"block {blockno}: sentence without graph")
            continue
        g = parse_penman(penman)
        graphs.append(replace(g, sentence=sentence))
    if not graphs:
        raise PenmanError("no graphs found in input")
    return graphs
