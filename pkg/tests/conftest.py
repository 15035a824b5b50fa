import numpy as np
import pytest

from structgen.amr import AmrGraph
from structgen.synthetic import FIG1_PENMAN

LABEL_POOL = [":ARG0", ":ARG1", ":ARG2", ":mod", ":op1", ":quant", ":domain", ":time"]


def random_graph(rng: np.random.Generator, max_nodes: int = 50, extra_edges: int | None = None) -> AmrGraph:
    """Random connected rooted labeled graph: a spanning tree plus optional
    reentrant edges. Node ids n0..nk, concept = id."""
    n = int(rng.integers(2, max_nodes + 1))
    nodes = {f"n{i}": f"c{i}" for i in range(n)}
    edges = []
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        label = LABEL_POOL[rng.integers(len(LABEL_POOL))]
        edges.append((f"n{parent}", label, f"n{i}"))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, max(1, n // 5) + 1))
    for _ in range(extra_edges):
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        label = LABEL_POOL[rng.integers(len(LABEL_POOL))]
        edges.append((f"n{u}", label, f"n{v}"))
    g = AmrGraph(nodes=nodes, edges=tuple(edges), root="n0")
    g.validate()
    return g


@pytest.fixture
def fig1_graph():
    from structgen.amr import parse_penman, simplify

    return simplify(parse_penman(FIG1_PENMAN))
