import networkx as nx
import numpy as np
import pytest

from structgen.paths import (
    DOWN,
    NONE_PATH,
    UP,
    bfs_python,
    extract_paths,
    flip_label,
    mask_indirect,
)
from structgen.pipeline import linearize_concepts

from conftest import random_graph


def order_of(g):
    _, order = linearize_concepts(g)
    return order


class TestTableOne:
    def test_direct_pair(self, fig1_graph):
        pm = extract_paths(fig1_graph, order_of(fig1_graph))
        assert pm.entry_by_id("h", "c") == (":ARG1" + UP,)

    def test_three_hop_pair(self, fig1_graph):
        pm = extract_paths(fig1_graph, order_of(fig1_graph))
        assert pm.entry_by_id("h", "_const0") == (
            ":ARG1" + UP,
            ":ARG2" + DOWN,
            ":quant" + DOWN,
        )

    def test_diagonal_is_none(self, fig1_graph):
        pm = extract_paths(fig1_graph, order_of(fig1_graph))
        assert pm.entry_by_id("h", "h") == NONE_PATH
        for i in range(pm.n):
            assert pm.entry(i, i) == NONE_PATH


class TestOracle:
    @pytest.mark.parametrize("seed", range(30))
    def test_lengths_match_networkx(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, max_nodes=50)
        order = order_of(g)
        pm = extract_paths(g, order, max_len=10**6)
        undirected = nx.Graph()
        undirected.add_nodes_from(g.nodes)
        undirected.add_edges_from((s, t) for s, _, t in g.edges)
        for i, a in enumerate(order):
            lengths = nx.single_source_shortest_path_length(undirected, a)
            for j, b in enumerate(order):
                expected = lengths[b]
                got = 0 if i == j else len(pm.entry(i, j))
                assert got == expected

    @pytest.mark.parametrize("seed", range(15))
    def test_symmetry_before_truncation(self, seed):
        rng = np.random.default_rng(100 + seed)
        g = random_graph(rng, max_nodes=30)
        order = order_of(g)
        pm = extract_paths(g, order, max_len=10**6)
        for i in range(pm.n):
            for j in range(pm.n):
                forward = pm.entry(i, j)
                mirrored = tuple(flip_label(x) for x in reversed(pm.entry(j, i)))
                if forward == NONE_PATH:
                    assert pm.entry(j, i) == NONE_PATH
                else:
                    assert forward == mirrored

    @pytest.mark.parametrize("seed", range(10))
    def test_kernels_agree(self, seed):
        rng = np.random.default_rng(200 + seed)
        g = random_graph(rng, max_nodes=40)
        order = order_of(g)
        fast = extract_paths(g, order, max_len=4)
        slow = extract_paths(g, order, max_len=4, kernel=bfs_python)
        assert fast.entries == slow.entries


class TestTruncation:
    def test_keeps_near_side_labels(self):
        # chain n0 -:a-> n1 -:b-> n2 -:c-> n3
        from structgen.amr import AmrGraph

        g = AmrGraph(
            nodes={f"n{i}": f"c{i}" for i in range(4)},
            edges=(("n0", ":a", "n1"), ("n1", ":b", "n2"), ("n2", ":c", "n3")),
            root="n0",
        )
        pm = extract_paths(g, ["n0", "n1", "n2", "n3"], max_len=2)
        assert pm.entry(0, 3) == (":a" + DOWN, ":b" + DOWN)
        assert pm.entry(3, 0) == (":c" + UP, ":b" + UP)

    def test_every_label_has_one_direction(self, fig1_graph):
        pm = extract_paths(fig1_graph, order_of(fig1_graph))
        for row in pm.entries:
            for path in row:
                if path == NONE_PATH:
                    continue
                for lab in path:
                    assert lab.count(UP) + lab.count(DOWN) == 1

    def test_invalid_max_len(self, fig1_graph):
        with pytest.raises(ValueError):
            extract_paths(fig1_graph, order_of(fig1_graph), max_len=0)


class TestMaskIndirect:
    def test_fig1_indirect_pair_becomes_none(self, fig1_graph):
        order = order_of(fig1_graph)
        pm = mask_indirect(extract_paths(fig1_graph, order), fig1_graph)
        assert pm.entry_by_id("h", "_const0") == NONE_PATH

    def test_direct_pair_unchanged(self, fig1_graph):
        order = order_of(fig1_graph)
        pm = mask_indirect(extract_paths(fig1_graph, order), fig1_graph)
        assert pm.entry_by_id("h", "c") == (":ARG1" + UP,)

    def test_idempotent(self, fig1_graph):
        order = order_of(fig1_graph)
        pm = mask_indirect(extract_paths(fig1_graph, order), fig1_graph)
        assert mask_indirect(pm, fig1_graph).entries == pm.entries

    @pytest.mark.parametrize("seed", range(10))
    def test_adjacency_oracle(self, seed):
        rng = np.random.default_rng(300 + seed)
        g = random_graph(rng, max_nodes=25)
        order = order_of(g)
        pm = mask_indirect(extract_paths(g, order), g)
        adjacent = set()
        for s, _, t in g.edges:
            adjacent.add((s, t))
            adjacent.add((t, s))
        for i, a in enumerate(order):
            for j, b in enumerate(order):
                entry = pm.entry(i, j)
                if i == j:
                    assert entry == NONE_PATH
                elif (a, b) in adjacent:
                    assert entry != NONE_PATH and len(entry) == 1
                else:
                    assert entry == NONE_PATH
