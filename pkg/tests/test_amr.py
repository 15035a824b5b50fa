import numpy as np
import pytest

from structgen.amr import (
    AmrGraph,
    PenmanError,
    SimplifyOptions,
    parse_amr_blocks,
    parse_penman,
    serialize,
    simplify,
)
from structgen.synthetic import FIG1_PENMAN

from conftest import random_graph


class TestParse:
    def test_fig1_graph_shape(self):
        g = parse_penman(FIG1_PENMAN)
        assert len(g.nodes) == 10
        incoming = g.parents("h")
        assert len(incoming) == 2
        assert {rel for rel, _ in incoming} == {":ARG1"}
        assert {src for _, src in incoming} == {"s", "c"}
        assert g.nodes[g.root] == "possible"

    def test_minimal_graph(self):
        g = parse_penman("(h / he)")
        assert g.nodes == {"h": "he"}
        assert g.edges == ()
        assert g.root == "h"

    def test_unbalanced_raises(self):
        with pytest.raises(PenmanError):
            parse_penman("(a / and :op1 (b / b2) :op1 b")

    def test_empty_raises(self):
        with pytest.raises(PenmanError):
            parse_penman("   ")

    def test_variable_redefinition_raises(self):
        with pytest.raises(PenmanError):
            parse_penman("(a / go :op1 (a / stop))")

    def test_constants_become_nodes(self):
        g = parse_penman('(t / temporal-quantity :quant 7 :unit (y / year))')
        labels = set(g.nodes.values())
        assert "7" in labels

    def test_node_count_equals_distinct_variables(self):
        g = parse_penman("(w / want :ARG0 (b / boy) :ARG1 (g / go :ARG0 b))")
        assert len(g.nodes) == 3
        assert g.reentrancy_count() == 1

    def test_trailing_input_raises(self):
        with pytest.raises(PenmanError):
            parse_penman("(a / b) (c / d)")


class TestRoundTrip:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_graph_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, max_nodes=15)
        h = parse_penman(serialize(g))
        # isomorphic: same concept multiset, same labeled adjacency
        assert sorted(g.nodes.values()) == sorted(h.nodes.values())
        assert len(g.edges) == len(h.edges)
        assert g.reentrancy_count() == h.reentrancy_count()

    def test_fig1_round_trip(self):
        g = parse_penman(FIG1_PENMAN)
        h = parse_penman(serialize(g))
        edge_sig = lambda gr: sorted(
            (gr.nodes[s], rel, gr.nodes[t]) for s, rel, t in gr.edges
        )
        assert edge_sig(g) == edge_sig(h)


class TestSimplify:
    def test_sense_tag_stripped(self):
        g = parse_penman("(c / convict-01 :ARG1 (h / he))")
        s = simplify(g)
        assert s.nodes["c"] == "convict"

    def test_fixed_point(self):
        g = parse_penman("(h / he :mod (t / tall))")
        assert simplify(g) == simplify(simplify(g))

    def test_idempotent_on_fig1(self):
        g = parse_penman(FIG1_PENMAN)
        once = simplify(g)
        assert simplify(once) == once

    def test_flags_independent(self):
        g = parse_penman('(c / city-01 :wiki "Rome" :name (n / name))')
        keep_sense = simplify(g, SimplifyOptions(remove_wiki=True, remove_sense_tags=False))
        assert keep_sense.nodes["c"] == "city-01"
        assert "Rome" not in keep_sense.nodes.values()
        keep_wiki = simplify(g, SimplifyOptions(remove_wiki=False, remove_sense_tags=True))
        assert "Rome" in keep_wiki.nodes.values()
        assert keep_wiki.nodes["c"] == "city"

    def test_reentrancy_invariant(self):
        g = parse_penman(FIG1_PENMAN)
        assert simplify(g).reentrancy_count() == g.reentrancy_count()


class TestCorpusFile:
    def test_blocks_and_sentences(self):
        text = (
            "# ::snt the boy sees the cat .\n"
            "(s / see-01 :ARG0 (b / boy) :ARG1 (c / cat))\n"
            "\n"
            "# ::snt he sleeps .\n"
            "(s / sleep-01 :ARG0 (h / he))\n"
        )
        graphs = parse_amr_blocks(text)
        assert len(graphs) == 2
        assert graphs[0].sentence == "the boy sees the cat ."
        assert graphs[1].nodes["s"] == "sleep-01"

    def test_empty_raises(self):
        with pytest.raises(PenmanError):
            parse_amr_blocks("\n\n")
