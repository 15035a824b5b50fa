import numpy as np
import pytest

from structgen.amr import AmrGraph, parse_penman
from structgen.bpe import train_bpe
from structgen.paths import extract_paths
from structgen.pipeline import (
    PATH_PAD,
    Record,
    build_path_label_vocab,
    encode_paths,
    extend_graph_subwords,
    linearize_concepts,
    linearize_full,
    read_records,
    segment_graph,
    write_records,
)
from structgen.vocab import PAD, RESERVED, UNK, Vocabulary, build_vocab

from conftest import random_graph


class TestLinearizeFull:
    def test_fig1_prefix_and_reentrant_reemission(self, fig1_graph):
        tokens = linearize_full(fig1_graph)
        assert tokens[:6] == ["possible", ":domain", "(", "sentence", ":ARG1", "he"]
        assert tokens.count("he") == 2

    def test_single_node(self):
        assert linearize_full(parse_penman("(h / he)")) == ["he"]

    def test_one_edge(self):
        g = parse_penman("(a / a1 :op1 (b / b1))")
        assert linearize_full(g) == ["a1", ":op1", "b1"]


class TestLinearizeConcepts:
    def test_fig1_each_concept_once(self, fig1_graph):
        concepts, order = linearize_concepts(fig1_graph)
        assert concepts.count("he") == 1
        assert len(concepts) == len(fig1_graph.nodes)
        assert len(order) == len(set(order))

    def test_single_node(self):
        assert linearize_concepts(parse_penman("(h / he)"))[0] == ["he"]

    def test_diamond_first_parent_wins(self):
        g = AmrGraph(
            nodes={"r": "root", "a": "a1", "b": "b1", "c": "c1"},
            edges=(("r", ":x", "a"), ("r", ":y", "b"), ("a", ":z", "c"), ("b", ":z", "c")),
            root="r",
        )
        concepts, order = linearize_concepts(g)
        assert concepts == ["root", "a1", "c1", "b1"]
        assert order == ["r", "a", "c", "b"]


class TestSubwordExtension:
    def test_fig1d_chain(self):
        g = parse_penman("(p / possible :domain (s / sentence-01))")
        seg = {"p": ["possible"], "s": ["sent@@", "ence-01"]}
        ext = extend_graph_subwords(g, seg)
        assert ext.nodes["s"] == "sent@@"
        assert ext.nodes["s~1"] == "ence-01"
        assert ("s", ":domain", "s~1") in ext.edges
        assert ("p", ":domain", "s") in ext.edges

    def test_single_piece_unchanged(self, fig1_graph):
        seg = {nid: [c] for nid, c in fig1_graph.nodes.items()}
        ext = extend_graph_subwords(fig1_graph, seg)
        assert ext.edges == fig1_graph.edges
        assert ext.nodes == fig1_graph.nodes

    def test_root_split_uses_root_label(self):
        g = parse_penman("(p / possible :domain (s / s1))")
        ext = extend_graph_subwords(g, {"p": ["poss@@", "ible"], "s": ["s1"]})
        assert ("p", ":root", "p~1") in ext.edges

    def test_outgoing_edges_stay_on_first_piece(self):
        g = parse_penman("(a / alpha :op1 (b / beta))")
        ext = extend_graph_subwords(g, {"a": ["al@@", "pha"], "b": ["beta"]})
        assert ("a", ":op1", "b") in ext.edges

    def test_missing_segmentation_rejected(self, fig1_graph):
        with pytest.raises(ValueError):
            extend_graph_subwords(fig1_graph, {})

    @pytest.mark.parametrize("seed", range(10))
    def test_piece_count_and_connectivity(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, max_nodes=15)
        seg = {
            nid: [f"{c}@@"] * int(rng.integers(0, 3)) + [c]
            for nid, c in g.nodes.items()
        }
        ext = extend_graph_subwords(g, seg)
        concepts, order = linearize_concepts(ext)
        assert len(concepts) == sum(len(p) for p in seg.values())
        ext.validate()  # connected
        extract_paths(ext, order)  # no disconnected pair


class TestVocab:
    def test_frequency_order(self):
        v = build_vocab([["a", "a", "b"]])
        assert v.tokens == RESERVED + ["a", "b"]

    def test_max_size_caps_and_unks(self):
        corpus = [[f"t{i}" for i in range(10) for _ in range(10 - i)]]
        v = build_vocab(corpus, max_size=5)
        assert len(v) == len(RESERVED) + 5
        assert v.id("t9") == UNK

    def test_shared_both_sides(self):
        src = [["x", "y"]]
        tgt = [["x", "y"]]
        assert build_vocab(src + tgt).tokens == build_vocab(src).tokens

    def test_file_round_trip(self, tmp_path):
        v = build_vocab([["alpha", "beta", "beta"]])
        p = tmp_path / "vocab.txt"
        v.save(str(p))
        assert Vocabulary.load(str(p)).tokens == v.tokens
        # line number = id
        lines = p.read_text().splitlines()
        assert lines[v.id("beta")] == "beta"


class TestRecords:
    def test_round_trip(self, tmp_path, fig1_graph):
        concepts, order = linearize_concepts(fig1_graph)
        pm = extract_paths(fig1_graph, order, max_len=4)
        labels = build_path_label_vocab([pm])
        index = {lab: i for i, lab in enumerate(labels)}
        flat = encode_paths(pm, index, 4)
        n = len(concepts)
        assert len(flat) == n * n * 4
        rec = Record(src=list(range(n)), tgt=[2, 5, 3], n=n, paths=flat, max_len=4)
        path = tmp_path / "data.jsonl"
        write_records(str(path), [rec])
        back = read_records(str(path))[0]
        assert back == rec

    def test_paths_padded_with_pad_label(self, fig1_graph):
        concepts, order = linearize_concepts(fig1_graph)
        pm = extract_paths(fig1_graph, order, max_len=4)
        index = {lab: i for i, lab in enumerate(build_path_label_vocab([pm]))}
        flat = np.asarray(encode_paths(pm, index, 4)).reshape(len(order), len(order), 4)
        i = order.index("h")
        j = order.index("c")
        assert flat[i, j, 0] != PATH_PAD
        assert list(flat[i, j, 1:]) == [PATH_PAD] * 3

    def test_baseline_record_has_no_paths(self):
        rec = Record(src=[1, 2], tgt=[2, 3])
        assert Record.from_json(rec.to_json()) == rec
