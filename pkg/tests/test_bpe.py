from collections import Counter

import numpy as np
import pytest

from structgen.bpe import BpeModel, apply_bpe, rejoin, segment_sequence, train_bpe


def brute_force_best_pair(words):
    """Independent most-frequent-adjacent-pair count over char symbols."""
    pairs = Counter()
    for word, freq in words.items():
        syms = list(word[:-1]) + [word[-1] + "</w>"]
        for a, b in zip(syms, syms[1:]):
            pairs[(a, b)] += freq
    top = max(pairs.values())
    return min(p for p, c in pairs.items() if c == top)


class TestTrain:
    def test_first_merge_matches_pair_counting_oracle(self):
        corpus = [["low"]] * 5
        model = train_bpe(corpus, 1)
        assert model.merges[0] == brute_force_best_pair({"low": 5})

    def test_zero_merges_gives_character_model(self):
        model = train_bpe([["hello"]], 0)
        assert model.merges == []
        assert apply_bpe("hi", model) == ["h@@", "i"]

    def test_single_char_words_learn_nothing(self):
        model = train_bpe([["a", "b", "c"]], 10)
        assert model.merges == []

    def test_empty_corpus_raises(self):
        with pytest.raises(ValueError):
            train_bpe([], 5)

    def test_oracle_on_random_corpora(self):
        rng = np.random.default_rng(7)
        alphabet = "abcd"
        for _ in range(10):
            words = [
                "".join(alphabet[i] for i in rng.integers(0, 4, size=rng.integers(2, 6)))
                for _ in range(20)
            ]
            model = train_bpe([words], 1)
            assert model.merges[0] == brute_force_best_pair(Counter(words))


class TestApply:
    def test_separator_placement(self):
        model = train_bpe([["sentence-01"] * 3], 4)
        pieces = apply_bpe("sentence-01", model)
        assert all(p.endswith("@@") for p in pieces[:-1])
        assert not pieces[-1].endswith("@@")

    def test_single_symbol_identity(self):
        model = train_bpe([["go"] * 5], 10)
        assert apply_bpe("go", model) == ["go"]

    def test_reconstruction_law(self):
        model = train_bpe([["winter", "window", "wind"]] * 3, 6)
        rng = np.random.default_rng(3)
        for _ in range(50):
            token = "".join("winterdow"[i] for i in rng.integers(0, 9, size=rng.integers(1, 10)))
            pieces = apply_bpe(token, model)
            assert "".join(p.removesuffix("@@") for p in pieces) == token

    def test_unknown_symbols_pass_through(self):
        model = train_bpe([["abc"] * 3], 3)
        pieces = apply_bpe("xyz", model)
        assert "".join(p.removesuffix("@@") for p in pieces) == "xyz"

    def test_rejoin_inverts_segmentation(self):
        model = train_bpe([["low", "lower", "lowest"]] * 4, 5)
        tokens = ["lowest", "low", "slower"]
        assert rejoin(segment_sequence(tokens, model)) == tokens


class TestIO:
    def test_model_file_round_trip(self, tmp_path):
        model = train_bpe([["paper", "pepper"]] * 4, 6)
        path = tmp_path / "bpe.model"
        model.save(str(path))
        loaded = BpeModel.load(str(path))
        assert loaded.merges == model.merges
        # one merge rule per line, two space-separated symbols
        for line in path.read_text().splitlines():
            assert len(line.split(" ")) == 2

    def test_duplicate_merges_rejected(self):
        with pytest.raises(ValueError):
            BpeModel(merges=[("a", "b"), ("a", "b")])
