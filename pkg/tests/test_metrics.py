import pytest
from hypothesis import given, strategies as st

from crowdboard.errors import DomainError
from crowdboard.metrics import (
    NATIVE_METRICS,
    bleu_corpus,
    meteor_lite,
    rouge_l,
    rouge_n,
    score_corpus,
    tokenize,
)

words = st.lists(st.sampled_from("a b c d e f g".split()), min_size=0, max_size=12)


class TestTokenize:
    def test_splits_punctuation(self):
        assert tokenize("Hello, world!") == ["Hello", ",", "world", "!"]

    def test_empty(self):
        assert tokenize("") == []

    def test_collapses_whitespace(self):
        assert tokenize("a  b") == ["a", "b"]

    def test_preserves_case(self):
        assert tokenize("The THE the") == ["The", "THE", "the"]


class TestBleu:
    def test_identity_scores_100(self):
        hyps = ["the cat sat on the mat", "a quick brown fox jumps high"]
        assert bleu_corpus(hyps, [[h] for h in hyps]).corpus_score == pytest.approx(100.0)

    def test_clipped_unigram_precision(self):
        result = bleu_corpus(
            ["the the the the the the the"], [["the cat is on the mat"]]
        )
        assert result.details["precisions"][0] == pytest.approx(2 / 7)

    def test_zero_four_gram_zeroes_corpus(self):
        # 4-grams exist but none match: geometric mean collapses to 0
        result = bleu_corpus(["a b c d e"], [["a b c x y"]])
        assert result.details["precisions"][3] == 0.0
        assert result.corpus_score == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(DomainError):
            bleu_corpus(["a"], [["a"], ["b"]])

    def test_empty_references_rejected(self):
        with pytest.raises(DomainError):
            bleu_corpus(["a"], [[]])

    def test_permutation_invariant_over_instances(self):
        hyps = ["the cat sat down", "dogs bark loudly at night", "rivers flow east"]
        refs = [["the cat sat down fast"], ["dogs bark at night"], ["rivers flow west"]]
        forward = bleu_corpus(hyps, refs).corpus_score
        backward = bleu_corpus(hyps[::-1], refs[::-1]).corpus_score
        assert forward == pytest.approx(backward)

    def test_brevity_penalty_applies(self):
        short = bleu_corpus(["the cat sat on"], [["the cat sat on the mat"]])
        assert short.details["brevity_penalty"] < 1.0

    def test_trailing_whitespace_invariant(self):
        a = bleu_corpus(["the cat sat on the mat  "], [["the cat sat on the mat"]])
        assert a.corpus_score == pytest.approx(100.0)


class TestRougeL:
    def test_identical(self):
        assert rouge_l(["x", "y", "z", "w"], ["x", "y", "z", "w"]) == 1.0

    def test_disjoint(self):
        assert rouge_l(["a", "b"], ["c", "d"]) == 0.0

    def test_worked_example(self):
        assert rouge_l(["a", "b", "c", "d"], ["a", "c", "d", "e"]) == pytest.approx(0.75)

    def test_empty_sides(self):
        assert rouge_l([], ["a"]) == 0.0
        assert rouge_l(["a"], []) == 0.0

    @given(words, words)
    def test_symmetry(self, hyp, ref):
        assert rouge_l(hyp, ref) == pytest.approx(rouge_l(ref, hyp))

    @given(words)
    def test_self_is_max(self, tokens):
        if tokens:
            assert rouge_l(tokens, tokens) == pytest.approx(1.0)


class TestRougeN:
    def test_identical(self):
        assert rouge_n(["a", "b", "c"], ["a", "b", "c"], 2) == 1.0

    def test_worked_bigram_example(self):
        assert rouge_n(["a", "b", "c"], ["b", "c", "d"], 2) == pytest.approx(0.5)

    def test_disjoint(self):
        assert rouge_n(["a", "b"], ["c", "d"], 1) == 0.0

    def test_oversized_n_warns_and_returns_zero(self):
        with pytest.warns(UserWarning, match="exceeds both"):
            assert rouge_n(["a", "b"], ["c"], 5) == 0.0

    def test_invalid_n(self):
        with pytest.raises(DomainError):
            rouge_n(["a"], ["a"], 0)


class TestMeteorLite:
    def test_identical_five_tokens(self):
        tokens = ["a", "b", "c", "d", "e"]
        assert meteor_lite(tokens, tokens) == pytest.approx(0.996)

    def test_no_matches(self):
        assert meteor_lite(["a", "b"], ["c", "d"]) == 0.0

    def test_single_identical_word(self):
        assert meteor_lite(["a"], ["a"]) == pytest.approx(0.5)

    def test_fragmentation_penalized(self):
        contiguous = meteor_lite(["a", "b", "c", "x"], ["a", "b", "c", "y"])
        scattered = meteor_lite(["a", "x", "b", "y"], ["a", "p", "b", "q"])
        assert scattered < contiguous

    @given(words)
    def test_bounded(self, tokens):
        if tokens:
            assert 0.0 <= meteor_lite(tokens, tokens) <= 1.0


class TestScoreCorpus:
    def test_all_native_metrics_present(self):
        hyps = ["the cat sat on the mat", "dogs bark loudly"]
        refs = [["the cat sat on the mat"], ["dogs bark loudly at noon"]]
        results = score_corpus(hyps, refs)
        assert set(results) == set(NATIVE_METRICS)
        assert len(NATIVE_METRICS) == 5

    def test_per_instance_lengths(self):
        hyps = ["the cat sat on mats", "dogs bark", "birds sing songs"]
        refs = [[h] for h in hyps]
        results = score_corpus(hyps, refs)
        assert results["bleu"].per_instance_scores == ()  # corpus-only metric
        for name in ("rouge_1", "rouge_2", "rouge_l", "meteor_lite"):
            assert len(results[name].per_instance_scores) == 3

    def test_identity_maxima(self):
        hyps = ["the cat sat on the mat today"]
        results = score_corpus(hyps, [[hyps[0]]])
        assert results["bleu"].corpus_score == pytest.approx(100.0)
        assert results["rouge_l"].corpus_score == pytest.approx(1.0)
        assert results["rouge_1"].corpus_score == pytest.approx(1.0)

    def test_best_reference_wins(self):
        results = score_corpus(["the cat"], [["totally unrelated", "the cat"]])
        assert results["rouge_l"].corpus_score == pytest.approx(1.0)

    def test_fingerprints_recorded(self):
        results = score_corpus(["a b c d"], [["a b c d"]])
        assert "meteor_lite" in results["meteor_lite"].config_fingerprint
        assert "smooth=none" in results["bleu"].config_fingerprint
