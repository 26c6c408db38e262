"""Metric correctness against independent reference implementations."""

import math
import random

import pytest

from oracles import ref_levenshtein, ref_retrieval

from morphoglot.igt import Corpus, IGTSentence, Morpheme
from morphoglot.metrics import (
    RetrievalScores,
    corpus_mer,
    glossing_accuracy,
    levenshtein,
    oov_rate,
    retrieval_scores,
    segmentation_scores,
    sequence_mer,
    tier_units,
)
from morphoglot.synth import generate_corpus, standard_spec


# --- reference implementations (kept independent of the library code) ------


def make_sentence(units, language="und"):
    """One word per unit, each word a single (unit, unit) morpheme."""
    words = tuple(units)
    analyses = tuple((Morpheme(u, u),) for u in units)
    return IGTSentence(words, analyses, None, language)


def perturb(corpus, spec, rate, seed):
    """Same word skeleton as ``corpus`` with randomly altered analyses.

    Substitutes, drops, or appends morphemes so prediction-style errors of
    every kind occur while word counts stay aligned with the gold corpus.
    """
    rng = random.Random(seed)
    pool = spec.all_morphemes()
    sentences = []
    for s in corpus:
        analyses = []
        for analysis in s.word_analyses:
            new = [
                rng.choice(pool) if rng.random() < rate else m for m in analysis
            ]
            if len(new) > 1 and rng.random() < rate / 2:
                new.pop()
            if rng.random() < rate / 2:
                new.append(rng.choice(pool))
            analyses.append(tuple(new))
        sentences.append(IGTSentence(s.words, tuple(analyses), s.translation, s.language))
    return Corpus(tuple(sentences), corpus.split)


# --- MER --------------------------------------------------------------------


class TestSequenceMer:
    def test_identical(self):
        assert sequence_mer(["A", "B"], ["A", "B"]) == 0.0

    def test_single_substitution(self):
        assert sequence_mer(["A", "B", "C"], ["A", "X", "C"]) == pytest.approx(1 / 3)

    def test_clipping(self):
        assert sequence_mer(["A"], ["X", "Y", "Z"]) == 1.0

    def test_both_empty(self):
        assert sequence_mer([], []) == 0.0

    def test_empty_gold_nonempty_pred(self):
        assert sequence_mer([], ["A"]) == 1.0

    def test_matches_dp_oracle_on_1000_random_pairs(self):
        rng = random.Random(17)
        alphabet = ["A", "B", "C", "D", "E"]
        for _ in range(1000):
            gold = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
            pred = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
            expected = ref_levenshtein(tuple(gold), tuple(pred))
            assert levenshtein(gold, pred) == expected
            assert sequence_mer(gold, pred) == min(expected / max(len(gold), 1), 1.0)

    def test_distance_symmetry_and_triangle(self):
        rng = random.Random(3)
        alphabet = ["A", "B", "C"]
        for _ in range(300):
            seqs = [
                tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
                for _ in range(3)
            ]
            x, y, z = seqs
            assert levenshtein(x, y) == levenshtein(y, x)
            assert levenshtein(x, z) <= levenshtein(x, y) + levenshtein(y, z)

    def test_zero_iff_identical(self):
        rng = random.Random(5)
        for _ in range(200):
            a = [rng.choice("AB") for _ in range(rng.randint(0, 6))]
            b = [rng.choice("AB") for _ in range(rng.randint(0, 6))]
            assert (sequence_mer(a, b) == 0.0) == (a == b)


class TestCorpusMer:
    def test_perfect(self):
        gold = Corpus((make_sentence(["A", "B"]), make_sentence(["C"])))
        assert corpus_mer(gold, gold).aggregate == 0.0

    def test_sample_level_mean(self):
        gold = Corpus((make_sentence(["A", "B", "C", "D"]), make_sentence(["E"])))
        pred = Corpus((make_sentence(["A", "B", "C", "D"]), make_sentence(["X"])))
        result = corpus_mer(gold, pred)
        assert result.per_sentence == [0.0, 1.0]
        assert result.aggregate == 0.5  # regardless of sentence lengths

    def test_aggregation_oracle(self):
        spec = standard_spec(stem_count=10, seed=21)
        gold = generate_corpus(spec, 60)
        pred = perturb(gold, spec, 0.4, seed=22)
        result = corpus_mer(gold, pred)
        assert result.aggregate == pytest.approx(
            sum(result.per_sentence) / len(result.per_sentence), abs=1e-12
        )

    def test_count_mismatch(self):
        gold = Corpus((make_sentence(["A"]),))
        with pytest.raises(ValueError):
            corpus_mer(gold, Corpus(()))

    def test_segment_tier(self):
        gold = Corpus((IGTSentence(("ab",), ((Morpheme("a", "X"), Morpheme("b", "Y")),)),))
        pred = Corpus((IGTSentence(("ab",), ((Morpheme("a", "X"), Morpheme("c", "Y")),)),))
        assert corpus_mer(gold, pred, tier="segment").aggregate == 0.5
        assert corpus_mer(gold, pred, tier="gloss").aggregate == 0.0


# --- glossing accuracy / segmentation scores --------------------------------


class TestGlossingAccuracy:
    def test_perfect(self):
        corpus = generate_corpus(standard_spec(stem_count=8, seed=1), 30)
        assert glossing_accuracy(corpus, corpus) == (1.0, 1.0)

    def test_left_aligned_partial(self):
        gold = Corpus((IGTSentence(("ab",), ((Morpheme("a", "A"), Morpheme("b", "B")),)),))
        pred = Corpus((IGTSentence(("ab",), ((Morpheme("a", "A"),),)),))
        morpheme_acc, word_acc = glossing_accuracy(gold, pred)
        assert word_acc == 0.0
        assert morpheme_acc == 0.5

    def test_pooled_matches_flat_recount(self):
        spec = standard_spec(stem_count=6, seed=33)
        gold = generate_corpus(spec, 40)
        pred = perturb(gold, spec, 0.3, seed=44)
        hits = total = whits = wtotal = 0
        for gold_s, pred_s in zip(gold, pred):
            for gold_a, pred_a in zip(gold_s.word_analyses, pred_s.word_analyses):
                g = [m.gloss for m in gold_a]
                p = [m.gloss for m in pred_a]
                wtotal += 1
                whits += g == p
                total += len(g)
                hits += sum(x == y for x, y in zip(g, p))
        morpheme_acc, word_acc = glossing_accuracy(gold, pred)
        assert morpheme_acc == pytest.approx(hits / total, abs=1e-12)
        assert word_acc == pytest.approx(whits / wtotal, abs=1e-12)


class TestSegmentationScores:
    def test_perfect(self):
        corpus = generate_corpus(standard_spec(stem_count=8, seed=1), 30)
        assert segmentation_scores(corpus, corpus) == (1.0, 1.0)

    def test_half_overlap(self):
        gold = Corpus((IGTSentence(("ab",), ((Morpheme("a", "X"), Morpheme("b", "Y")),)),))
        pred = Corpus((IGTSentence(("ab",), ((Morpheme("a", "X"), Morpheme("c", "Y")),)),))
        f1, acc = segmentation_scores(gold, pred)
        assert f1 == 0.5 and acc == 0.0

    def test_matches_per_word_recount(self):
        from collections import Counter

        spec = standard_spec(stem_count=6, seed=7)
        gold = generate_corpus(spec, 120)
        pred = perturb(gold, spec, 0.3, seed=8)
        sentence_f1s, sentence_accs = [], []
        words_checked = 0
        for gold_s, pred_s in zip(gold, pred):
            f1s, accs = [], []
            for gold_a, pred_a in zip(gold_s.word_analyses, pred_s.word_analyses):
                g = [m.segment for m in gold_a]
                p = [m.segment for m in pred_a]
                overlap = sum((Counter(g) & Counter(p)).values())
                precision = overlap / len(p) if p else 0.0
                recall = overlap / len(g) if g else 0.0
                f1s.append(
                    2 * precision * recall / (precision + recall) if precision + recall else 0.0
                )
                accs.append(float(g == p))
                words_checked += 1
            sentence_f1s.append(sum(f1s) / len(f1s))
            sentence_accs.append(sum(accs) / len(accs))
        expected = (
            sum(sentence_f1s) / len(sentence_f1s),
            sum(sentence_accs) / len(sentence_accs),
        )
        assert words_checked >= 500
        result = segmentation_scores(gold, pred)
        assert result[0] == pytest.approx(expected[0], abs=1e-12)
        assert result[1] == pytest.approx(expected[1], abs=1e-12)


# --- retrieval ---------------------------------------------------------------


class TestRetrievalScores:
    def test_single_relevant_at_rank_1(self):
        scores = retrieval_scores([[7, 2, 3]], [{7}])
        assert scores.p_at_1 == 1.0
        assert scores.ndcg_at_10 == 1.0
        assert scores.map_at_100 == 1.0

    def test_single_relevant_at_rank_2(self):
        scores = retrieval_scores([[2, 7, 3]], [{7}])
        assert scores.p_at_1 == 0.0
        assert scores.ndcg_at_10 == pytest.approx(1.0 / math.log2(3), abs=1e-12)
        assert scores.map_at_100 == pytest.approx(0.5, abs=1e-12)

    def test_empty_relevance_skipped(self):
        scores = retrieval_scores([[1, 2], [2, 1]], [set(), {2}])
        assert scores.queries == 1
        assert scores.p_at_1 == 1.0

    def test_matches_reference_on_200_random_rankings(self):
        rng = random.Random(99)
        ranked, relevant = [], []
        for _ in range(200):
            pool = list(range(150))
            rng.shuffle(pool)
            ranked.append(pool[: rng.randint(5, 120)])
            relevant.append(set(rng.sample(range(150), rng.randint(1, 12))))
        ours = retrieval_scores(ranked, relevant)
        ref = ref_retrieval(ranked, relevant)
        assert ours.p_at_1 == pytest.approx(ref[0], abs=1e-9)
        assert ours.r_at_10 == pytest.approx(ref[1], abs=1e-9)
        assert ours.ndcg_at_10 == pytest.approx(ref[2], abs=1e-9)
        assert ours.map_at_100 == pytest.approx(ref[3], abs=1e-9)

    def test_ndcg_one_when_top_ranks_are_relevant(self):
        scores = retrieval_scores([[4, 9, 1, 0]], [{4, 9}])
        assert scores.ndcg_at_10 == 1.0

    def test_rates_in_unit_interval(self):
        rng = random.Random(5)
        for _ in range(50):
            pool = list(range(30))
            rng.shuffle(pool)
            scores = retrieval_scores([pool], [set(rng.sample(range(30), 4))])
            for value in (scores.p_at_1, scores.r_at_10, scores.ndcg_at_10, scores.map_at_100):
                assert 0.0 <= value <= 1.0


# --- OOV rate ----------------------------------------------------------------


class TestOovRate:
    def test_fully_covered(self):
        corpus = generate_corpus(standard_spec(stem_count=8, seed=1), 30)
        keys = {m.key for s in corpus for m in s.morphemes()}
        assert oov_rate(keys, corpus) == 0.0

    def test_half_oov(self):
        sentence = IGTSentence(
            ("ab",), ((Morpheme("a", "X"), Morpheme("b", "Y")),)
        )
        assert oov_rate({("a", "X")}, Corpus((sentence,))) == 0.5


# --- punctuation exclusion ---------------------------------------------------


def inject_punctuation(corpus, split="train"):
    """Append a '.' word (glossed '.') to every sentence of a corpus."""
    sentences = []
    for s in corpus:
        sentences.append(
            IGTSentence(
                s.words + (".",),
                s.word_analyses + ((Morpheme(".", "."),),),
                s.translation,
                s.language,
            )
        )
    return Corpus(tuple(sentences), split)


class TestPunctuationExclusion:
    def test_all_metrics_unchanged_by_punctuation_injection(self):
        spec = standard_spec(stem_count=6, seed=7)
        gold = generate_corpus(spec, 50)
        pred = perturb(gold, spec, 0.3, seed=8)
        gold_p, pred_p = inject_punctuation(gold), inject_punctuation(pred)

        assert corpus_mer(gold, pred).per_sentence == corpus_mer(gold_p, pred_p).per_sentence
        assert corpus_mer(gold, pred, "segment").aggregate == corpus_mer(
            gold_p, pred_p, "segment"
        ).aggregate
        assert glossing_accuracy(gold, pred) == glossing_accuracy(gold_p, pred_p)
        assert segmentation_scores(gold, pred) == segmentation_scores(gold_p, pred_p)
        keys = {m.key for s in gold for m in s.morphemes()}
        assert oov_rate(keys, pred) == oov_rate(keys, pred_p)

    def test_tier_units_drop_punctuation(self):
        sentence = IGTSentence(
            ("ab", "."),
            ((Morpheme("a", "X"), Morpheme("b", "Y")), (Morpheme(".", "."),)),
        )
        assert tier_units(sentence, "gloss") == ["X", "Y"]
        assert tier_units(sentence, "segment") == ["a", "b"]
