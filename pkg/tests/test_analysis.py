"""Analysis: neighbors, analogy geometry, PCA, and the FLOPs model."""

import numpy as np
import pytest
import torch

from morphoglot.analysis import (
    CostModelInput,
    StackShape,
    TransformationGroup,
    analogy_consistency,
    flops_estimate,
    nearest_words,
    pairwise_cosines_oracle,
    pca_2d,
)
from morphoglot.encoder import CharVocab, DualEncoderModule, EncoderConfig, EncoderModel
from morphoglot.igt import PromptOptions, WordInContext

CONFIG = EncoderConfig(d_model=32, n_layers=1, n_heads=2, d_ff=64, max_seq_len=64,
                       dropout=0.0, embedding_dim=16)


def make_encoder(seed=0):
    vocab = CharVocab.from_texts(["abcdefghijklmnopqrstuvwxyz | Context:Translation"])
    torch.manual_seed(seed)
    return EncoderModel(DualEncoderModule(CONFIG, len(vocab)), vocab, CONFIG, PromptOptions())


def wic(word, transcript=None):
    return WordInContext(word, transcript or word, None)


class TestNearestWords:
    def test_query_in_pool_ranks_first(self):
        encoder = make_encoder()
        pool = [wic(w) for w in ("stone", "river", "cloud", "basket")]
        results = nearest_words(encoder, pool, pool[2], k=4)
        assert results[0][0] == pool[2]
        assert results[0][1] == pytest.approx(1.0, abs=1e-6)

    def test_matches_bruteforce_double_loop(self):
        encoder = make_encoder()
        words = [f"w{i:03d}" for i in range(300)]
        pool = [wic(w) for w in words]
        query = wic("query")
        results = nearest_words(encoder, pool, query, k=300)
        vecs = encoder.embed_words(pool).astype(np.float64)
        qv = encoder.embed_word(query).astype(np.float64)
        sims = [(float((v * qv).sum()), i) for i, v in enumerate(vecs)]
        oracle = sorted(sims, key=lambda t: (-t[0], t[1]))
        assert [pool[i] for _, i in oracle] == [w for w, _ in results]


class _VectorEncoder:
    """Analysis-facing stub: embeds each word as a preset vector."""

    def __init__(self, table):
        self.table = table

    def embed_words(self, words):
        return np.stack([self.table[w.word] for w in words]).astype(np.float64)

    def embed_word(self, w):
        return self.table[w.word].astype(np.float64)


class TestAnalogyConsistency:
    def test_parallel_diffs_give_one(self):
        delta = np.array([0.0, 1.0, 0.0, 0.0])
        table = {}
        pairs = []
        rng = np.random.default_rng(0)
        for i in range(4):
            base = rng.normal(size=4)
            table[f"s{i}"] = base
            table[f"t{i}"] = base + delta
            pairs.append((wic(f"s{i}"), wic(f"t{i}")))
        group = TransformationGroup("shift", tuple(pairs))
        assert analogy_consistency(_VectorEncoder(table), group) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_diffs_give_zero(self):
        table = {
            "s0": np.zeros(4), "t0": np.array([1.0, 0, 0, 0]),
            "s1": np.zeros(4), "t1": np.array([0, 1.0, 0, 0]),
        }
        group = TransformationGroup("orto", ((wic("s0"), wic("t0")), (wic("s1"), wic("t1"))))
        assert analogy_consistency(_VectorEncoder(table), group) == pytest.approx(0.0, abs=1e-12)

    def test_five_pairs_match_combinatorial_oracle(self):
        rng = np.random.default_rng(3)
        table = {}
        pairs = []
        diffs = []
        for i in range(5):
            source = rng.normal(size=8)
            target = rng.normal(size=8)
            table[f"s{i}"], table[f"t{i}"] = source, target
            pairs.append((wic(f"s{i}"), wic(f"t{i}")))
            diffs.append(target - source)
        group = TransformationGroup("rand", tuple(pairs))
        ours = analogy_consistency(_VectorEncoder(table), group)
        assert ours == pytest.approx(pairwise_cosines_oracle(diffs), abs=1e-12)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(4)
        table = {}
        pairs = []
        for i in range(6):
            table[f"s{i}"] = rng.normal(size=8)
            table[f"t{i}"] = rng.normal(size=8)
            pairs.append((wic(f"s{i}"), wic(f"t{i}")))
        group = TransformationGroup("rot", tuple(pairs))
        base = analogy_consistency(_VectorEncoder(table), group)
        # random orthogonal rotation via QR
        q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
        rotated = {k: q @ v for k, v in table.items()}
        assert analogy_consistency(_VectorEncoder(rotated), group) == pytest.approx(
            base, abs=1e-6
        )

    def test_zero_diff_pairs_excluded(self):
        table = {"s0": np.ones(4), "t0": np.ones(4),
                 "s1": np.zeros(4), "t1": np.array([1.0, 0, 0, 0]),
                 "s2": np.zeros(4), "t2": np.array([2.0, 0, 0, 0])}
        group = TransformationGroup(
            "zero", ((wic("s0"), wic("t0")), (wic("s1"), wic("t1")), (wic("s2"), wic("t2")))
        )
        assert analogy_consistency(_VectorEncoder(table), group) == pytest.approx(1.0, abs=1e-12)

    def test_requires_two_pairs(self):
        with pytest.raises(ValueError):
            TransformationGroup("tiny", ((wic("a"), wic("b")),))


class TestPca2D:
    def test_collinear_points_have_zero_second_ratio(self):
        direction = np.array([1.0, 2.0, -1.0, 0.5])
        points = np.stack([t * direction for t in np.linspace(-3, 3, 9)])
        result = pca_2d(points)
        assert result.explained_variance_ratio[1] == pytest.approx(0.0, abs=1e-8)
        assert result.rank_deficient

    def test_intrinsic_2d_preserves_pairwise_distances(self):
        rng = np.random.default_rng(5)
        basis, _ = np.linalg.qr(rng.normal(size=(10, 2)))
        flat = rng.normal(size=(20, 2))
        points = flat @ basis.T  # 10-dim points on a 2-dim subspace
        result = pca_2d(points)
        for i in range(20):
            for j in range(i + 1, 20):
                original = np.linalg.norm(points[i] - points[j])
                projected = np.linalg.norm(result.coordinates[i] - result.coordinates[j])
                assert projected == pytest.approx(original, abs=1e-8)

    def test_matches_eigendecomposition_oracle(self):
        rng = np.random.default_rng(6)
        points = rng.normal(size=(50, 16)) * np.linspace(3.0, 0.2, 16)
        result = pca_2d(points)
        centered = points - points.mean(axis=0)
        values = np.linalg.eigvalsh(centered.T @ centered / (len(points) - 1))[::-1]
        expected = values[:2] / values.sum()
        np.testing.assert_allclose(result.explained_variance_ratio, expected, atol=1e-6)

    def test_order_invariance_after_sign_canonicalization(self):
        rng = np.random.default_rng(7)
        points = rng.normal(size=(30, 8))
        result = pca_2d(points)
        perm = rng.permutation(30)
        permuted = pca_2d(points[perm])
        np.testing.assert_allclose(permuted.coordinates, result.coordinates[perm], atol=1e-8)

    def test_needs_two_vectors(self):
        with pytest.raises(ValueError):
            pca_2d(np.ones((1, 4)))


class TestFlopsEstimate:
    def test_hand_counted_tiny_config(self):
        # 1 layer, d_model=2, d_ff=4, seq=1, 1 token:
        # 2*(4*4) + 2*(2*1*2) + 2*(2*2*4) = 32 + 8 + 32 = 72
        inp = CostModelInput(
            encoder=StackShape(1, 2, 4),
            decoder=StackShape(1, 2, 4),
            encoder_seq_len=1,
            words_per_sentence=1,
            morphemes_per_word=1,
            beam_width=1,
            decoder_steps=1,
            decoder_prefix_len=1,
        )
        assert flops_estimate(inp).encoder_total == 72

    def test_linear_in_layers(self):
        def total(layers):
            inp = CostModelInput(
                encoder=StackShape(layers, 64, 256),
                decoder=StackShape(2, 64, 256),
                encoder_seq_len=48,
            )
            return flops_estimate(inp).encoder_total

        assert total(4) == 2 * total(2)
        assert total(6) == 3 * total(2)

    def test_monotone_in_every_field(self):
        base = dict(
            encoder=StackShape(2, 64, 256), decoder=StackShape(2, 64, 256),
            encoder_seq_len=32, words_per_sentence=8, morphemes_per_word=3,
            beam_width=5, decoder_prefix_len=2,
        )
        reference = flops_estimate(CostModelInput(**base)).sentence_total
        bumps = [
            {"encoder": StackShape(3, 64, 256)},
            {"encoder": StackShape(2, 128, 256)},
            {"encoder": StackShape(2, 64, 512)},
            {"decoder": StackShape(3, 64, 256)},
            {"decoder": StackShape(2, 128, 256)},
            {"encoder_seq_len": 64},
            {"words_per_sentence": 9},
            {"morphemes_per_word": 4},
            {"beam_width": 6},
            {"decoder_prefix_len": 3},
        ]
        for bump in bumps:
            changed = dict(base)
            changed.update(bump)
            assert flops_estimate(CostModelInput(**changed)).sentence_total >= reference

    def test_cross_attention_terms_added(self):
        base = CostModelInput(
            encoder=StackShape(2, 64, 256), decoder=StackShape(2, 64, 256),
            encoder_seq_len=32,
        )
        crossed = CostModelInput(
            encoder=StackShape(2, 64, 256), decoder=StackShape(2, 64, 256),
            encoder_seq_len=32, cross_attention=True, cross_memory_len=32,
        )
        assert flops_estimate(crossed).decoder_total > flops_estimate(base).decoder_total

    def test_rejects_nonpositive_fields(self):
        with pytest.raises(ValueError):
            StackShape(0, 2, 4)
        with pytest.raises(ValueError):
            CostModelInput(
                encoder=StackShape(1, 2, 4), decoder=StackShape(1, 2, 4),
                encoder_seq_len=0,
            )
