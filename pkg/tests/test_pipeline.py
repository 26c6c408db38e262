"""Pipeline facade and sklearn estimator interface."""

import numpy as np
import pytest
from sklearn.base import clone

from morphoglot.config import RunConfig, load_config_file
from morphoglot.encoder import ContrastiveWordEncoder
from morphoglot.igt import Corpus, WordInContext
from morphoglot.pipeline import GlossingPipeline, LexiconGlosser, fit_pipeline
from morphoglot.synth import generate_corpus, standard_spec

TINY_CONFIG = RunConfig.desk_scale(
    enc_d_model=32, enc_layers=1, enc_heads=2, enc_d_ff=64, embedding_dim=16,
    dec_d_model=32, dec_blocks=1, dec_heads=2, dec_d_ff=64,
    enc_epochs=5, dec_epochs=8, enc_batch_size=32, dec_batch_size=16,
    enc_lr=1e-3, dec_lr=3e-3, max_morphemes=4,
    enc_target_p_at_1=None, enc_patience=None, dec_patience=None, dec_eval_every=2,
)


@pytest.fixture(scope="module")
def tiny_corpus():
    spec = standard_spec(stem_count=6, n_slots=1, affixes_per_slot=2,
                         occupancy=1.0, sentence_length=(2, 3), seed=21)
    return generate_corpus(spec, 50)


@pytest.fixture(scope="module")
def fitted(tiny_corpus):
    glosser = LexiconGlosser(config=TINY_CONFIG)
    glosser.fit(tiny_corpus, dev_corpus=tiny_corpus)
    return glosser


class TestEstimatorContract:
    def test_get_set_params_and_clone(self, fitted):
        params = fitted.get_params()
        assert params["config"] == TINY_CONFIG
        twin = clone(fitted)
        assert twin.get_params()["config"] == TINY_CONFIG
        assert not hasattr(twin, "pipeline_")

    def test_unfitted_predict_raises(self):
        with pytest.raises(RuntimeError, match="not fitted"):
            LexiconGlosser().predict(["a b"])

    def test_predict_on_strings_and_corpus(self, fitted, tiny_corpus):
        texts = [s.transcript for s in tiny_corpus.sentences[:2]]
        by_text = fitted.predict(texts)
        assert len(by_text) == 2
        for sentence, words in zip(texts, by_text):
            assert [w.surface for w in words] == sentence.split()
        by_corpus = fitted.predict(Corpus(tiny_corpus.sentences[:2], "test"))
        assert len(by_corpus) == 2

    def test_score_is_one_minus_mer(self, fitted, tiny_corpus):
        score = fitted.score(Corpus(tiny_corpus.sentences[:10], "test"))
        report = fitted.pipeline_.evaluate(
            Corpus(tiny_corpus.sentences[:10], "test"), ("train",), with_retrieval=False
        )["train"]
        assert score == pytest.approx(1.0 - report.gloss_mer, abs=1e-12)

    def test_fit_rejects_empty(self):
        with pytest.raises(ValueError):
            LexiconGlosser(config=TINY_CONFIG).fit(Corpus((), "train"))


class TestEncoderEstimator:
    def test_transform_mixed_items(self, tiny_corpus):
        estimator = ContrastiveWordEncoder(
            d_model=32, n_layers=1, n_heads=2, d_ff=64, embedding_dim=16,
            epochs=2, batch_size=32, lr=1e-3, warmup_steps=0, char_spacing=False,
        )
        estimator.fit(tiny_corpus)
        sentence = tiny_corpus.sentences[0]
        items = [
            WordInContext(sentence.words[0], sentence.transcript, sentence.translation,
                          estimator.model_.prompt_options),
            sentence.word_analyses[0][0],
        ]
        matrix = estimator.transform(items)
        assert matrix.shape == (2, 16)
        norms = np.linalg.norm(matrix, axis=1)
        assert np.all(np.abs(norms - 1.0) < 1e-5)

    def test_transform_rejects_other_types(self, tiny_corpus):
        estimator = ContrastiveWordEncoder(epochs=1)
        with pytest.raises(RuntimeError):
            estimator.transform(["plain string"])


class TestPipelinePersistence:
    def test_save_load_dir_round_trip(self, fitted, tiny_corpus, tmp_path):
        target = tmp_path / "model"
        fitted.pipeline_.save_dir(target)
        loaded = GlossingPipeline.load_dir(target)
        text = tiny_corpus.sentences[0].transcript
        a = fitted.pipeline_.gloss(text)
        b = loaded.gloss(text)
        assert [(w.segments, w.glosses) for w in a] == [(w.segments, w.glosses) for w in b]
        assert loaded.encoder.fingerprint() == fitted.pipeline_.encoder.fingerprint()

    def test_load_dir_detects_mismatched_lexicon(self, fitted, tiny_corpus, tmp_path):
        target = tmp_path / "model"
        fitted.pipeline_.save_dir(target)
        other_config = TINY_CONFIG.replace(seed=99)
        other, _ = fit_pipeline(tiny_corpus, other_config)
        other.lexicon.save(target / "lexicon.mglx")
        with pytest.raises(RuntimeError):
            GlossingPipeline.load_dir(target)


class TestEvaluateProtocol:
    def test_provenance_separation_enforced(self, fitted, tiny_corpus):
        pipeline = fitted.pipeline_
        polluted = GlossingPipeline(
            pipeline.encoder, pipeline.lexicon.copy(), pipeline.decoder
        )
        extra = generate_corpus(standard_spec(stem_count=9, seed=77), 5)
        polluted.lexicon.extend_with_oracle(extra, pipeline.encoder)
        with pytest.raises(RuntimeError, match="eval_oracle"):
            polluted.evaluate(tiny_corpus, ("train",))

    def test_extended_copy_keeps_session_lexicon(self, fitted):
        pipeline = fitted.pipeline_
        eval_corpus = generate_corpus(standard_spec(stem_count=8, seed=33), 10, "test")
        size = len(pipeline.lexicon)
        version = pipeline.lexicon.version
        pipeline.evaluate(eval_corpus, ("train", "extended"), with_retrieval=False)
        assert len(pipeline.lexicon) == size
        assert pipeline.lexicon.version == version


class TestConfigFile:
    def test_file_then_override_precedence(self, tmp_path):
        path = tmp_path / "morphoglot.cfg"
        path.write_text(
            "[run]\nseed = 9\n\n[encoder]\nepochs = 17\nlr = 1e-3\n"
            "embedding_dim = 48\n\n[decoder]\nblocks = 3\n\n[decode]\nbeam_width = 7\n"
            "\n[prompts]\nchar_spacing = false\n"
        )
        config = load_config_file(path)
        assert config.seed == 9
        assert config.enc_epochs == 17 and config.enc_lr == 1e-3
        assert config.embedding_dim == 48
        assert config.dec_blocks == 3
        assert config.beam_width == 7
        assert config.char_spacing is False

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[encoder]\nbogus = 1\n")
        with pytest.raises(ValueError, match="bogus"):
            load_config_file(path)

    def test_none_values(self, tmp_path):
        path = tmp_path / "none.cfg"
        path.write_text("[encoder]\npatience = none\n")
        assert load_config_file(path).enc_patience is None
