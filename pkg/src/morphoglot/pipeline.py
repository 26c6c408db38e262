"""End-to-end glossing pipeline and its estimator facade.

``GlossingPipeline`` bundles a trained encoder, lexicon, and decoder, and
runs glossing and the two-setting evaluation protocol:

* train lexicon — only training-attested (plus user-added) morphemes are
  retrievable; out-of-vocabulary gold morphemes cannot be produced;
* extended lexicon — gold morphemes of the evaluation split are added to a
  COPY of the lexicon (weights untouched) before decoding, simulating a
  user expanding the lexicon at inference time.

``LexiconGlosser`` wraps train-everything / predict-glosses behind the
sklearn estimator interface.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator

from .config import RunConfig
from .decoder import (
    DecoderModel,
    WordGloss,
    gloss_corpus,
    gloss_sentence,
    train_decoder,
)
from .encoder import EncoderModel, train_encoder
from .igt import Corpus, WordInContext, bag_of_morphemes, is_punctuation_token
from .lexicon import EOS_INDEX, Lexicon, build_lexicon
from .metrics import (
    EvalReport,
    corpus_mer,
    glossing_accuracy,
    oov_rate,
    retrieval_scores,
    segmentation_scores,
)
from .validation import check_corpus, check_fitted

log = logging.getLogger(__name__)

ENCODER_FILE = "encoder.mgle"
LEXICON_FILE = "lexicon.mglx"
DECODER_FILE = "decoder.mgld"
META_FILE = "meta.json"


@dataclass
class GlossingPipeline:
    encoder: EncoderModel
    lexicon: Lexicon
    decoder: DecoderModel
    beam_width: int = 5
    top_k: int = 5

    def gloss(
        self,
        transcription: str,
        translation: Optional[str] = None,
        beam_width: Optional[int] = None,
        top_k: Optional[int] = None,
        lexicon: Optional[Lexicon] = None,
    ) -> list[WordGloss]:
        return gloss_sentence(
            self.encoder,
            self.decoder,
            lexicon if lexicon is not None else self.lexicon,
            transcription,
            translation,
            beam_width or self.beam_width,
            top_k=top_k or self.top_k,
        )

    def gloss_corpus(
        self,
        corpus: Corpus,
        beam_width: Optional[int] = None,
        lexicon: Optional[Lexicon] = None,
    ) -> tuple[Corpus, list[list[WordGloss]]]:
        return gloss_corpus(
            self.encoder,
            self.decoder,
            lexicon if lexicon is not None else self.lexicon,
            corpus,
            beam_width or self.beam_width,
            top_k=self.top_k,
        )

    # -- evaluation protocol ---------------------------------------------------

    def _retrieval_block(self, gold: Corpus, lexicon: Lexicon):
        """Word -> morpheme retrieval over the lexicon's morpheme entries."""
        samples = []
        for sentence in gold:
            for w_idx, (word, analysis) in enumerate(zip(sentence.words, sentence.word_analyses)):
                if analysis and not is_punctuation_token(word):
                    samples.append((sentence, w_idx))
        if not samples:
            return retrieval_scores([], [])
        words = [
            WordInContext(s.words[w], s.transcript, s.translation, self.encoder.prompt_options)
            for s, w in samples
        ]
        vecs = self.encoder.embed_words(words)
        matrix = lexicon.matrix
        sims = vecs @ matrix.T
        sims[:, EOS_INDEX] = -np.inf  # the EOS row is not a retrievable morpheme
        cut = min(100, sims.shape[1])
        ranked = []
        for row in sims:
            top = np.argpartition(-row, cut - 1)[:cut]
            ranked.append([int(i) for i in top[np.lexsort((top, -row[top]))]])
        relevant = []
        for s, w in samples:
            relevant.append(
                {
                    lexicon.key_index(m)
                    for m in bag_of_morphemes(s, w)
                    if lexicon.key_index(m) is not None
                }
            )
        return retrieval_scores(ranked, relevant)

    def evaluate(
        self,
        gold: Corpus,
        settings: Sequence[str] = ("train",),
        beam_width: Optional[int] = None,
        with_retrieval: bool = True,
    ) -> dict[str, EvalReport]:
        """Decode ``gold`` under the requested lexicon settings and score.

        The extended setting works on a copy; the session lexicon is never
        mutated.  When both settings run, the extended report carries
        ``delta_mer`` (train MER minus extended MER).
        """
        unknown = set(settings) - {"train", "extended"}
        if unknown:
            raise ValueError(f"unknown lexicon settings: {sorted(unknown)}")
        train_keys = {
            entry.morpheme.key
            for entry in self.lexicon.entries
            if not entry.is_eos and entry.provenance == "train"
        }
        p_oov = oov_rate(train_keys, gold)
        reports: dict[str, EvalReport] = {}
        for setting in settings:
            if setting == "train":
                lexicon = self.lexicon
                if any(e.provenance == "eval_oracle" for e in lexicon.entries):
                    raise RuntimeError(
                        "train-lexicon evaluation requires a lexicon free of "
                        "eval_oracle entries"
                    )
            else:
                lexicon = self.lexicon.copy()
                added = lexicon.extend_with_oracle(gold, self.encoder)
                log.info("extended lexicon with %d oracle entries", added)
            pred, _ = self.gloss_corpus(gold, beam_width=beam_width, lexicon=lexicon)
            gloss = corpus_mer(gold, pred, "gloss")
            seg = corpus_mer(gold, pred, "segment")
            morpheme_acc, word_acc = glossing_accuracy(gold, pred)
            seg_f1, seg_word_acc = segmentation_scores(gold, pred)
            reports[setting] = EvalReport(
                lexicon_setting=setting,
                gloss_mer=gloss.aggregate,
                seg_mer=seg.aggregate,
                per_sentence_gloss_mer=gloss.per_sentence,
                per_sentence_seg_mer=seg.per_sentence,
                morpheme_accuracy=morpheme_acc,
                word_accuracy=word_acc,
                seg_f1=seg_f1,
                seg_word_accuracy=seg_word_acc,
                retrieval=self._retrieval_block(gold, lexicon) if with_retrieval else None,
                p_oov=p_oov,
            )
        if "train" in reports and "extended" in reports:
            delta = reports["train"].gloss_mer - reports["extended"].gloss_mer
            reports["extended"].delta_mer = delta
        return reports

    # -- persistence -------------------------------------------------------------

    def save_dir(self, path, extra_meta: Optional[dict] = None) -> None:
        os.makedirs(path, exist_ok=True)
        self.encoder.save(os.path.join(path, ENCODER_FILE))
        self.lexicon.save(os.path.join(path, LEXICON_FILE))
        self.decoder.save(os.path.join(path, DECODER_FILE))
        meta = {
            "beam_width": self.beam_width,
            "top_k": self.top_k,
            "encoder_fingerprint": self.encoder.fingerprint().hex(),
            "lexicon_size": len(self.lexicon),
        }
        if extra_meta:
            meta.update(extra_meta)
        with open(os.path.join(path, META_FILE), "w", encoding="utf-8") as handle:
            json.dump(meta, handle, indent=2, sort_keys=True)

    @classmethod
    def load_dir(cls, path) -> "GlossingPipeline":
        encoder = EncoderModel.load(os.path.join(path, ENCODER_FILE))
        lexicon = Lexicon.load(os.path.join(path, LEXICON_FILE))
        decoder = DecoderModel.load(os.path.join(path, DECODER_FILE))
        beam_width, top_k = 5, 5
        meta_path = os.path.join(path, META_FILE)
        if os.path.exists(meta_path):
            with open(meta_path, "r", encoding="utf-8") as handle:
                meta = json.load(handle)
            beam_width = meta.get("beam_width", 5)
            top_k = meta.get("top_k", 5)
        if lexicon.encoder_fingerprint != encoder.fingerprint():
            raise RuntimeError("lexicon does not match the encoder checkpoint")
        decoder.check_lexicon(lexicon)
        return cls(encoder, lexicon, decoder, beam_width, top_k)


@dataclass
class FitLogs:
    encoder_log: object
    decoder_log: object
    wall_time: float


def fit_pipeline(
    train_corpus: Corpus,
    config: RunConfig,
    dev_corpus: Optional[Corpus] = None,
) -> tuple[GlossingPipeline, FitLogs]:
    """Train encoder, build the lexicon, train the decoder."""
    started = time.time()
    encoder, enc_log = train_encoder(
        train_corpus,
        config.encoder_config(),
        dev_corpus=dev_corpus,
        prompt_options=config.prompt_options(),
        epochs=config.enc_epochs,
        batch_size=config.enc_batch_size,
        lr=config.enc_lr,
        warmup_steps=config.enc_warmup_steps,
        weight_decay=config.enc_weight_decay,
        seed=config.seed,
        patience=config.enc_patience,
        target_p_at_1=config.enc_target_p_at_1,
    )
    lexicon = build_lexicon(encoder, train_corpus)
    decoder, dec_log = train_decoder(
        encoder,
        lexicon,
        train_corpus,
        config.decoder_config(),
        dev_corpus=dev_corpus,
        epochs=config.dec_epochs,
        batch_size=config.dec_batch_size,
        lr=config.dec_lr,
        weight_decay=config.dec_weight_decay,
        clip_norm=config.dec_clip_norm,
        warmup_steps=config.dec_warmup_steps,
        seed=config.seed,
        patience=config.dec_patience,
        beam_width=config.beam_width,
        eval_every=config.dec_eval_every,
        eval_beam_width=config.dec_eval_beam,
    )
    pipeline = GlossingPipeline(encoder, lexicon, decoder, config.beam_width, config.top_k)
    return pipeline, FitLogs(enc_log, dec_log, time.time() - started)


class LexiconGlosser(BaseEstimator):
    """sklearn facade: fit trains the whole pipeline, predict glosses text.

    ``X`` for fit is a Corpus (or corpus path); ``predict`` accepts a list
    of transcription strings or a Corpus and returns per-sentence lists of
    :class:`WordGloss`.  ``score`` returns 1 - glossing MER.
    """

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config

    def _config(self) -> RunConfig:
        return self.config if self.config is not None else RunConfig()

    def fit(self, X: Union[Corpus, str], y=None, dev_corpus: Optional[Corpus] = None):
        corpus = check_corpus(X)
        self.pipeline_, self.fit_logs_ = fit_pipeline(corpus, self._config(), dev_corpus)
        return self

    def predict(self, X: Union[Corpus, Sequence[str]]) -> list[list[WordGloss]]:
        check_fitted(self, "pipeline_")
        if isinstance(X, Corpus):
            _, details = self.pipeline_.gloss_corpus(X)
            return details
        return [self.pipeline_.gloss(text) for text in X]

    def score(self, X: Corpus, y=None) -> float:
        check_fitted(self, "pipeline_")
        gold = check_corpus(X)
        report = self.pipeline_.evaluate(gold, ("train",), with_retrieval=False)["train"]
        return 1.0 - report.gloss_mer
