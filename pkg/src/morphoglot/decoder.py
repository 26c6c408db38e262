"""Autoregressive glossing decoder over a morpheme lexicon.

Conditioned on a word-in-context embedding, a small causal transformer
emits one embedding per step; each is scored against every lexicon row by
dot product (scaled by a learned temperature), so the decoder can only
select attested entries.  Training teacher-forces the gold morphemes'
encoder embeddings with token-level cross-entropy against gold lexicon
indices; inference runs beam search.

The beam keeps nested per-width candidate sets (width w+1 always explores a
superset of width w), which guarantees that widening the beam never returns
a worse-scoring sequence; at width 1 it is exactly greedy decoding, and
with width at least the number of paths it is exhaustive enumeration.
"""

from __future__ import annotations

import copy
import json
import logging
import random
import struct
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F

from .encoder import EncoderModel
from .igt import (
    Corpus,
    IGTSentence,
    Morpheme,
    WordInContext,
    is_punctuation_token,
)
from .lexicon import EOS_INDEX, FingerprintMismatchError, Lexicon, LexiconView, row_scores
from .seeding import sub_seed
from .substrate import (
    CausalStack,
    TrainState,
    fingerprint,
    load_into_module,
    load_tensors,
    module_tensors,
    save_tensors,
)

log = logging.getLogger(__name__)

DECODER_MAGIC = b"MGLD"
DECODER_VERSION = 1


@dataclass
class DecoderConfig:
    """Decoder stack shape, decode cap, and temperature settings."""

    embedding_dim: int = 128
    d_model: int = 128
    n_blocks: int = 2
    n_heads: int = 4
    d_ff: int = 512
    dropout: float = 0.1
    max_morphemes: int = 12
    kappa_init: float = 0.05
    kappa_min: float = 1e-3
    kappa_max: float = 1.0
    normalize_hidden: bool = True


class GlossDecoderModule(torch.nn.Module):
    def __init__(self, config: DecoderConfig):
        super().__init__()
        self.config = config
        self.in_proj = torch.nn.Linear(config.embedding_dim, config.d_model)
        self.bos = torch.nn.Parameter(torch.randn(config.embedding_dim) * 0.02)
        self.stack = CausalStack(
            config.d_model,
            config.n_blocks,
            config.n_heads,
            config.d_ff,
            config.dropout,
            max_seq_len=config.max_morphemes + 2,
        )
        self.out_proj = torch.nn.Linear(config.d_model, config.embedding_dim)
        self.log_inv_kappa = torch.nn.Parameter(torch.tensor(-float(np.log(config.kappa_init))))

    @property
    def kappa(self) -> torch.Tensor:
        return torch.exp(-self.log_inv_kappa)

    def clamp_kappa(self) -> None:
        with torch.no_grad():
            self.log_inv_kappa.clamp_(
                -float(np.log(self.config.kappa_max)), -float(np.log(self.config.kappa_min))
            )

    def forward(self, sequences: torch.Tensor) -> torch.Tensor:
        """(B, L, n) conditioning+morpheme embeddings -> (B, L, n) output states."""
        hidden = self.stack(self.in_proj(sequences))
        states = self.out_proj(hidden)
        if self.config.normalize_hidden:
            states = F.normalize(states, dim=-1, eps=1e-12)
        return states


@dataclass
class BeamHypothesis:
    """A partial index sequence with its cumulative log-probability."""

    indices: tuple[int, ...]
    log_prob: float
    finished: bool = False
    width_rank: int = 1  # smallest beam width at which this hypothesis survives
    steps: tuple = ()    # per-step top-k (lexicon index, prob) alternatives


@dataclass
class DecodedWord:
    indices: list[int]
    log_prob: float
    steps: list[list[tuple[int, float]]]


class DecoderModel:
    """Trained decoder bound (by fingerprint) to the lexicon's encoder."""

    def __init__(self, module: GlossDecoderModule, config: DecoderConfig,
                 lexicon_fingerprint: bytes):
        self.module = module.eval()
        self.config = config
        self.lexicon_fingerprint = bytes(lexicon_fingerprint)

    def check_lexicon(self, lexicon: Union[Lexicon, LexiconView]) -> None:
        if lexicon.encoder_fingerprint != self.lexicon_fingerprint:
            raise FingerprintMismatchError(
                "decoder was trained against a lexicon from a different encoder"
            )

    @property
    def kappa(self) -> float:
        return float(self.module.kappa.detach())

    def output_states(self, sequences: torch.Tensor) -> torch.Tensor:
        self.module.eval()
        with torch.no_grad():
            return self.module(sequences)

    def decoder_logits(
        self,
        word_vec: np.ndarray,
        prefix: Sequence[int],
        lexicon: Union[Lexicon, LexiconView],
    ) -> np.ndarray:
        """Scores over all lexicon rows for the next step after ``prefix``."""
        self.check_lexicon(lexicon)
        matrix = lexicon.matrix
        if any(not 0 <= i < len(matrix) for i in prefix):
            raise IndexError("prefix contains an invalid lexicon index")
        rows = [np.asarray(word_vec, dtype=np.float32), None]
        seq = torch.empty(1, 2 + len(prefix), self.config.embedding_dim)
        seq[0, 0] = torch.from_numpy(rows[0])
        seq[0, 1] = self.module.bos.detach()
        for j, index in enumerate(prefix):
            seq[0, 2 + j] = torch.from_numpy(matrix[index].copy())
        state = self.output_states(seq)[0, -1]
        # per-row reduction keeps scores over existing entries bit-identical
        # when the lexicon is later extended
        return row_scores(matrix, state.numpy()) / self.kappa

    # -- persistence ----------------------------------------------------------

    def save_bytes(self) -> bytes:
        header = json.dumps(
            {
                "format": DECODER_VERSION,
                "config": asdict(self.config),
                "lexicon_fingerprint": self.lexicon_fingerprint.hex(),
                "kappa": self.kappa,
            },
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8")
        blob = save_tensors(module_tensors(self.module))
        return DECODER_MAGIC + struct.pack("<II", DECODER_VERSION, len(header)) + header + blob

    def save(self, path) -> None:
        with open(path, "wb") as handle:
            handle.write(self.save_bytes())

    @classmethod
    def load_bytes(cls, blob: bytes) -> "DecoderModel":
        if blob[:4] != DECODER_MAGIC:
            raise ValueError(f"bad decoder magic {blob[:4]!r}")
        version, header_len = struct.unpack_from("<II", blob, 4)
        if version != DECODER_VERSION:
            raise ValueError(f"unsupported decoder version {version}")
        header = json.loads(blob[12 : 12 + header_len].decode("utf-8"))
        config = DecoderConfig(**header["config"])
        module = GlossDecoderModule(config)
        load_into_module(module, load_tensors(blob[12 + header_len :]))
        return cls(module, config, bytes.fromhex(header["lexicon_fingerprint"]))

    @classmethod
    def load(cls, path) -> "DecoderModel":
        with open(path, "rb") as handle:
            return cls.load_bytes(handle.read())

    def fingerprint(self) -> bytes:
        return fingerprint(self.save_bytes())


# ---------------------------------------------------------------------------
# Beam search
# ---------------------------------------------------------------------------


def _top_k_row(probs: np.ndarray, k: int) -> list[tuple[int, float]]:
    k = min(k, len(probs))
    top = np.argpartition(-probs, k - 1)[:k]
    top = top[np.lexsort((top, -probs[top]))]
    return [(int(i), float(probs[i])) for i in top]


def beam_decode_batch(
    decoder: DecoderModel,
    word_vecs: np.ndarray,
    lexicon: Union[Lexicon, LexiconView],
    beam_width: int = 5,
    max_len: Optional[int] = None,
    top_k: int = 5,
    chunk_rows: int = 4096,
) -> list[DecodedWord]:
    """Length-capped beam search for many words at once.

    A hypothesis finishes when it selects the EOS row (its log-probability
    includes that step); survivors at the length cap are force-finished.
    The answer per word is the finished hypothesis with the highest
    cumulative log-probability, ties broken toward the lexicographically
    smaller index sequence; the EOS index is stripped from the result.
    """
    if max_len is None:
        max_len = decoder.config.max_morphemes
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    decoder.check_lexicon(lexicon)
    matrix = lexicon.matrix
    torch_matrix = torch.from_numpy(matrix.copy())
    word_vecs = np.asarray(word_vecs, dtype=np.float32)
    n_words = word_vecs.shape[0]
    kappa = decoder.kappa

    actives: list[list[BeamHypothesis]] = [
        [BeamHypothesis((), 0.0)] for _ in range(n_words)
    ]
    pools: list[list[BeamHypothesis]] = [[] for _ in range(n_words)]

    bos = decoder.module.bos.detach().to(torch.float32)
    for step in range(max_len):
        flat: list[tuple[int, BeamHypothesis]] = [
            (w, hyp) for w in range(n_words) for hyp in actives[w]
        ]
        if not flat:
            break
        seq_len = step + 2
        log_rows = np.empty((len(flat), matrix.shape[0]), dtype=np.float32)
        prob_rows = np.empty_like(log_rows)
        for start in range(0, len(flat), chunk_rows):
            chunk = flat[start : start + chunk_rows]
            seqs = torch.empty(len(chunk), seq_len, decoder.config.embedding_dim)
            for r, (w, hyp) in enumerate(chunk):
                seqs[r, 0] = torch.from_numpy(word_vecs[w])
                seqs[r, 1] = bos
                if hyp.indices:
                    seqs[r, 2:] = torch_matrix[list(hyp.indices)]
            states = decoder.output_states(seqs)[:, -1, :]
            logits = (states @ torch_matrix.T) / kappa
            log_rows[start : start + len(chunk)] = F.log_softmax(logits, dim=1).numpy()
            prob_rows[start : start + len(chunk)] = F.softmax(logits, dim=1).numpy()

        row_of = {}
        for r, (w, hyp) in enumerate(flat):
            row_of.setdefault(w, []).append((hyp, r))

        for w, hyps in row_of.items():
            # per-parent shortlists: a step selects at most beam_width
            # candidates total, so per-parent top beam_width suffices
            shortlist = []
            for local, (hyp, r) in enumerate(hyps):
                row = log_rows[r]
                take = min(beam_width, len(row))
                top = np.argpartition(-row, take - 1)[:take]
                top = top[np.lexsort((top, -row[top]))]
                for token in top:
                    shortlist.append(
                        (hyp.log_prob + float(row[token]), int(token), local, hyp, r)
                    )
            # nested selection: the width-w survivor set extends the
            # width-(w-1) set by the best eligible candidate, so survivor
            # sets (and finished pools) are nested across beam widths
            chosen: list[tuple] = []
            taken: set[int] = set()
            for width in range(1, beam_width + 1):
                best = None
                for position, cand in enumerate(shortlist):
                    if position in taken:
                        continue
                    score, token, local, hyp, r = cand
                    if hyp.width_rank > width:
                        continue
                    key = (-score, token, local)
                    if best is None or key < best[0]:
                        best = (key, position)
                if best is None:
                    continue
                taken.add(best[1])
                chosen.append((width, shortlist[best[1]]))

            new_actives = []
            for width, (score, token, local, hyp, r) in chosen:
                new = BeamHypothesis(
                    indices=hyp.indices + (token,),
                    log_prob=score,
                    finished=(token == EOS_INDEX),
                    width_rank=width,
                    steps=hyp.steps + (_top_k_row(prob_rows[r], top_k),),
                )
                if new.finished:
                    pools[w].append(new)
                else:
                    new_actives.append(new)
            actives[w] = new_actives

    results = []
    for w in range(n_words):
        pool = list(pools[w])
        for hyp in actives[w]:  # force-finish at the length cap
            pool.append(BeamHypothesis(hyp.indices, hyp.log_prob, True, hyp.width_rank, hyp.steps))
        assert pool, "beam search must produce at least one hypothesis"
        best = min(pool, key=lambda h: (-h.log_prob, h.indices))
        indices = [i for i in best.indices if i != EOS_INDEX]
        results.append(DecodedWord(indices, best.log_prob, [list(s) for s in best.steps]))
    return results


def beam_decode(
    decoder: DecoderModel,
    w: WordInContext,
    encoder: EncoderModel,
    lexicon: Union[Lexicon, LexiconView],
    beam_width: int = 5,
    max_len: Optional[int] = None,
    top_k: int = 5,
) -> DecodedWord:
    """Single-word convenience wrapper over :func:`beam_decode_batch`."""
    vec = encoder.embed_word(w)[None, :]
    return beam_decode_batch(decoder, vec, lexicon, beam_width, max_len, top_k)[0]


# ---------------------------------------------------------------------------
# Sentence glossing
# ---------------------------------------------------------------------------


@dataclass
class WordGloss:
    surface: str
    segments: list[str]
    glosses: list[str]
    log_prob: float
    alternatives: list[list[tuple[str, str, float]]]
    is_punctuation: bool = False


def _decoded_to_gloss(
    surface: str, decoded: DecodedWord, lexicon: Union[Lexicon, LexiconView]
) -> WordGloss:
    segments, glosses = [], []
    for index in decoded.indices:
        m = lexicon.morpheme_at(index)
        segments.append(m.segment)
        glosses.append(m.gloss)
    alternatives = []
    for step in decoded.steps[: len(decoded.indices)]:
        rendered = []
        for index, prob in step:
            m = lexicon.morpheme_at(index)
            if m is None:
                rendered.append(("<EOS>", "<EOS>", prob))
            else:
                rendered.append((m.segment, m.gloss, prob))
        alternatives.append(rendered)
    return WordGloss(surface, segments, glosses, decoded.log_prob, alternatives)


def gloss_words(
    encoder: EncoderModel,
    decoder: DecoderModel,
    lexicon: Union[Lexicon, LexiconView],
    words: Sequence[WordInContext],
    surfaces: Sequence[str],
    beam_width: int = 5,
    max_len: Optional[int] = None,
    top_k: int = 5,
) -> list[WordGloss]:
    if not words:
        return []
    vecs = encoder.embed_words(list(words))
    decoded = beam_decode_batch(decoder, vecs, lexicon, beam_width, max_len, top_k)
    return [_decoded_to_gloss(s, d, lexicon) for s, d in zip(surfaces, decoded)]


def gloss_sentence(
    encoder: EncoderModel,
    decoder: DecoderModel,
    lexicon: Union[Lexicon, LexiconView],
    transcription: str,
    translation: Optional[str] = None,
    beam_width: int = 5,
    max_len: Optional[int] = None,
    top_k: int = 5,
) -> list[WordGloss]:
    """Gloss every whitespace token of a transcription independently.

    Punctuation-only tokens pass through verbatim with empty analyses.
    Every returned word has exactly as many glosses as segments.
    """
    tokens = transcription.split()
    transcript = " ".join(tokens)
    targets = []
    for position, token in enumerate(tokens):
        if not is_punctuation_token(token):
            targets.append(
                (position, WordInContext(token, transcript, translation, encoder.prompt_options))
            )
    glossed = gloss_words(
        encoder, decoder, lexicon,
        [w for _, w in targets], [w.word for _, w in targets],
        beam_width, max_len, top_k,
    )
    out = [
        WordGloss(token, [], [], 0.0, [], is_punctuation=True) for token in tokens
    ]
    for (position, _), result in zip(targets, glossed):
        out[position] = result
    return out


def gloss_corpus(
    encoder: EncoderModel,
    decoder: DecoderModel,
    lexicon: Union[Lexicon, LexiconView],
    corpus: Corpus,
    beam_width: int = 5,
    max_len: Optional[int] = None,
    top_k: int = 5,
    batch_words: int = 2048,
) -> tuple[Corpus, list[list[WordGloss]]]:
    """Decode every sentence of a corpus (transcription + translation inputs).

    Returns the predicted corpus (same tokenization, predicted analyses) and
    the per-sentence :class:`WordGloss` detail.
    """
    jobs: list[tuple[int, int, WordInContext]] = []
    details: list[list[WordGloss]] = []
    for s_idx, sentence in enumerate(corpus):
        row = []
        for w_idx, token in enumerate(sentence.words):
            if is_punctuation_token(token):
                row.append(WordGloss(token, [], [], 0.0, [], is_punctuation=True))
            else:
                jobs.append(
                    (
                        s_idx,
                        w_idx,
                        WordInContext(
                            token, sentence.transcript, sentence.translation,
                            encoder.prompt_options,
                        ),
                    )
                )
                row.append(None)  # filled below
        details.append(row)

    for start in range(0, len(jobs), batch_words):
        chunk = jobs[start : start + batch_words]
        glossed = gloss_words(
            encoder, decoder, lexicon,
            [w for _, _, w in chunk], [w.word for _, _, w in chunk],
            beam_width, max_len, top_k,
        )
        for (s_idx, w_idx, _), result in zip(chunk, glossed):
            details[s_idx][w_idx] = result

    sentences = []
    for sentence, row in zip(corpus, details):
        analyses = tuple(
            tuple(Morpheme(seg, gl) for seg, gl in zip(wg.segments, wg.glosses))
            for wg in row
        )
        sentences.append(
            IGTSentence(sentence.words, analyses, sentence.translation, sentence.language)
        )
    return Corpus(tuple(sentences), corpus.split), details


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class DecoderTrainLog:
    losses: list[float] = field(default_factory=list)
    epoch_losses: list[float] = field(default_factory=list)
    dev_mer: list[float] = field(default_factory=list)
    kappa: list[float] = field(default_factory=list)
    best_epoch: int = -1
    wall_time: float = 0.0


def _encoder_checksum(encoder: EncoderModel) -> bytes:
    return fingerprint(save_tensors(module_tensors(encoder.module)))


def _training_targets(corpus: Corpus, lexicon: Lexicon) -> list[tuple[int, int, list[int]]]:
    """(sentence, word, gold index sequence) for every trainable word token."""
    out = []
    for s_idx, sentence in enumerate(corpus):
        for w_idx, (word, analysis) in enumerate(zip(sentence.words, sentence.word_analyses)):
            if not analysis or is_punctuation_token(word):
                continue
            indices = []
            for m in analysis:
                index = lexicon.key_index(m)
                if index is None:
                    raise ValueError(
                        f"gold morpheme {m} is missing from the lexicon; "
                        "decoder training must be closed-world"
                    )
                indices.append(index)
            out.append((s_idx, w_idx, indices))
    return out


def train_decoder(
    encoder: EncoderModel,
    lexicon: Lexicon,
    train_corpus: Corpus,
    config: DecoderConfig = DecoderConfig(),
    *,
    dev_corpus: Optional[Corpus] = None,
    epochs: int = 100,
    batch_size: int = 32,
    lr: float = 1e-4,
    weight_decay: float = 0.01,
    clip_norm: float = 1.0,
    warmup_steps: int = 0,
    seed: int = 0,
    patience: Optional[int] = None,
    beam_width: int = 5,
    eval_every: int = 1,
    eval_beam_width: Optional[int] = None,
) -> tuple[DecoderModel, DecoderTrainLog]:
    """Teacher-forced training against gold lexicon indices.

    The encoder stays frozen (verified by checksum); per word the target is
    the gold index sequence followed by EOS, the inputs are the word
    embedding, BOS, and the gold morphemes' lexicon rows; the loss is mean
    token-level cross-entropy over the lexicon logits.  Checkpoint selection
    follows dev glossing MER when a dev corpus is given.
    """
    if config.embedding_dim != encoder.embedding_dim:
        raise ValueError("decoder embedding_dim must match the encoder")
    if lexicon.encoder_fingerprint != encoder.fingerprint():
        raise FingerprintMismatchError("lexicon is not bound to this encoder")

    started = time.time()
    encoder_before = _encoder_checksum(encoder)
    samples = _training_targets(train_corpus, lexicon)
    if not samples:
        raise ValueError("training corpus has no analyzed words")
    max_target = max(len(t) for _, _, t in samples)
    if max_target > config.max_morphemes:
        raise ValueError(
            f"a training word has {max_target} morphemes; raise max_morphemes"
        )

    torch.manual_seed(sub_seed(seed, "decoder-init"))
    shuffle_rng = random.Random(sub_seed(seed, "decoder-shuffle"))

    words = [
        WordInContext(
            train_corpus.sentences[s].words[w],
            train_corpus.sentences[s].transcript,
            train_corpus.sentences[s].translation,
            encoder.prompt_options,
        )
        for s, w, _ in samples
    ]
    word_vecs = encoder.embed_words(words)
    targets = [t for _, _, t in samples]
    matrix = torch.from_numpy(lexicon.matrix.copy())

    module = GlossDecoderModule(config)
    state = TrainState(module, lr, weight_decay, clip_norm, warmup_steps)
    train_log = DecoderTrainLog()

    dev_eval = None
    if dev_corpus is not None:
        # embed the dev words once: the encoder is frozen, so these vectors
        # are valid for every epoch's checkpoint evaluation
        dev_jobs = []
        for s_idx, sentence in enumerate(dev_corpus):
            for w_idx, token in enumerate(sentence.words):
                if not is_punctuation_token(token):
                    dev_jobs.append((s_idx, w_idx))
        dev_words = [
            WordInContext(
                dev_corpus.sentences[s].words[w],
                dev_corpus.sentences[s].transcript,
                dev_corpus.sentences[s].translation,
                encoder.prompt_options,
            )
            for s, w in dev_jobs
        ]
        dev_eval = (dev_jobs, encoder.embed_words(dev_words))

    def dev_glossing_mer(candidate: DecoderModel) -> float:
        jobs, vecs = dev_eval
        decoded = beam_decode_batch(
            candidate, vecs, lexicon, eval_beam_width or beam_width,
            config.max_morphemes, top_k=1,
        )
        sentences = []
        cursor = 0
        for s_idx, sentence in enumerate(dev_corpus):
            analyses = []
            for w_idx, token in enumerate(sentence.words):
                if is_punctuation_token(token):
                    analyses.append(())
                else:
                    indices = decoded[cursor].indices
                    cursor += 1
                    analyses.append(
                        tuple(lexicon.morpheme_at(i) for i in indices)
                    )
            sentences.append(
                IGTSentence(sentence.words, tuple(analyses), sentence.translation,
                            sentence.language)
            )
        from .metrics import corpus_mer

        pred = Corpus(tuple(sentences), dev_corpus.split)
        return corpus_mer(dev_corpus, pred, "gloss").aggregate

    best_metric = float("inf")
    best_state = None
    stale = 0

    order_template = list(range(len(samples)))
    for epoch in range(epochs):
        module.train()
        order = order_template[:]
        shuffle_rng.shuffle(order)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), batch_size):
            rows = order[start : start + batch_size]
            width = max(len(targets[i]) for i in rows) + 2
            seqs = torch.zeros(len(rows), width, config.embedding_dim)
            labels = torch.full((len(rows), width - 1), -100, dtype=torch.long)
            for r, i in enumerate(rows):
                gold = targets[i]
                seqs[r, 0] = torch.from_numpy(word_vecs[i])
                seqs[r, 1] = module.bos
                if gold:
                    seqs[r, 2 : 2 + len(gold)] = matrix[gold]
                labels[r, : len(gold)] = torch.as_tensor(gold)
                labels[r, len(gold)] = EOS_INDEX
            states = module(seqs)[:, 1:, :]
            logits = (states @ matrix.T) / module.kappa
            loss = F.cross_entropy(
                logits.reshape(-1, logits.shape[-1]), labels.reshape(-1), ignore_index=-100
            )
            state.step(loss)
            module.clamp_kappa()
            train_log.losses.append(float(loss.detach()))
            epoch_loss += train_log.losses[-1]
            n_batches += 1
        train_log.epoch_losses.append(epoch_loss / max(n_batches, 1))
        train_log.kappa.append(float(module.kappa.detach()))

        if dev_corpus is not None and (epoch % eval_every == 0 or epoch == epochs - 1):
            candidate = DecoderModel(module, config, lexicon.encoder_fingerprint)
            mer = dev_glossing_mer(candidate)
            module.train()
            train_log.dev_mer.append(mer)
            if mer < best_metric:
                best_metric = mer
                best_state = copy.deepcopy(module.state_dict())
                train_log.best_epoch = epoch
                stale = 0
            else:
                stale += 1
            log.info("decoder epoch %d: loss %.4f dev MER %.4f", epoch,
                     train_log.epoch_losses[-1], mer)
            if mer == 0.0:
                break
            if patience is not None and stale > patience:
                break
        else:
            train_log.best_epoch = epoch

    if best_state is not None:
        module.load_state_dict(best_state)
    if _encoder_checksum(encoder) != encoder_before:
        raise RuntimeError("encoder parameters changed during decoder training")
    train_log.wall_time = time.time() - started
    return DecoderModel(module.eval(), config, lexicon.encoder_fingerprint), train_log
