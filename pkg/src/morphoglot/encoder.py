"""Dual encoder: words-in-context and morphemes in one embedding space.

A single character-level transformer (shared weights) encodes both prompt
kinds; a linear projection and L2 normalization yield unit vectors whose
dot product is the similarity.  Training maximizes the similarity of a word
to its constituent morphemes against in-batch negatives with a
multi-positive InfoNCE loss: other in-batch morphemes that genuinely belong
to the query word's bag are treated as positives and averaged per query, so
shared affixes are never punished as false negatives.
"""

from __future__ import annotations

import copy
import json
import logging
import random
import struct
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from .igt import (
    Corpus,
    EOS_PROMPT,
    Morpheme,
    PromptOptions,
    WordInContext,
    bag_of_morphemes,
    is_punctuation_token,
    render_morpheme_prompt,
    render_word_prompt,
    word_in_context,
)
from .seeding import sub_seed
from .substrate import (
    SequenceEncoder,
    TrainState,
    TransformerConfig,
    fingerprint,
    load_into_module,
    load_tensors,
    module_tensors,
    save_tensors,
)

log = logging.getLogger(__name__)

ENCODER_MAGIC = b"MGLE"
ENCODER_VERSION = 1


class CharVocab:
    """Character vocabulary with PAD=0 and UNK=1; unseen characters map to UNK."""

    PAD = 0
    UNK = 1

    def __init__(self, chars: Sequence[str]):
        self.chars = tuple(dict.fromkeys(chars))
        self.index = {ch: i + 2 for i, ch in enumerate(self.chars)}

    @classmethod
    def from_texts(cls, texts: Sequence[str]) -> "CharVocab":
        return cls(sorted({ch for text in texts for ch in text}))

    def __len__(self) -> int:
        return len(self.chars) + 2

    def encode(self, text: str, max_len: Optional[int] = None) -> list[int]:
        ids = [self.index.get(ch, self.UNK) for ch in text]
        return ids[:max_len] if max_len else ids


@dataclass
class EncoderConfig:
    """Architecture and temperature settings (desk-scale defaults)."""

    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 4
    d_ff: int = 512
    max_seq_len: int = 256
    dropout: float = 0.1
    embedding_dim: int = 128
    tau_init: float = 0.05
    tau_min: float = 1e-3
    tau_max: float = 1.0
    pooling: str = "mean"


class DualEncoderModule(torch.nn.Module):
    """Shared transformer + projection + learnable temperature."""

    def __init__(self, config: EncoderConfig, vocab_size: int):
        super().__init__()
        self.encoder = SequenceEncoder(
            TransformerConfig(
                vocab_size=vocab_size,
                d_model=config.d_model,
                n_layers=config.n_layers,
                n_heads=config.n_heads,
                d_ff=config.d_ff,
                max_seq_len=config.max_seq_len,
                dropout_rate=config.dropout,
                causal=False,
                pooling=config.pooling,
            )
        )
        self.projection = torch.nn.Linear(config.d_model, config.embedding_dim, bias=False)
        self.log_inv_tau = torch.nn.Parameter(torch.tensor(-float(np.log(config.tau_init))))
        self._tau_bounds = (config.tau_min, config.tau_max)

    @property
    def tau(self) -> torch.Tensor:
        return torch.exp(-self.log_inv_tau)

    def clamp_tau(self) -> None:
        lo, hi = self._tau_bounds
        with torch.no_grad():
            self.log_inv_tau.clamp_(-float(np.log(hi)), -float(np.log(lo)))

    def forward(self, token_ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        pooled, _ = self.encoder(token_ids, pad_mask)
        return F.normalize(self.projection(pooled), dim=-1, eps=1e-12)


def _pad_batch(id_lists: Sequence[Sequence[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(ids) for ids in id_lists)
    batch = torch.full((len(id_lists), width), CharVocab.PAD, dtype=torch.long)
    mask = torch.zeros(len(id_lists), width, dtype=torch.bool)
    for row, ids in enumerate(id_lists):
        batch[row, : len(ids)] = torch.as_tensor(ids, dtype=torch.long)
        mask[row, : len(ids)] = True
    return batch, mask


class EncoderModel:
    """A trained dual encoder bound to its vocabulary and prompt options."""

    def __init__(
        self,
        module: DualEncoderModule,
        vocab: CharVocab,
        config: EncoderConfig,
        prompt_options: PromptOptions,
    ):
        self.module = module.eval()
        self.vocab = vocab
        self.config = config
        self.prompt_options = prompt_options
        self._fingerprint: Optional[bytes] = None

    @property
    def embedding_dim(self) -> int:
        return self.config.embedding_dim

    @property
    def tau(self) -> float:
        return float(self.module.tau.detach())

    def embed_texts(self, texts: Sequence[str], batch_size: int = 256) -> np.ndarray:
        """Unit-norm embeddings for raw prompt strings, row per input."""
        self.module.eval()
        out = np.empty((len(texts), self.embedding_dim), dtype=np.float32)
        with torch.no_grad():
            for start in range(0, len(texts), batch_size):
                chunk = texts[start : start + batch_size]
                ids = [
                    self.vocab.encode(text, self.config.max_seq_len) or [CharVocab.UNK]
                    for text in chunk
                ]
                batch, mask = _pad_batch(ids)
                out[start : start + len(chunk)] = self.module(batch, mask).numpy()
        return out

    def embed_words(self, words: Sequence[WordInContext], batch_size: int = 256) -> np.ndarray:
        return self.embed_texts([render_word_prompt(w) for w in words], batch_size)

    def embed_word(self, w: WordInContext) -> np.ndarray:
        return self.embed_words([w])[0]

    def embed_morphemes(self, morphemes: Sequence[Morpheme], batch_size: int = 256) -> np.ndarray:
        spacing = self.prompt_options.char_spacing
        return self.embed_texts(
            [render_morpheme_prompt(m, spacing) for m in morphemes], batch_size
        )

    def embed_morpheme(self, m: Morpheme) -> np.ndarray:
        return self.embed_morphemes([m])[0]

    def embed_eos(self) -> np.ndarray:
        return self.embed_texts([EOS_PROMPT])[0]

    def similarity(self, w: WordInContext, m: Morpheme) -> float:
        return float(np.dot(self.embed_word(w), self.embed_morpheme(m)))

    # -- persistence --------------------------------------------------------

    def _header(self) -> dict:
        return {
            "format": ENCODER_VERSION,
            "config": asdict(self.config),
            "prompt_options": asdict(self.prompt_options),
            "vocab": "".join(self.vocab.chars),
            "embedding_dim": self.embedding_dim,
            "tau": self.tau,
        }

    def save_bytes(self) -> bytes:
        header = json.dumps(self._header(), sort_keys=True, separators=(",", ":")).encode("utf-8")
        blob = save_tensors(module_tensors(self.module))
        return ENCODER_MAGIC + struct.pack("<II", ENCODER_VERSION, len(header)) + header + blob

    def save(self, path) -> None:
        with open(path, "wb") as handle:
            handle.write(self.save_bytes())

    @classmethod
    def load_bytes(cls, blob: bytes) -> "EncoderModel":
        if blob[:4] != ENCODER_MAGIC:
            raise ValueError(f"bad encoder magic {blob[:4]!r}")
        version, header_len = struct.unpack_from("<II", blob, 4)
        if version != ENCODER_VERSION:
            raise ValueError(f"unsupported encoder version {version}")
        header = json.loads(blob[12 : 12 + header_len].decode("utf-8"))
        config = EncoderConfig(**header["config"])
        vocab = CharVocab(tuple(header["vocab"]))
        module = DualEncoderModule(config, len(vocab))
        load_into_module(module, load_tensors(blob[12 + header_len :]))
        options = PromptOptions(**header["prompt_options"])
        return cls(module, vocab, config, options)

    @classmethod
    def load(cls, path) -> "EncoderModel":
        with open(path, "rb") as handle:
            return cls.load_bytes(handle.read())

    def fingerprint(self) -> bytes:
        """32-byte digest of the serialized model; binds lexicons to weights."""
        if self._fingerprint is None:
            self._fingerprint = fingerprint(self.save_bytes())
        return self._fingerprint


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------


def build_positives_mask(
    bags: Sequence[frozenset], morphemes: Sequence[Morpheme]
) -> np.ndarray:
    """mask[i][j] is True iff batch morpheme j belongs to query word i's bag."""
    size = len(bags)
    if size != len(morphemes):
        raise ValueError("bags and morphemes must have equal length")
    mask = np.zeros((size, size), dtype=bool)
    for i, bag in enumerate(bags):
        for j, m in enumerate(morphemes):
            mask[i, j] = m in bag
    return mask


def contrastive_loss(
    similarity: torch.Tensor, positives: torch.Tensor, tau: torch.Tensor | float
) -> torch.Tensor:
    """Multi-positive InfoNCE, averaged per query then over the batch.

    ``-(1/B) sum_i (1/|P_i|) sum_{p in P_i} log softmax_j(S[i, j]/tau)[p]``.
    With one positive per query this is exactly standard InfoNCE.
    """
    if similarity.dim() != 2 or similarity.shape[0] != similarity.shape[1]:
        raise ValueError("similarity must be a square matrix")
    if not torch.isfinite(similarity).all():
        raise ValueError("non-finite similarity values")
    positives = positives.to(torch.bool)
    if not torch.diagonal(positives).all():
        raise ValueError("positives mask must be true on the diagonal")
    log_probs = F.log_softmax(similarity / tau, dim=1)
    weights = positives.to(log_probs.dtype)
    per_query = (log_probs * weights).sum(dim=1) / weights.sum(dim=1)
    return -per_query.mean()


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class EncoderTrainLog:
    losses: list[float] = field(default_factory=list)
    epoch_losses: list[float] = field(default_factory=list)
    dev_p_at_1: list[float] = field(default_factory=list)
    tau: list[float] = field(default_factory=list)
    best_epoch: int = -1
    wall_time: float = 0.0


def _word_samples(corpus: Corpus) -> list[tuple[int, int]]:
    samples = []
    for s_idx, sentence in enumerate(corpus):
        for w_idx, (word, analysis) in enumerate(zip(sentence.words, sentence.word_analyses)):
            if analysis and not is_punctuation_token(word):
                samples.append((s_idx, w_idx))
    return samples


def corpus_morpheme_types(corpus: Corpus) -> list[Morpheme]:
    """Distinct morphemes in first-occurrence order."""
    seen: dict[tuple[str, str], Morpheme] = {}
    for sentence in corpus:
        for m in sentence.morphemes():
            seen.setdefault(m.key, m)
    return list(seen.values())


def validation_p_at_1(
    model: EncoderModel,
    dev_corpus: Corpus,
    candidate_morphemes: Sequence[Morpheme],
    batch_size: int = 256,
) -> float:
    """Fraction of dev words whose nearest candidate morpheme is in their bag."""
    samples = _word_samples(dev_corpus)
    if not samples or not candidate_morphemes:
        return 0.0
    candidate_index = {m.key: j for j, m in enumerate(candidate_morphemes)}
    words = [
        word_in_context(dev_corpus.sentences[s], w, model.prompt_options)
        for s, w in samples
    ]
    word_vecs = model.embed_words(words, batch_size)
    morph_vecs = model.embed_morphemes(list(candidate_morphemes), batch_size)
    top1 = np.argmax(word_vecs @ morph_vecs.T, axis=1)
    hits = total = 0
    for (s, w), best in zip(samples, top1):
        relevant = {
            candidate_index[m.key]
            for m in bag_of_morphemes(dev_corpus.sentences[s], w)
            if m.key in candidate_index
        }
        if not relevant:
            continue
        total += 1
        hits += int(best) in relevant
    return hits / total if total else 0.0


def train_encoder(
    train_corpus: Corpus,
    config: EncoderConfig = EncoderConfig(),
    *,
    dev_corpus: Optional[Corpus] = None,
    prompt_options: PromptOptions = PromptOptions(),
    epochs: int = 100,
    batch_size: int = 128,
    lr: float = 2e-5,
    warmup_steps: int = 100,
    weight_decay: float = 0.01,
    clip_norm: float = 1.0,
    seed: int = 0,
    patience: Optional[int] = None,
    target_p_at_1: Optional[float] = None,
) -> tuple[EncoderModel, EncoderTrainLog]:
    """Contrastive training over (word-in-context, constituent morpheme) pairs.

    Each epoch pairs every analyzed word token with one of its morphemes
    (resampled per epoch), shuffles, and batches; in-batch positives are
    derived from the words' morpheme bags.  The checkpoint with the best
    dev retrieval P@1 is returned (last epoch when no dev corpus is given).
    ``patience``/``target_p_at_1`` stop training early once dev retrieval
    stalls or suffices.
    """
    samples = _word_samples(train_corpus)
    if not samples:
        raise ValueError("training corpus has no analyzed words")

    started = time.time()
    torch.manual_seed(sub_seed(seed, "encoder-init"))
    pair_rng = random.Random(sub_seed(seed, "encoder-pairs"))

    # vocabulary over rendered training prompts plus the reserved EOS prompt
    morpheme_types = corpus_morpheme_types(train_corpus)
    word_prompts = [
        render_word_prompt(word_in_context(train_corpus.sentences[s], w, prompt_options))
        for s, w in samples
    ]
    morpheme_prompts = {
        m.key: render_morpheme_prompt(m, prompt_options.char_spacing) for m in morpheme_types
    }
    vocab = CharVocab.from_texts(word_prompts + list(morpheme_prompts.values()) + [EOS_PROMPT])

    word_ids = [vocab.encode(p, config.max_seq_len) for p in word_prompts]
    morpheme_ids = {
        key: vocab.encode(p, config.max_seq_len) for key, p in morpheme_prompts.items()
    }
    bags = [bag_of_morphemes(train_corpus.sentences[s], w) for s, w in samples]
    analyses = [list(train_corpus.sentences[s].word_analyses[w]) for s, w in samples]

    module = DualEncoderModule(config, len(vocab))
    state = TrainState(module, lr, weight_decay, clip_norm, warmup_steps)
    train_log = EncoderTrainLog()

    best_metric = -1.0
    best_state = None
    stale = 0

    for epoch in range(epochs):
        module.train()
        order = list(range(len(samples)))
        pair_rng.shuffle(order)
        chosen = [pair_rng.randrange(len(analyses[i])) for i in order]
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), batch_size):
            rows = order[start : start + batch_size]
            picks = chosen[start : start + batch_size]
            batch_morphemes = [analyses[i][k] for i, k in zip(rows, picks)]
            w_batch, w_mask = _pad_batch([word_ids[i] for i in rows])
            m_batch, m_mask = _pad_batch([morpheme_ids[m.key] for m in batch_morphemes])
            word_vecs = module(w_batch, w_mask)
            morph_vecs = module(m_batch, m_mask)
            similarity = word_vecs @ morph_vecs.T
            positives = torch.from_numpy(
                build_positives_mask([bags[i] for i in rows], batch_morphemes)
            )
            loss = contrastive_loss(similarity, positives, module.tau)
            state.step(loss)
            module.clamp_tau()
            train_log.losses.append(float(loss.detach()))
            epoch_loss += train_log.losses[-1]
            n_batches += 1
        train_log.epoch_losses.append(epoch_loss / max(n_batches, 1))
        train_log.tau.append(float(module.tau.detach()))

        if dev_corpus is not None:
            snapshot = EncoderModel(module, vocab, config, prompt_options)
            p1 = validation_p_at_1(snapshot, dev_corpus, morpheme_types)
            module.train()
            train_log.dev_p_at_1.append(p1)
            if p1 > best_metric:
                best_metric = p1
                best_state = copy.deepcopy(module.state_dict())
                train_log.best_epoch = epoch
                stale = 0
            else:
                stale += 1
            log.info("encoder epoch %d: loss %.4f dev P@1 %.4f", epoch,
                     train_log.epoch_losses[-1], p1)
            if target_p_at_1 is not None and p1 >= target_p_at_1:
                break
            if patience is not None and stale > patience:
                break
        else:
            train_log.best_epoch = epoch

    if best_state is not None:
        module.load_state_dict(best_state)
    train_log.wall_time = time.time() - started
    return EncoderModel(module.eval(), vocab, config, prompt_options), train_log


# ---------------------------------------------------------------------------
# sklearn-style estimator facade
# ---------------------------------------------------------------------------

from sklearn.base import BaseEstimator, TransformerMixin  # noqa: E402

from .validation import check_corpus, check_fitted  # noqa: E402


class ContrastiveWordEncoder(BaseEstimator, TransformerMixin):
    """Estimator wrapper: fit on a corpus, transform items to embeddings.

    ``transform`` accepts a mixed sequence of :class:`WordInContext` and
    :class:`Morpheme` items and returns one unit-norm row per item.
    """

    def __init__(
        self,
        d_model: int = 128,
        n_layers: int = 2,
        n_heads: int = 4,
        d_ff: int = 512,
        max_seq_len: int = 256,
        dropout: float = 0.1,
        embedding_dim: int = 128,
        tau_init: float = 0.05,
        epochs: int = 100,
        batch_size: int = 128,
        lr: float = 2e-5,
        warmup_steps: int = 100,
        weight_decay: float = 0.01,
        include_transcript: bool = True,
        include_translation: bool = True,
        char_spacing: bool = True,
        patience: Optional[int] = None,
        seed: int = 0,
    ):
        self.d_model = d_model
        self.n_layers = n_layers
        self.n_heads = n_heads
        self.d_ff = d_ff
        self.max_seq_len = max_seq_len
        self.dropout = dropout
        self.embedding_dim = embedding_dim
        self.tau_init = tau_init
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.warmup_steps = warmup_steps
        self.weight_decay = weight_decay
        self.include_transcript = include_transcript
        self.include_translation = include_translation
        self.char_spacing = char_spacing
        self.patience = patience
        self.seed = seed

    def _prompt_options(self) -> PromptOptions:
        return PromptOptions(self.include_transcript, self.include_translation, self.char_spacing)

    def fit(self, X: Corpus, y=None, dev_corpus: Optional[Corpus] = None):
        corpus = check_corpus(X)
        config = EncoderConfig(
            d_model=self.d_model,
            n_layers=self.n_layers,
            n_heads=self.n_heads,
            d_ff=self.d_ff,
            max_seq_len=self.max_seq_len,
            dropout=self.dropout,
            embedding_dim=self.embedding_dim,
            tau_init=self.tau_init,
        )
        self.model_, self.train_log_ = train_encoder(
            corpus,
            config,
            dev_corpus=dev_corpus,
            prompt_options=self._prompt_options(),
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            warmup_steps=self.warmup_steps,
            weight_decay=self.weight_decay,
            patience=self.patience,
            seed=self.seed,
        )
        return self

    def transform(self, X: Sequence) -> np.ndarray:
        check_fitted(self, "model_")
        out = np.empty((len(X), self.model_.embedding_dim), dtype=np.float32)
        words = [(i, item) for i, item in enumerate(X) if isinstance(item, WordInContext)]
        morphemes = [(i, item) for i, item in enumerate(X) if isinstance(item, Morpheme)]
        if len(words) + len(morphemes) != len(X):
            raise TypeError("transform expects WordInContext and Morpheme items")
        if words:
            out[[i for i, _ in words]] = self.model_.embed_words([w for _, w in words])
        if morphemes:
            out[[i for i, _ in morphemes]] = self.model_.embed_morphemes([m for _, m in morphemes])
        return out
