"""Evaluation metrics for glossing, segmentation, retrieval, and OOV accounting.

The headline metric is the morpheme error rate (MER): a reference-normalized
unit-level Levenshtein distance over an utterance's gloss symbols (or
segments), clipped at 1, with punctuation-only tokens excluded, aggregated
as the mean of per-sentence values.  Secondary metrics mirror prior work:
corpus-pooled morpheme/word accuracy for glossing, sample-averaged multiset
F1 and whole-word accuracy for segmentation, and standard ranked-retrieval
scores for the encoder.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .igt import Corpus, IGTSentence, Morpheme, is_punctuation_token

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Tier extraction
# ---------------------------------------------------------------------------


def content_word_indices(sentence: IGTSentence) -> list[int]:
    """Indices of words that are not punctuation-only."""
    return [i for i, w in enumerate(sentence.words) if not is_punctuation_token(w)]


def tier_units(sentence: IGTSentence, tier: str) -> list[str]:
    """Flatten one tier of a sentence into its unit sequence.

    Punctuation-only words are skipped entirely, and any remaining
    punctuation-only unit is dropped, so the result is ready for
    :func:`sequence_mer`.
    """
    if tier not in ("gloss", "segment"):
        raise ValueError(f"tier must be 'gloss' or 'segment', got {tier!r}")
    units = []
    for i in content_word_indices(sentence):
        for m in sentence.word_analyses[i]:
            unit = m.gloss if tier == "gloss" else m.segment
            if not is_punctuation_token(unit):
                units.append(unit)
    return units


def sentence_morpheme_keys(sentence: IGTSentence) -> list[tuple[str, str]]:
    """(segment, gloss) keys of all morpheme tokens in non-punctuation words."""
    keys = []
    for i in content_word_indices(sentence):
        keys.extend(m.key for m in sentence.word_analyses[i])
    return keys


# ---------------------------------------------------------------------------
# Morpheme error rate
# ---------------------------------------------------------------------------


def levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    """Unit-level edit distance (insert/delete/substitute, unit cost)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, unit_a in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, unit_b in enumerate(b, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (unit_a != unit_b),
            )
        previous = current
    return previous[len(b)]


def sequence_mer(gold: Sequence[str], pred: Sequence[str]) -> float:
    """Levenshtein distance / max(len(gold), 1), clipped at 1.

    Both sequences must already have punctuation-only units removed.
    Empty gold and empty pred give 0.
    """
    if not gold and not pred:
        return 0.0
    distance = levenshtein(gold, pred)
    return min(distance / max(len(gold), 1), 1.0)


@dataclass
class MerResult:
    aggregate: float
    per_sentence: list[float]


def corpus_mer(gold: Corpus, pred: Corpus, tier: str = "gloss") -> MerResult:
    """Mean of per-sentence MER values (sample-level aggregation)."""
    if len(gold) != len(pred):
        raise ValueError(f"sentence count mismatch: gold {len(gold)} vs pred {len(pred)}")
    per_sentence = [
        sequence_mer(tier_units(g, tier), tier_units(p, tier))
        for g, p in zip(gold, pred)
    ]
    aggregate = sum(per_sentence) / len(per_sentence) if per_sentence else 0.0
    return MerResult(aggregate, per_sentence)


# ---------------------------------------------------------------------------
# Glossing accuracy (corpus-pooled) and segmentation scores (sample-averaged)
# ---------------------------------------------------------------------------


def _aligned_content_words(gold_s: IGTSentence, pred_s: IGTSentence):
    if len(gold_s.words) != len(pred_s.words):
        raise ValueError(
            f"word count mismatch: gold {len(gold_s.words)} vs pred {len(pred_s.words)}"
        )
    for i in content_word_indices(gold_s):
        yield gold_s.word_analyses[i], pred_s.word_analyses[i]


def glossing_accuracy(gold: Corpus, pred: Corpus) -> tuple[float, float]:
    """(morpheme_accuracy, word_accuracy), pooled over the whole corpus.

    Word accuracy: fraction of words whose predicted gloss sequence equals
    gold exactly.  Morpheme accuracy: fraction of gold gloss positions
    matched left-aligned; positions beyond the shorter analysis count as
    incorrect.
    """
    if len(gold) != len(pred):
        raise ValueError(f"sentence count mismatch: gold {len(gold)} vs pred {len(pred)}")
    position_hits = position_total = word_hits = word_total = 0
    for gold_s, pred_s in zip(gold, pred):
        for gold_a, pred_a in _aligned_content_words(gold_s, pred_s):
            gold_glosses = [m.gloss for m in gold_a]
            pred_glosses = [m.gloss for m in pred_a]
            word_total += 1
            word_hits += gold_glosses == pred_glosses
            position_total += len(gold_glosses)
            position_hits += sum(
                g == p for g, p in zip(gold_glosses, pred_glosses)
            )
    morpheme_acc = position_hits / position_total if position_total else 0.0
    word_acc = word_hits / word_total if word_total else 0.0
    return morpheme_acc, word_acc


def _word_segment_prf(gold_segments: list[str], pred_segments: list[str]) -> tuple[float, float]:
    """(f1, exact) for one word using multiset intersection counting."""
    exact = float(gold_segments == pred_segments)
    if not gold_segments and not pred_segments:
        return 1.0, exact
    from collections import Counter

    overlap = sum((Counter(gold_segments) & Counter(pred_segments)).values())
    precision = overlap / len(pred_segments) if pred_segments else 0.0
    recall = overlap / len(gold_segments) if gold_segments else 0.0
    if precision + recall == 0:
        return 0.0, exact
    return 2 * precision * recall / (precision + recall), exact


def segmentation_scores(gold: Corpus, pred: Corpus) -> tuple[float, float]:
    """(f1, whole_word_accuracy): per-word scores averaged within each
    sentence, then over sentences."""
    if len(gold) != len(pred):
        raise ValueError(f"sentence count mismatch: gold {len(gold)} vs pred {len(pred)}")
    f1_samples = []
    acc_samples = []
    for gold_s, pred_s in zip(gold, pred):
        f1s = []
        accs = []
        for gold_a, pred_a in _aligned_content_words(gold_s, pred_s):
            f1, exact = _word_segment_prf(
                [m.segment for m in gold_a], [m.segment for m in pred_a]
            )
            f1s.append(f1)
            accs.append(exact)
        if f1s:
            f1_samples.append(sum(f1s) / len(f1s))
            acc_samples.append(sum(accs) / len(accs))
    if not f1_samples:
        return 0.0, 0.0
    return sum(f1_samples) / len(f1_samples), sum(acc_samples) / len(acc_samples)


# ---------------------------------------------------------------------------
# Ranked retrieval
# ---------------------------------------------------------------------------


@dataclass
class RetrievalScores:
    p_at_1: float
    r_at_10: float
    ndcg_at_10: float
    map_at_100: float
    queries: int

    def as_dict(self) -> dict:
        return {
            "P@1": self.p_at_1,
            "R@10": self.r_at_10,
            "NDCG@10": self.ndcg_at_10,
            "mAP@100": self.map_at_100,
            "queries": self.queries,
        }


def retrieval_scores(
    ranked: Sequence[Sequence[int]], relevant: Sequence[Iterable[int]]
) -> RetrievalScores:
    """Binary-relevance P@1, R@10, NDCG@10, and mAP@100, averaged over queries.

    NDCG uses gains 1/log2(rank+1) normalized by the ideal ordering; average
    precision is truncated at rank 100.  Queries with an empty relevance set
    are skipped with a warning.
    """
    if len(ranked) != len(relevant):
        raise ValueError("ranked lists and relevance sets must align")
    p1 = r10 = ndcg10 = ap100 = 0.0
    used = 0
    for ranking, rel in zip(ranked, relevant):
        rel = set(rel)
        if not rel:
            log.warning("retrieval query skipped: empty relevance set")
            continue
        used += 1
        p1 += ranking[0] in rel if ranking else 0.0
        top10 = ranking[:10]
        r10 += sum(item in rel for item in top10) / len(rel)
        dcg = sum(1.0 / math.log2(r + 1) for r, item in enumerate(top10, start=1) if item in rel)
        idcg = sum(1.0 / math.log2(r + 1) for r in range(1, min(len(rel), 10) + 1))
        ndcg10 += dcg / idcg
        hits = 0
        precision_sum = 0.0
        for r, item in enumerate(ranking[:100], start=1):
            if item in rel:
                hits += 1
                precision_sum += hits / r
        ap100 += precision_sum / min(len(rel), 100)
    if used == 0:
        return RetrievalScores(0.0, 0.0, 0.0, 0.0, 0)
    return RetrievalScores(p1 / used, r10 / used, ndcg10 / used, ap100 / used, used)


# ---------------------------------------------------------------------------
# OOV accounting
# ---------------------------------------------------------------------------


def oov_rate(train_keys: Iterable[tuple[str, str]], eval_corpus: Corpus) -> float:
    """Mean per-sentence fraction of morpheme tokens absent from ``train_keys``.

    Punctuation-only words are excluded; sentences without any morpheme
    tokens do not enter the mean.
    """
    known = set(train_keys)
    fractions = []
    for sentence in eval_corpus:
        keys = sentence_morpheme_keys(sentence)
        if keys:
            fractions.append(sum(k not in known for k in keys) / len(keys))
    return sum(fractions) / len(fractions) if fractions else 0.0


# ---------------------------------------------------------------------------
# Evaluation report
# ---------------------------------------------------------------------------


@dataclass
class EvalReport:
    """All metrics of one evaluation run under one lexicon setting."""

    lexicon_setting: str
    gloss_mer: float
    seg_mer: float
    per_sentence_gloss_mer: list[float]
    per_sentence_seg_mer: list[float]
    morpheme_accuracy: float
    word_accuracy: float
    seg_f1: float
    seg_word_accuracy: float
    retrieval: Optional[RetrievalScores] = None
    p_oov: Optional[float] = None
    delta_mer: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def rates(self) -> dict[str, float]:
        out = {
            "gloss_mer": self.gloss_mer,
            "seg_mer": self.seg_mer,
            "morpheme_accuracy": self.morpheme_accuracy,
            "word_accuracy": self.word_accuracy,
            "seg_f1": self.seg_f1,
            "seg_word_accuracy": self.seg_word_accuracy,
        }
        if self.p_oov is not None:
            out["p_oov"] = self.p_oov
        if self.retrieval is not None:
            out.update(
                {
                    "retrieval_p_at_1": self.retrieval.p_at_1,
                    "retrieval_r_at_10": self.retrieval.r_at_10,
                    "retrieval_ndcg_at_10": self.retrieval.ndcg_at_10,
                    "retrieval_map_at_100": self.retrieval.map_at_100,
                }
            )
        return out

    def to_dict(self) -> dict:
        out = {
            "lexicon_setting": self.lexicon_setting,
            "gloss_mer": self.gloss_mer,
            "seg_mer": self.seg_mer,
            "morpheme_accuracy": self.morpheme_accuracy,
            "word_accuracy": self.word_accuracy,
            "seg_f1": self.seg_f1,
            "seg_word_accuracy": self.seg_word_accuracy,
            "p_oov": self.p_oov,
            "delta_mer": self.delta_mer,
            "retrieval": self.retrieval.as_dict() if self.retrieval else None,
            "per_sentence_gloss_mer": self.per_sentence_gloss_mer,
            "per_sentence_seg_mer": self.per_sentence_seg_mer,
        }
        out.update(self.extra)
        return out

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_text(self) -> str:
        rows = [("lexicon_setting", self.lexicon_setting)]
        rows += [(name, f"{value:.4f}") for name, value in self.rates().items()]
        if self.delta_mer is not None:
            rows.append(("delta_mer", f"{self.delta_mer:.4f}"))
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)
