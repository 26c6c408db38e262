"""Deterministic synthetic agglutinative language generator.

Words are built as ``stem + affix(slot 1) + affix(slot 2) + ...`` where each
slot fires independently with its occupancy probability.  The gloss tier
mirrors the sampled morphemes exactly and the translation tier is a
pseudo-translation (the gloss strings joined), which is all the encoder
prompts need.  Without allomorphy rules the corpus is in surface mode: the
concatenation of a word's segments equals its surface form.  Rewrite rules
(plain substring substitutions applied to the concatenated surface) produce
canonical-style corpora where that property intentionally breaks.

Everything is a pure function of (spec, n_sentences); the same spec and seed
always produce byte-identical output.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .igt import Corpus, IGTSentence, Morpheme, PromptOptions, WordInContext
from .metrics import sentence_morpheme_keys

_CONSONANTS = "ptkbdgmnszrl"
_VOWELS = "aeiou"

_STEM_GLOSSES = (
    "walk eat see run dog cat house tree water stone fire sky bird fish hand "
    "foot eye ear head heart man woman child elder river hill wind rain sun "
    "moon star night day food seed root leaf bark skin bone blood meat egg "
    "horn tail wing snow ice sand path door roof wall boat net rope knife pot "
    "basket salt smoke cloud"
).split()

_SLOT_GLOSS_POOLS = (
    ("NOM", "ACC", "DAT", "LOC", "GEN", "INS", "ABL", "ALL"),
    ("SG", "PL", "DU", "PC", "COL", "DIST", "PROX", "ASSOC"),
    ("PST", "PRS", "FUT", "HAB", "PFV", "IPFV", "IRR", "OPT"),
    ("1", "2", "3", "4", "1PL", "2PL", "3PL", "4PL"),
)


@dataclass(frozen=True)
class AffixSlot:
    """One affix position: its choices and the probability that it fills."""

    morphemes: tuple[Morpheme, ...]
    occupancy: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "morphemes", tuple(self.morphemes))
        if not 0.0 <= self.occupancy <= 1.0:
            raise ValueError(f"occupancy must be in [0, 1], got {self.occupancy}")
        if not self.morphemes:
            raise ValueError("affix slot needs at least one morpheme")


@dataclass(frozen=True)
class RewriteRule:
    """Context-sensitive surface substitution (plain substring replace)."""

    pattern: str
    replacement: str


@dataclass(frozen=True)
class SynthSpec:
    """Full description of a synthetic language plus its sampling seed.

    ``zipf_exponent`` > 0 makes stem i carry weight (i+1)^-s, giving the
    long-tailed type-frequency profile real corpora have (and the rare
    types that OOV split engineering needs); 0 keeps stems uniform.
    """

    stems: tuple[Morpheme, ...]
    slots: tuple[AffixSlot, ...]
    allomorphy_rules: tuple[RewriteRule, ...] = ()
    sentence_length: tuple[int, int] = (3, 6)
    seed: int = 0
    language: str = "syn"
    zipf_exponent: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "stems", tuple(self.stems))
        object.__setattr__(self, "slots", tuple(self.slots))
        object.__setattr__(self, "allomorphy_rules", tuple(self.allomorphy_rules))
        lo, hi = self.sentence_length
        if not 1 <= lo <= hi:
            raise ValueError(f"bad sentence_length range: {self.sentence_length}")
        keys = [m.key for m in self.all_morphemes()]
        if len(keys) != len(set(keys)):
            raise ValueError("stem and affix (segment, gloss) pairs must be distinct")

    def all_morphemes(self) -> list[Morpheme]:
        out = list(self.stems)
        for slot in self.slots:
            out.extend(slot.morphemes)
        return out

    @property
    def surface_mode(self) -> bool:
        return not self.allomorphy_rules


def _stem_segment(i: int, syllables: int = 1) -> str:
    # CV syllables with varied continuations; injective in i (the first
    # syllable already is), disjoint from VC-shaped affixes
    parts = []
    k = i
    for j in range(syllables):
        parts.append(_CONSONANTS[k % 12] + _VOWELS[(k // 12) % 5])
        k = (7 * k + 11) % 60
    if i >= 60:  # spill beyond the CV grid: extend with an index syllable
        parts.append(_CONSONANTS[(i // 60) % 12] + _VOWELS[(i // 720) % 5])
    return "".join(parts)


def _affix_segment(k: int) -> str:
    # VC shape, disjoint from CV-shaped stems; injective for k < 60.
    if k >= 60:
        raise ValueError("standard spec supports at most 60 affixes in total")
    return _VOWELS[k % 5] + _CONSONANTS[k // 5]


def standard_spec(
    stem_count: int = 50,
    n_slots: int = 2,
    affixes_per_slot: int = 4,
    occupancy: float = 0.85,
    sentence_length: tuple[int, int] = (3, 6),
    seed: int = 0,
    allomorphy: bool = False,
    zipf_exponent: float = 0.0,
    stem_syllables: int = 1,
) -> SynthSpec:
    """The stock test language: CV-syllable stems, VC affixes, fixed gloss pools."""
    stems = tuple(
        Morpheme(
            _stem_segment(i, stem_syllables),
            _STEM_GLOSSES[i] if i < len(_STEM_GLOSSES) else f"lex{i}",
        )
        for i in range(stem_count)
    )
    slots = []
    for s in range(n_slots):
        pool = _SLOT_GLOSS_POOLS[s % len(_SLOT_GLOSS_POOLS)]
        morphemes = tuple(
            Morpheme(
                _affix_segment(s * affixes_per_slot + j),
                pool[j] if j < len(pool) else f"T{s}X{j}",
            )
            for j in range(affixes_per_slot)
        )
        slots.append(AffixSlot(morphemes, occupancy))
    rules = (
        tuple(RewriteRule(v + v, v) for v in _VOWELS) if allomorphy else ()
    )
    return SynthSpec(stems, tuple(slots), rules, sentence_length, seed,
                     zipf_exponent=zipf_exponent)



def _apply_rules(surface: str, rules: Sequence[RewriteRule]) -> str:
    for rule in rules:
        surface = surface.replace(rule.pattern, rule.replacement)
    return surface


def _stem_weights(spec: SynthSpec) -> Optional[list[float]]:
    if spec.zipf_exponent <= 0.0:
        return None
    return [(i + 1) ** -spec.zipf_exponent for i in range(len(spec.stems))]


def _sample_word(
    spec: SynthSpec, rng: random.Random, weights: Optional[list[float]]
) -> tuple[str, tuple[Morpheme, ...]]:
    if weights is None:
        stem = spec.stems[rng.randrange(len(spec.stems))]
    else:
        stem = rng.choices(spec.stems, weights=weights, k=1)[0]
    morphemes = [stem]
    for slot in spec.slots:
        if rng.random() < slot.occupancy:
            morphemes.append(slot.morphemes[rng.randrange(len(slot.morphemes))])
    surface = _apply_rules("".join(m.segment for m in morphemes), spec.allomorphy_rules)
    return surface, tuple(morphemes)


def generate_corpus(spec: SynthSpec, n_sentences: int, split: str = "train") -> Corpus:
    """Sample a corpus; deterministic given (spec, n_sentences)."""
    if not spec.stems:
        raise ValueError("empty stem inventory")
    if n_sentences < 0:
        raise ValueError("n_sentences must be >= 0")
    rng = random.Random(spec.seed)
    weights = _stem_weights(spec)
    lo, hi = spec.sentence_length
    sentences = []
    for _ in range(n_sentences):
        length = rng.randint(lo, hi)
        words = []
        analyses = []
        for _ in range(length):
            surface, morphemes = _sample_word(spec, rng, weights)
            words.append(surface)
            analyses.append(morphemes)
        # lexical glosses only: a free translation carries content words,
        # not grammatical affix labels
        translation = " ".join(a[0].gloss for a in analyses)
        sentences.append(IGTSentence(tuple(words), tuple(analyses), translation, spec.language))
    return Corpus(tuple(sentences), split)


def paradigm_grid(
    spec: SynthSpec,
    slot_index: int = 0,
    options: PromptOptions = PromptOptions(),
) -> tuple[Corpus, list[tuple[str, list[tuple[WordInContext, WordInContext]]]]]:
    """Every stem crossed with every affix of one slot, as one-word sentences.

    Returns the grid corpus plus transformation groups: for each unordered
    affix pair (a, b) of the slot, the per-stem (stem+a, stem+b) word pairs.
    Used for analogy-geometry analysis.
    """
    if not 0 <= slot_index < len(spec.slots):
        raise IndexError(f"slot index {slot_index} out of range")
    slot = spec.slots[slot_index]
    sentences = {}
    contexts = {}
    for stem in spec.stems:
        for affix in slot.morphemes:
            surface = _apply_rules(stem.segment + affix.segment, spec.allomorphy_rules)
            translation = f"{stem.gloss} {affix.gloss}"
            sentence = IGTSentence((surface,), ((stem, affix),), translation, spec.language)
            sentences[(stem.key, affix.key)] = sentence
            contexts[(stem.key, affix.key)] = WordInContext(
                surface, sentence.transcript, translation, options
            )
    groups = []
    affixes = slot.morphemes
    for i in range(len(affixes)):
        for j in range(i + 1, len(affixes)):
            pairs = [
                (contexts[(stem.key, affixes[i].key)], contexts[(stem.key, affixes[j].key)])
                for stem in spec.stems
            ]
            groups.append((f"{affixes[i].gloss}->{affixes[j].gloss}", pairs))
    return Corpus(tuple(sentences.values()), "test"), groups


class SplitResult(NamedTuple):
    train: Corpus
    eval: Corpus
    achieved_oov: float
    warning: bool


def split_with_target_oov(
    corpus: Corpus,
    train_fraction: float,
    target_oov: float,
    eval_split: str = "test",
) -> SplitResult:
    """Deterministic split aiming at a given eval OOV morpheme rate.

    Builds a coverage-greedy base split, then reassigns to the eval side all
    sentences containing a growing rare-types-first held-out set until the
    per-sentence mean OOV fraction best approximates ``target_oov``.  The
    achieved value is reported; ``warning`` flags a miss by more than 0.02
    (corpus too uniform or eval side too small for the target).
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if not 0.0 <= target_oov < 1.0:
        raise ValueError("target_oov must be in [0, 1)")
    n = len(corpus)
    if n < 2:
        raise ValueError("need at least two sentences to split")
    train_n = min(max(round(train_fraction * n), 1), n - 1)
    eval_n = n - train_n

    sent_keys = [sentence_morpheme_keys(s) for s in corpus]
    sent_types = [set(keys) for keys in sent_keys]
    counts: dict[tuple[str, str], int] = {}
    first_seen: dict[tuple[str, str], int] = {}
    for i, keys in enumerate(sent_keys):
        for key in keys:
            counts[key] = counts.get(key, 0) + 1
            first_seen.setdefault(key, i)

    def build(held_out: frozenset) -> Optional[tuple[list[int], list[int]]]:
        forced = [i for i in range(n) if sent_types[i] & held_out]
        if len(forced) > eval_n:
            return None
        forced_set = set(forced)
        remaining = [i for i in range(n) if i not in forced_set]
        train_idx: list[int] = []
        chosen = set()
        covered: set = set()
        # cover-first pass keeps every reachable type attested in train
        for i in remaining:
            if len(train_idx) == train_n:
                break
            if sent_types[i] - covered - held_out:
                train_idx.append(i)
                chosen.add(i)
                covered |= sent_types[i]
        for i in remaining:
            if len(train_idx) == train_n:
                break
            if i not in chosen:
                train_idx.append(i)
                chosen.add(i)
        eval_idx = forced + [i for i in remaining if i not in chosen]
        return sorted(train_idx), sorted(eval_idx)

    def achieved(train_idx: list[int], eval_idx: list[int]) -> float:
        known = set()
        for i in train_idx:
            known |= sent_types[i]
        fractions = [
            sum(k not in known for k in sent_keys[i]) / len(sent_keys[i])
            for i in eval_idx
            if sent_keys[i]
        ]
        return sum(fractions) / len(fractions) if fractions else 0.0

    rarity_order = sorted(counts, key=lambda k: (counts[k], first_seen[k]))
    best: Optional[tuple[float, list[int], list[int], float]] = None
    held: set = set()
    candidate = frozenset()
    while True:
        built = build(candidate)
        if built is not None:
            value = achieved(*built)
            gap = abs(value - target_oov)
            if best is None or gap < best[0]:
                best = (gap, built[0], built[1], value)
            if value >= target_oov:
                break
        else:
            break  # forced-eval set exceeded capacity; supersets only grow
        if len(held) == len(rarity_order):
            break
        held.add(rarity_order[len(held)])
        candidate = frozenset(held)

    assert best is not None
    _, train_idx, eval_idx, value = best
    train = Corpus(tuple(corpus.sentences[i] for i in train_idx), "train")
    eval_corpus = Corpus(tuple(corpus.sentences[i] for i in eval_idx), eval_split)
    return SplitResult(train, eval_corpus, value, abs(value - target_oov) > 0.02)
