"""Interlinear glossed text: data model, corpus parsing, and encoder prompts.

An IGT sentence aligns four tiers: a transcription (surface words), a
segmentation (words split into morpheme segments at ``-``), a gloss tier
(one label per segment), and an optional free translation.  The atomic
unit throughout this package is the :class:`Morpheme` — a paired
(segment, gloss) form-meaning unit.

The on-disk corpus format is the shared-task convention: blocks separated
by blank lines, each line starting with a literal two-character marker
``\\t`` ``\\m`` ``\\g`` or ``\\l`` followed by a space::

    \\t T'ay riw lu ragalin
    \\m t'ay riw lu r-agi-a-lin
    \\g from.here butter who.ERG IV-lick-Q-QUOT
    \\l Who licked the butter out of it?

``\\l`` is optional; any other line prefix is a format error.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, TextIO, Union

SEGMENT_SEPARATOR = "-"
SPLITS = ("train", "dev", "test")

#: Reserved prompt string whose embedding serves as the end-of-sequence row
#: of a lexicon.  Never a valid morpheme segment (contains no tier content).
EOS_PROMPT = "<EOS>"


class CorpusFormatError(ValueError):
    """A corpus block violates the tier format or alignment invariants."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class ParseDiagnostic:
    """A rejected block: the offending line number and the reason."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


def _check_tier_text(value: str, what: str) -> str:
    value = value.strip()
    if not value:
        raise ValueError(f"{what} must be non-empty after trimming")
    if SEGMENT_SEPARATOR in value:
        raise ValueError(f"{what} may not contain the separator {SEGMENT_SEPARATOR!r}: {value!r}")
    if any(ch.isspace() for ch in value):
        raise ValueError(f"{what} may not contain whitespace: {value!r}")
    return value


@dataclass(frozen=True)
class Morpheme:
    """A (segment, gloss) pair; equality is exact on both strings.

    Glosses follow Leipzig conventions: uppercase grammatical labels
    (``ERG``), lowercase lexical meanings (``butter``), periods marking
    fusion (``from.here``).
    """

    segment: str
    gloss: str

    def __post_init__(self):
        object.__setattr__(self, "segment", _check_tier_text(self.segment, "segment"))
        object.__setattr__(self, "gloss", _check_tier_text(self.gloss, "gloss"))

    @property
    def key(self) -> tuple[str, str]:
        return (self.segment, self.gloss)

    def __str__(self) -> str:
        return f"{self.segment}:{self.gloss}"


#: Unordered set of a word's constituent morphemes; duplicates collapse.
BagOfMorphemes = frozenset


@dataclass(frozen=True)
class IGTSentence:
    """One aligned IGT block.

    ``word_analyses[i]`` is the ordered morpheme analysis of ``words[i]``.
    Segment and gloss counts agree per word by construction (each analysis
    element is a :class:`Morpheme`).  An empty analysis is permitted only
    for pass-through tokens (e.g. punctuation in decoder output); parsed
    corpora always carry at least one morpheme per word.
    """

    words: tuple[str, ...]
    word_analyses: tuple[tuple[Morpheme, ...], ...]
    translation: Optional[str] = None
    language: str = "und"

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "word_analyses", tuple(tuple(a) for a in self.word_analyses))
        if len(self.words) != len(self.word_analyses):
            raise ValueError(
                f"word count {len(self.words)} != analysis count {len(self.word_analyses)}"
            )
        for word in self.words:
            if not word or any(ch.isspace() for ch in word):
                raise ValueError(f"invalid surface word: {word!r}")

    @property
    def transcript(self) -> str:
        return " ".join(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def morphemes(self) -> Iterator[Morpheme]:
        """All morpheme tokens of the sentence in surface order."""
        for analysis in self.word_analyses:
            yield from analysis


def extract_word_morphemes(sentence: IGTSentence, word_index: int) -> list[Morpheme]:
    """The ordered morpheme analysis of one word."""
    if not 0 <= word_index < len(sentence.words):
        raise IndexError(f"word index {word_index} out of range for {len(sentence.words)} words")
    return list(sentence.word_analyses[word_index])


def bag_of_morphemes(sentence: IGTSentence, word_index: int) -> BagOfMorphemes:
    """The unordered morpheme set of one word (duplicates collapse)."""
    return frozenset(extract_word_morphemes(sentence, word_index))


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of sentences sharing one language code."""

    sentences: tuple[IGTSentence, ...]
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")
        languages = {s.language for s in self.sentences}
        if len(languages) > 1:
            raise ValueError(f"sentences mix language codes: {sorted(languages)}")

    @property
    def language(self) -> str:
        return self.sentences[0].language if self.sentences else "und"

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[IGTSentence]:
        return iter(self.sentences)


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------

_TIER_KEYS = ("t", "m", "g", "l")


def _split_blocks(lines: Iterable[str]) -> Iterator[list[tuple[int, str]]]:
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line.strip():
            block.append((lineno, line))
        elif block:
            yield block
            block = []
    if block:
        yield block


def _parse_block(block: list[tuple[int, str]], language: str) -> IGTSentence:
    tiers: dict[str, str] = {}
    first_line = block[0][0]
    for lineno, line in block:
        if len(line) >= 2 and line[0] == "\\" and line[1] in _TIER_KEYS:
            key, rest = line[1], line[2:]
        else:
            raise CorpusFormatError(f"unrecognized line prefix: {line[:8]!r}", lineno)
        if rest and not rest.startswith(" "):
            raise CorpusFormatError(f"missing space after tier marker \\{key}", lineno)
        if key in tiers:
            raise CorpusFormatError(f"duplicate tier \\{key} in block", lineno)
        tiers[key] = rest[1:] if rest else ""
    for key in ("t", "m", "g"):
        if key not in tiers:
            raise CorpusFormatError(f"block is missing the \\{key} tier", first_line)

    words = tiers["t"].split()
    m_words = tiers["m"].split()
    g_words = tiers["g"].split()
    if not len(words) == len(m_words) == len(g_words):
        raise CorpusFormatError(
            f"word counts differ between tiers: \\t={len(words)} \\m={len(m_words)} \\g={len(g_words)}",
            first_line,
        )

    analyses = []
    for i, (m_word, g_word) in enumerate(zip(m_words, g_words)):
        segments = m_word.split(SEGMENT_SEPARATOR)
        glosses = g_word.split(SEGMENT_SEPARATOR)
        if len(segments) != len(glosses):
            raise CorpusFormatError(
                f"word {i + 1} ({words[i]!r}): {len(segments)} segments vs {len(glosses)} glosses",
                first_line,
            )
        try:
            analyses.append(tuple(Morpheme(s, g) for s, g in zip(segments, glosses)))
        except ValueError as exc:
            raise CorpusFormatError(f"word {i + 1} ({words[i]!r}): {exc}", first_line) from exc

    translation = tiers.get("l") or None
    try:
        return IGTSentence(tuple(words), tuple(analyses), translation, language)
    except ValueError as exc:
        raise CorpusFormatError(str(exc), first_line) from exc


def parse_corpus(
    source: Union[str, TextIO],
    language: str = "und",
    split: str = "train",
    *,
    strict: bool = False,
    diagnostics: Optional[list[ParseDiagnostic]] = None,
) -> Corpus:
    """Parse a blank-line-separated tier-prefixed corpus.

    Misaligned or malformed blocks are rejected: with ``strict`` a
    :class:`CorpusFormatError` is raised, otherwise the block is skipped
    and a :class:`ParseDiagnostic` (carrying the line number) is appended
    to ``diagnostics`` when a list is supplied.  An empty stream yields an
    empty corpus.
    """
    lines: Iterable[str]
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source
    sentences = []
    for block in _split_blocks(lines):
        try:
            sentences.append(_parse_block(block, language))
        except CorpusFormatError as exc:
            if strict:
                raise
            if diagnostics is not None:
                diagnostics.append(ParseDiagnostic(exc.line, str(exc)))
    return Corpus(tuple(sentences), split)


def format_sentence(sentence: IGTSentence) -> str:
    """Render one sentence as a tier block (no trailing blank line)."""
    segments = []
    glosses = []
    for word, analysis in zip(sentence.words, sentence.word_analyses):
        if analysis:
            segments.append(SEGMENT_SEPARATOR.join(m.segment for m in analysis))
            glosses.append(SEGMENT_SEPARATOR.join(m.gloss for m in analysis))
        else:
            # Pass-through token (punctuation): the text format cannot carry
            # an empty analysis, so the surface form fills both tiers.
            segments.append(word)
            glosses.append(word)
    out = [
        "\\t " + " ".join(sentence.words),
        "\\m " + " ".join(segments),
        "\\g " + " ".join(glosses),
    ]
    if sentence.translation:
        out.append("\\l " + sentence.translation)
    return "\n".join(out)


def format_corpus(corpus: Corpus) -> str:
    return "\n\n".join(format_sentence(s) for s in corpus) + ("\n" if len(corpus) else "")


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_corpus(corpus))


def load_corpus(path, language: str = "und", split: str = "train", *, strict: bool = True) -> Corpus:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_corpus(handle, language, split, strict=strict)


# ---------------------------------------------------------------------------
# Encoder prompts
# ---------------------------------------------------------------------------


def space_chars(text: str) -> str:
    """Insert a single space between every Unicode scalar value.

    Exactly invertible by :func:`unspace_chars` for any input.
    """
    return " ".join(text)


def unspace_chars(text: str) -> str:
    """Invert :func:`space_chars`: keep every other scalar value."""
    return text[::2]


def _space_words(text: str) -> str:
    return " ".join(space_chars(token) for token in text.split())


@dataclass(frozen=True)
class PromptOptions:
    """Prompt-format switches: word-only, +transcript, +translation, spacing."""

    include_transcript: bool = True
    include_translation: bool = True
    char_spacing: bool = True


@dataclass(frozen=True)
class WordInContext:
    """A target word with the sentence it occurred in.

    The word must occur as a whitespace-delimited token of the transcript.
    """

    word: str
    transcript: str
    translation: Optional[str] = None
    options: PromptOptions = field(default=PromptOptions())

    def __post_init__(self):
        if self.word not in self.transcript.split():
            raise ValueError(f"word {self.word!r} is not a token of transcript {self.transcript!r}")


def word_in_context(
    sentence: IGTSentence, word_index: int, options: PromptOptions = PromptOptions()
) -> WordInContext:
    if not 0 <= word_index < len(sentence.words):
        raise IndexError(f"word index {word_index} out of range")
    return WordInContext(sentence.words[word_index], sentence.transcript, sentence.translation, options)


def render_word_prompt(w: WordInContext) -> str:
    """Render the encoder prompt for a word-in-context.

    ``<word> | Context: <transcript> | Translation: <translation>`` where
    the word and transcript get per-character spacing when enabled;
    clauses switched off (or an absent translation) are omitted together
    with their separator and label.
    """
    opts = w.options
    spaced = space_chars if opts.char_spacing else (lambda s: s)
    parts = [spaced(w.word)]
    if opts.include_transcript:
        transcript = _space_words(w.transcript) if opts.char_spacing else " ".join(w.transcript.split())
        parts.append("Context: " + transcript)
    if opts.include_translation and w.translation:
        parts.append("Translation: " + w.translation)
    return " | ".join(parts)


def render_morpheme_prompt(m: Morpheme, char_spacing: bool = True) -> str:
    """Render the encoder prompt for a morpheme: spaced segment + gloss label."""
    segment = space_chars(m.segment) if char_spacing else m.segment
    return f"{segment} | Gloss: {m.gloss}"


def is_punctuation_token(token: str) -> bool:
    """True when every scalar value has Unicode category P* or S*."""
    return bool(token) and all(unicodedata.category(ch)[0] in ("P", "S") for ch in token)
