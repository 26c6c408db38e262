"""morphoglot: retrieval-constrained interlinear glossing.

A contrastively trained dual encoder places words-in-context and morphemes
(paired segment + gloss) in one embedding space; an autoregressive decoder
then glosses each word by retrieving entries from a mutable morpheme
lexicon, so outputs are attested pairs by construction and the lexicon can
be extended at inference time without retraining.
"""

from .igt import (
    Corpus,
    CorpusFormatError,
    IGTSentence,
    Morpheme,
    PromptOptions,
    WordInContext,
    bag_of_morphemes,
    extract_word_morphemes,
    load_corpus,
    parse_corpus,
    render_morpheme_prompt,
    render_word_prompt,
    save_corpus,
)

__version__ = "0.1.0"


def __getattr__(name):
    # heavyweight imports (torch) stay lazy so corpus tooling loads fast
    if name in ("EncoderModel", "ContrastiveWordEncoder", "train_encoder"):
        from . import encoder

        return getattr(encoder, name)
    if name in ("Lexicon", "build_lexicon", "nearest_k"):
        from . import lexicon

        return getattr(lexicon, name)
    if name in ("DecoderModel", "train_decoder", "beam_decode", "gloss_sentence"):
        from . import decoder

        return getattr(decoder, name)
    if name in ("GlossingPipeline", "LexiconGlosser", "fit_pipeline"):
        from . import pipeline

        return getattr(pipeline, name)
    if name == "RunConfig":
        from .config import RunConfig

        return RunConfig
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "Corpus",
    "CorpusFormatError",
    "IGTSentence",
    "Morpheme",
    "PromptOptions",
    "WordInContext",
    "bag_of_morphemes",
    "extract_word_morphemes",
    "load_corpus",
    "parse_corpus",
    "render_morpheme_prompt",
    "render_word_prompt",
    "save_corpus",
    "EncoderModel",
    "ContrastiveWordEncoder",
    "train_encoder",
    "Lexicon",
    "build_lexicon",
    "nearest_k",
    "DecoderModel",
    "train_decoder",
    "beam_decode",
    "gloss_sentence",
    "GlossingPipeline",
    "LexiconGlosser",
    "fit_pipeline",
    "RunConfig",
    "__version__",
]
