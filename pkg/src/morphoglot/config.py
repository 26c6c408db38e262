"""Run configuration: every hyperparameter with a default, file + flag loading.

Optimization defaults mirror the reference training recipe (encoder batch
128 / 100 epochs / lr 2e-5 / 100 warmup steps; decoder batch 32 / lr 1e-4 /
weight decay 0.01 / clip 1.0 / dropout 0.1; beam width 5).  Architecture
defaults are the desk-scale shapes; :meth:`RunConfig.reference_scale` switches
the decoder to 4 blocks at width 512, and :meth:`RunConfig.desk_scale`
adapts the optimization for from-scratch CPU training (higher lr, early
stopping, spacing off since the tokenizer is already character-level).

Config files are plain ``key = value`` text with ``[section]`` headers
(sections: run, prompts, encoder, decoder, decode); flags override the
file, the file overrides defaults.  The MORPHOGLOT_CONFIG environment
variable supplies a default config path.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
from dataclasses import dataclass, field, fields
from typing import Optional

from .decoder import DecoderConfig
from .encoder import EncoderConfig
from .igt import PromptOptions

_SECTION_PREFIX = {
    "run": "",
    "prompts": "",
    "encoder": "enc_",
    "decoder": "dec_",
    "decode": "",
}

# fields that live in a prefixed section but carry no prefix themselves
_SECTION_EXTRA = {
    "encoder": ("embedding_dim", "tau_init"),
    "decoder": ("kappa_init", "max_morphemes"),
    "decode": ("beam_width", "top_k"),
    "run": ("seed",),
    "prompts": ("include_transcript", "include_translation", "char_spacing"),
}


@dataclass
class RunConfig:
    seed: int = 0

    include_transcript: bool = True
    include_translation: bool = True
    char_spacing: bool = True

    enc_d_model: int = 128
    enc_layers: int = 2
    enc_heads: int = 4
    enc_d_ff: int = 512
    enc_max_seq_len: int = 256
    enc_dropout: float = 0.1
    embedding_dim: int = 128
    tau_init: float = 0.05

    enc_batch_size: int = 128
    enc_epochs: int = 100
    enc_lr: float = 2e-5
    enc_warmup_steps: int = 100
    enc_weight_decay: float = 0.01
    enc_patience: Optional[int] = None
    enc_target_p_at_1: Optional[float] = None

    dec_d_model: int = 128
    dec_blocks: int = 2
    dec_heads: int = 4
    dec_d_ff: int = 512
    dec_dropout: float = 0.1
    kappa_init: float = 0.05
    max_morphemes: int = 12

    dec_batch_size: int = 32
    dec_epochs: int = 100
    dec_lr: float = 1e-4
    dec_weight_decay: float = 0.01
    dec_clip_norm: float = 1.0
    dec_warmup_steps: int = 0
    dec_patience: Optional[int] = None
    dec_eval_every: int = 1
    dec_eval_beam: Optional[int] = None

    beam_width: int = 5
    top_k: int = 5

    @classmethod
    def desk_scale(cls, **overrides) -> "RunConfig":
        """CPU-minutes profile for from-scratch synthetic-language runs."""
        base = dict(
            char_spacing=False,
            enc_epochs=30,
            enc_lr=5e-4,
            enc_patience=3,
            enc_target_p_at_1=0.995,
            dec_epochs=60,
            dec_lr=3e-4,
            dec_patience=3,
            dec_eval_every=3,
            dec_eval_beam=1,
        )
        base.update(overrides)
        return cls(**base)

    @classmethod
    def reference_scale(cls, **overrides) -> "RunConfig":
        """Reference decoder shape: 4 blocks, width 512, 4 heads."""
        base = dict(dec_blocks=4, dec_d_model=512, dec_heads=4, dec_d_ff=2048)
        base.update(overrides)
        return cls(**base)

    # -- derived component configs -------------------------------------------

    def prompt_options(self) -> PromptOptions:
        return PromptOptions(self.include_transcript, self.include_translation, self.char_spacing)

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            d_model=self.enc_d_model,
            n_layers=self.enc_layers,
            n_heads=self.enc_heads,
            d_ff=self.enc_d_ff,
            max_seq_len=self.enc_max_seq_len,
            dropout=self.enc_dropout,
            embedding_dim=self.embedding_dim,
            tau_init=self.tau_init,
        )

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(
            embedding_dim=self.embedding_dim,
            d_model=self.dec_d_model,
            n_blocks=self.dec_blocks,
            n_heads=self.dec_heads,
            d_ff=self.dec_d_ff,
            dropout=self.dec_dropout,
            max_morphemes=self.max_morphemes,
            kappa_init=self.kappa_init,
        )

    # -- (de)serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _parse_value(text: str, type_name: str):
    # dataclass field types arrive as strings under deferred annotations
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if "bool" in type_name:
        if text.lower() in ("true", "yes", "on", "1"):
            return True
        if text.lower() in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if "int" in type_name:
        return int(text)
    if "float" in type_name:
        return float(text)
    return text


def load_config_file(path, base: Optional[RunConfig] = None) -> RunConfig:
    """Parse a sectioned key=value file into a RunConfig over ``base``."""
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as handle:
        parser.read_file(handle)
    config = base or RunConfig()
    by_name = {f.name: f for f in fields(RunConfig)}
    values = config.to_dict()
    for section in parser.sections():
        if section not in _SECTION_PREFIX:
            raise ValueError(f"unknown config section [{section}]")
        prefix = _SECTION_PREFIX[section]
        for key, raw in parser.items(section):
            name = key if key in _SECTION_EXTRA.get(section, ()) else prefix + key
            if name not in by_name:
                raise ValueError(f"unknown config key {key!r} in section [{section}]")
            values[name] = _parse_value(raw, str(by_name[name].type))
    return RunConfig(**values)
