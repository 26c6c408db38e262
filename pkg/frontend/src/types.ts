/** Payload shapes of the glossing service API (JSON over HTTP). */

export interface Alternative {
  segment: string;
  gloss: string;
  prob: number;
}

export interface WordGlossOut {
  surface: string;
  segments: string[];
  glosses: string[];
  log_prob: number;
  is_punctuation: boolean;
  alternatives: Alternative[][];
}

export interface GlossResponse {
  words: WordGlossOut[];
  lexicon_version: number;
}

export interface LexiconEntryOut {
  index: number;
  segment: string;
  gloss: string;
  provenance: "train" | "user" | "eval_oracle";
}

export interface LexiconResponse {
  entries: LexiconEntryOut[];
  lexicon_version: number;
}

export interface AddEntryResponse {
  index: number;
  added: boolean;
  lexicon_version: number;
}

export interface InfoResponse {
  lexicon_version: number;
  lexicon_size: number;
  embedding_dim: number;
  encoder_fingerprint: string;
  decoder_fingerprint: string;
  beam_width: number;
  tau: number;
  kappa: number;
}
