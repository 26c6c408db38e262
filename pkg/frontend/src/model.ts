/** Pure view-model layer: aligned gloss tables, confidence flags, diffs.
 *
 * Cells keep segments and glosses paired one-to-one (the service
 * guarantees equal counts; we assert it anyway), and a cell's probability
 * is the step probability of exactly the pair the decoder emitted — when
 * the emitted pair is missing from the returned top-k alternatives, its
 * probability is treated as 0 (below any threshold).
 */

import type { Alternative, GlossResponse, WordGlossOut } from "./types.js";

export interface GlossCell {
  segment: string;
  gloss: string;
  prob: number;
  lowConfidence: boolean;
  alternatives: Alternative[];
}

export interface GlossWordView {
  surface: string;
  isPunctuation: boolean;
  logProb: number;
  cells: GlossCell[];
}

export interface GlossView {
  transcription: string;
  translation?: string;
  lexiconVersion: number;
  words: GlossWordView[];
}

export function cellProbability(word: WordGlossOut, step: number): number {
  const alternatives = word.alternatives[step] ?? [];
  const segment = word.segments[step];
  const gloss = word.glosses[step];
  const match = alternatives.find((a) => a.segment === segment && a.gloss === gloss);
  return match ? match.prob : 0;
}

export function buildGlossView(
  transcription: string,
  translation: string | undefined,
  response: GlossResponse,
  threshold: number,
): GlossView {
  const words = response.words.map((word) => {
    if (word.segments.length !== word.glosses.length) {
      throw new Error(`misaligned analysis for ${word.surface}`);
    }
    const cells = word.segments.map((segment, step) => {
      const prob = cellProbability(word, step);
      return {
        segment,
        gloss: word.glosses[step],
        prob,
        lowConfidence: prob < threshold,
        alternatives: word.alternatives[step] ?? [],
      };
    });
    return {
      surface: word.surface,
      isPunctuation: word.is_punctuation,
      logProb: word.log_prob,
      cells,
    };
  });
  return {
    transcription,
    translation,
    lexiconVersion: response.lexicon_version,
    words,
  };
}

export function cellCount(view: GlossView): number {
  return view.words.reduce((total, word) => total + word.cells.length, 0);
}

export interface DiffCell {
  wordIndex: number;
  cellIndex: number;
  before?: { segment: string; gloss: string };
  after?: { segment: string; gloss: string };
}

export interface DiffView {
  previousVersion: number;
  currentVersion: number;
  changed: DiffCell[];
}

/** Cell-wise diff on (segment, gloss) pairs between two views of the SAME sentence. */
export function computeDiff(previous: GlossView, current: GlossView): DiffView {
  if (previous.transcription !== current.transcription) {
    throw new Error("diff requires two views of the same sentence");
  }
  const changed: DiffCell[] = [];
  const wordCount = Math.max(previous.words.length, current.words.length);
  for (let w = 0; w < wordCount; w++) {
    const before = previous.words[w]?.cells ?? [];
    const after = current.words[w]?.cells ?? [];
    const cellCount = Math.max(before.length, after.length);
    for (let c = 0; c < cellCount; c++) {
      const b = before[c];
      const a = after[c];
      const same =
        b !== undefined &&
        a !== undefined &&
        b.segment === a.segment &&
        b.gloss === a.gloss;
      if (!same) {
        changed.push({
          wordIndex: w,
          cellIndex: c,
          before: b && { segment: b.segment, gloss: b.gloss },
          after: a && { segment: a.segment, gloss: a.gloss },
        });
      }
    }
  }
  return {
    previousVersion: previous.lexiconVersion,
    currentVersion: current.lexiconVersion,
    changed,
  };
}

export interface LexiconFilter {
  query: string;
  provenance?: "train" | "user" | "eval_oracle";
}

export function filterLexicon<T extends { segment: string; gloss: string; provenance: string }>(
  entries: T[],
  filter: LexiconFilter,
): T[] {
  const query = filter.query.trim().toLowerCase();
  return entries.filter((entry) => {
    if (filter.provenance && entry.provenance !== filter.provenance) {
      return false;
    }
    if (!query) {
      return true;
    }
    return (
      entry.segment.toLowerCase().includes(query) ||
      entry.gloss.toLowerCase().includes(query)
    );
  });
}
