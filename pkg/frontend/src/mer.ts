/** Client-side morpheme error rate, mirroring the service's definition:
 * unit-level edit distance over the flattened gloss tier, normalized by
 * the gold length, clipped at 1; punctuation-only units excluded.
 */

import type { GlossView } from "./model.js";

export function levenshtein(a: string[], b: string[]): number {
  let previous = Array.from({ length: b.length + 1 }, (_, j) => j);
  for (let i = 1; i <= a.length; i++) {
    const current = [i];
    for (let j = 1; j <= b.length; j++) {
      current.push(
        Math.min(
          previous[j] + 1,
          current[j - 1] + 1,
          previous[j - 1] + (a[i - 1] === b[j - 1] ? 0 : 1),
        ),
      );
    }
    previous = current;
  }
  return previous[b.length];
}

const PUNCT = /^[\p{P}\p{S}]+$/u;

export function isPunctuationUnit(unit: string): boolean {
  return unit.length > 0 && PUNCT.test(unit);
}

export function sequenceMer(gold: string[], predicted: string[]): number {
  const g = gold.filter((u) => !isPunctuationUnit(u));
  const p = predicted.filter((u) => !isPunctuationUnit(u));
  if (g.length === 0 && p.length === 0) {
    return 0;
  }
  return Math.min(levenshtein(g, p) / Math.max(g.length, 1), 1);
}

export function glossTier(view: GlossView): string[] {
  const units: string[] = [];
  for (const word of view.words) {
    if (word.isPunctuation) {
      continue;
    }
    for (const cell of word.cells) {
      if (!isPunctuationUnit(cell.gloss)) {
        units.push(cell.gloss);
      }
    }
  }
  return units;
}
