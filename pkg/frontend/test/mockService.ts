/** In-memory stand-in for the glossing service, faithful to its contract:
 * closed-world glossing (only lexicon pairs are ever emitted), append-only
 * lexicon with a version bump per novel entry, idempotent duplicate adds,
 * and every response carrying the lexicon version it was computed against.
 *
 * Glossing follows a gold table: each gold pair is emitted verbatim when
 * it is in the lexicon, otherwise the nearest in-lexicon fallback pair is
 * substituted (the retrieval failure mode lexicon expansion repairs).
 */

import type { FetchLike } from "../src/api.js";
import type { Alternative, LexiconEntryOut, WordGlossOut } from "../src/types.js";

export interface MockOptions {
  gold: Record<string, Array<[string, string]>>;
  initialLexicon: Array<[string, string]>;
  fallback: [string, string];
}

const PUNCT = /^[\p{P}\p{S}]+$/u;

export class MockService {
  entries: LexiconEntryOut[] = [];
  version = 0;
  glossCalls = 0;

  constructor(private options: MockOptions) {
    for (const [segment, gloss] of options.initialLexicon) {
      this.entries.push({
        index: this.entries.length + 1,
        segment,
        gloss,
        provenance: "train",
      });
    }
  }

  private has(segment: string, gloss: string): boolean {
    return this.entries.some((e) => e.segment === segment && e.gloss === gloss);
  }

  private glossWord(surface: string): WordGlossOut {
    if (PUNCT.test(surface)) {
      return {
        surface,
        segments: [],
        glosses: [],
        log_prob: 0,
        is_punctuation: true,
        alternatives: [],
      };
    }
    const gold = this.options.gold[surface] ?? [[surface, "???"]];
    const segments: string[] = [];
    const glosses: string[] = [];
    const alternatives: Alternative[][] = [];
    for (const [segment, gloss] of gold) {
      const hit = this.has(segment, gloss);
      const [outSeg, outGloss] = hit ? [segment, gloss] : this.options.fallback;
      segments.push(outSeg);
      glosses.push(outGloss);
      const step: Alternative[] = [
        { segment: outSeg, gloss: outGloss, prob: hit ? 0.9 : 0.4 },
        { segment: this.options.fallback[0], gloss: this.options.fallback[1], prob: 0.05 },
      ];
      alternatives.push(step);
    }
    return {
      surface,
      segments,
      glosses,
      log_prob: -0.5,
      is_punctuation: false,
      alternatives,
    };
  }

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input, "http://mock");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;

    const json = (payload: unknown, status = 200) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (url.pathname === "/gloss" && method === "POST") {
      this.glossCalls += 1;
      const words = String(body.transcription)
        .split(/\s+/)
        .filter(Boolean)
        .map((w: string) => this.glossWord(w));
      return json({ words, lexicon_version: this.version });
    }
    if (url.pathname === "/lexicon" && method === "GET") {
      return json({ entries: this.entries, lexicon_version: this.version });
    }
    if (url.pathname === "/lexicon" && method === "POST") {
      const existing = this.entries.find(
        (e) => e.segment === body.segment && e.gloss === body.gloss,
      );
      if (existing) {
        return json({ index: existing.index, added: false, lexicon_version: this.version });
      }
      const entry: LexiconEntryOut = {
        index: this.entries.length + 1,
        segment: body.segment,
        gloss: body.gloss,
        provenance: "user",
      };
      this.entries.push(entry);
      this.version += 1;
      return json({ index: entry.index, added: true, lexicon_version: this.version });
    }
    if (url.pathname === "/info" && method === "GET") {
      return json({
        lexicon_version: this.version,
        lexicon_size: this.entries.length,
        embedding_dim: 16,
        encoder_fingerprint: "ab".repeat(32),
        decoder_fingerprint: "cd".repeat(32),
        beam_width: 5,
        tau: 0.05,
        kappa: 0.05,
      });
    }
    return new Response("not found", { status: 404 });
  };
}
