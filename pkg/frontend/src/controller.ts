/** Workbench state machine: load, inspect, extend, re-gloss, diff.
 *
 * Lexicon mutations are serialized (one in flight at a time). Glossing
 * responses are reconciled by version: if a re-gloss comes back computed
 * against an older lexicon than the badge (a stale read), it is refetched
 * rather than rendered.
 */

import { ApiClient } from "./api.js";
import {
  buildGlossView,
  computeDiff,
  type DiffView,
  type GlossView,
} from "./model.js";

export interface AddEntryOutcome {
  added: boolean;
  index: number;
  notice?: string;
  diff: DiffView;
  view: GlossView;
}

export class WorkbenchController {
  threshold = 0.5;
  lexiconVersion = 0;
  currentView: GlossView | null = null;
  private mutationInFlight = false;

  constructor(private api: ApiClient) {}

  private async glossCurrent(
    transcription: string,
    translation?: string,
  ): Promise<GlossView> {
    let response = await this.api.gloss(transcription, translation);
    if (response.lexicon_version < this.lexiconVersion) {
      // stale snapshot: a mutation landed first; fetch a fresh view
      response = await this.api.gloss(transcription, translation);
    }
    if (response.lexicon_version < this.lexiconVersion) {
      throw new Error(
        `service went backwards: version ${response.lexicon_version} < ${this.lexiconVersion}`,
      );
    }
    this.lexiconVersion = response.lexicon_version;
    return buildGlossView(transcription, translation, response, this.threshold);
  }

  async loadSentence(transcription: string, translation?: string): Promise<GlossView> {
    const view = await this.glossCurrent(transcription, translation);
    this.currentView = view;
    return view;
  }

  async addEntryFlow(segment: string, gloss: string): Promise<AddEntryOutcome> {
    if (!this.currentView) {
      throw new Error("load a sentence before adding lexicon entries");
    }
    if (this.mutationInFlight) {
      throw new Error("another lexicon edit is still in flight");
    }
    this.mutationInFlight = true;
    try {
      const result = await this.api.addEntry(segment, gloss);
      this.lexiconVersion = Math.max(this.lexiconVersion, result.lexicon_version);
      const previous = this.currentView;
      const view = await this.glossCurrent(
        previous.transcription,
        previous.translation,
      );
      this.currentView = view;
      return {
        added: result.added,
        index: result.index,
        notice: result.added
          ? undefined
          : `entry ${segment}:${gloss} already existed (index ${result.index})`,
        diff: computeDiff(previous, view),
        view,
      };
    } finally {
      this.mutationInFlight = false;
    }
  }
}
