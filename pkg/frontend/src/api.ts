/** Thin typed client over the documented service routes.
 *
 * The fetch implementation is injectable so tests can run against an
 * in-memory service; nothing here invents analyses — every morpheme the
 * UI shows originates from one of these responses.
 */

import type {
  AddEntryResponse,
  GlossResponse,
  InfoResponse,
  LexiconResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      const body = await response.text();
      throw new ApiError(response.status, `${path}: ${response.status} ${body}`);
    }
    return (await response.json()) as T;
  }

  gloss(transcription: string, translation?: string, beamWidth?: number, topK?: number) {
    return this.request<GlossResponse>("/gloss", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        transcription,
        translation: translation ?? null,
        beam_width: beamWidth ?? null,
        top_k: topK ?? null,
      }),
    });
  }

  lexicon() {
    return this.request<LexiconResponse>("/lexicon");
  }

  addEntry(segment: string, gloss: string) {
    return this.request<AddEntryResponse>("/lexicon", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ segment, gloss }),
    });
  }

  info() {
    return this.request<InfoResponse>("/info");
  }
}
