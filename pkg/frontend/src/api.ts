// Thin typed client over the review-service HTTP API.

import { Progress, QueuePage, Verdict } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly base = "",
    fetchFn?: FetchLike,
  ) {
    // Wrapped so the global fetch keeps its expected receiver.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  fetchQueue(lang: string, page = 1, pageSize = 20): Promise<QueuePage> {
    const query = `lang=${encodeURIComponent(lang)}&page=${page}&page_size=${pageSize}`;
    return this.request(`/api/queue?${query}`);
  }

  fetchProgress(lang: string): Promise<Progress> {
    return this.request(`/api/progress?lang=${encodeURIComponent(lang)}`);
  }

  submitDecision(
    pairId: string,
    lang: string,
    verdict: Verdict,
    annotatorId?: string,
  ): Promise<Progress> {
    const body: Record<string, string> = { pair_id: pairId, lang, verdict };
    if (annotatorId) {
      body.annotator_id = annotatorId;
    }
    return this.request("/api/decision", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, "network", `cannot reach the review service: ${err}`);
    }
    const text = await resp.text();
    let payload: unknown = null;
    try {
      payload = text ? JSON.parse(text) : null;
    } catch {
      payload = null; // non-JSON body; fall through to the status check
    }
    if (!resp.ok) {
      const body = (payload ?? {}) as { code?: string; message?: string };
      throw new ApiError(
        resp.status,
        body.code ?? "http_error",
        body.message ?? `request failed with status ${resp.status}`,
      );
    }
    return payload as T;
  }
}
