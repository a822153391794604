// Thin typed client for the service endpoint table. No business rules
// live here: errors are surfaced verbatim for the views to display.

import type {
  GestureEventRecord,
  MarkReport,
  PaperMirror,
  ReturnReport,
  ReturnSummary,
  SessionState,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private token: string,
    private fetcher: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = {
      method,
      headers: { Authorization: `Bearer ${this.token}` },
    };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["Content-Type"] = "application/json";
    }
    const resp = await this.fetcher(path, init);
    const text = await resp.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      throw new ApiFailure(resp.status, parsed?.error ?? `HTTP ${resp.status}`);
    }
    return parsed as T;
  }

  // lecturer
  createPaper(mirror: PaperMirror): Promise<{ id: string }> {
    return this.request("POST", "/api/papers", mirror);
  }

  getPaper(id: string): Promise<PaperMirror> {
    return this.request("GET", `/api/papers/${encodeURIComponent(id)}`);
  }

  putPaper(mirror: PaperMirror): Promise<{ id: string }> {
    return this.request("PUT", `/api/papers/${encodeURIComponent(mirror.id)}`, mirror);
  }

  publish(id: string, passkey: string | null, locators: string[]): Promise<{ name: string; locators: string[] }> {
    return this.request("POST", `/api/papers/${encodeURIComponent(id)}/publish`, {
      passkey: passkey || null,
      locators,
    });
  }

  listReturns(): Promise<{ returns: ReturnSummary[] }> {
    return this.request("GET", "/api/returns");
  }

  markReturn(id: string): Promise<MarkReport> {
    return this.request("POST", `/api/returns/${encodeURIComponent(id)}/mark`);
  }

  manualMark(id: string, q: number, score: number): Promise<MarkReport> {
    return this.request("POST", `/api/returns/${encodeURIComponent(id)}/manual`, { q, score });
  }

  returnReport(id: string): Promise<ReturnReport> {
    return this.request("GET", `/api/returns/${encodeURIComponent(id)}/report`);
  }

  async eventFeed(id: string): Promise<GestureEventRecord[]> {
    const resp = await this.fetcher(`/api/returns/${encodeURIComponent(id)}/events`, {
      headers: { Authorization: `Bearer ${this.token}` },
    });
    if (!resp.ok) {
      throw new ApiFailure(resp.status, `feed: HTTP ${resp.status}`);
    }
    const text = await resp.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as GestureEventRecord);
  }

  // student
  inbox(): Promise<{ names: string[] }> {
    return this.request("GET", "/api/inbox");
  }

  sessionStart(paper: string, passkey?: string): Promise<SessionState> {
    return this.request("POST", "/api/session/start", { paper, passkey: passkey ?? null });
  }

  sessionState(): Promise<SessionState> {
    return this.request("GET", "/api/session/state");
  }

  sessionAnswer(q: number, response: string): Promise<SessionState> {
    return this.request("POST", "/api/session/answer", { q, response });
  }

  sessionSubmit(): Promise<SessionState> {
    return this.request("POST", "/api/session/submit");
  }

  materials(): Promise<{ materials: { title: string; locator: string }[] }> {
    return this.request("GET", "/api/materials");
  }
}
