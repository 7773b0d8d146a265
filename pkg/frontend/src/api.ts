// Thin fetch client for the review service. Every mutation is one HTTP
// call; the client never caches or merges - the server owns all state.

import type {
  EventAck,
  EventKind,
  FinalizeResponse,
  SessionSummary,
  SessionView,
  StudyEntry,
} from "./types.js";

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

/** Error body the service attaches to every failed request. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

async function raiseForStatus(response: Response): Promise<Response> {
  if (response.ok) return response;
  let code = "unknown_error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (typeof body?.code === "string") code = body.code;
    if (typeof body?.error === "string") message = body.error;
  } catch {
    // Non-JSON error body; keep the status-line message.
  }
  throw new ServiceError(response.status, code, message);
}

export class SessionApi {
  private readonly fetchFn: FetchFn;

  constructor(
    readonly baseUrl: string = "",
    fetchFn?: FetchFn,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  /** Open a session over a canonical study document (the raw text body). */
  async createSession(studyText: string): Promise<SessionSummary> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: studyText,
    });
    return (await raiseForStatus(response)).json();
  }

  async getSession(sessionId: string): Promise<SessionView> {
    const response = await this.fetchFn(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}`,
    );
    return (await raiseForStatus(response)).json();
  }

  async postEvent(
    sessionId: string,
    kind: EventKind,
    payload: Record<string, unknown>,
  ): Promise<EventAck> {
    const response = await this.fetchFn(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/events`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ kind, payload }),
      },
    );
    return (await raiseForStatus(response)).json();
  }

  async finalize(sessionId: string): Promise<FinalizeResponse> {
    const response = await this.fetchFn(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/finalize`,
      { method: "POST" },
    );
    return (await raiseForStatus(response)).json();
  }

  async listStudies(): Promise<StudyEntry[]> {
    const response = await this.fetchFn(`${this.baseUrl}/studies`);
    const body = await (await raiseForStatus(response)).json();
    return body.studies;
  }

  async summaryReport(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/reports/summary`);
    return (await raiseForStatus(response)).text();
  }
}
