import type { AskResponse, HistoryEntry } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function toError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, detail);
}

/** Thin typed client over the question-answering service. */
export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async ask(sessionId: string, question: string): Promise<AskResponse> {
    const resp = await fetch(this.url("/ask"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ session_id: sessionId, question }),
    });
    if (!resp.ok) throw await toError(resp);
    return (await resp.json()) as AskResponse;
  }

  async feedback(
    sessionId: string,
    messageId: string,
    verdict: "up" | "down",
  ): Promise<void> {
    const resp = await fetch(this.url("/feedback"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        session_id: sessionId,
        message_id: messageId,
        verdict,
      }),
    });
    if (!resp.ok) throw await toError(resp);
  }

  /** Returns null when the server does not know the session (fresh thread). */
  async history(sessionId: string): Promise<HistoryEntry[] | null> {
    const resp = await fetch(this.url(`/sessions/${sessionId}/history`));
    if (resp.status === 404) return null;
    if (!resp.ok) throw await toError(resp);
    const body = await resp.json();
    return body.history as HistoryEntry[];
  }
}
