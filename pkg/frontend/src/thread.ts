import { ApiClient } from "./api.js";
import { ErrorBubble, MessageBubble } from "./components/MessageBubble.js";
import type { UiMessage } from "./types.js";

/**
 * One conversation thread. All retrieval and scoring happens server-side;
 * this class only mirrors the session history endpoint plus any in-flight
 * request, so a page reload rebuilds the exact same thread.
 */
export class ChatThread {
  readonly messages: UiMessage[] = [];
  private pendingQuestion: string | null = null;
  private lastError: string | null = null;
  private inFlight = false;

  constructor(
    private container: HTMLElement,
    private api: ApiClient,
    private sessionId: string,
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  /** Rebuild local state from the server-side session history. */
  async loadFromServer(): Promise<void> {
    const history = await this.api.history(this.sessionId);
    this.messages.length = 0;
    for (const entry of history ?? []) {
      this.messages.push({
        message_id: `${entry.message_id}:q`,
        role: "user",
        text: entry.question,
        sources: [],
        feedback_state: "none",
      });
      this.messages.push({
        message_id: entry.message_id,
        role: "assistant",
        text: entry.answer,
        sources: entry.sources,
        feedback_state: entry.feedback ?? "none",
      });
    }
    this.render();
  }

  async send(question: string): Promise<void> {
    const text = question.trim();
    if (!text || this.inFlight) return;
    this.inFlight = true;
    this.lastError = null;
    this.pendingQuestion = text;
    this.messages.push({
      message_id: `local:${this.messages.length}`,
      role: "user",
      text,
      sources: [],
      feedback_state: "none",
    });
    this.render();
    try {
      const reply = await this.api.ask(this.sessionId, text);
      this.messages.push({
        message_id: reply.message_id,
        role: "assistant",
        text: reply.answer,
        sources: reply.sources,
        feedback_state: "none",
      });
      this.pendingQuestion = null;
    } catch (error) {
      // keep the user bubble, surface the failure inline with a retry hook
      this.messages.pop();
      this.lastError = error instanceof Error ? error.message : String(error);
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  async retry(): Promise<void> {
    const question = this.pendingQuestion;
    this.pendingQuestion = null;
    this.lastError = null;
    if (question) await this.send(question);
  }

  /** The question that failed to send, if any (so inputs can be restored). */
  get failedQuestion(): string | null {
    return this.lastError !== null ? this.pendingQuestion : null;
  }

  async submitFeedback(messageId: string, verdict: "up" | "down"): Promise<void> {
    const message = this.messages.find((m) => m.message_id === messageId);
    if (!message || message.role !== "assistant") return;
    try {
      await this.api.feedback(this.sessionId, messageId, verdict);
      message.feedback_state = verdict;
    } catch (error) {
      this.toast(
        `Feedback failed: ${error instanceof Error ? error.message : error}`,
      );
    }
    this.render();
  }

  private toast(text: string): void {
    const note = document.createElement("div");
    note.className = "toast";
    note.textContent = text;
    this.container.appendChild(note);
  }

  render(): void {
    this.container.replaceChildren();
    for (const message of this.messages) {
      this.container.appendChild(
        MessageBubble({
          message,
          onVerdict: (id, verdict) => void this.submitFeedback(id, verdict),
        }),
      );
    }
    if (this.lastError !== null) {
      this.container.appendChild(
        ErrorBubble(`Request failed: ${this.lastError}`, () => void this.retry()),
      );
    }
    this.container.scrollTop = this.container.scrollHeight;
  }
}
