import { ApiClient } from "./api.js";
import { getSessionId } from "./session.js";
import { ChatThread } from "./thread.js";

declare global {
  interface Window {
    DESKQA_API?: string;
  }
}

function bootstrap(): void {
  const threadEl = document.getElementById("thread");
  const form = document.getElementById("ask-form") as HTMLFormElement | null;
  const input = document.getElementById("question") as HTMLInputElement | null;
  const send = document.getElementById("send") as HTMLButtonElement | null;
  if (!threadEl || !form || !input || !send) return;

  const api = new ApiClient(window.DESKQA_API ?? "");
  const thread = new ChatThread(threadEl, api, getSessionId());

  void thread.loadFromServer().catch(() => thread.render());

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const question = input.value;
    if (!question.trim() || thread.busy) return;
    send.disabled = true;
    void thread.send(question).then(() => {
      send.disabled = false;
      // keep the text for a retry when the request failed
      if (thread.failedQuestion === null) input.value = "";
      input.focus();
    });
  });
}

document.addEventListener("DOMContentLoaded", bootstrap);
