import type { UiMessage } from "../types.js";
import { FeedbackButtons } from "./FeedbackButtons.js";
import { SourcesPanel } from "./SourcesPanel.js";

export interface MessageBubbleProps {
  message: UiMessage;
  onVerdict?: (messageId: string, verdict: "up" | "down") => void;
}

export function MessageBubble({ message, onVerdict }: MessageBubbleProps): HTMLElement {
  const row = document.createElement("article");
  row.className = `bubble ${message.role}`;
  row.dataset.messageId = message.message_id;

  const text = document.createElement("p");
  text.className = "bubble-text";
  text.textContent = message.text;
  row.appendChild(text);

  if (message.role === "assistant") {
    row.appendChild(SourcesPanel(message.sources));
    if (onVerdict) {
      row.appendChild(
        FeedbackButtons({
          state: message.feedback_state,
          onVerdict: (verdict) => onVerdict(message.message_id, verdict),
        }),
      );
    }
  }
  return row;
}

export function ErrorBubble(text: string, onRetry: () => void): HTMLElement {
  const row = document.createElement("article");
  row.className = "bubble error";

  const message = document.createElement("p");
  message.textContent = text;

  const retry = document.createElement("button");
  retry.type = "button";
  retry.className = "retry";
  retry.textContent = "Retry";
  retry.addEventListener("click", onRetry);

  row.append(message, retry);
  return row;
}
