export type FeedbackState = "none" | "up" | "down";

export interface Source {
  chunk_id: string;
  doc_id: string;
  uri: string;
}

/**
 * One rendered chat bubble. Assistant messages always carry a sources array
 * (possibly empty); user messages never do.
 */
export interface UiMessage {
  message_id: string;
  role: "user" | "assistant";
  text: string;
  sources: Source[];
  feedback_state: FeedbackState;
}

export interface AskResponse {
  message_id: string;
  answer: string;
  sources: Source[];
  usage: Record<string, number>;
}

export interface HistoryEntry {
  message_id: string;
  question: string;
  answer: string;
  sources: Source[];
  feedback: "up" | "down" | null;
}
