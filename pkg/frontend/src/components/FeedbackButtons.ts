import type { FeedbackState } from "../types.js";

export interface FeedbackButtonsProps {
  state: FeedbackState;
  onVerdict: (verdict: "up" | "down") => void;
}

/** Thumbs up/down pair; the stored verdict is highlighted. */
export function FeedbackButtons({ state, onVerdict }: FeedbackButtonsProps): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "feedback-buttons";

  const make = (verdict: "up" | "down", glyph: string) => {
    const button = document.createElement("button");
    button.type = "button";
    button.className = `thumb thumb-${verdict}`;
    if (state === verdict) button.classList.add("active");
    button.textContent = glyph;
    button.title = verdict === "up" ? "Helpful" : "Not helpful";
    button.addEventListener("click", () => onVerdict(verdict));
    return button;
  };

  wrap.append(make("up", "👍"), make("down", "👎"));
  return wrap;
}
