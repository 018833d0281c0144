import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { ChatThread } from "../src/thread.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

let container: HTMLElement;

beforeEach(() => {
  container = document.createElement("div");
  document.body.appendChild(container);
});

afterEach(() => {
  container.remove();
  vi.restoreAllMocks();
});

function makeThread(): ChatThread {
  return new ChatThread(container, new ApiClient("http://svc"), "session-1");
}

const askReply = {
  message_id: "m1",
  answer: "RAT is usually short for Required Arrival Time.",
  sources: [{ chunk_id: "doc_a#0000", doc_id: "doc_a", uri: "corpus/doc_a.txt" }],
  usage: {},
};

describe("send", () => {
  it("renders a user bubble and an assistant bubble with a sources panel", async () => {
    vi.spyOn(globalThis, "fetch").mockResolvedValue(jsonResponse(askReply));
    const thread = makeThread();
    await thread.send("What does RAT stand for?");

    const bubbles = container.querySelectorAll(".bubble");
    expect(bubbles).toHaveLength(2);
    expect(bubbles[0].className).toContain("user");
    expect(bubbles[1].className).toContain("assistant");
    expect(bubbles[1].textContent).toContain("Required Arrival Time");

    const panel = bubbles[1].querySelector(".sources-panel");
    expect(panel?.textContent).toContain("Sources (1)");
    expect(panel?.textContent).toContain("doc_a#0000");
    expect(panel?.textContent).toContain("corpus/doc_a.txt");
    // user bubbles never carry sources
    expect(bubbles[0].querySelector(".sources-panel")).toBeNull();
  });

  it("reuses the same session id for subsequent questions", async () => {
    const fetchMock = vi
      .spyOn(globalThis, "fetch")
      .mockResolvedValue(jsonResponse(askReply));
    const thread = makeThread();
    await thread.send("first");
    await thread.send("second");
    const bodies = fetchMock.mock.calls.map((call) =>
      JSON.parse(String(call[1]?.body)),
    );
    expect(bodies[0].session_id).toBe("session-1");
    expect(bodies[1].session_id).toBe("session-1");
  });

  it("shows an inline error bubble with retry when the service fails", async () => {
    const fetchMock = vi
      .spyOn(globalThis, "fetch")
      .mockRejectedValueOnce(new TypeError("fetch failed"))
      .mockResolvedValueOnce(jsonResponse(askReply));
    const thread = makeThread();
    await thread.send("flaky question");

    expect(thread.failedQuestion).toBe("flaky question");
    const error = container.querySelector(".bubble.error");
    expect(error).not.toBeNull();
    expect(error?.textContent).toContain("Request failed");

    (error?.querySelector(".retry") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(container.querySelector(".bubble.assistant")).not.toBeNull();
    });
    expect(container.querySelector(".bubble.error")).toBeNull();
    expect(fetchMock).toHaveBeenCalledTimes(2);
  });

  it("refuses overlapping requests", async () => {
    let release: (value: Response) => void = () => {};
    const gate = new Promise<Response>((resolve) => (release = resolve));
    const fetchMock = vi.spyOn(globalThis, "fetch").mockReturnValue(gate);
    const thread = makeThread();
    const first = thread.send("one");
    await thread.send("two"); // dropped: a request is already in flight
    release(jsonResponse(askReply));
    await first;
    expect(fetchMock).toHaveBeenCalledTimes(1);
  });
});

describe("feedback", () => {
  it("posts the verdict and highlights the stored state", async () => {
    const fetchMock = vi
      .spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(askReply))
      .mockResolvedValueOnce(jsonResponse({ ok: true }));
    const thread = makeThread();
    await thread.send("q");

    (container.querySelector(".thumb-up") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(
        container.querySelector(".thumb-up")?.classList.contains("active"),
      ).toBe(true);
    });
    const body = JSON.parse(String(fetchMock.mock.calls[1][1]?.body));
    expect(body).toEqual({ session_id: "session-1", message_id: "m1", verdict: "up" });
  });

  it("flipping the verdict updates the highlighted state", async () => {
    vi.spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(askReply))
      .mockResolvedValue(jsonResponse({ ok: true }));
    const thread = makeThread();
    await thread.send("q");
    (container.querySelector(".thumb-up") as HTMLButtonElement).click();
    await vi.waitFor(() =>
      expect(container.querySelector(".thumb-up")?.classList.contains("active")).toBe(true),
    );
    (container.querySelector(".thumb-down") as HTMLButtonElement).click();
    await vi.waitFor(() =>
      expect(container.querySelector(".thumb-down")?.classList.contains("active")).toBe(true),
    );
    expect(container.querySelector(".thumb-up")?.classList.contains("active")).toBe(false);
  });

  it("keeps the state and shows a toast when feedback fails", async () => {
    vi.spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(askReply))
      .mockRejectedValueOnce(new TypeError("offline"));
    const thread = makeThread();
    await thread.send("q");
    (container.querySelector(".thumb-up") as HTMLButtonElement).click();
    await vi.waitFor(() => expect(container.querySelector(".toast")).not.toBeNull());
    expect(container.querySelector(".thumb-up")?.classList.contains("active")).toBe(false);
  });
});

describe("loadFromServer", () => {
  it("reconstructs the thread including feedback state", async () => {
    vi.spyOn(globalThis, "fetch").mockResolvedValue(
      jsonResponse({
        session_id: "session-1",
        history: [
          {
            message_id: "m1",
            question: "q1",
            answer: "a1",
            sources: [],
            feedback: "down",
          },
          {
            message_id: "m2",
            question: "q2",
            answer: "a2",
            sources: [{ chunk_id: "c", doc_id: "d", uri: "u" }],
            feedback: null,
          },
        ],
      }),
    );
    const thread = makeThread();
    await thread.loadFromServer();
    const bubbles = container.querySelectorAll(".bubble");
    expect(bubbles).toHaveLength(4);
    expect(bubbles[0].textContent).toContain("q1");
    expect(bubbles[1].querySelector(".thumb-down")?.classList.contains("active")).toBe(true);
    expect(bubbles[3].querySelector(".sources-panel")?.textContent).toContain("Sources (1)");
  });

  it("starts empty for an unknown session", async () => {
    vi.spyOn(globalThis, "fetch").mockResolvedValue(
      jsonResponse({ detail: "unknown session" }, 404),
    );
    const thread = makeThread();
    await thread.loadFromServer();
    expect(container.querySelectorAll(".bubble")).toHaveLength(0);
  });
});
