import type { Source } from "../types.js";

/** Collapsible panel listing the chunks an answer was grounded in. */
export function SourcesPanel(sources: Source[]): HTMLElement {
  const details = document.createElement("details");
  details.className = "sources-panel";

  const summary = document.createElement("summary");
  summary.textContent = `Sources (${sources.length})`;
  details.appendChild(summary);

  const list = document.createElement("ul");
  for (const source of sources) {
    const item = document.createElement("li");
    item.className = "source-item";

    const chunk = document.createElement("code");
    chunk.textContent = source.chunk_id;

    const uri = document.createElement("span");
    uri.className = "source-uri";
    uri.textContent = source.uri ? ` ${source.uri}` : ` ${source.doc_id}`;

    item.append(chunk, uri);
    list.appendChild(item);
  }
  details.appendChild(list);
  return details;
}
