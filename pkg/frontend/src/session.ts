const KEY = "deskqa.session";

/**
 * Lazily created session id, scoped to the browser tab so each tab is its
 * own conversation thread.
 */
export function getSessionId(storage: Storage = window.sessionStorage): string {
  let id = storage.getItem(KEY);
  if (!id) {
    id = crypto.randomUUID().replace(/-/g, "");
    storage.setItem(KEY, id);
  }
  return id;
}
