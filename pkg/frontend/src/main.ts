// Entry point: route on the location hash. The app is served at /ui by
// the review service, so API calls go to the same origin's root.

import { SessionApi } from "./api.js";
import { ReviewApp } from "./app.js";

function sessionIdFromHash(hash: string): string | null {
  const match = /^#\/sessions\/([^/]+)$/.exec(hash);
  return match?.[1] ?? null;
}

function start(): void {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app container");
  const app = new ReviewApp(root, new SessionApi(""));

  const route = () => {
    const sessionId = sessionIdFromHash(window.location.hash);
    void (sessionId === null ? app.showHome() : app.openSession(sessionId));
  };
  window.addEventListener("hashchange", route);
  route();
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", start);
} else {
  start();
}
