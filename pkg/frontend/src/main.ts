// Browser entry point. The service origin comes from ?api= (defaults
// to same origin), the session id lives in the URL hash so a reload or
// a shared link resumes the same session, and ?rate= speeds playback
// up for demos.

import { App } from "./app.js";

function boot() {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(location.search);
  const app = new App({
    base: params.get("api") ?? "",
    root,
    doc: document,
    ctxFor: (canvas) => {
      const ctx = canvas.getContext("2d");
      if (!ctx) throw new Error("canvas 2d context unavailable");
      return ctx;
    },
    rate: Number(params.get("rate") ?? "1") || 1,
    onSessionId: (id) => {
      location.hash = id;
    },
  });
  const existing = location.hash.replace(/^#/, "") || null;
  app.start(existing).catch((exc) => {
    root.textContent = `Could not reach the tuning service: ${exc}`;
  });
}

boot();
