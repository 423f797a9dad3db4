// Session controller. The page is a pure function of the most recent
// service response: every mutation posts, takes the returned
// next_action, and rebuilds the screen from it. Nothing is rendered
// optimistically, so a reload lands on exactly the pending step.

import type { Action, Side } from "./api.js";
import { ApiClient, ApiError } from "./api.js";
import type { DrawCtx } from "./draw.js";
import { clear, el } from "./dom.js";
import type { Scheduler } from "./player.js";
import { reportScreen } from "./report.js";
import type { ScreenDeps, ScreenHandle } from "./screens.js";
import {
  evaluationScreen,
  practiceScreen,
  tuningScreen,
} from "./screens.js";

export interface AppConfig {
  base: string;
  root: HTMLElement;
  doc: Document;
  ctxFor: (canvas: HTMLCanvasElement) => DrawCtx;
  rate?: number;
  schedule?: Scheduler;
  now?: () => number;
  fetchImpl?: typeof fetch;
  onSessionId?: (id: string) => void;
}

export class App {
  readonly client: ApiClient;
  sessionId = "";
  current: Action | null = null;
  handle: ScreenHandle | null = null;

  constructor(private config: AppConfig) {
    this.client = new ApiClient(config.base, config.fetchImpl);
  }

  private deps(): ScreenDeps {
    return {
      doc: this.config.doc,
      client: this.client,
      ctxFor: this.config.ctxFor,
      rate: this.config.rate ?? 1,
      schedule: this.config.schedule,
      now: this.config.now,
    };
  }

  /** Create a session, or pick up an existing one where it left off. */
  async start(existing?: string | null): Promise<void> {
    if (existing) {
      this.sessionId = existing;
    } else {
      const created = await this.client.createSession();
      this.sessionId = created.session_id;
      this.config.onSessionId?.(this.sessionId);
    }
    await this.render(await this.client.action(this.sessionId));
  }

  private async step(post: () => Promise<{ next_action: Action }>) {
    try {
      const result = await post();
      await this.render(result.next_action);
    } catch (exc) {
      if (
        exc instanceof ApiError &&
        (exc.code === "stale_pair" || exc.code === "phase_error")
      ) {
        // someone else moved the session along; fall back to its truth
        await this.render(await this.client.action(this.sessionId));
        return;
      }
      this.showError(exc);
    }
  }

  private showError(exc: unknown) {
    const doc = this.config.doc;
    const msg = exc instanceof Error ? exc.message : String(exc);
    this.config.root.append(
      el(doc, "p", { class: "error" }, [
        `Something went wrong (${msg}). Reload the page to continue.`,
      ]),
    );
  }

  async render(action: Action): Promise<void> {
    this.current = action;
    const doc = this.config.doc;
    const root = this.config.root;
    clear(root);
    root.append(
      el(doc, "header", {}, [
        el(doc, "h1", {}, ["Handover tuning"]),
        el(doc, "small", { class: "session-id" }, [`session ${this.sessionId}`]),
      ]),
    );
    const host = el(doc, "main", { id: "screen" });
    root.append(host);

    const id = this.sessionId;
    switch (action.type) {
      case "run_practice":
        this.handle = practiceScreen(host, this.deps(), action, () => {
          void this.step(() => this.client.practiceDone(id));
        });
        break;
      case "present_pair":
        this.handle = tuningScreen(
          host,
          this.deps(),
          action,
          (side: Side) => {
            void this.step(() => this.client.choice(id, action.pair_id, side));
          },
          () => {
            void this.step(() => this.client.failure(id, action.pair_id));
          },
        );
        break;
      case "present_eval_trial":
        this.handle = evaluationScreen(host, this.deps(), action, (side) => {
          void this.step(() => this.client.evalGuess(id, action.trial_id, side));
        });
        break;
      case "done": {
        this.handle = null;
        const [report, config] = await Promise.all([
          this.client.report(id),
          this.client.config(id),
        ]);
        reportScreen(host, doc, report, config);
        break;
      }
    }
    // screens surface their own load errors; this just keeps a failed
    // preview fetch from becoming an unhandled rejection
    this.handle?.ready.catch(() => undefined);
  }
}
