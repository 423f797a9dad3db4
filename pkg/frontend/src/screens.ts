// Participant-facing screens. During tuning and evaluation the page
// shows animations and plain-language labels only; parameter names and
// numbers stay out of the DOM so choices are driven by what the robot
// did, not by what a readout said.

import type {
  ApiClient,
  ParamVector,
  PresentEvalAction,
  PresentPairAction,
  RunPracticeAction,
  Side,
} from "./api.js";
import { buildClip } from "./clip.js";
import type { DrawCtx } from "./draw.js";
import { el } from "./dom.js";
import type { Scheduler } from "./player.js";
import { ClipPlayer, playPair } from "./player.js";
import { aspectDetail, aspectLabel, PHASE_TITLES } from "./words.js";

export interface ScreenDeps {
  doc: Document;
  client: ApiClient;
  ctxFor: (canvas: HTMLCanvasElement) => DrawCtx;
  rate: number;
  schedule?: Scheduler;
  now?: () => number;
}

/** Stable small seed from a string key, so a reloaded page replays the
 * same animation for the same pair. */
export function seedFor(key: string): number {
  let h = 5381;
  for (let i = 0; i < key.length; i++) {
    h = ((h * 33) ^ key.charCodeAt(i)) >>> 0;
  }
  return h % 1_000_000;
}

const SIDE_W = 300;
const SIDE_H = 180;
const TOP_H = 150;

/** One candidate: side and top views of a single handover, a replay
 * control, and the machinery to know it has been watched in full. */
export class CandidatePanel {
  readonly root: HTMLElement;
  private player: ClipPlayer;
  private replayBtn: HTMLButtonElement;

  constructor(
    private deps: ScreenDeps,
    caption: string,
    private params: ParamVector,
    private seed: number,
  ) {
    const doc = deps.doc;
    const side = el(doc, "canvas", {
      width: String(SIDE_W),
      height: String(SIDE_H),
      class: "view view-side",
    });
    const top = el(doc, "canvas", {
      width: String(SIDE_W),
      height: String(TOP_H),
      class: "view view-top",
    });
    this.replayBtn = el(doc, "button", { class: "replay" }, ["Replay"]);
    this.replayBtn.disabled = true;
    this.replayBtn.addEventListener("click", () => {
      void this.player.play();
    });
    this.root = el(doc, "div", { class: "panel" }, [
      el(doc, "div", { class: "panel-caption" }, [caption]),
      el(doc, "div", { class: "view-label" }, ["from the side"]),
      side,
      el(doc, "div", { class: "view-label" }, ["from above"]),
      top,
      this.replayBtn,
    ]);
    this.player = new ClipPlayer(
      [
        { ctx: deps.ctxFor(side), width: SIDE_W, height: SIDE_H, view: "side" },
        { ctx: deps.ctxFor(top), width: SIDE_W, height: TOP_H, view: "top" },
      ],
      { rate: deps.rate, schedule: deps.schedule, now: deps.now },
    );
  }

  async load(): Promise<void> {
    const payload = await this.deps.client.preview(this.params, this.seed);
    this.player.load(buildClip(payload));
    this.replayBtn.disabled = false;
  }

  play(): Promise<void> {
    return this.player.play();
  }

  get inner(): ClipPlayer {
    return this.player;
  }
}

export interface ScreenHandle {
  /** Resolves once every animation on the screen has played through. */
  ready: Promise<void>;
}

function errorLine(doc: Document): HTMLElement {
  return el(doc, "p", { class: "error", hidden: "" });
}

async function loadAndPlay(panel: CandidatePanel): Promise<CandidatePanel> {
  await panel.load();
  return panel;
}

export function practiceScreen(
  host: HTMLElement,
  deps: ScreenDeps,
  action: RunPracticeAction,
  onDone: () => void,
): ScreenHandle {
  const doc = deps.doc;
  const title = PHASE_TITLES[action.phase] ?? "Practice";
  const panel = new CandidatePanel(
    deps,
    "The robot will hand you the object",
    action.params,
    seedFor(`${action.phase}:${action.index}`),
  );
  const done = el(doc, "button", { class: "primary", id: "practice-done" }, [
    "Run handover",
  ]);
  done.addEventListener("click", () => {
    if (done.disabled) return;
    done.disabled = true;
    onDone();
  });
  const err = errorLine(doc);
  host.append(
    el(doc, "h2", {}, [title]),
    el(doc, "p", { class: "progress" }, [
      `Handover ${action.index} of ${action.of}`,
    ]),
    panel.root,
    el(doc, "p", {}, [
      "Watch the preview, then run the handover and take the object.",
    ]),
    done,
    err,
  );
  const ready = loadAndPlay(panel)
    .then((p) => p.play())
    .catch((exc) => {
      err.hidden = false;
      err.textContent = "Could not load the preview; you can still run the handover.";
      throw exc;
    });
  return { ready };
}

interface PairScreenText {
  heading: string;
  blurb: string;
  progress: string;
  chooseA: string;
  chooseB: string;
}

function pairScreen(
  host: HTMLElement,
  deps: ScreenDeps,
  text: PairScreenText,
  first: ParamVector,
  second: ParamVector,
  seedKey: string,
  onPick: (side: Side) => void,
  onFailure: (() => void) | null,
): ScreenHandle {
  const doc = deps.doc;
  const panelA = new CandidatePanel(deps, "Handover A", first, seedFor(`${seedKey}:first`));
  const panelB = new CandidatePanel(deps, "Handover B", second, seedFor(`${seedKey}:second`));

  const pickA = el(doc, "button", { class: "primary choice", "data-side": "first" }, [
    text.chooseA,
  ]);
  const pickB = el(doc, "button", { class: "primary choice", "data-side": "second" }, [
    text.chooseB,
  ]);
  pickA.disabled = true;
  pickB.disabled = true;
  const err = errorLine(doc);

  // a click only counts while the buttons are live; synthetic clicks on
  // a disabled button must not fall through to the service
  const pick = (side: Side) => {
    if (pickA.disabled || pickB.disabled) return;
    pickA.disabled = true;
    pickB.disabled = true;
    onPick(side);
  };
  pickA.addEventListener("click", () => pick("first"));
  pickB.addEventListener("click", () => pick("second"));

  const controls = el(doc, "div", { class: "choices" }, [pickA, pickB]);
  if (onFailure) {
    const fail = el(doc, "button", { class: "failure" }, ["A handover failed"]);
    fail.addEventListener("click", () => {
      if (fail.disabled) return;
      fail.disabled = true;
      onFailure();
    });
    controls.append(fail);
  }

  host.append(
    el(doc, "h2", {}, [text.heading]),
    el(doc, "p", { class: "blurb" }, [text.blurb]),
    el(doc, "p", { class: "progress" }, [text.progress]),
    el(doc, "div", { class: "pair" }, [panelA.root, panelB.root]),
    controls,
    err,
  );

  const ready = Promise.all([loadAndPlay(panelA), loadAndPlay(panelB)])
    .then(([a, b]) => playPair(a.inner, b.inner))
    .then(() => {
      pickA.disabled = false;
      pickB.disabled = false;
    })
    .catch((exc) => {
      err.hidden = false;
      err.textContent = "Could not load the previews. Reload to try again.";
      throw exc;
    });
  return { ready };
}

export function tuningScreen(
  host: HTMLElement,
  deps: ScreenDeps,
  action: PresentPairAction,
  onChoice: (side: Side) => void,
  onFailure: () => void,
): ScreenHandle {
  const aspect = aspectLabel(action.parameter);
  return pairScreen(
    host,
    deps,
    {
      heading: `Tuning ${aspect}`,
      blurb:
        `These two handovers differ in ${aspectDetail(action.parameter)}. ` +
        "Watch both, then pick the one you prefer.",
      progress: `Comparison ${action.comparison_index} for this aspect`,
      chooseA: "Prefer A",
      chooseB: "Prefer B",
    },
    action.first,
    action.second,
    action.pair_id,
    onChoice,
    onFailure,
  );
}

export function evaluationScreen(
  host: HTMLElement,
  deps: ScreenDeps,
  action: PresentEvalAction,
  onGuess: (side: Side) => void,
): ScreenHandle {
  return pairScreen(
    host,
    deps,
    {
      heading: PHASE_TITLES.evaluation,
      blurb:
        "One of these uses your tuned settings, the other is slightly " +
        "different. Pick the one that feels like yours.",
      progress: `Trial ${action.index} of ${action.of}`,
      chooseA: "A is mine",
      chooseB: "B is mine",
    },
    action.first,
    action.second,
    action.trial_id,
    onGuess,
    null,
  );
}
