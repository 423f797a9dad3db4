// Shared test fixtures: a recording draw context, a hand-cranked
// scheduler and clock, and a small preview payload with known timing.

import type { PreviewPayload } from "../src/api.js";
import type { DrawCtx } from "../src/draw.js";

export class RecordingCtx implements DrawCtx {
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 0;
  font = "";
  calls: unknown[][] = [];

  clearRect(...args: number[]) {
    this.calls.push(["clearRect", ...args]);
  }
  fillRect(...args: number[]) {
    this.calls.push(["fillRect", ...args]);
  }
  beginPath() {
    this.calls.push(["beginPath"]);
  }
  moveTo(x: number, y: number) {
    this.calls.push(["moveTo", x, y]);
  }
  lineTo(x: number, y: number) {
    this.calls.push(["lineTo", x, y]);
  }
  arc(...args: number[]) {
    this.calls.push(["arc", ...args]);
  }
  stroke() {
    this.calls.push(["stroke"]);
  }
  fill() {
    this.calls.push(["fill"]);
  }
  fillText(text: string, x: number, y: number) {
    this.calls.push(["fillText", text, x, y]);
  }

  texts(): string[] {
    return this.calls
      .filter((c) => c[0] === "fillText")
      .map((c) => c[1] as string);
  }

  reset() {
    this.calls = [];
  }
}

/** Scheduler plus clock that only advance when the test says so. */
export function manualTime() {
  let nowMs = 0;
  const queue: (() => void)[] = [];
  return {
    now: () => nowMs,
    schedule: (cb: () => void) => {
      queue.push(cb);
    },
    advance(ms: number) {
      nowMs += ms;
    },
    /** Run everything currently queued (not callbacks they enqueue). */
    flush() {
      const batch = queue.splice(0);
      for (const cb of batch) cb();
    },
    get pending() {
      return queue.length;
    },
  };
}

/** A 6 second handover: reach spans seconds 2..3, human grasps 3..4,
 * transfer 4..4.3, retract 5..6. Trajectory time is reach-relative. */
export function fixturePayload(): PreviewPayload {
  return {
    record: {
      params: { v_max: "0.5", x: "0.9", y: "0", z: "0.25", f_min: "17" },
      events: [
        { agent: "robot", activity: "pick-up", t_start: 0, t_end: 1 },
        { agent: "robot", activity: "move-to-start", t_start: 1, t_end: 2 },
        { agent: "robot", activity: "reach", t_start: 2, t_end: 3 },
        { agent: "robot", activity: "wait", t_start: 3, t_end: 4 },
        { agent: "robot", activity: "transfer", t_start: 4, t_end: 4.3 },
        { agent: "robot", activity: "retract", t_start: 5, t_end: 6 },
        { agent: "human", activity: "wait", t_start: 0, t_end: 3 },
        { agent: "human", activity: "reach-and-grasp", t_start: 3, t_end: 4 },
        { agent: "human", activity: "take-and-restore", t_start: 4.3, t_end: 6 },
      ],
      success: true,
      failure_mode: null,
    },
    trajectory: [
      { t: 0, pos: [0.45, 0, 0.5] },
      { t: 0.5, pos: [0.675, 0, 0.375] },
      { t: 1, pos: [0.9, 0, 0.25] },
    ],
  };
}

export function failedPayload(): PreviewPayload {
  const payload = fixturePayload();
  payload.record.success = false;
  payload.record.failure_mode = "drop";
  return payload;
}
