// Schematic 2-D rendering of a handover clip. Drawing goes through a
// narrow context interface so tests can substitute a recorder for the
// real CanvasRenderingContext2D (which satisfies it structurally).

import type { Clip, Vec3 } from "./clip.js";
import { activityAt, humanPosition, robotPosition } from "./clip.js";

export interface DrawCtx {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export type View = "side" | "top";

// Fixed world windows, generous enough for every spec range.
const WINDOWS = {
  side: { h: [0.3, 1.45] as const, v: [0.0, 0.7] as const },
  top: { h: [0.3, 1.45] as const, v: [-0.45, 0.45] as const },
};

function project(view: View, p: Vec3): [number, number] {
  return view === "side" ? [p[0], p[2]] : [p[0], p[1]];
}

function mapper(view: View, w: number, h: number) {
  const win = WINDOWS[view];
  const pad = 8;
  return (p: Vec3): [number, number] => {
    const [a, b] = project(view, p);
    const x = pad + ((a - win.h[0]) / (win.h[1] - win.h[0])) * (w - 2 * pad);
    const yf = (b - win.v[0]) / (win.v[1] - win.v[0]);
    // canvas y grows downward
    const y = pad + (1 - yf) * (h - 2 * pad);
    return [x, y];
  };
}

const COLORS = {
  background: "#fafaf7",
  path: "#c9d4e0",
  robot: "#2e6fb0",
  human: "#c07b30",
  object: "#444444",
  text: "#666666",
  failure: "#b03030",
};

export function drawFrame(
  ctx: DrawCtx,
  w: number,
  h: number,
  clip: Clip,
  view: View,
  t: number,
): void {
  const toPx = mapper(view, w, h);
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, w, h);

  // full reach path, faint
  ctx.strokeStyle = COLORS.path;
  ctx.lineWidth = 2;
  ctx.beginPath();
  clip.path.forEach((pt, i) => {
    const [x, y] = toPx(pt.pos);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();

  // offer point marker
  const [ox, oy] = toPx(clip.offer);
  ctx.strokeStyle = COLORS.human;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.arc(ox, oy, 6, 0, Math.PI * 2);
  ctx.stroke();

  // robot hand with the object (object rides along until transfer ends)
  const robot = toPx(robotPosition(clip, t));
  ctx.fillStyle = COLORS.robot;
  ctx.beginPath();
  ctx.arc(robot[0], robot[1], 7, 0, Math.PI * 2);
  ctx.fill();

  // human hand
  const human = toPx(humanPosition(clip, t));
  ctx.fillStyle = COLORS.human;
  ctx.beginPath();
  ctx.arc(human[0], human[1], 7, 0, Math.PI * 2);
  ctx.fill();

  // activity captions
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px sans-serif";
  const robotDoing = activityAt(clip, "robot", t);
  const humanDoing = activityAt(clip, "human", t);
  ctx.fillText(`robot: ${robotDoing || "idle"}`, 10, 14);
  ctx.fillText(`human: ${humanDoing || "idle"}`, 10, 28);
  if (!clip.success && t >= clip.duration) {
    ctx.fillStyle = COLORS.failure;
    ctx.fillText("handover failed", 10, h - 10);
  }

  // progress bar along the bottom
  const frac = clip.duration > 0 ? Math.min(1, t / clip.duration) : 1;
  ctx.fillStyle = COLORS.path;
  ctx.fillRect(0, h - 3, w * frac, 3);
}
