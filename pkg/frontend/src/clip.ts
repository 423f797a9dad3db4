// Turns one /api/preview payload into an animation clip. All timing
// and geometry comes from the payload; nothing is simulated here.

import type {
  ActivityEvent,
  PreviewPayload,
  TrajectoryPoint,
} from "./api.js";

export type Vec3 = [number, number, number];

export interface Clip {
  duration: number;
  events: ActivityEvent[];
  path: TrajectoryPoint[];
  start: Vec3;
  offer: Vec3;
  success: boolean;
  failureMode: string | null;
  reachStart: number;
  reachEnd: number;
  humanReach: ActivityEvent | null;
  retract: ActivityEvent | null;
}

function findEvent(events: ActivityEvent[], agent: string, activity: string) {
  return events.find((e) => e.agent === agent && e.activity === activity) ?? null;
}

export function buildClip(payload: PreviewPayload): Clip {
  const events = payload.record.events;
  if (events.length === 0 || payload.trajectory.length === 0) {
    throw new Error("preview payload has no events or no trajectory");
  }
  const duration = Math.max(...events.map((e) => e.t_end));
  const reach = findEvent(events, "robot", "reach");
  const path = payload.trajectory;
  return {
    duration,
    events,
    path,
    start: path[0].pos,
    offer: path[path.length - 1].pos,
    success: payload.record.success,
    failureMode: payload.record.failure_mode,
    reachStart: reach ? reach.t_start : duration,
    reachEnd: reach ? reach.t_end : duration,
    humanReach: findEvent(events, "human", "reach-and-grasp"),
    retract: findEvent(events, "robot", "retract"),
  };
}

function lerp(a: Vec3, b: Vec3, f: number): Vec3 {
  return [
    a[0] + (b[0] - a[0]) * f,
    a[1] + (b[1] - a[1]) * f,
    a[2] + (b[2] - a[2]) * f,
  ];
}

function samplePath(path: TrajectoryPoint[], t: number): Vec3 {
  if (t <= path[0].t) return path[0].pos;
  for (let i = 1; i < path.length; i++) {
    if (t <= path[i].t) {
      const a = path[i - 1];
      const b = path[i];
      const span = b.t - a.t;
      const f = span > 0 ? (t - a.t) / span : 1;
      return lerp(a.pos, b.pos, f);
    }
  }
  return path[path.length - 1].pos;
}

/** Robot hand position at clip time t (piecewise linear). */
export function robotPosition(clip: Clip, t: number): Vec3 {
  if (t < clip.reachStart) return clip.start;
  if (t <= clip.reachEnd) return samplePath(clip.path, t - clip.reachStart);
  if (clip.retract && t >= clip.retract.t_start) {
    const span = clip.retract.t_end - clip.retract.t_start;
    const f = span > 0 ? Math.min(1, (t - clip.retract.t_start) / span) : 1;
    return lerp(clip.offer, clip.start, f);
  }
  return clip.offer;
}

// The human hand rests a fixed offset beyond the offer point and moves
// in during reach-and-grasp. Display geometry only.
export function humanHome(clip: Clip): Vec3 {
  return [clip.offer[0] + 0.35, clip.offer[1], clip.offer[2] - 0.05];
}

export function humanPosition(clip: Clip, t: number): Vec3 {
  const home = humanHome(clip);
  const grasp = clip.humanReach;
  if (!grasp || t < grasp.t_start) return home;
  if (t <= grasp.t_end) {
    const span = grasp.t_end - grasp.t_start;
    const f = span > 0 ? (t - grasp.t_start) / span : 1;
    return lerp(home, clip.offer, f);
  }
  // after the grasp the hand carries the object back home
  const restore = clip.events.find(
    (e) => e.agent === "human" && e.activity === "take-and-restore",
  );
  if (restore && t >= restore.t_start) {
    const span = restore.t_end - restore.t_start;
    const f = span > 0 ? Math.min(1, (t - restore.t_start) / span) : 1;
    return lerp(clip.offer, home, f);
  }
  return clip.offer;
}

/** The activity label to show for an agent at time t ("" when idle). */
export function activityAt(clip: Clip, agent: string, t: number): string {
  for (const e of clip.events) {
    if (e.agent === agent && e.t_start <= t && t < e.t_end) return e.activity;
  }
  return "";
}
