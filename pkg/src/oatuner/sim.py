"""Deterministic simulated handover executor.

Produces a timed two-agent event log for one robot-to-human handover,
standing in for a physical arm. The human side is a small parametric
model (reaction delay, hesitation growing with distance from a
preferred handover spot, force ramp) so that parameter personalization
has observable timing effects.

Timing layout of a successful handover, robot row / human row:

    pick-up .. move-to-start .. reach  wait          transfer .. retract
                                       |--reaction+hesitation--|
                              (human)  wait  reach-and-grasp   take-and-restore

"wait" intervals are explicit in the log but are not activities;
analytics treat them as idle time.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .values import HandoverParams

__all__ = [
    "ROBOT",
    "HUMAN",
    "ActivityInterval",
    "FailureMode",
    "HandoverRecord",
    "HumanModel",
    "FailureConfig",
    "SimConfig",
    "NonPositiveSpeed",
    "reach_duration",
    "transfer_wait",
    "execute_handover",
    "sample_trajectory",
]

ROBOT = "robot"
HUMAN = "human"

# phase labels that do not count as performing an activity
WAIT_LABELS = frozenset({"wait"})


class NonPositiveSpeed(ValueError):
    pass


class FailureMode(str, enum.Enum):
    PLANNING_FAILURE = "planning_failure"
    FALSE_TRIGGER = "false_trigger"
    DROP = "drop"


@dataclass(frozen=True)
class ActivityInterval:
    agent: str
    activity: str
    t_start: float
    t_end: float

    def __post_init__(self):
        if not (0 <= self.t_start <= self.t_end):
            raise ValueError(f"bad interval [{self.t_start}, {self.t_end}]")

    def as_doc(self):
        return {
            "agent": self.agent,
            "activity": self.activity,
            "t_start": round(self.t_start, 3),
            "t_end": round(self.t_end, 3),
        }

    @classmethod
    def from_doc(cls, doc):
        return cls(doc["agent"], doc["activity"], doc["t_start"], doc["t_end"])


@dataclass
class HandoverRecord:
    params: HandoverParams
    events: list
    success: bool
    failure_mode: Optional[FailureMode] = None

    def as_doc(self):
        return {
            "params": self.params.as_doc(),
            "events": [e.as_doc() for e in self.events],
            "success": self.success,
            "failure_mode": self.failure_mode.value if self.failure_mode else None,
        }

    @classmethod
    def from_doc(cls, doc):
        return cls(
            params=HandoverParams.from_doc(doc["params"]),
            events=[ActivityInterval.from_doc(e) for e in doc["events"]],
            success=doc["success"],
            failure_mode=FailureMode(doc["failure_mode"])
            if doc["failure_mode"]
            else None,
        )


@dataclass(frozen=True)
class HumanModel:
    """Timing model of the receiving human.

    hesitation_gain adds reaction seconds per meter between the offered
    handover location and the spot this person prefers; the force ramp
    models how quickly they pull until the robot's release threshold
    trips.
    """

    reaction_base: float = 0.8
    hesitation_gain: float = 1.5
    preferred_location: tuple = (0.9, 0.0, 0.25)
    force_ramp_rate: float = 40.0
    restore_duration: float = 2.0
    noise_sd: float = 0.05

    def __post_init__(self):
        if min(self.reaction_base, self.force_ramp_rate, self.restore_duration) <= 0:
            raise ValueError("rates and durations must be > 0")
        if self.hesitation_gain < 0 or self.noise_sd < 0:
            raise ValueError("gains must be >= 0")

    def as_doc(self):
        return {
            "reaction_base": self.reaction_base,
            "hesitation_gain": self.hesitation_gain,
            "preferred_location": list(self.preferred_location),
            "force_ramp_rate": self.force_ramp_rate,
            "restore_duration": self.restore_duration,
            "noise_sd": self.noise_sd,
        }

    @classmethod
    def from_doc(cls, doc):
        doc = dict(doc)
        doc["preferred_location"] = tuple(doc["preferred_location"])
        return cls(**doc)


@dataclass(frozen=True)
class FailureConfig:
    """Per-handover failure probabilities (planning : false trigger : drop
    defaults split 0.005 in ratio 3:4:1)."""

    p_planning: float = 0.005 * 3 / 8
    p_false_trigger: float = 0.005 * 4 / 8
    p_drop: float = 0.005 * 1 / 8

    @property
    def p_total(self):
        return self.p_planning + self.p_false_trigger + self.p_drop

    def as_doc(self):
        return {
            "p_planning": self.p_planning,
            "p_false_trigger": self.p_false_trigger,
            "p_drop": self.p_drop,
        }

    @classmethod
    def from_doc(cls, doc):
        return cls(**doc)


NO_FAILURES = FailureConfig(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SimConfig:
    start_pose: tuple = (0.45, 0.0, 0.5)
    pick_pose: tuple = (0.45, -0.35, 0.2)
    dwell: float = 0.5  # pause between robot phases
    pick_duration: float = 1.0
    transport_speed: float = 0.5  # m/s, pick pose to start pose
    accel: float = 1.0  # m/s^2 for the reach profile
    transfer_duration: float = 0.3

    def as_doc(self):
        return {
            "start_pose": list(self.start_pose),
            "pick_pose": list(self.pick_pose),
            "dwell": self.dwell,
            "pick_duration": self.pick_duration,
            "transport_speed": self.transport_speed,
            "accel": self.accel,
            "transfer_duration": self.transfer_duration,
        }

    @classmethod
    def from_doc(cls, doc):
        doc = dict(doc)
        doc["start_pose"] = tuple(doc["start_pose"])
        doc["pick_pose"] = tuple(doc["pick_pose"])
        return cls(**doc)


def _dist(a, b):
    return math.sqrt(sum((p - q) ** 2 for p, q in zip(a, b)))


def reach_duration(distance_m, v_max, accel=1.0):
    """Travel time over distance_m with a symmetric trapezoidal profile.

    Short moves never hit v_max and take the triangular branch.
    """
    if v_max <= 0:
        raise NonPositiveSpeed(f"v_max={v_max}")
    if accel <= 0:
        raise NonPositiveSpeed(f"accel={accel}")
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    if distance_m >= v_max * v_max / accel:
        return distance_m / v_max + v_max / accel
    return 2.0 * math.sqrt(distance_m / accel)


def transfer_wait(human: HumanModel, params: HandoverParams, rng=None) -> float:
    """How long the robot holds the object out before the force threshold
    trips: reaction + hesitation by location mismatch + force ramp."""
    reaction = human.reaction_base + human.hesitation_gain * _dist(
        params.location(), human.preferred_location
    )
    ramp = params.f_min.as_float() / human.force_ramp_rate
    noise = (rng.gauss(0.0, 1.0) if rng is not None else 0.0) * human.noise_sd
    # ramp time cannot go negative however unlucky the noise draw
    return reaction + max(ramp + noise, 0.05)


def execute_handover(
    params: HandoverParams,
    human: HumanModel = None,
    failure: FailureConfig = None,
    seed: int = 0,
    sim: SimConfig = None,
) -> HandoverRecord:
    """Run one simulated handover and return its event log.

    Deterministic given identical inputs and seed. Failures are data:
    the log is truncated at the failure point and failure_mode set.
    """
    human = human if human is not None else HumanModel()
    failure = failure if failure is not None else FailureConfig()
    sim = sim if sim is not None else SimConfig()
    rng = random.Random(seed)

    # fixed draw order keeps rng consumption identical on every path
    fail_draw = rng.random()
    trunc_draw = rng.random()
    wait = transfer_wait(human, params, rng)

    mode = None
    p1 = failure.p_planning
    p2 = p1 + failure.p_false_trigger
    p3 = p2 + failure.p_drop
    if fail_draw < p1:
        mode = FailureMode.PLANNING_FAILURE
    elif fail_draw < p2:
        mode = FailureMode.FALSE_TRIGGER
    elif fail_draw < p3:
        mode = FailureMode.DROP

    loc = params.location()
    v = params.v_max.as_float()
    move_dur = _dist(sim.pick_pose, sim.start_pose) / sim.transport_speed
    reach_dur = reach_duration(_dist(sim.start_pose, loc), v, sim.accel)
    reaction = human.reaction_base + human.hesitation_gain * _dist(
        loc, human.preferred_location
    )

    events = []
    t = 0.0
    events.append(ActivityInterval(ROBOT, "pick-up", t, t + sim.pick_duration))
    t += sim.pick_duration + sim.dwell
    events.append(ActivityInterval(ROBOT, "move-to-start", t, t + move_dur))
    t += move_dur + sim.dwell

    if mode == FailureMode.PLANNING_FAILURE:
        # no collision-free reach trajectory; nothing else happens
        events.append(ActivityInterval(HUMAN, "wait", 0.0, t))
        return HandoverRecord(params, _sorted(events), False, mode)

    events.append(ActivityInterval(ROBOT, "reach", t, t + reach_dur))
    reach_end = t + reach_dur

    if mode == FailureMode.FALSE_TRIGGER:
        # threshold trips early, somewhere inside the wait
        early = reach_end + wait * trunc_draw
        events.append(ActivityInterval(ROBOT, "wait", reach_end, early))
        events.append(ActivityInterval(HUMAN, "wait", 0.0, early))
        return HandoverRecord(params, _sorted(events), False, mode)

    trigger = reach_end + wait
    events.append(ActivityInterval(ROBOT, "wait", reach_end, trigger))
    events.append(ActivityInterval(HUMAN, "wait", 0.0, reach_end + reaction))
    events.append(
        ActivityInterval(HUMAN, "reach-and-grasp", reach_end + reaction, trigger)
    )

    if mode == FailureMode.DROP:
        dropped = trigger + sim.transfer_duration * trunc_draw
        events.append(ActivityInterval(ROBOT, "transfer", trigger, dropped))
        return HandoverRecord(params, _sorted(events), False, mode)

    transfer_end = trigger + sim.transfer_duration
    events.append(ActivityInterval(ROBOT, "transfer", trigger, transfer_end))
    events.append(
        ActivityInterval(
            HUMAN, "take-and-restore", trigger, trigger + human.restore_duration
        )
    )
    retract_start = transfer_end + sim.dwell
    events.append(
        ActivityInterval(ROBOT, "retract", retract_start, retract_start + reach_dur)
    )
    return HandoverRecord(params, _sorted(events), True, None)


def _sorted(events):
    return sorted(events, key=lambda e: (e.t_start, e.agent, e.t_end))


def sample_trajectory(params: HandoverParams, sim: SimConfig = None, n: int = 30):
    """Sampled reach-phase hand positions for animation previews.

    Straight line from the start pose to the handover location with the
    trapezoidal speed profile; n evenly spaced time samples.
    """
    sim = sim if sim is not None else SimConfig()
    loc = params.location()
    v = params.v_max.as_float()
    d = _dist(sim.start_pose, loc)
    dur = reach_duration(d, v, sim.accel)
    if d == 0 or dur == 0:
        return [{"t": 0.0, "pos": list(sim.start_pose)}]

    a = sim.accel
    if d >= v * v / a:
        t_acc = v / a
        d_acc = 0.5 * v * v / a
        t_cruise = (d - 2 * d_acc) / v
    else:
        t_acc = math.sqrt(d / a)
        d_acc = 0.5 * a * t_acc * t_acc
        t_cruise = 0.0
        v = a * t_acc

    def covered(time):
        if time <= t_acc:
            return 0.5 * a * time * time
        if time <= t_acc + t_cruise:
            return d_acc + v * (time - t_acc)
        tail = time - t_acc - t_cruise
        return d_acc + v * t_cruise + v * tail - 0.5 * a * tail * tail

    pts = []
    for i in range(n + 1):
        time = dur * i / n
        frac = min(covered(time) / d, 1.0)
        pos = [
            sim.start_pose[k] + frac * (loc[k] - sim.start_pose[k]) for k in range(3)
        ]
        pts.append({"t": round(time, 3), "pos": [round(p, 4) for p in pos]})
    return pts
