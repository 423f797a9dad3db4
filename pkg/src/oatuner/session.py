"""End-to-end session orchestration, persistence, and replay.

A Session walks one participant through the whole protocol:

    Practice1 (5 handovers, near-average params)
    Tuning    (five parameters, one after another, A/B pairs)
    Practice2 (5 handovers, tuned params)
    Evaluation (5 blinded identification trials, 2 handovers each)
    Complete

Every handover is executed by the simulator the moment it is needed,
with a seed derived from the session's master seed and a running
handover counter, so the entire session is a pure function of its
config plus the ordered list of external inputs (choices, failures,
guesses, practice acknowledgments). Saving a session stores exactly
that; replaying re-applies the inputs to a fresh session and must
reproduce transcripts and reports byte for byte.

Failed tuning handovers re-issue their pair (fresh pair id, same
values), whether the failure was injected by the simulator or reported
by the client. Practice and evaluation failures are only counted.
"""

from __future__ import annotations

import enum
import json
import os
import uuid
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

from . import engine as eng
from .evaluation import EVAL_SCHEDULE, EvaluationTrial, make_trials, score
from .fluency import compute_fluency, success_rate
from .sim import FailureConfig, HumanModel, SimConfig, execute_handover
from .values import HandoverParams, default_specs, near_average_defaults

__all__ = [
    "SCHEMA_VERSION",
    "SessionPhase",
    "SessionConfig",
    "Session",
    "SessionStore",
    "UnknownSession",
    "InvalidConfig",
    "StalePair",
    "PhaseError",
    "create_session",
    "run_scripted_session",
    "replay_session",
]

SCHEMA_VERSION = 1
INTER_HANDOVER_GAP_MS = 500
MAX_AUTO_REPEATS = 1000


class UnknownSession(KeyError):
    pass


class InvalidConfig(ValueError):
    pass


class StalePair(ValueError):
    """The referenced pair or trial is not the pending one."""


class PhaseError(RuntimeError):
    pass


class SessionPhase(str, enum.Enum):
    PRACTICE1 = "practice1"
    TUNING = "tuning"
    PRACTICE2 = "practice2"
    EVALUATION = "evaluation"
    COMPLETE = "complete"


def derive_seed(master_seed, label) -> int:
    """Stable sub-seed stream: crc32 of 'master:label'."""
    return zlib.crc32(f"{master_seed}:{label}".encode()) & 0xFFFFFFFF


@dataclass
class SessionConfig:
    specs: list = field(default_factory=default_specs)
    human: HumanModel = field(default_factory=HumanModel)
    failure: FailureConfig = field(default_factory=FailureConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    criteria: eng.StopCriteria = field(default_factory=eng.StopCriteria)
    seed: int = 0
    n_practice: int = 5
    eval_schedule: tuple = EVAL_SCHEDULE

    def __post_init__(self):
        if len(self.specs) != 5:
            raise InvalidConfig("default plan requires exactly 5 parameter specs")
        names = [s.name for s in self.specs]
        if sorted(self.eval_schedule) != sorted(names):
            raise InvalidConfig("eval schedule must cover each parameter once")

    def as_doc(self):
        return {
            "specs": [s.as_doc() for s in self.specs],
            "human": self.human.as_doc(),
            "failure": self.failure.as_doc(),
            "sim": self.sim.as_doc(),
            "criteria": {
                "four_in_a_row": self.criteria.four_in_a_row,
                "cap": self.criteria.cap,
                "count_installing_win": self.criteria.count_installing_win,
            },
            "seed": self.seed,
            "n_practice": self.n_practice,
            "eval_schedule": list(self.eval_schedule),
        }

    @classmethod
    def from_doc(cls, doc):
        from .values import ParameterSpec

        return cls(
            specs=[ParameterSpec.from_doc(d) for d in doc["specs"]],
            human=HumanModel.from_doc(doc["human"]),
            failure=FailureConfig.from_doc(doc["failure"]),
            sim=SimConfig.from_doc(doc["sim"]),
            criteria=eng.StopCriteria(**doc["criteria"]),
            seed=doc["seed"],
            n_practice=doc["n_practice"],
            eval_schedule=tuple(doc["eval_schedule"]),
        )


class Session:
    """One participant's run through the protocol. Single logical writer."""

    def __init__(self, config: SessionConfig, session_id=None, created_at=None):
        self.config = config
        self.session_id = session_id or uuid.uuid4().hex
        self.created_at = created_at or datetime.now(timezone.utc).isoformat()
        self.phase = SessionPhase.PRACTICE1
        self.inputs = []  # external events, the replayable truth
        self.handovers = []  # chronological handover entries
        self.handover_seq = 0
        self.clock_ms = 0
        self.practice1_done = 0
        self.practice2_done = 0
        self.plan: Optional[eng.SessionPlan] = None
        self.tuner: Optional[eng.OATuner] = None
        self.finished_tuners = []
        self.tuned: Optional[HandoverParams] = None
        self.eval_trials: list[EvaluationTrial] = []
        self.eval_index = 0
        self.eval_score = None

    # -- internal helpers ------------------------------------------------

    def _execute(self, params: HandoverParams, phase_label, ref):
        seed = derive_seed(self.config.seed, f"h{self.handover_seq}")
        record = execute_handover(
            params,
            human=self.config.human,
            failure=self.config.failure,
            seed=seed,
            sim=self.config.sim,
        )
        span_ms = 0
        if record.events:
            span_ms = round(max(e.t_end for e in record.events) * 1000)
        entry = {
            "seq": self.handover_seq,
            "phase": phase_label,
            "ref": ref,
            "seed": seed,
            "offset_ms": self.clock_ms,
            "record": record.as_doc(),
        }
        self.handovers.append(entry)
        self.handover_seq += 1
        self.clock_ms += span_ms + INTER_HANDOVER_GAP_MS
        return record

    def _execute_pair(self, pair):
        """Run both options of a pending pair; injected failures repeat the
        pair until a clean presentation exists."""
        for _ in range(MAX_AUTO_REPEATS):
            a = self._execute(
                self.plan.presentation_params(pair.first),
                SessionPhase.TUNING.value,
                {"pair_id": pair.pair_id, "side": "first"},
            )
            b = self._execute(
                self.plan.presentation_params(pair.second),
                SessionPhase.TUNING.value,
                {"pair_id": pair.pair_id, "side": "second"},
            )
            if a.success and b.success:
                return pair
            pair = self.tuner.report_failure()
        raise RuntimeError("failure injection never produced a clean pair")

    def _execute_eval_trial(self, trial):
        first, second = trial.presented()
        for side, params in (("first", first), ("second", second)):
            self._execute(
                params,
                SessionPhase.EVALUATION.value,
                {"trial_id": trial.trial_id, "side": side},
            )

    def _start_tuning(self):
        self.phase = SessionPhase.TUNING
        self.plan = eng.SessionPlan(specs=list(self.config.specs))
        self.tuner, pair = eng.init_tuner(self.plan.current_spec, self.config.criteria)
        self._execute_pair(pair)

    def _advance_after_convergence(self, converged: eng.Converged):
        self.finished_tuners.append(self.tuner)
        step = eng.advance_plan(self.plan, converged.value, self.config.criteria)
        if isinstance(step, eng.PlanComplete):
            self.tuner = None
            self.tuned = step.params
            self.phase = SessionPhase.PRACTICE2
        else:
            self.tuner, pair = step
            self._execute_pair(pair)

    def _start_evaluation(self):
        self.phase = SessionPhase.EVALUATION
        self.eval_trials = make_trials(
            self.tuned,
            self.config.specs,
            derive_seed(self.config.seed, "eval"),
            schedule=self.config.eval_schedule,
        )
        self.eval_index = 0
        self._execute_eval_trial(self.eval_trials[0])

    # -- protocol surface --------------------------------------------------

    def next_action(self) -> dict:
        """The pending action. Idempotent until resolved."""
        if self.phase == SessionPhase.PRACTICE1:
            return {
                "type": "run_practice",
                "phase": self.phase.value,
                "index": self.practice1_done + 1,
                "of": self.config.n_practice,
                "params": near_average_defaults().as_doc(),
            }
        if self.phase == SessionPhase.TUNING:
            pair = self.tuner.pending
            return {
                "type": "present_pair",
                "pair_id": pair.pair_id,
                "parameter": pair.parameter,
                "comparison_index": self.tuner.comparisons_made + 1,
                "first": self.plan.presentation_params(pair.first).as_doc(),
                "second": self.plan.presentation_params(pair.second).as_doc(),
            }
        if self.phase == SessionPhase.PRACTICE2:
            return {
                "type": "run_practice",
                "phase": self.phase.value,
                "index": self.practice2_done + 1,
                "of": self.config.n_practice,
                "params": self.tuned.as_doc(),
            }
        if self.phase == SessionPhase.EVALUATION:
            trial = self.eval_trials[self.eval_index]
            first, second = trial.presented()
            # blinded: nothing here says which side is the tuned one
            return {
                "type": "present_eval_trial",
                "trial_id": trial.trial_id,
                "index": self.eval_index + 1,
                "of": len(self.eval_trials),
                "first": first.as_doc(),
                "second": second.as_doc(),
            }
        return {"type": "done"}

    def post_practice_done(self):
        if self.phase not in (SessionPhase.PRACTICE1, SessionPhase.PRACTICE2):
            raise PhaseError(f"no practice pending in {self.phase.value}")
        self.inputs.append({"type": "practice_done"})
        if self.phase == SessionPhase.PRACTICE1:
            self._execute(
                near_average_defaults(),
                SessionPhase.PRACTICE1.value,
                {"practice": self.practice1_done + 1},
            )
            self.practice1_done += 1
            if self.practice1_done >= self.config.n_practice:
                self._start_tuning()
        else:
            self._execute(
                self.tuned,
                SessionPhase.PRACTICE2.value,
                {"practice": self.practice2_done + 1},
            )
            self.practice2_done += 1
            if self.practice2_done >= self.config.n_practice:
                self._start_evaluation()
        return self.next_action()

    def post_choice(self, pair_id, side):
        if self.phase != SessionPhase.TUNING:
            raise PhaseError(f"no pair pending in {self.phase.value}")
        pair = self.tuner.pending
        if pair is None or pair_id != pair.pair_id:
            raise StalePair(pair_id)
        if side not in ("first", "second"):
            raise eng.InvalidChoice(f"side must be first or second, got {side!r}")
        self.inputs.append({"type": "choice", "pair_id": pair_id, "side": side})
        chosen = pair.first if side == "first" else pair.second
        result = self.tuner.submit_choice(chosen)
        if isinstance(result, eng.Converged):
            self._advance_after_convergence(result)
        else:
            self._execute_pair(result.pair)
        return self.next_action()

    def post_failure(self, pair_id):
        if self.phase != SessionPhase.TUNING:
            raise PhaseError(f"no pair pending in {self.phase.value}")
        pair = self.tuner.pending
        if pair is None or pair_id != pair.pair_id:
            raise StalePair(pair_id)
        self.inputs.append({"type": "failure", "pair_id": pair_id})
        fresh = self.tuner.report_failure()
        self._execute_pair(fresh)
        return self.next_action()

    def post_eval_guess(self, trial_id, side):
        if self.phase != SessionPhase.EVALUATION:
            raise PhaseError(f"no trial pending in {self.phase.value}")
        trial = self.eval_trials[self.eval_index]
        if trial_id != trial.trial_id:
            raise StalePair(trial_id)
        if side not in ("first", "second"):
            raise eng.InvalidChoice(f"side must be first or second, got {side!r}")
        self.inputs.append({"type": "eval_guess", "trial_id": trial_id, "side": side})
        trial.guess = side
        trial.correct = side == trial.presentation_order
        self.eval_index += 1
        if self.eval_index >= len(self.eval_trials):
            self.eval_score = score(self.eval_trials)
            self.phase = SessionPhase.COMPLETE
        else:
            self._execute_eval_trial(self.eval_trials[self.eval_index])
        return self.next_action()

    # -- derived views -----------------------------------------------------

    def transcript(self):
        """Every tuning comparison in order: pair, choice or failure, and
        the engine state after. No wall-clock anywhere."""
        records = []
        for tuner in [*self.finished_tuners, *([self.tuner] if self.tuner else [])]:
            records.extend(tuner.transcript())
        return records

    def comparison_counts(self):
        tuners = [*self.finished_tuners, *([self.tuner] if self.tuner else [])]
        per = {t.spec.name: t.comparisons_made for t in tuners}
        return per, sum(per.values())

    def presentation_counts(self):
        """Pairs actually presented (answered comparisons + repeats)."""
        per = {}
        for tuner in [*self.finished_tuners, *([self.tuner] if self.tuner else [])]:
            per[tuner.spec.name] = len(tuner.history)
        return per, sum(per.values())

    def _phase_records(self, phase_label):
        return [e for e in self.handovers if e["phase"] == phase_label]

    def _mean_fluency(self, phase_label):
        from .sim import HandoverRecord

        entries = self._phase_records(phase_label)
        reports = []
        for e in entries:
            rec = HandoverRecord.from_doc(e["record"])
            if rec.success:
                reports.append(compute_fluency(rec.events))
        if not reports:
            return None
        n = len(reports)
        return {
            "r_idle": sum(r.r_idle for r in reports) / n,
            "h_idle": sum(r.h_idle for r in reports) / n,
            "c_act": sum(r.c_act for r in reports) / n,
            "f_del": sum(r.f_del for r in reports) / n,
            "total_time": sum(r.total_time for r in reports) / n,
            "n": n,
        }

    def report(self) -> dict:
        n_total = len(self.handovers)
        n_failed = sum(1 for e in self.handovers if not e["record"]["success"])
        per_comp, total_comp = self.comparison_counts()
        per_pres, total_pres = self.presentation_counts()
        before = self._mean_fluency(SessionPhase.PRACTICE1.value)
        after = self._mean_fluency(SessionPhase.PRACTICE2.value)
        fluency = {"practice1": before, "practice2": after}
        if before and after:
            fluency["delta"] = {
                k: after[k] - before[k] for k in ("r_idle", "h_idle", "c_act", "f_del")
            }
        return {
            "complete": self.phase == SessionPhase.COMPLETE,
            "phase": self.phase.value,
            "tuned": self.tuned.as_doc() if self.tuned else None,
            "comparisons": {"per_parameter": per_comp, "total": total_comp},
            "presentations": {"per_parameter": per_pres, "total": total_pres},
            "handovers": {
                "total": n_total,
                "failed": n_failed,
                "success_rate": success_rate(n_failed, n_total) if n_total else None,
            },
            "fluency": fluency,
            "evaluation": self.eval_score.as_doc() if self.eval_score else None,
        }

    def state_doc(self):
        """Full state view for GET /api/sessions/{id}."""
        return {
            "session_id": self.session_id,
            "phase": self.phase.value,
            "practice1_done": self.practice1_done,
            "practice2_done": self.practice2_done,
            "tuned": self.tuned.as_doc() if self.tuned else None,
            "pending": self.next_action(),
            "handovers_executed": self.handover_seq,
            "clock_ms": self.clock_ms,
        }

    def as_doc(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": self.session_id,
            "created_at": self.created_at,
            "config": self.config.as_doc(),
            "inputs": list(self.inputs),
            "phase": self.phase.value,
            "transcript": self.transcript(),
            "handovers": self.handovers,
            "eval_trials": [t.as_doc() for t in self.eval_trials],
            "report": self.report(),
        }

    @classmethod
    def from_doc(cls, doc):
        """Rebuild a live session from its saved inputs.

        State is reconstructed by replaying the recorded external
        events against a fresh session; the simulator and engine are
        deterministic, so this lands in exactly the saved state.
        """
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise InvalidConfig(f"unsupported schema_version {doc.get('schema_version')}")
        session = cls(
            SessionConfig.from_doc(doc["config"]),
            session_id=doc["session_id"],
            created_at=doc["created_at"],
        )
        for event in doc["inputs"]:
            session.apply_input(event)
        return session

    def apply_input(self, event):
        kind = event["type"]
        if kind == "practice_done":
            return self.post_practice_done()
        if kind == "choice":
            return self.post_choice(event["pair_id"], event["side"])
        if kind == "failure":
            return self.post_failure(event["pair_id"])
        if kind == "eval_guess":
            return self.post_eval_guess(event["trial_id"], event["side"])
        raise InvalidConfig(f"unknown input type {kind!r}")


def create_session(config: SessionConfig = None, session_id=None) -> Session:
    return Session(config if config is not None else SessionConfig(), session_id)


def run_scripted_session(session: Session, chooser, guesser=None):
    """Drive a session to completion with programmatic responders.

    chooser(action) -> "first" | "second" for present_pair actions;
    guesser(action) -> side for present_eval_trial actions (defaults to
    chooser). Practice actions are acknowledged automatically.
    """
    guesser = guesser if guesser is not None else chooser
    while True:
        action = session.next_action()
        kind = action["type"]
        if kind == "done":
            return session
        if kind == "run_practice":
            session.post_practice_done()
        elif kind == "present_pair":
            session.post_choice(action["pair_id"], chooser(action))
        elif kind == "present_eval_trial":
            session.post_eval_guess(action["trial_id"], guesser(action))
        else:
            raise PhaseError(f"unexpected action {kind!r}")


def replay_session(doc) -> Session:
    """Re-run a saved session's inputs from scratch (pure reconstruction)."""
    return Session.from_doc(doc)


class SessionStore:
    """One JSON document per session on disk."""

    def __init__(self, data_dir):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)

    def path(self, session_id):
        return os.path.join(self.data_dir, f"{session_id}.json")

    def save(self, session: Session) -> str:
        path = self.path(session.session_id)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(session.as_doc(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
        return path

    def load(self, session_id) -> Session:
        path = self.path(session_id)
        if not os.path.exists(path):
            raise UnknownSession(session_id)
        with open(path) as fh:
            return Session.from_doc(json.load(fh))

    def load_doc(self, session_id) -> dict:
        path = self.path(session_id)
        if not os.path.exists(path):
            raise UnknownSession(session_id)
        with open(path) as fh:
            return json.load(fh)

    def list_ids(self):
        return sorted(
            f[:-5] for f in os.listdir(self.data_dir) if f.endswith(".json")
        )
