"""Blinded identification trials against perturbed twins.

After tuning, the participant sees their own handover next to a copy
whose single parameter was nudged by one or two steps, and must say
which one is theirs. Five trials, one per parameter by default.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .values import HandoverParams, ParameterSpec

__all__ = [
    "EVAL_SCHEDULE",
    "SIDES",
    "EvaluationTrial",
    "EvaluationScore",
    "ImpossiblePerturbation",
    "MissingGuess",
    "make_trials",
    "score",
]

# trial order: one perturbation per parameter
EVAL_SCHEDULE = ("v_max", "f_min", "x", "y", "z")
SIDES = ("first", "second")


class ImpossiblePerturbation(ValueError):
    pass


class MissingGuess(ValueError):
    pass


@dataclass
class EvaluationTrial:
    trial_id: str
    tuned: HandoverParams
    perturbed: HandoverParams
    varied_parameter: str
    magnitude_steps: int
    presentation_order: str  # which side shows the tuned params
    guess: Optional[str] = None
    correct: Optional[bool] = None

    def presented(self):
        """(first, second) full parameter vectors as shown, blinded."""
        if self.presentation_order == "first":
            return self.tuned, self.perturbed
        return self.perturbed, self.tuned

    def as_doc(self):
        return {
            "trial_id": self.trial_id,
            "tuned": self.tuned.as_doc(),
            "perturbed": self.perturbed.as_doc(),
            "varied_parameter": self.varied_parameter,
            "magnitude_steps": self.magnitude_steps,
            "presentation_order": self.presentation_order,
            "guess": self.guess,
            "correct": self.correct,
        }

    @classmethod
    def from_doc(cls, doc):
        return cls(
            trial_id=doc["trial_id"],
            tuned=HandoverParams.from_doc(doc["tuned"]),
            perturbed=HandoverParams.from_doc(doc["perturbed"]),
            varied_parameter=doc["varied_parameter"],
            magnitude_steps=doc["magnitude_steps"],
            presentation_order=doc["presentation_order"],
            guess=doc["guess"],
            correct=doc["correct"],
        )


@dataclass
class EvaluationScore:
    total_correct: int
    per_parameter: dict

    def as_doc(self):
        return {
            "total_correct": self.total_correct,
            "per_parameter": dict(self.per_parameter),
        }


def _perturb(spec: ParameterSpec, ticks: int, sign: int, magnitude: int) -> int:
    candidate = ticks + sign * magnitude * spec.step_ticks
    if not spec.contains(candidate):
        # range edge: push the other way instead
        candidate = ticks - sign * magnitude * spec.step_ticks
    if not spec.contains(candidate) or candidate == ticks:
        raise ImpossiblePerturbation(
            f"{spec.name}: no {magnitude}-step move from {ticks} fits the range"
        )
    return candidate


def make_trials(tuned: HandoverParams, specs, seed, schedule=EVAL_SCHEDULE):
    """Build the five blinded trials for one tuned vector.

    Sign, magnitude (1 or 2 steps), and presentation side come from the
    seed; a perturbation that would leave the range is flipped in
    direction.
    """
    by_name = {s.name: s for s in specs}
    rng = random.Random(seed)
    trials = []
    for i, name in enumerate(schedule, start=1):
        spec = by_name[name]
        sign = rng.choice((1, -1))
        magnitude = rng.choice((1, 2))
        side = rng.choice(SIDES)
        value = tuned.get(name).ticks
        perturbed_ticks = _perturb(spec, value, sign, magnitude)
        perturbed = tuned.with_value(name, spec.value(perturbed_ticks))
        trials.append(
            EvaluationTrial(
                trial_id=f"eval-{i}",
                tuned=tuned,
                perturbed=perturbed,
                varied_parameter=name,
                magnitude_steps=magnitude,
                presentation_order=side,
            )
        )
    return trials


def score(trials) -> EvaluationScore:
    """Mark guesses against the blinded sides and aggregate."""
    per_param = {}
    total = 0
    for trial in trials:
        if trial.guess is None:
            raise MissingGuess(trial.trial_id)
        correct = trial.guess == trial.presentation_order
        trial.correct = correct
        total += int(correct)
        per_param.setdefault(trial.varied_parameter, []).append(int(correct))
    return EvaluationScore(
        total_correct=total,
        per_parameter={k: sum(v) / len(v) for k, v in per_param.items()},
    )
