"""The Optometrist's Algorithm as an incremental, replayable state machine.

One OATuner narrows a single parameter by repeated A/B choices, like an
optometrist swapping lenses. The search keeps an incumbent (the value
chosen last) and a challenger generated from the shrinking bounds
[L, H]. An incumbent win moves the bound on the challenger's side
inward by one step and flips which side the next challenger comes
from; a challenger win makes it the new incumbent, with the old
incumbent's neighbour (one step toward the loser) as the next
challenger.

Tuning stops for one parameter when:
  * step threshold: incumbent and challenger are closer than one step
    (equality after clamping included), or
  * four in a row: the same value has won four consecutive
    comparisons, or
  * cap: a hard comparison budget of ceil(4 * (max - min) / step).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .values import (
    HandoverParams,
    ParameterSpec,
    ParameterValue,
    default_specs,
    midpoint,
    near_average_defaults,
)

__all__ = [
    "StopCriteria",
    "Phase",
    "ConvergedVia",
    "ComparisonPair",
    "ChoiceRecord",
    "NextPair",
    "Converged",
    "OATuner",
    "SessionPlan",
    "PlanComplete",
    "comparison_cap",
    "init_tuner",
    "submit_choice",
    "report_failure",
    "advance_plan",
    "replay",
    "InvalidChoice",
    "AlreadyConverged",
    "InconsistentChoice",
    "PlanError",
]


class InvalidChoice(ValueError):
    """The submitted value is not one of the two presented options."""


class AlreadyConverged(RuntimeError):
    pass


class InconsistentChoice(ValueError):
    """A replayed choice does not match the pair the engine presented."""


class PlanError(RuntimeError):
    pass


class Phase(str, enum.Enum):
    AWAITING_INITIAL_CHOICE = "awaiting_initial_choice"
    AWAITING_CHOICE = "awaiting_choice"
    CONVERGED = "converged"


class ConvergedVia(str, enum.Enum):
    STEP_THRESHOLD = "step_threshold"
    FOUR_IN_A_ROW = "four_in_a_row"
    CAP = "cap"


@dataclass(frozen=True)
class StopCriteria:
    """Configuration of the auxiliary stopping rules.

    count_installing_win decides whether the choice that made a value
    incumbent counts toward "chosen four times in a row". The default
    counts it, so four consecutive identical choices stop the search.
    """

    four_in_a_row: bool = True
    cap: bool = True
    count_installing_win: bool = True


@dataclass(frozen=True)
class ComparisonPair:
    pair_id: str
    parameter: str
    first: ParameterValue
    second: ParameterValue

    def values(self):
        return (self.first.ticks, self.second.ticks)


@dataclass
class ChoiceRecord:
    pair_id: str
    parameter: str
    first: int
    second: int
    chosen: Optional[int]  # None when the handover pair failed
    failure: bool
    state_after: dict


@dataclass(frozen=True)
class NextPair:
    pair: ComparisonPair


@dataclass(frozen=True)
class Converged:
    value: ParameterValue
    via: ConvergedVia


def comparison_cap(spec: ParameterSpec) -> int:
    span = spec.max_ticks - spec.min_ticks
    return -(-4 * span // spec.step_ticks)  # ceil


class OATuner:
    """Interactive comparison search over one ParameterSpec.

    The tuner presents pairs; the caller answers each with
    submit_choice (or report_failure to repeat a pair after a failed
    handover). All values are exact ticks internally.
    """

    def __init__(self, spec: ParameterSpec, criteria: StopCriteria = None):
        self.spec = spec
        self.criteria = criteria if criteria is not None else StopCriteria()
        self.L = spec.min_ticks
        self.H = spec.max_ticks
        self.incumbent: Optional[int] = None
        self.challenger: Optional[int] = None
        self.consecutive_wins = 0
        self.comparisons_made = 0
        self.phase = Phase.AWAITING_INITIAL_CHOICE
        self.converged_via: Optional[ConvergedVia] = None
        self.history: list[ChoiceRecord] = []
        self.cap = comparison_cap(spec)
        self._pairs_issued = 0
        self.pending: Optional[ComparisonPair] = self._issue(self.L, self.H)

    # -- pair plumbing -------------------------------------------------

    def _issue(self, first_ticks, second_ticks) -> ComparisonPair:
        self._pairs_issued += 1
        pair = ComparisonPair(
            pair_id=f"{self.spec.name}-p{self._pairs_issued}",
            parameter=self.spec.name,
            first=self.spec.value(first_ticks),
            second=self.spec.value(second_ticks),
        )
        return pair

    def state_summary(self) -> dict:
        return {
            "L": self.L,
            "H": self.H,
            "incumbent": self.incumbent,
            "challenger": self.challenger,
            "consecutive_wins": self.consecutive_wins,
            "comparisons_made": self.comparisons_made,
            "phase": self.phase.value,
            "converged_via": self.converged_via.value if self.converged_via else None,
        }

    def _record(self, pair, chosen, failure):
        self.history.append(
            ChoiceRecord(
                pair_id=pair.pair_id,
                parameter=pair.parameter,
                first=pair.first.ticks,
                second=pair.second.ticks,
                chosen=chosen,
                failure=failure,
                state_after=self.state_summary(),
            )
        )

    # -- the algorithm -------------------------------------------------

    def submit_choice(self, chosen):
        """Process one answered comparison and return NextPair or Converged.

        chosen may be a ParameterValue or a raw tick count; it must be
        one of the two pending values.
        """
        if self.phase == Phase.CONVERGED:
            raise AlreadyConverged(f"{self.spec.name} already converged")
        chosen_ticks = chosen.ticks if isinstance(chosen, ParameterValue) else chosen
        pair = self.pending
        if chosen_ticks not in pair.values():
            raise InvalidChoice(
                f"{chosen_ticks} not in pair ({pair.first.ticks}, {pair.second.ticks})"
            )
        s = self.spec.step_ticks
        self.comparisons_made += 1
        if self.phase == Phase.AWAITING_INITIAL_CHOICE:
            self.incumbent = chosen_ticks
            self.challenger = midpoint(self.spec).ticks
            self.consecutive_wins = 1 if self.criteria.count_installing_win else 0
            self.phase = Phase.AWAITING_CHOICE
        elif chosen_ticks == self.incumbent:
            self.consecutive_wins += 1
            if self.incumbent > self.challenger:
                self.H = max(self.H - s, self.L)
                self.challenger = self.H
            else:
                self.L = min(self.L + s, self.H)
                self.challenger = self.L
        else:
            new_challenger = (
                self.incumbent - s
                if self.incumbent > self.challenger
                else self.incumbent + s
            )
            self.incumbent = chosen_ticks
            self.challenger = new_challenger
            self.consecutive_wins = 1 if self.criteria.count_installing_win else 0
        # challenger must stay inside the shrunken bounds
        self.challenger = min(max(self.challenger, self.L), self.H)

        result = self._check_converged()
        if result is not None:
            self.pending = None
            self._record(pair, chosen_ticks, failure=False)
            return result
        self.pending = self._issue(self.incumbent, self.challenger)
        self._record(pair, chosen_ticks, failure=False)
        return NextPair(self.pending)

    def _check_converged(self):
        # order matters for converged_via attribution
        gap = abs(self.incumbent - self.challenger)
        via = None
        if gap < self.spec.step_ticks or self.challenger == self.incumbent:
            via = ConvergedVia.STEP_THRESHOLD
        elif self.criteria.four_in_a_row and self.consecutive_wins >= 4:
            via = ConvergedVia.FOUR_IN_A_ROW
        elif self.criteria.cap and self.comparisons_made >= self.cap:
            via = ConvergedVia.CAP
        if via is None:
            return None
        self.phase = Phase.CONVERGED
        self.converged_via = via
        return Converged(self.spec.value(self.incumbent), via)

    def report_failure(self) -> ComparisonPair:
        """Re-issue the pending pair after a failed handover.

        The comparison was never answered, so comparisons_made is
        untouched; only the pair_id is fresh.
        """
        if self.phase == Phase.CONVERGED:
            raise AlreadyConverged(f"{self.spec.name} already converged")
        old = self.pending
        self.pending = self._issue(old.first.ticks, old.second.ticks)
        self._record(old, chosen=None, failure=True)
        return self.pending

    @property
    def result(self) -> Optional[ParameterValue]:
        if self.phase != Phase.CONVERGED:
            return None
        return self.spec.value(self.incumbent)

    def transcript(self):
        """Serializable choice history (no wall-clock timestamps)."""
        return [
            {
                "pair_id": r.pair_id,
                "parameter": r.parameter,
                "first": r.first,
                "second": r.second,
                "chosen": r.chosen,
                "failure": r.failure,
                "state_after": r.state_after,
            }
            for r in self.history
        ]


# -- spec-style operation wrappers --------------------------------------


def init_tuner(spec, criteria=None):
    tuner = OATuner(spec, criteria)
    return tuner, tuner.pending


def submit_choice(tuner: OATuner, chosen):
    return tuner.submit_choice(chosen)


def report_failure(tuner: OATuner):
    return tuner.report_failure()


# -- sequential multi-parameter plan -------------------------------------


@dataclass(frozen=True)
class PlanComplete:
    params: HandoverParams


@dataclass
class SessionPlan:
    """Tunes the five parameters one after another.

    While parameter k is being tuned, presented vectors carry already
    tuned values for parameters before k and near-average defaults for
    the rest.
    """

    specs: list = field(default_factory=default_specs)
    tuned: dict = field(default_factory=dict)
    current_index: int = 0

    @property
    def current_spec(self) -> ParameterSpec:
        if self.current_index >= len(self.specs):
            raise PlanError("plan already complete")
        return self.specs[self.current_index]

    @property
    def complete(self) -> bool:
        return self.current_index >= len(self.specs)

    def presentation_params(self, value: ParameterValue) -> HandoverParams:
        """Full vector shown for one candidate value of the current parameter."""
        base = near_average_defaults()
        for name, ticks in self.tuned.items():
            spec = next(s for s in self.specs if s.name == name)
            base = base.with_value(name, spec.value(ticks))
        return base.with_value(self.current_spec.name, value)

    def assemble(self) -> HandoverParams:
        if not self.complete:
            raise PlanError("not all parameters tuned")
        base = near_average_defaults()
        for name, ticks in self.tuned.items():
            spec = next(s for s in self.specs if s.name == name)
            base = base.with_value(name, spec.value(ticks))
        return base


def advance_plan(plan: SessionPlan, finished_value, criteria=None):
    """Record a converged value and start the next parameter's tuner.

    Returns (tuner, first_pair) for the next parameter, or
    PlanComplete(HandoverParams) when all five are tuned.
    """
    if plan.complete:
        raise PlanError("plan already complete")
    ticks = (
        finished_value.ticks
        if isinstance(finished_value, ParameterValue)
        else finished_value
    )
    spec = plan.current_spec
    if not spec.contains(ticks):
        raise PlanError(f"{spec.name}: finished value {ticks} out of range")
    plan.tuned[spec.name] = ticks
    plan.current_index += 1
    if plan.complete:
        return PlanComplete(plan.assemble())
    return init_tuner(plan.current_spec, criteria)


def replay(spec: ParameterSpec, choice_sequence, criteria=None):
    """Run a choice sequence through a fresh tuner.

    Pure function of its inputs. Returns (transcript, final_value,
    converged_via); final_value and converged_via are None when the
    sequence ends before convergence. Raises InconsistentChoice when a
    choice does not match the presented pair, and AlreadyConverged when
    choices continue past convergence.
    """
    tuner, pair = init_tuner(spec, criteria)
    final = None
    via = None
    for raw in choice_sequence:
        if tuner.phase == Phase.CONVERGED:
            raise AlreadyConverged("choices continue past convergence")
        ticks = raw.ticks if isinstance(raw, ParameterValue) else raw
        if ticks not in tuner.pending.values():
            raise InconsistentChoice(
                f"{ticks} not in pair {tuner.pending.values()}"
            )
        result = tuner.submit_choice(ticks)
        if isinstance(result, Converged):
            final = result.value
            via = result.via
    records = tuner.transcript()
    if tuner.pending is not None:
        # sequence stopped short: expose the still-open pair
        p = tuner.pending
        records.append(
            {
                "pair_id": p.pair_id,
                "parameter": p.parameter,
                "first": p.first.ticks,
                "second": p.second.ticks,
                "chosen": None,
                "failure": False,
                "state_after": tuner.state_summary(),
            }
        )
    return records, final, via
