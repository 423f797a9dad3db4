"""Synthetic participants with ideal-point preferences.

An IdealPointUser prefers values close to a fixed ideal on each
parameter axis. With temperature zero it is a deterministic argmax
chooser (ties broken by a configurable rule); with positive
temperature it picks logistically in the utility gap. These choosers
stand in for study participants so the tuning loop and the whole
protocol can be verified exhaustively and statistically.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from statistics import mean, pstdev

from .fluency import METRICS, FluencyReport, compare_phases
from .session import Session, SessionConfig, derive_seed, run_scripted_session
from .sim import HumanModel
from .values import PARAMETER_ORDER, TICKS_PER_UNIT, HandoverParams

__all__ = [
    "IdealPointUser",
    "UserResult",
    "CohortResults",
    "simulate_cohort",
    "draw_ideal",
]

TIE_BREAKS = ("incumbent", "first", "challenger")


@dataclass
class IdealPointUser:
    """Chooser with per-parameter ideal values (in ticks).

    ideal: map parameter name -> ticks
    temperature: 0 for argmax, > 0 for logistic choice noise
    tie_break: which side wins an exact utility tie at temperature 0;
        "incumbent"/"challenger" fall back to "first" on the opening
        pair, which has no incumbent yet
    discrimination: utility gap (base units) below which evaluation
        guesses are coin flips
    """

    ideal: dict
    temperature: float = 0.0
    tie_break: str = "incumbent"
    discrimination: float = 0.06
    rng: random.Random = field(default_factory=random.Random)

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {TIE_BREAKS}")

    def utility(self, parameter, ticks) -> float:
        return -abs(ticks - self.ideal[parameter]) / TICKS_PER_UNIT

    def choose_value(self, parameter, a_ticks, b_ticks, initial=False):
        """Return the preferred of two candidate ticks for one parameter."""
        ua = self.utility(parameter, a_ticks)
        ub = self.utility(parameter, b_ticks)
        if self.temperature == 0:
            if ua > ub:
                return a_ticks
            if ub > ua:
                return b_ticks
            rule = self.tie_break
            if initial and rule in ("incumbent", "challenger"):
                rule = "first"
            # post-initial pairs present (incumbent, challenger)
            if rule == "incumbent" or rule == "first":
                return a_ticks
            return b_ticks
        p_a = 1.0 / (1.0 + math.exp(-(ua - ub) / self.temperature))
        return a_ticks if self.rng.random() < p_a else b_ticks

    def choose_side(self, action) -> str:
        """Answer a present_pair action with "first" or "second"."""
        name = action["parameter"]
        first = HandoverParams.from_doc(action["first"]).get(name).ticks
        second = HandoverParams.from_doc(action["second"]).get(name).ticks
        initial = action.get("comparison_index", 2) == 1
        picked = self.choose_value(name, first, second, initial=initial)
        return "first" if picked == first else "second"

    def vector_utility(self, params: HandoverParams) -> float:
        return sum(self.utility(n, params.get(n).ticks) for n in PARAMETER_ORDER)

    def guess_side(self, action) -> str:
        """Answer a blinded evaluation trial: pick the side that feels
        more like the user's own preference, coin flip when the gap is
        below the discrimination threshold."""
        u_first = self.vector_utility(HandoverParams.from_doc(action["first"]))
        u_second = self.vector_utility(HandoverParams.from_doc(action["second"]))
        if abs(u_first - u_second) < self.discrimination:
            return self.rng.choice(("first", "second"))
        return "first" if u_first > u_second else "second"


def choose(user: IdealPointUser, pair, parameter, initial=False):
    """Functional form: pick between a ComparisonPair's two ticks."""
    return user.choose_value(parameter, pair.first, pair.second, initial=initial)


def draw_ideal(specs, rng) -> dict:
    """Uniform ideal point on each spec's half-step lattice."""
    return {s.name: rng.choice(s.half_step_lattice()) for s in specs}


@dataclass
class UserResult:
    user_index: int
    seed: int
    ideal: dict  # name -> value string
    tuned: dict
    comparisons: dict
    comparisons_total: int
    handovers_total: int
    handovers_failed: int
    eval_correct: int
    eval_total: int
    fluency_before: dict
    fluency_after: dict
    session_doc: dict

    def as_doc(self, include_session=True):
        doc = {
            "user_index": self.user_index,
            "seed": self.seed,
            "ideal": self.ideal,
            "tuned": self.tuned,
            "comparisons": self.comparisons,
            "comparisons_total": self.comparisons_total,
            "handovers_total": self.handovers_total,
            "handovers_failed": self.handovers_failed,
            "eval_correct": self.eval_correct,
            "eval_total": self.eval_total,
            "fluency_before": self.fluency_before,
            "fluency_after": self.fluency_after,
        }
        if include_session:
            doc["session"] = self.session_doc
        return doc


@dataclass
class CohortResults:
    users: list
    aggregates: dict
    fluency_comparison: dict  # metric -> before/after means, z, p

    def as_doc(self, include_sessions=False):
        return {
            "users": [u.as_doc(include_session=include_sessions) for u in self.users],
            "aggregates": self.aggregates,
            "fluency_comparison": self.fluency_comparison,
        }


def _mean_sd(xs):
    if not xs:
        return {"mean": 0.0, "sd": 0.0}
    return {"mean": mean(xs), "sd": pstdev(xs) if len(xs) > 1 else 0.0}


def _tuned_histograms(users, specs):
    hist = {}
    for spec in specs:
        counts = {}
        for u in users:
            key = u.tuned[spec.name]
            counts[key] = counts.get(key, 0) + 1
        hist[spec.name] = dict(sorted(counts.items()))
    return hist


def simulate_cohort(
    n_users,
    seed,
    config: SessionConfig = None,
    temperature=0.02,
    tie_break="incumbent",
    discrimination=0.06,
) -> CohortResults:
    """Run the full protocol for n synthetic users.

    Each user gets a seed-derived ideal point (uniform on the
    half-step lattices), a human model whose preferred handover
    location is that ideal (x, y, z), and an independent session seed.
    Deterministic for a given (n_users, seed, config).
    """
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    base = config if config is not None else SessionConfig()
    spec_map = {s.name: s for s in base.specs}
    users = []
    before_reports = []
    after_reports = []
    for idx in range(n_users):
        user_seed = derive_seed(seed, f"user{idx}")
        rng = random.Random(derive_seed(seed, f"ideal{idx}"))
        ideal = draw_ideal(base.specs, rng)
        user = IdealPointUser(
            ideal=ideal,
            temperature=temperature,
            tie_break=tie_break,
            discrimination=discrimination,
            rng=random.Random(derive_seed(seed, f"choice{idx}")),
        )
        human = HumanModel(
            reaction_base=base.human.reaction_base,
            hesitation_gain=base.human.hesitation_gain,
            preferred_location=(
                ideal["x"] / TICKS_PER_UNIT,
                ideal["y"] / TICKS_PER_UNIT,
                ideal["z"] / TICKS_PER_UNIT,
            ),
            force_ramp_rate=base.human.force_ramp_rate,
            restore_duration=base.human.restore_duration,
            noise_sd=base.human.noise_sd,
        )
        cfg = SessionConfig(
            specs=list(base.specs),
            human=human,
            failure=base.failure,
            sim=base.sim,
            criteria=base.criteria,
            seed=user_seed,
            n_practice=base.n_practice,
            eval_schedule=base.eval_schedule,
        )
        # fixed creation stamp keeps simulated documents fully reproducible
        session = Session(
            cfg,
            session_id=f"sim-{seed}-u{idx}",
            created_at="1970-01-01T00:00:00+00:00",
        )
        run_scripted_session(session, user.choose_side, user.guess_side)
        report = session.report()
        fb = report["fluency"]["practice1"]
        fa = report["fluency"]["practice2"]
        before_reports.append(
            FluencyReport(**{k: fb[k] for k in (*METRICS, "total_time")})
        )
        after_reports.append(
            FluencyReport(**{k: fa[k] for k in (*METRICS, "total_time")})
        )
        users.append(
            UserResult(
                user_index=idx,
                seed=user_seed,
                ideal={n: str(spec_map[n].value(t)) for n, t in ideal.items()},
                tuned=report["tuned"],
                comparisons=report["comparisons"]["per_parameter"],
                comparisons_total=report["comparisons"]["total"],
                handovers_total=report["handovers"]["total"],
                handovers_failed=report["handovers"]["failed"],
                eval_correct=report["evaluation"]["total_correct"],
                eval_total=len(base.eval_schedule),
                fluency_before=fb,
                fluency_after=fa,
                session_doc=session.as_doc(),
            )
        )
    comparison = compare_phases(before_reports, after_reports)
    totals = [u.comparisons_total for u in users]
    handovers = [u.handovers_total for u in users]
    failed = sum(u.handovers_failed for u in users)
    all_handovers = sum(handovers)
    per_param = {
        s.name: _mean_sd([u.comparisons[s.name] for u in users])
        for s in base.specs
    }
    aggregates = {
        "n_users": n_users,
        "seed": seed,
        "comparisons": {"per_user": _mean_sd(totals), "per_parameter": per_param},
        "handovers": {
            "per_user": _mean_sd(handovers),
            "total": all_handovers,
            "failed": failed,
            "success_rate": (all_handovers - failed) / all_handovers,
        },
        "evaluation": {
            "accuracy": _mean_sd([u.eval_correct / u.eval_total for u in users]),
        },
        "tuned_histograms": _tuned_histograms(users, base.specs),
    }
    return CohortResults(
        users=users,
        aggregates=aggregates,
        fluency_comparison=comparison.as_doc(),
    )
