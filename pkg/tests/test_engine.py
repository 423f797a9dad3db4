import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oatuner.engine import (
    AlreadyConverged,
    Converged,
    ConvergedVia,
    InconsistentChoice,
    InvalidChoice,
    NextPair,
    OATuner,
    Phase,
    PlanComplete,
    PlanError,
    SessionPlan,
    StopCriteria,
    advance_plan,
    comparison_cap,
    init_tuner,
    replay,
)
from oatuner.values import ParameterSpec, default_specs, spec_by_name

from .oracle import nearest_chooser, run_search


def ticks(pair):
    return (pair.first.ticks, pair.second.ticks)


def test_init_v_max_pair():
    _, pair = init_tuner(spec_by_name("v_max"))
    assert ticks(pair) == (1000, 8000)
    assert str(pair.first) == "0.1"
    assert str(pair.second) == "0.8"


def test_init_f_min_pair():
    _, pair = init_tuner(spec_by_name("f_min"))
    assert ticks(pair) == (130000, 230000)


def test_degenerate_span_converges_on_first_choice():
    spec = ParameterSpec(name="deg", unit="m", min_ticks=0, max_ticks=1000, step_ticks=1000)
    tuner, pair = init_tuner(spec)
    assert ticks(pair) == (0, 1000)
    result = tuner.submit_choice(pair.second)
    assert isinstance(result, Converged)
    assert result.value.ticks == 1000


def test_submit_choice_chain_v_max():
    # initial (0.1, 0.8) -> choose 0.8 -> (0.8, 0.45)
    tuner, pair = init_tuner(spec_by_name("v_max"))
    r1 = tuner.submit_choice(pair.second)
    assert isinstance(r1, NextPair)
    assert ticks(r1.pair) == (8000, 4500)
    # challenger wins: temp = 0.45, challenger = 0.8 - 0.1
    r2 = tuner.submit_choice(r1.pair.second)
    assert ticks(r2.pair) == (4500, 7000)
    # incumbent wins with option1 < option2: L moves up, challenger = L
    r3 = tuner.submit_choice(r2.pair.first)
    assert ticks(r3.pair) == (4500, 2000)
    assert tuner.L == 2000


def test_four_in_a_row_f_min():
    tuner, pair = init_tuner(spec_by_name("f_min"))
    presented = [ticks(pair)]
    result = None
    for _ in range(4):
        result = tuner.submit_choice(tuner.pending.first)
        if isinstance(result, NextPair):
            presented.append(ticks(result.pair))
    assert presented == [
        (130000, 230000),
        (130000, 180000),
        (130000, 150000),
        (130000, 170000),
    ]
    assert isinstance(result, Converged)
    assert result.value.ticks == 130000
    assert result.via == ConvergedVia.FOUR_IN_A_ROW
    assert tuner.comparisons_made == 4


def test_installing_win_counts_toward_four():
    # four identical choices total, not four wins after installation
    tuner, _ = init_tuner(spec_by_name("f_min"))
    for _ in range(3):
        r = tuner.submit_choice(tuner.pending.first)
        assert isinstance(r, NextPair)
    r = tuner.submit_choice(tuner.pending.first)
    assert isinstance(r, Converged)


def test_alternative_win_counting_flag():
    criteria = StopCriteria(count_installing_win=False)
    tuner, _ = init_tuner(spec_by_name("f_min"), criteria)
    results = []
    for _ in range(5):
        results.append(tuner.submit_choice(tuner.pending.first))
    assert all(isinstance(r, NextPair) for r in results[:4])
    assert isinstance(results[4], Converged)
    assert results[4].via == ConvergedVia.FOUR_IN_A_ROW


def test_invalid_choice():
    tuner, pair = init_tuner(spec_by_name("v_max"))
    with pytest.raises(InvalidChoice):
        tuner.submit_choice(spec_by_name("v_max").value(3000))


def test_already_converged():
    spec = ParameterSpec(name="deg", unit="m", min_ticks=0, max_ticks=1000, step_ticks=1000)
    tuner, pair = init_tuner(spec)
    tuner.submit_choice(pair.first)
    with pytest.raises(AlreadyConverged):
        tuner.submit_choice(pair.first)
    with pytest.raises(AlreadyConverged):
        tuner.report_failure()


def test_report_failure_repeats_values_with_fresh_id():
    tuner, pair = init_tuner(spec_by_name("v_max"))
    r1 = tuner.submit_choice(pair.second)
    before = ticks(r1.pair)
    made = tuner.comparisons_made
    repeat = tuner.report_failure()
    assert ticks(repeat) == before
    assert repeat.pair_id != r1.pair.pair_id
    assert tuner.comparisons_made == made
    # twice more: same values issued three times total
    repeat2 = tuner.report_failure()
    assert ticks(repeat2) == before
    assert repeat2.pair_id != repeat.pair_id
    failures = [r for r in tuner.history if r.failure]
    assert len(failures) == 2
    assert all(r.chosen is None for r in failures)


def test_cap_formula():
    assert comparison_cap(spec_by_name("v_max")) == 28
    assert comparison_cap(spec_by_name("f_min")) == 20
    spec = ParameterSpec(name="odd", unit="m", min_ticks=0, max_ticks=1001, step_ticks=400)
    # ceil(4*1001/400) = ceil(10.01) = 11
    assert comparison_cap(spec) == 11


def test_cap_fires_for_adversarial_chooser():
    spec = spec_by_name("v_max")
    criteria = StopCriteria(four_in_a_row=False)
    tuner, pair = init_tuner(spec, criteria)
    result = NextPair(pair)
    rng = random.Random(11)
    n = 0
    while isinstance(result, NextPair) and n < 1000:
        p = result.pair if isinstance(result, NextPair) else tuner.pending
        # adversarial: always pick the value farther from the current
        # challenger's side, keeping the gap alive as long as possible
        pick = p.first if rng.random() < 0.5 else p.second
        result = tuner.submit_choice(pick)
        n += 1
    assert isinstance(result, Converged)
    assert tuner.comparisons_made <= comparison_cap(spec)


def test_phase_and_state_summary():
    tuner, pair = init_tuner(spec_by_name("v_max"))
    assert tuner.phase == Phase.AWAITING_INITIAL_CHOICE
    tuner.submit_choice(pair.first)
    assert tuner.phase == Phase.AWAITING_CHOICE
    state = tuner.state_summary()
    assert state["incumbent"] == 1000
    assert state["challenger"] == 4500
    assert state["consecutive_wins"] == 1
    assert state["comparisons_made"] == 1


def test_transcript_records_state_after():
    tuner, pair = init_tuner(spec_by_name("v_max"))
    tuner.submit_choice(pair.second)
    tr = tuner.transcript()
    assert len(tr) == 1
    rec = tr[0]
    assert rec["pair_id"] == pair.pair_id
    assert rec["chosen"] == 8000
    assert rec["failure"] is False
    assert rec["state_after"]["incumbent"] == 8000


def test_result_is_last_chosen_value():
    tuner, pair = init_tuner(spec_by_name("f_min"))
    result = None
    chosen = None
    while not isinstance(result, Converged):
        chosen = tuner.pending.first
        result = tuner.submit_choice(chosen)
    assert result.value.ticks == chosen.ticks
    assert tuner.result.ticks == chosen.ticks


# -- replay ----------------------------------------------------------------


def test_replay_four_in_a_row():
    transcript, final, via = replay(
        spec_by_name("v_max"), [8000, 4500, 4500, 4500, 4500]
    )
    assert final.ticks == 4500
    assert via == ConvergedVia.FOUR_IN_A_ROW
    assert [(r["first"], r["second"]) for r in transcript] == [
        (1000, 8000),
        (8000, 4500),
        (4500, 7000),
        (4500, 2000),
        (4500, 7000),
    ]


def test_replay_empty_sequence():
    transcript, final, via = replay(spec_by_name("v_max"), [])
    assert final is None
    assert via is None
    assert len(transcript) == 1  # just the initial pair, unanswered
    assert transcript[0]["chosen"] is None


def test_replay_inconsistent_choice():
    with pytest.raises(InconsistentChoice):
        replay(spec_by_name("v_max"), [3000])


def test_replay_is_pure():
    seq = [8000, 4500, 4500, 4500, 4500]
    a = replay(spec_by_name("v_max"), seq)
    b = replay(spec_by_name("v_max"), seq)
    assert a[0] == b[0]
    assert a[1] == b[1] and a[2] == b[2]


# -- plan ------------------------------------------------------------------


def test_plan_advances_in_order_with_context():
    plan = SessionPlan(specs=default_specs())
    assert plan.current_spec.name == "v_max"
    step = advance_plan(plan, spec_by_name("v_max").value(6000))
    tuner, pair = step
    assert pair.parameter == "x"
    assert ticks(pair) == (8000, 10000)
    doc = plan.presentation_params(pair.first).as_doc()
    assert doc == {"v_max": "0.6", "x": "0.8", "y": "0", "z": "0.25", "f_min": "18"}


def test_plan_completes_with_assembled_params():
    plan = SessionPlan(specs=default_specs())
    finals = {"v_max": 2000, "x": 9000, "y": 750, "z": 2500, "f_min": 170000}
    step = None
    for name in ("v_max", "x", "y", "z", "f_min"):
        step = advance_plan(plan, spec_by_name(name).value(finals[name]))
    assert isinstance(step, PlanComplete)
    assert step.params.as_doc() == {
        "v_max": "0.2",
        "x": "0.9",
        "y": "0.075",
        "z": "0.25",
        "f_min": "17",
    }
    assert plan.complete


def test_plan_rejects_advance_past_completion():
    plan = SessionPlan(specs=default_specs())
    for name in ("v_max", "x", "y", "z", "f_min"):
        spec = spec_by_name(name)
        advance_plan(plan, spec.value(spec.min_ticks))
    with pytest.raises(PlanError):
        advance_plan(plan, spec_by_name("v_max").value(1000))


# -- oracle agreement and properties ----------------------------------------


def drive_engine(spec, decisions, criteria=None):
    """Run the engine off a list of choose-first booleans; pad by repeating
    the last decision if the search wants more comparisons."""
    tuner, pair = init_tuner(spec, criteria)
    presented = [ticks(pair)]
    result = NextPair(pair)
    i = 0
    while isinstance(result, NextPair):
        d = decisions[i] if i < len(decisions) else decisions[-1]
        p = result.pair
        result = tuner.submit_choice(p.first if d else p.second)
        if isinstance(result, NextPair):
            presented.append(ticks(result.pair))
        i += 1
    return presented, result.value.ticks, result.via.value, tuner.comparisons_made


def test_engine_matches_oracle_on_random_sequences():
    rng = random.Random(202)
    for spec in default_specs():
        for _ in range(60):
            decisions = [rng.random() < 0.5 for _ in range(64)]

            def chooser(first, second, incumbent, _d=decisions, _i=[0]):
                d = _d[_i[0]] if _i[0] < len(_d) else _d[-1]
                _i[0] += 1
                return first if d else second

            o_pairs, o_final, o_via, o_n = run_search(spec, chooser)
            e_pairs, e_final, e_via, e_n = drive_engine(spec, decisions)
            assert e_pairs == o_pairs, spec.name
            assert e_final == o_final
            assert e_via == o_via
            assert e_n == o_n


@settings(max_examples=120, deadline=None)
@given(
    spec=st.sampled_from(default_specs()),
    data=st.data(),
)
def test_invariants_hold_on_any_choice_sequence(spec, data):
    tuner, pair = init_tuner(spec)
    result = NextPair(pair)
    spans = [tuner.H - tuner.L]
    while isinstance(result, NextPair):
        p = result.pair
        # every presented value stays inside [min, max], exactly
        assert spec.contains(p.first.ticks) and spec.contains(p.second.ticks)
        assert p.first.ticks != p.second.ticks
        take_first = data.draw(st.booleans())
        before_inc = tuner.incumbent
        chosen = p.first if take_first else p.second
        result = tuner.submit_choice(chosen)
        assert tuner.L <= tuner.H
        spans.append(tuner.H - tuner.L)
        if before_inc is not None and chosen.ticks == before_inc:
            # incumbent win narrows the bounds by one step unless the
            # clamp at the opposite bound already absorbed it
            assert spans[-1] <= spans[-2]
    assert isinstance(result, Converged)
    assert tuner.comparisons_made <= tuner.cap
    # the converged value is the incumbent, which is the last chosen value
    assert result.value.ticks == tuner.incumbent


def test_ideal_point_walkthrough_converges_near_ideal():
    spec = spec_by_name("z")
    ideal = 2375  # 0.2375 m, on the half-step lattice
    chooser = nearest_chooser(ideal, ties="challenger")
    pairs, final, via, n = run_search(spec, chooser)
    assert abs(final - ideal) <= spec.step_ticks
    assert via != "cap"
