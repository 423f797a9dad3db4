import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oatuner.users import CohortResults, IdealPointUser, draw_ideal, simulate_cohort
from oatuner.values import PARAMETER_ORDER, default_specs, near_average_defaults


def user_with(ideal_v_max=6000, **kwargs):
    ideal = {n: near_average_defaults().get(n).ticks for n in PARAMETER_ORDER}
    ideal["v_max"] = ideal_v_max
    return IdealPointUser(ideal=ideal, **kwargs)


def test_choose_nearer_value():
    u = user_with(6000, temperature=0.0)
    assert u.choose_value("v_max", 4500, 7000) == 7000
    assert u.choose_value("v_max", 5500, 7000) == 5500


def test_choose_tie_keeps_incumbent():
    u = user_with(6000, temperature=0.0, tie_break="incumbent")
    # distances both 1000; first value is the incumbent side
    assert u.choose_value("v_max", 5000, 7000) == 5000
    u2 = user_with(6000, temperature=0.0, tie_break="challenger")
    assert u2.choose_value("v_max", 5000, 7000) == 7000


def test_choose_tie_on_opening_pair_falls_back_to_first():
    u = user_with(6000, temperature=0.0, tie_break="incumbent")
    assert u.choose_value("v_max", 5000, 7000, initial=True) == 5000


def test_invalid_construction():
    with pytest.raises(ValueError):
        user_with(6000, temperature=-0.1)
    with pytest.raises(ValueError):
        user_with(6000, tie_break="coin")


def test_logistic_probability_matches_fixture():
    # utility gap 0.1 at temperature 0.1: P(first) = 1/(1+e^-1) = 0.7311
    u = user_with(6000, temperature=0.1, rng=random.Random(77))
    n = 20000
    first = sum(
        1 for _ in range(n) if u.choose_value("v_max", 6000, 7000) == 6000
    )
    assert first / n == pytest.approx(0.7311, abs=0.01)


def test_logistic_both_sides_reachable():
    u = user_with(6000, temperature=0.05, rng=random.Random(3))
    picks = {u.choose_value("v_max", 5800, 6100) for _ in range(200)}
    assert picks == {5800, 6100}


@settings(max_examples=200, deadline=None)
@given(
    a=st.integers(min_value=1000, max_value=8000),
    b=st.integers(min_value=1000, max_value=8000),
    c=st.integers(min_value=1000, max_value=8000),
    ideal=st.integers(min_value=1000, max_value=8000),
)
def test_deterministic_choices_transitive(a, b, c, ideal):
    u = user_with(ideal, temperature=0.0, tie_break="first")
    if u.choose_value("v_max", a, b) == a and u.choose_value("v_max", b, c) == b:
        assert u.choose_value("v_max", a, c) == a


def test_guess_side_prefers_own_vector():
    u = user_with(6000, temperature=0.0, discrimination=0.01)
    tuned = near_average_defaults().with_value(
        "v_max", default_specs()[0].value(6000)
    )
    other = tuned.with_value("v_max", default_specs()[0].value(4000))
    action = {"first": tuned.as_doc(), "second": other.as_doc()}
    assert u.guess_side(action) == "first"
    action = {"first": other.as_doc(), "second": tuned.as_doc()}
    assert u.guess_side(action) == "second"


def test_guess_below_discrimination_is_a_coin_flip():
    tuned = near_average_defaults()
    spec_x = default_specs()[1]
    nearby = tuned.with_value("x", spec_x.value(tuned.get("x").ticks + 250))
    action = {"first": tuned.as_doc(), "second": nearby.as_doc()}
    guesses = set()
    for seed in range(40):
        u = IdealPointUser(
            ideal={n: tuned.get(n).ticks for n in PARAMETER_ORDER},
            discrimination=0.06,
            rng=random.Random(seed),
        )
        guesses.add(u.guess_side(action))
    assert guesses == {"first", "second"}


def test_draw_ideal_on_half_step_lattice():
    rng = random.Random(0)
    for _ in range(50):
        ideal = draw_ideal(default_specs(), rng)
        for spec in default_specs():
            assert ideal[spec.name] in spec.half_step_lattice()


def test_single_user_cohort_tunes_near_ideal():
    results = simulate_cohort(1, seed=100, temperature=0.0)
    user = results.users[0]
    spec = default_specs()[0]
    ideal_ticks = round(float(user.ideal["v_max"]) * 10000)
    tuned_ticks = round(float(user.tuned["v_max"]) * 10000)
    assert abs(tuned_ticks - ideal_ticks) <= spec.step_ticks


def test_cohort_handover_identity_and_shapes():
    results = simulate_cohort(4, seed=11)
    assert isinstance(results, CohortResults)
    assert len(results.users) == 4
    for user in results.users:
        repeats = sum(
            1 for r in user.session_doc["transcript"] if r["failure"]
        )
        assert user.handovers_total == 20 + 2 * (user.comparisons_total + repeats)
        assert set(user.comparisons) == set(PARAMETER_ORDER)
        assert 0 <= user.eval_correct <= user.eval_total == 5
    agg = results.aggregates
    assert agg["n_users"] == 4
    assert 0.0 <= agg["handovers"]["success_rate"] <= 1.0
    assert set(results.fluency_comparison) == {"r_idle", "h_idle", "c_act", "f_del"}


def test_cohort_preferred_location_is_ideal_xyz():
    results = simulate_cohort(2, seed=19)
    for user in results.users:
        loc = user.session_doc["config"]["human"]["preferred_location"]
        expected = [
            float(user.ideal["x"]),
            float(user.ideal["y"]),
            float(user.ideal["z"]),
        ]
        assert loc == pytest.approx(expected)


def test_cohort_deterministic():
    a = simulate_cohort(3, seed=5).as_doc(include_sessions=True)
    b = simulate_cohort(3, seed=5).as_doc(include_sessions=True)
    assert a == b


def test_cohort_histograms_cover_multiple_bins():
    results = simulate_cohort(12, seed=21)
    hist = results.aggregates["tuned_histograms"]
    # no collapse to a single value across users
    assert any(len(bins) >= 3 for bins in hist.values())
    for name, bins in hist.items():
        assert sum(bins.values()) == 12
