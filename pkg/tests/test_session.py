"""Session orchestration tests: phases, persistence, replay."""

import json
import random

import pytest

from oatuner.engine import AlreadyConverged
from oatuner.session import (
    INTER_HANDOVER_GAP_MS,
    InvalidConfig,
    PhaseError,
    Session,
    SessionConfig,
    SessionPhase,
    SessionStore,
    StalePair,
    derive_seed,
    run_scripted_session,
)
from oatuner.sim import NO_FAILURES
from oatuner.users import IdealPointUser
from oatuner.values import (
    PARAMETER_ORDER,
    default_specs,
    near_average_defaults,
    ticks_from_decimal,
)

NO_FAIL = NO_FAILURES


def quiet_config(**kw):
    kw.setdefault("failure", NO_FAIL)
    return SessionConfig(**kw)


def make_user(seed=1, **kw):
    base = {n: near_average_defaults().get(n).ticks for n in PARAMETER_ORDER}
    base.update(kw.pop("ideal", {}))
    kw.setdefault("temperature", 0.0)
    return IdealPointUser(ideal=base, rng=random.Random(seed), **kw)


def drive_to_tuning(session):
    for _ in range(session.config.n_practice):
        action = session.next_action()
        assert action["type"] == "run_practice"
        session.post_practice_done()
    return session.next_action()


class TestLifecycle:
    def test_new_session_starts_in_practice(self):
        s = Session(quiet_config())
        assert s.phase == SessionPhase.PRACTICE1
        action = s.next_action()
        assert action["type"] == "run_practice"
        # warm-up handovers use the near-average defaults
        assert action["params"] == {
            n: str(near_average_defaults().get(n)) for n in PARAMETER_ORDER
        }

    def test_four_specs_rejected(self):
        with pytest.raises(InvalidConfig):
            SessionConfig(specs=default_specs()[:4], failure=NO_FAIL)

    def test_session_ids_distinct(self):
        a, b = Session(quiet_config()), Session(quiet_config())
        assert a.session_id != b.session_id

    def test_first_pair_varies_only_vmax(self):
        s = Session(quiet_config())
        action = drive_to_tuning(s)
        assert s.phase == SessionPhase.TUNING
        assert action["type"] == "present_pair"
        assert action["parameter"] == "v_max"
        first, second = action["first"], action["second"]
        assert (first["v_max"], second["v_max"]) == ("0.1", "0.8")
        for name in PARAMETER_ORDER[1:]:
            assert first[name] == second[name] == str(near_average_defaults().get(name))

    def test_pair_handovers_logged_before_choice(self):
        s = Session(quiet_config())
        drive_to_tuning(s)
        # both presentations already executed when the pair is issued
        tuning = [h for h in s.handovers if h["phase"] == "tuning"]
        assert len(tuning) == 2
        assert all(h["record"]["success"] for h in tuning)

    def test_phases_forward_only(self):
        s = Session(quiet_config(seed=3))
        seen = [s.phase]
        user = make_user()

        def chooser(action):
            seen.append(s.phase)
            return user.choose_side(action)

        run_scripted_session(s, chooser, user.guess_side)
        order = list(SessionPhase)
        indices = [order.index(p) for p in seen] + [order.index(s.phase)]
        assert indices == sorted(indices)
        assert s.phase == SessionPhase.COMPLETE


class TestInputValidation:
    def test_stale_pair_rejected(self):
        s = Session(quiet_config())
        action = drive_to_tuning(s)
        s.post_choice(action["pair_id"], "first")
        with pytest.raises(StalePair):
            s.post_choice(action["pair_id"], "first")

    def test_wrong_pair_id_rejected(self):
        s = Session(quiet_config())
        drive_to_tuning(s)
        with pytest.raises(StalePair):
            s.post_choice("nope", "first")

    def test_choice_during_practice_rejected(self):
        s = Session(quiet_config())
        with pytest.raises(PhaseError):
            s.post_choice("any", "first")

    def test_eval_guess_during_tuning_rejected(self):
        s = Session(quiet_config())
        drive_to_tuning(s)
        with pytest.raises(PhaseError):
            s.post_eval_guess("any", "first")

    def test_practice_done_during_tuning_rejected(self):
        s = Session(quiet_config())
        drive_to_tuning(s)
        with pytest.raises(PhaseError):
            s.post_practice_done()


class TestFailures:
    def test_reported_failure_represents_same_values(self):
        s = Session(quiet_config())
        action = drive_to_tuning(s)
        n_handovers = len(s.handovers)
        s.post_failure(action["pair_id"])
        redo = s.next_action()
        assert redo["pair_id"] != action["pair_id"]
        assert redo["first"] == action["first"]
        assert redo["second"] == action["second"]
        assert redo["comparison_index"] == action["comparison_index"]
        # the repeat runs two more handovers
        assert len(s.handovers) == n_handovers + 2
        with pytest.raises(StalePair):
            s.post_choice(action["pair_id"], "first")

    def test_practice_failure_counts_toward_quota(self):
        # seed 104 makes the very first warm-up handover fail
        s = Session(SessionConfig(seed=104))
        s.post_practice_done()
        assert not s.handovers[0]["record"]["success"]
        user = make_user()
        run_scripted_session(s, user.choose_side, user.guess_side)
        rep = s.report()
        assert rep["complete"]
        practice1 = [h for h in s.handovers if h["phase"] == "practice1"]
        assert len(practice1) == s.config.n_practice

    def test_injected_tuning_failure_auto_repeats(self):
        # seed 5 injects one failure into a tuning presentation
        s = Session(SessionConfig(seed=5))
        user = make_user(ideal={"v_max": 2500, "x": 9250})
        run_scripted_session(s, user.choose_side, user.guess_side)
        rep = s.report()
        repeats = sum(1 for r in s.transcript() if r["failure"])
        assert repeats == 1
        assert rep["handovers"]["total"] == 20 + 2 * (
            rep["comparisons"]["total"] + repeats
        )


class TestClockAndSeeds:
    def test_offsets_strictly_increasing(self):
        s = Session(quiet_config(seed=9))
        user = make_user(seed=2)
        run_scripted_session(s, user.choose_side, user.guess_side)
        offsets = [h["offset_ms"] for h in s.handovers]
        assert offsets == sorted(offsets)
        assert len(set(offsets)) == len(offsets)
        gaps = [b - a for a, b in zip(offsets, offsets[1:])]
        assert all(g >= INTER_HANDOVER_GAP_MS for g in gaps)

    def test_handover_seeds_derived_from_sequence(self):
        s = Session(quiet_config(seed=9))
        drive_to_tuning(s)
        for h in s.handovers:
            assert h["seed"] == derive_seed(9, "h%d" % h["seq"])


class TestReportAndPersistence:
    def test_report_incomplete_mid_tuning(self):
        s = Session(quiet_config())
        drive_to_tuning(s)
        rep = s.report()
        assert rep["complete"] is False
        assert rep["tuned"] is None
        assert rep["phase"] == "tuning"

    def test_completed_report_shape(self):
        s = Session(quiet_config(seed=4))
        user = make_user(seed=3)
        run_scripted_session(s, user.choose_side, user.guess_side)
        rep = s.report()
        assert rep["complete"] is True
        assert set(rep["tuned"]) == set(PARAMETER_ORDER)
        assert rep["handovers"]["success_rate"] == 1.0
        assert rep["fluency"]["delta"] is not None
        assert set(rep["evaluation"]["per_parameter"]) == set(PARAMETER_ORDER)

    def test_crash_safe_reload_mid_tuning(self, tmp_path):
        store = SessionStore(tmp_path)
        s = Session(quiet_config(seed=6))
        action = drive_to_tuning(s)
        s.post_choice(action["pair_id"], "second")
        store.save(s)
        loaded = store.load(s.session_id)
        assert loaded.next_action() == s.next_action()
        assert loaded.clock_ms == s.clock_ms
        assert loaded.handovers == s.handovers

    def test_replay_byte_identical(self):
        # noisy chooser: replay must come from logged inputs, not the policy
        s = Session(SessionConfig(seed=5))
        user = make_user(seed=8, temperature=0.05)
        run_scripted_session(s, user.choose_side, user.guess_side)
        doc = s.as_doc()
        twin = Session.from_doc(doc)
        canon = lambda obj: json.dumps(obj, sort_keys=True)
        assert canon(twin.as_doc()) == canon(doc)
        assert canon(twin.transcript()) == canon(s.transcript())
        assert canon(twin.report()) == canon(s.report())

    def test_store_roundtrip_and_listing(self, tmp_path):
        store = SessionStore(tmp_path)
        ids = []
        for seed in (1, 2):
            s = Session(quiet_config(seed=seed))
            user = make_user(seed=seed)
            run_scripted_session(s, user.choose_side, user.guess_side)
            store.save(s)
            ids.append(s.session_id)
        assert sorted(store.list_ids()) == sorted(ids)
        doc = store.load_doc(ids[0])
        assert doc["schema_version"] == 1
        assert store.load(ids[0]).as_doc() == doc


class TestScriptedRuns:
    def test_scripted_session_completes(self):
        s = Session(quiet_config(seed=7))
        user = make_user(
            seed=4,
            ideal={"v_max": 2500, "x": 9000, "y": -500, "z": 2500, "f_min": 170000},
            tie_break="challenger",
        )
        run_scripted_session(s, user.choose_side, user.guess_side)
        rep = s.report()
        tuned = rep["tuned"]
        specs = {spec.name: spec for spec in default_specs()}
        ideals = {
            "v_max": 2500, "x": 9000, "y": -500, "z": 2500, "f_min": 170000,
        }
        for name, text in tuned.items():
            spec = specs[name]
            got = ticks_from_decimal(text)
            assert abs(got - ideals[name]) <= spec.step_ticks

    def test_post_choice_after_completion_rejected(self):
        s = Session(quiet_config(seed=2))
        user = make_user(seed=5)
        run_scripted_session(s, user.choose_side, user.guess_side)
        with pytest.raises(PhaseError):
            s.post_choice("any", "first")
        with pytest.raises((PhaseError, AlreadyConverged)):
            s.post_practice_done()
