import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmpsim.core import AudioMode, DelayBudget, SoundCardProfile, blocking_delay
from nmpsim.errors import ConfigurationError, FloorViolationError, ModeMismatchError
from nmpsim.session import (
    ModeAction,
    ModeDecision,
    ServiceClass,
    SessionState,
    UserProfile,
    combined_floor,
    mode_switch_decision,
    notify_application,
    pair_blocking,
    profile_user,
    session_e2e,
    validate_ladder,
)

LADDER = (AudioMode(44100, 512), AudioMode(48000, 512), AudioMode(48000, 256))


def user(uid="A", d0=0.0, service=ServiceClass.REGULAR, floor=None, ladder=LADDER):
    return UserProfile(
        user_id=uid,
        card=SoundCardProfile(d0_ms=d0, supported_modes=ladder),
        service_class=service,
        mode_floor_index=floor,
    )


def state(mode_index=0, guard=1.0, ept=25.0):
    return SessionState(
        session_id="A->B",
        tx_user="A",
        rx_user="B",
        mode_index=mode_index,
        budget=DelayBudget(ept),
        upgrade_guard_ms=guard,
    )


@st.composite
def ladders(draw):
    """Mode ladders with strictly decreasing blocking delay."""
    n = draw(st.integers(min_value=1, max_value=5))
    modes = draw(
        st.lists(
            st.tuples(
                st.sampled_from([32000, 44100, 48000, 96000, 192000]),
                st.integers(min_value=16, max_value=4096),
            ),
            min_size=n,
            max_size=n,
            unique_by=lambda m: m[1] / m[0],
        )
    )
    modes.sort(key=lambda m: m[1] / m[0], reverse=True)
    return tuple(AudioMode(fs, fr) for fs, fr in modes)


class TestProfileUser:
    def test_reference_ladder(self):
        card = SoundCardProfile(d0_ms=0.0, supported_modes=LADDER)
        profile = profile_user(card)
        assert profile[AudioMode(44100, 512)] == pytest.approx(11.6100, abs=1e-4)
        assert profile[AudioMode(48000, 512)] == pytest.approx(10.6667, abs=1e-4)
        assert profile[AudioMode(48000, 256)] == pytest.approx(5.3333, abs=1e-4)

    def test_single_mode_with_hardware_cost(self):
        card = SoundCardProfile(d0_ms=2.0, supported_modes=(AudioMode(48000, 480),))
        assert profile_user(card) == {AudioMode(48000, 480): 12.0}

    def test_empty_ladder_rejected_at_construction(self):
        with pytest.raises(ConfigurationError):
            SoundCardProfile(d0_ms=0.0, supported_modes=())


class TestLadderValidation:
    def test_reference_ladder_is_valid(self):
        assert validate_ladder(SoundCardProfile(0.0, LADDER)) == []

    def test_increasing_blocking_flagged(self):
        bad = SoundCardProfile(0.0, (AudioMode(48000, 256), AudioMode(44100, 512)))
        issues = validate_ladder(bad)
        assert len(issues) == 1 and "blocking delay" in issues[0]


class TestSessionE2e:
    def test_reference_mode(self):
        # 2 * (512/44100 s) + 1 ms
        expected = 2 * 1000.0 * 512 / 44100 + 1.0
        assert session_e2e(state(0), 1.0, user("A"), user("B")) == pytest.approx(expected)

    def test_small_frame_mode(self):
        assert session_e2e(state(2), 10.0, user("A"), user("B")) == pytest.approx(
            2 * 1000.0 * 256 / 48000 + 10.0
        )

    def test_tiny_frame_zero_network(self):
        ladder = (AudioMode(48000, 48),)
        assert session_e2e(state(0), 0.0, user(ladder=ladder), user(ladder=ladder)) == pytest.approx(2.0)

    def test_asymmetric_hardware_constants(self):
        tx, rx = user("A", d0=0.2), user("B", d0=0.3)
        base = 2 * 1000.0 * 512 / 44100
        assert session_e2e(state(0), 1.0, tx, rx) == pytest.approx(base + 0.5 + 1.0)

    def test_mode_unsupported_by_endpoint(self):
        short = user("B", ladder=LADDER[:1])
        with pytest.raises(ModeMismatchError):
            session_e2e(state(2), 1.0, user("A"), short)


class TestCombinedFloor:
    def test_stricter_endpoint_wins(self):
        premium = user("A", service=ServiceClass.PREMIUM, floor=1)
        regular = user("B")
        assert combined_floor(premium, regular) == 1
        assert combined_floor(regular, regular) == 2

    def test_floor_is_premium_only(self):
        with pytest.raises(ConfigurationError):
            user("A", service=ServiceClass.REGULAR, floor=1)

    def test_floor_must_index_ladder(self):
        with pytest.raises(ConfigurationError):
            user("A", service=ServiceClass.PREMIUM, floor=3)


class TestModeSwitchDecision:
    def test_degrade_one_step_when_next_fits(self):
        decision = mode_switch_decision(state(0), 3.0, user("A"), user("B"))
        assert decision == ModeDecision(ModeAction.DEGRADE, 1)

    def test_degrade_second_step(self):
        decision = mode_switch_decision(state(1), 5.0, user("A"), user("B"))
        assert decision == ModeDecision(ModeAction.DEGRADE, 2)

    def test_degrade_skips_infeasible_step(self):
        # at 6 ms even the middle mode is over budget; lands on the last
        decision = mode_switch_decision(state(0), 6.0, user("A"), user("B"))
        assert decision == ModeDecision(ModeAction.DEGRADE, 2)

    def test_upgrade_with_guard(self):
        decision = mode_switch_decision(state(2, guard=1.0), 0.5, user("A"), user("B"))
        assert decision == ModeDecision(ModeAction.UPGRADE, 0)

    def test_guard_blocks_marginal_upgrade(self):
        # mode 0 fits the budget at 1.5 ms but not the guarded budget
        decision = mode_switch_decision(state(2, guard=1.0), 1.5, user("A"), user("B"))
        assert decision == ModeDecision(ModeAction.UPGRADE, 1)

    def test_best_effort_at_floor(self):
        decision = mode_switch_decision(state(2), 30.0, user("A"), user("B"))
        assert decision == ModeDecision(ModeAction.BEST_EFFORT, 2)

    def test_best_effort_respects_premium_floor(self):
        premium = user("A", service=ServiceClass.PREMIUM, floor=1)
        decision = mode_switch_decision(state(0), 10.0, premium, user("B"))
        # the last ladder mode would fit but sits below the floor
        assert decision == ModeDecision(ModeAction.BEST_EFFORT, 1)

    def test_hold_inside_budget(self):
        decision = mode_switch_decision(state(0), 1.0, user("A"), user("B"))
        assert decision == ModeDecision.hold()

    @given(
        ladder=ladders(),
        delay=st.floats(min_value=0, max_value=200, allow_nan=False),
        idx_seed=st.integers(min_value=0, max_value=4),
    )
    @settings(max_examples=300)
    def test_degrade_strictly_reduces_blocking(self, ladder, delay, idx_seed):
        tx, rx = user("A", ladder=ladder), user("B", ladder=ladder)
        current = idx_seed % len(ladder)
        decision = mode_switch_decision(state(current), delay, tx, rx)
        if decision.action is ModeAction.DEGRADE:
            card = tx.card
            assert blocking_delay(ladder[decision.new_index], card) < blocking_delay(
                ladder[current], card
            )

    @given(
        ladder=ladders(),
        delay=st.floats(min_value=0, max_value=200, allow_nan=False),
        idx_seed=st.integers(min_value=0, max_value=4),
    )
    @settings(max_examples=300)
    def test_best_effort_only_when_nothing_fits(self, ladder, delay, idx_seed):
        tx, rx = user("A", ladder=ladder), user("B", ladder=ladder)
        current = idx_seed % len(ladder)
        session = state(current)
        decision = mode_switch_decision(session, delay, tx, rx)
        if decision.action is ModeAction.BEST_EFFORT:
            floor = combined_floor(tx, rx)
            for j in range(floor + 1):  # brute-force enumeration of the ladder
                assert pair_blocking(tx, rx, j) + delay > session.budget.ept_ms

    @given(
        ladder=ladders(),
        delay=st.floats(min_value=0, max_value=200, allow_nan=False),
        idx_seed=st.integers(min_value=0, max_value=4),
        guard=st.floats(min_value=0.1, max_value=5.0, allow_nan=False),
    )
    @settings(max_examples=300)
    def test_no_mode_flap_after_upgrade(self, ladder, delay, idx_seed, guard):
        tx, rx = user("A", ladder=ladder), user("B", ladder=ladder)
        session = state(idx_seed % len(ladder), guard=guard)
        decision = mode_switch_decision(session, delay, tx, rx)
        if decision.action is not ModeAction.UPGRADE:
            return
        notify_application(session, decision, 0.0, tx, rx)
        again = mode_switch_decision(session, delay, tx, rx)
        assert again == ModeDecision.hold()


class TestNotifyApplication:
    def test_degrade_emits_record_and_mutates(self):
        session = state(0)
        record = notify_application(
            session,
            ModeDecision(ModeAction.DEGRADE, 1),
            189000.0,
            user("A"),
            user("B"),
            trigger_delay_ms=3.0,
        )
        assert session.mode_index == 1
        assert (record.old_mode, record.new_mode) == (AudioMode(44100, 512), AudioMode(48000, 512))
        assert record.at_ms == 189000.0
        assert record.effective_at_ms == 189000.0
        assert record.trigger_delay_ms == 3.0

    def test_upgrade_may_jump_steps(self):
        session = state(2)
        record = notify_application(
            session, ModeDecision(ModeAction.UPGRADE, 0), 0.0, user("A"), user("B")
        )
        assert (record.old_index, record.new_index) == (2, 0)
        assert session.mode_index == 0

    def test_switch_latency_shifts_effective_time(self):
        session = state(0)
        record = notify_application(
            session,
            ModeDecision(ModeAction.DEGRADE, 1),
            1000.0,
            user("A"),
            user("B"),
            switch_latency_ms=20.0,
        )
        assert record.effective_at_ms == 1020.0

    def test_degrade_below_floor_is_guarded(self):
        premium = user("A", service=ServiceClass.PREMIUM, floor=1)
        with pytest.raises(FloorViolationError):
            notify_application(
                state(1), ModeDecision(ModeAction.DEGRADE, 2), 0.0, premium, user("B")
            )

    def test_hold_is_rejected(self):
        with pytest.raises(ValueError):
            notify_application(state(0), ModeDecision.hold(), 0.0, user("A"), user("B"))
