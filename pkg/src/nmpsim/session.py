"""Session service: user profiles, classification and mode switching.

Each user is profiled once per supported audio mode and classified as
premium or regular. When even the best available path leaves the
end-to-end delay over budget at the current mode, the session degrades
to the nearest lower ladder step that fits; when the network recovers
it upgrades straight back to the best mode that fits with a guard
margin. If nothing at or above the user's quality floor fits, the
session holds the floor mode and runs best effort.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import AudioMode, DelayBudget, SoundCardProfile, blocking_delay
from .errors import ConfigurationError, FloorViolationError, ModeMismatchError

#: Default extra margin an upgrade must leave under the budget, so the
#: mode does not flap when delay hovers at the threshold.
DEFAULT_UPGRADE_GUARD_MS = 1.0


class ServiceClass(enum.Enum):
    PREMIUM = "premium"
    REGULAR = "regular"


@dataclass(frozen=True, slots=True)
class UserProfile:
    """A registered user: sound card, class and quality floor.

    ``mode_floor_index`` is the lowest ladder position the user accepts.
    Regular users always accept the whole ladder; premium users may pin
    the floor higher.
    """

    user_id: str
    card: SoundCardProfile
    service_class: ServiceClass
    mode_floor_index: int | None = None

    def __post_init__(self) -> None:
        floor = self.mode_floor_index
        if floor is not None:
            if self.service_class is not ServiceClass.PREMIUM:
                raise ConfigurationError(
                    f"user {self.user_id}: mode_floor_index is premium-only"
                )
            if not 0 <= floor < len(self.card.supported_modes):
                raise ConfigurationError(
                    f"user {self.user_id}: mode_floor_index {floor} outside ladder"
                )

    @property
    def floor_index(self) -> int:
        """Effective floor: configured for premium, ladder end otherwise."""
        if self.mode_floor_index is not None:
            return self.mode_floor_index
        return len(self.card.supported_modes) - 1


@dataclass(slots=True)
class SessionState:
    """One transmitter-to-receiver flow and its mode ladder position."""

    session_id: str
    tx_user: str
    rx_user: str
    mode_index: int
    budget: DelayBudget
    upgrade_guard_ms: float = DEFAULT_UPGRADE_GUARD_MS
    best_effort: bool = False


class ModeAction(enum.Enum):
    HOLD = "hold"
    DEGRADE = "degrade"
    UPGRADE = "upgrade"
    BEST_EFFORT = "best-effort"


@dataclass(frozen=True, slots=True)
class ModeDecision:
    action: ModeAction
    new_index: int | None = None

    @classmethod
    def hold(cls) -> "ModeDecision":
        return cls(ModeAction.HOLD)


@dataclass(frozen=True, slots=True)
class ModeChangeRecord:
    """An applied mode switch; the engine turns this into a trace row."""

    at_ms: float
    effective_at_ms: float
    old_index: int
    new_index: int
    old_mode: AudioMode
    new_mode: AudioMode
    trigger_delay_ms: float


def profile_user(card: SoundCardProfile) -> dict[AudioMode, float]:
    """Blocking delay of every supported mode, keyed by mode."""
    return {mode: blocking_delay(mode, card) for mode in card.supported_modes}


def validate_ladder(card: SoundCardProfile) -> list[str]:
    """Violations of the ladder ordering rule.

    Blocking delay must strictly decrease down the ladder, otherwise a
    degrade step could not reduce processing latency.
    """
    violations = []
    delays = [blocking_delay(mode, card) for mode in card.supported_modes]
    for i in range(1, len(delays)):
        if delays[i] >= delays[i - 1]:
            violations.append(
                f"ladder entry {i} ({card.supported_modes[i]}) does not reduce "
                f"blocking delay ({delays[i]:.4f} ms >= {delays[i - 1]:.4f} ms)"
            )
    return violations


def _endpoint_blocking(profile: UserProfile, mode_index: int) -> float:
    modes = profile.card.supported_modes
    if not 0 <= mode_index < len(modes):
        raise ModeMismatchError(
            f"user {profile.user_id} does not support mode index {mode_index}"
        )
    return blocking_delay(modes[mode_index], profile.card)


def pair_blocking(tx: UserProfile, rx: UserProfile, mode_index: int) -> float:
    """Summed blocking delay of both endpoints at a ladder position."""
    return _endpoint_blocking(tx, mode_index) + _endpoint_blocking(rx, mode_index)


def session_e2e(
    session: SessionState,
    network_delay_ms: float,
    tx_profile: UserProfile,
    rx_profile: UserProfile,
) -> float:
    """End-to-end delay of the session at its current mode."""
    return pair_blocking(tx_profile, rx_profile, session.mode_index) + network_delay_ms


def combined_floor(tx_profile: UserProfile, rx_profile: UserProfile) -> int:
    """Floor of the stricter endpoint (the smaller index wins)."""
    return min(tx_profile.floor_index, rx_profile.floor_index)


def mode_switch_decision(
    session: SessionState,
    best_path_delay_ms: float,
    tx_profile: UserProfile,
    rx_profile: UserProfile,
) -> ModeDecision:
    """Degrade, upgrade, hold or go best-effort at the current network state.

    ``best_path_delay_ms`` must be the minimum estimate over the
    session's candidate paths: when even that leaves the current mode
    over budget, every path is congested and only the ladder can help.
    """
    ept = session.budget.ept_ms
    floor = combined_floor(tx_profile, rx_profile)
    current = session.mode_index

    def e2e_at(index: int) -> float:
        return pair_blocking(tx_profile, rx_profile, index) + best_path_delay_ms

    if e2e_at(current) <= ept:
        headroom = ept - session.upgrade_guard_ms
        for j in range(current):
            if e2e_at(j) <= headroom:
                return ModeDecision(ModeAction.UPGRADE, j)
        return ModeDecision.hold()

    for j in range(current + 1, floor + 1):
        if e2e_at(j) <= ept:
            return ModeDecision(ModeAction.DEGRADE, j)
    return ModeDecision(ModeAction.BEST_EFFORT, floor)


def notify_application(
    session: SessionState,
    decision: ModeDecision,
    t_ms: float,
    tx_profile: UserProfile,
    rx_profile: UserProfile,
    trigger_delay_ms: float = 0.0,
    switch_latency_ms: float = 0.0,
) -> ModeChangeRecord:
    """Apply a mode-changing decision to the session state.

    Returns the change record carrying the old and new mode. The new
    mode is effective at ``t_ms + switch_latency_ms`` (zero by default,
    modeling instantaneous reconfiguration).
    """
    if decision.new_index is None or decision.action is ModeAction.HOLD:
        raise ValueError("decision does not change the audio mode")
    floor = combined_floor(tx_profile, rx_profile)
    if decision.new_index > floor:
        raise FloorViolationError(
            f"session {session.session_id}: mode index {decision.new_index} "
            f"is below the quality floor {floor}"
        )
    old_index = session.mode_index
    if decision.new_index == old_index:
        raise ValueError("decision does not change the audio mode")
    ladder = tx_profile.card.supported_modes
    record = ModeChangeRecord(
        at_ms=t_ms,
        effective_at_ms=t_ms + switch_latency_ms,
        old_index=old_index,
        new_index=decision.new_index,
        old_mode=ladder[old_index],
        new_mode=ladder[decision.new_index],
        trigger_delay_ms=trigger_delay_ms,
    )
    session.mode_index = decision.new_index
    return record
