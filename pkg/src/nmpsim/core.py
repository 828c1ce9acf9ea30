"""Delay arithmetic and the domain value types shared by every module.

End-to-end delay of an audio flow splits into two parts: the processing
(blocking) delay of the sound cards at both ends and the one-way network
delay of the active path. A card's blocking delay is the frame/rate
quotient plus a per-device hardware constant; the end-to-end figure must
stay within the ensemble performance threshold (EPT, 25 ms by default)
for musicians to play in sync.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError, InvalidModeError

#: Default ensemble performance threshold in milliseconds.
DEFAULT_EPT_MS = 25.0


@dataclass(frozen=True, slots=True)
class AudioMode:
    """A (sampling rate, frame size) pair defining processing latency."""

    sampling_rate_hz: int
    frame_size_samples: int

    def __post_init__(self) -> None:
        if not isinstance(self.sampling_rate_hz, int) or self.sampling_rate_hz < 1:
            raise InvalidModeError(
                f"sampling_rate_hz must be a positive integer, got {self.sampling_rate_hz!r}"
            )
        if not isinstance(self.frame_size_samples, int) or self.frame_size_samples < 1:
            raise InvalidModeError(
                f"frame_size_samples must be a positive integer, got {self.frame_size_samples!r}"
            )

    def __str__(self) -> str:
        return f"{self.sampling_rate_hz}/{self.frame_size_samples}"


@dataclass(frozen=True, slots=True)
class SoundCardProfile:
    """A user's card: hardware constant plus its ordered mode ladder.

    ``supported_modes`` runs from the most preferred mode down to the
    lowest-latency fallback.
    """

    d0_ms: float
    supported_modes: tuple[AudioMode, ...]

    def __post_init__(self) -> None:
        if self.d0_ms < 0:
            raise ConfigurationError(f"d0_ms must be >= 0, got {self.d0_ms}")
        if not self.supported_modes:
            raise ConfigurationError("supported_modes must not be empty")
        if len(set(self.supported_modes)) != len(self.supported_modes):
            raise ConfigurationError("supported_modes contains duplicate modes")


@dataclass(frozen=True, slots=True)
class DelayBudget:
    """The end-to-end delay budget (EPT), inclusive upper bound."""

    ept_ms: float = DEFAULT_EPT_MS

    def __post_init__(self) -> None:
        if self.ept_ms <= 0:
            raise ConfigurationError(f"ept_ms must be > 0, got {self.ept_ms}")


@dataclass(frozen=True, slots=True)
class DelaySample:
    """One timestamped one-way delay measurement for a path."""

    at_ms: float
    one_way_delay_ms: float

    def __post_init__(self) -> None:
        if self.one_way_delay_ms < 0:
            raise ValueError(f"one_way_delay_ms must be >= 0, got {self.one_way_delay_ms}")


def blocking_delay(mode: AudioMode, card: SoundCardProfile) -> float:
    """Processing delay of ``card`` at ``mode`` in milliseconds.

    Frame size divided by sampling rate (converted to ms) plus the
    card's hardware constant.
    """
    return 1000.0 * mode.frame_size_samples / mode.sampling_rate_hz + card.d0_ms


def end_to_end_delay(sound_card_delay_ms: float, network_delay_ms: float) -> float:
    """End-to-end delay with identical equipment at both endpoints.

    Twice the per-card blocking delay plus the one-way network delay.
    """
    if sound_card_delay_ms < 0:
        raise ValueError(f"sound_card_delay_ms must be >= 0, got {sound_card_delay_ms}")
    if network_delay_ms < 0:
        raise ValueError(f"network_delay_ms must be >= 0, got {network_delay_ms}")
    return 2.0 * sound_card_delay_ms + network_delay_ms


def end_to_end_delay_asymmetric(
    tx_card_delay_ms: float, rx_card_delay_ms: float, network_delay_ms: float
) -> float:
    """End-to-end delay when the two endpoints' cards differ."""
    if tx_card_delay_ms < 0 or rx_card_delay_ms < 0:
        raise ValueError("card delays must be >= 0")
    if network_delay_ms < 0:
        raise ValueError(f"network_delay_ms must be >= 0, got {network_delay_ms}")
    return tx_card_delay_ms + rx_card_delay_ms + network_delay_ms


def meets_ept(e2e_ms: float, budget: DelayBudget) -> bool:
    """True when an end-to-end delay fits the budget (inclusive)."""
    if e2e_ms < 0:
        raise ValueError(f"e2e_ms must be >= 0, got {e2e_ms}")
    return e2e_ms <= budget.ept_ms
