"""Path delay monitoring: periodic probes and per-path estimates.

Every candidate path is probed on a fixed period; each sample feeds an
exponentially weighted moving average. The default weight of 1.0 simply
keeps the latest sample, which is the right choice when jitter is off;
lower weights smooth noisy measurements.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .core import DelaySample
from .errors import ConfigurationError
from .network import PathDescriptor

#: Default probe period; small against the tens-of-seconds scale of
#: scheduled delay changes so detection latency stays negligible.
DEFAULT_PROBE_INTERVAL_MS = 500.0


@dataclass(frozen=True, slots=True)
class ProbeConfig:
    """Probe period and EWMA weight of the newest sample."""

    interval_ms: float = DEFAULT_PROBE_INTERVAL_MS
    smoothing_alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.interval_ms <= 0:
            raise ConfigurationError(f"interval_ms must be > 0, got {self.interval_ms}")
        if not 0 < self.smoothing_alpha <= 1:
            raise ConfigurationError(
                f"smoothing_alpha must be in (0, 1], got {self.smoothing_alpha}"
            )


@dataclass(frozen=True, slots=True)
class PathEstimate:
    """Current smoothed delay estimate for one path."""

    path_id: str
    estimate_ms: float
    last_sample: DelaySample
    sample_count: int


def schedule_probes(
    paths: Sequence[PathDescriptor], cfg: ProbeConfig, horizon_ms: float
) -> list[tuple[float, str]]:
    """Probe events (at_ms, path_id) at t = 0, interval, ... <= horizon.

    Ordered by time; simultaneous probes keep the order paths were
    passed in.
    """
    if horizon_ms <= 0:
        raise ValueError(f"horizon_ms must be > 0, got {horizon_ms}")
    events: list[tuple[float, str]] = []
    k = 0
    while True:
        t = k * cfg.interval_ms
        if t > horizon_ms:
            break
        for path in paths:
            events.append((t, path.id))
        k += 1
    return events


def ingest_sample(
    est: PathEstimate | None,
    sample: DelaySample,
    cfg: ProbeConfig,
    path_id: str = "",
) -> PathEstimate:
    """Fold one sample into an estimate; the first sample initializes it.

    ``path_id`` labels a freshly created estimate and is ignored when a
    prior estimate is passed.
    """
    if est is None:
        return PathEstimate(
            path_id=path_id,
            estimate_ms=sample.one_way_delay_ms,
            last_sample=sample,
            sample_count=1,
        )
    alpha = cfg.smoothing_alpha
    smoothed = alpha * sample.one_way_delay_ms + (1.0 - alpha) * est.estimate_ms
    return replace(
        est, estimate_ms=smoothed, last_sample=sample, sample_count=est.sample_count + 1
    )


class Monitor:
    """Owns the live per-path estimates; readers only get snapshots."""

    def __init__(self, cfg: ProbeConfig):
        self.cfg = cfg
        self._estimates: dict[str, PathEstimate] = {}

    def ingest(self, path_id: str, sample: DelaySample) -> PathEstimate:
        prior = self._estimates.get(path_id)
        est = ingest_sample(prior, sample, self.cfg, path_id=path_id)
        self._estimates[path_id] = est
        return est

    def estimate(self, path_id: str) -> PathEstimate | None:
        return self._estimates.get(path_id)

    def snapshot(self) -> dict[str, float]:
        """Immutable copy of current estimates; unprobed paths absent.

        Iteration order is first-probe order, which the engine arranges
        to be path declaration order.
        """
        return {pid: est.estimate_ms for pid, est in self._estimates.items()}
