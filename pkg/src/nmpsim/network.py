"""Emulated topology: users, switches, candidate paths, delay schedules.

Per-path delay is modeled directly as a piecewise-constant schedule (the
role a traffic shaper plays on a real testbed) with optional seeded
jitter. Links carry only a descriptive base delay used for validation;
monitoring measures whole paths, not individual links.
"""

from __future__ import annotations

from collections.abc import Collection, Iterable
from dataclasses import dataclass

from . import kernels
from .errors import ConfigurationError

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def path_stream_id(path_id: str) -> int:
    """Stable 64-bit jitter stream id for a path (FNV-1a of its id)."""
    h = _FNV_OFFSET
    for byte in path_id.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True, slots=True)
class DelaySchedule:
    """Step schedule of one-way delay plus optional Gaussian jitter.

    ``segments`` is a sequence of (start_ms, delay_ms) steps, strictly
    increasing in start time and beginning at 0; the delay in force at
    time t is that of the last segment starting at or before t.
    """

    segments: tuple[tuple[float, float], ...]
    jitter_std_ms: float = 0.0

    def __post_init__(self) -> None:
        if not self.segments:
            raise ConfigurationError("delay schedule must have at least one segment")
        if self.segments[0][0] != 0:
            raise ConfigurationError("first schedule segment must start at 0 ms")
        last = None
        for start, delay in self.segments:
            if last is not None and start <= last:
                raise ConfigurationError(
                    f"schedule segment starts must strictly increase (at {start} ms)"
                )
            if delay < 0:
                raise ConfigurationError(f"scheduled delay must be >= 0, got {delay}")
            last = start
        if self.jitter_std_ms < 0:
            raise ConfigurationError(f"jitter_std_ms must be >= 0, got {self.jitter_std_ms}")

    @property
    def starts(self) -> tuple[float, ...]:
        return tuple(s for s, _ in self.segments)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.segments)

    def base_delay_at(self, t_ms: float) -> float:
        """Scheduled delay at ``t_ms``, jitter excluded."""
        return kernels.sweep_delays(self.starts, self.values, (t_ms,), 0.0, 0, 0)[0]


@dataclass(frozen=True, slots=True)
class PathDescriptor:
    """A candidate route between two users."""

    id: str
    hops: tuple[str, ...]
    schedule: DelaySchedule

    def __post_init__(self) -> None:
        if len(self.hops) < 2:
            raise ConfigurationError(f"path {self.id} needs at least two hops")

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.hops[0], self.hops[-1]))


@dataclass(frozen=True, slots=True)
class Topology:
    """Nodes, links and the declared candidate paths between users."""

    nodes: frozenset[str]
    links: tuple[tuple[str, str, float], ...]
    paths: tuple[PathDescriptor, ...]

    def path_by_id(self, path_id: str) -> PathDescriptor:
        for path in self.paths:
            if path.id == path_id:
                return path
        raise KeyError(path_id)

    def paths_between(self, a: str, b: str) -> tuple[PathDescriptor, ...]:
        """Declared paths whose endpoints are exactly {a, b}, either way."""
        wanted = frozenset((a, b))
        return tuple(p for p in self.paths if p.endpoints == wanted)


def path_delay_at(path: PathDescriptor, t_ms: float, rng_seed: int) -> float:
    """One-way delay measured on ``path`` at time ``t_ms``.

    Deterministic for a fixed seed: the scheduled step value plus the
    path's seeded jitter draw, never negative.
    """
    if t_ms < 0:
        raise ValueError(f"t_ms must be >= 0, got {t_ms}")
    schedule = path.schedule
    return kernels.sweep_delays(
        schedule.starts,
        schedule.values,
        (t_ms,),
        schedule.jitter_std_ms,
        rng_seed,
        path_stream_id(path.id),
    )[0]


def validate_topology(
    topo: Topology,
    user_nodes: Collection[str] | None = None,
    required_pairs: Iterable[tuple[str, str]] | None = None,
) -> list[str]:
    """All invariant violations in ``topo``; empty when it is sound.

    ``user_nodes`` enables the endpoint checks and ``required_pairs``
    the coverage check (one path per transmitter/receiver pair); both
    need context a bare topology does not carry.
    """
    violations: list[str] = []
    link_pairs = {frozenset((a, b)) for a, b, _ in topo.links}

    for a, b, base in topo.links:
        for node in (a, b):
            if node not in topo.nodes:
                violations.append(f"link ({a}, {b}) references unknown node {node!r}")
        if base < 0:
            violations.append(f"link ({a}, {b}) has negative base delay {base}")

    seen_ids: set[str] = set()
    for path in topo.paths:
        if path.id in seen_ids:
            violations.append(f"duplicate path id {path.id!r}")
        seen_ids.add(path.id)
        for node in path.hops:
            if node not in topo.nodes:
                violations.append(f"path {path.id} references unknown node {node!r}")
        for hop_a, hop_b in zip(path.hops, path.hops[1:]):
            if frozenset((hop_a, hop_b)) not in link_pairs:
                violations.append(
                    f"path {path.id} uses undeclared link ({hop_a}, {hop_b})"
                )
        if user_nodes is not None:
            for endpoint in (path.hops[0], path.hops[-1]):
                if endpoint not in user_nodes:
                    violations.append(
                        f"path {path.id} endpoint {endpoint!r} is not a user node"
                    )

    if required_pairs is not None:
        for a, b in required_pairs:
            if not topo.paths_between(a, b):
                violations.append(f"no path declared between users {a!r} and {b!r}")

    return violations
