"""Flow control: initial path assignment and hysteresis-based rerouting.

A flow moves to another path only when that path beats the active one
by at least the hysteresis threshold (2 ms by default), which prevents
route flapping on small or noisy differences. Service classes differ in
how many backup paths are kept ready.

Snapshots are mappings path_id -> estimate_ms whose iteration order is
the path declaration order; all tie-breaks follow that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import ConfigurationError, InvalidPathError, NoPathError, StaleSnapshotError


@dataclass(frozen=True, slots=True)
class ReroutePolicy:
    """Reroute hysteresis and per-class backup path counts."""

    hysteresis_ms: float = 2.0
    backup_count_premium: int = 2
    backup_count_regular: int = 1

    def __post_init__(self) -> None:
        if self.hysteresis_ms <= 0:
            raise ConfigurationError(f"hysteresis_ms must be > 0, got {self.hysteresis_ms}")
        if self.backup_count_regular < 0 or self.backup_count_premium < 0:
            raise ConfigurationError("backup counts must be >= 0")
        if self.backup_count_premium < self.backup_count_regular:
            raise ConfigurationError(
                "backup_count_premium must be >= backup_count_regular"
            )

    def backup_count(self, premium: bool) -> int:
        return self.backup_count_premium if premium else self.backup_count_regular


@dataclass(frozen=True, slots=True)
class FlowAssignment:
    """The installed route of one session plus its ready backups."""

    session_id: str
    active_path: str
    backups: tuple[str, ...]
    installed_at_ms: float

    def __post_init__(self) -> None:
        if self.active_path in self.backups:
            raise ConfigurationError(
                f"active path {self.active_path!r} may not appear in backups"
            )


@dataclass(frozen=True, slots=True)
class RerouteRecord:
    """What a reroute changed; the engine turns this into a trace row."""

    at_ms: float
    old_path: str
    new_path: str
    old_estimate_ms: float
    new_estimate_ms: float


def _ranked(snapshot: Mapping[str, float]) -> list[str]:
    # stable sort on estimate keeps declaration order for ties
    return sorted(snapshot, key=snapshot.__getitem__)


def assign_initial_path(
    session_id: str,
    snapshot: Mapping[str, float],
    policy: ReroutePolicy,
    premium: bool,
    at_ms: float = 0.0,
) -> FlowAssignment:
    """Install the minimum-delay path; next-best paths become backups.

    Ties go to the earliest-declared path. Raises ``NoPathError`` when
    no candidate has been measured yet.
    """
    if not snapshot:
        raise NoPathError(f"session {session_id}: no measured candidate path")
    ranked = _ranked(snapshot)
    count = policy.backup_count(premium)
    return FlowAssignment(
        session_id=session_id,
        active_path=ranked[0],
        backups=tuple(ranked[1 : 1 + count]),
        installed_at_ms=at_ms,
    )


def reroute_decision(
    assignment: FlowAssignment,
    snapshot: Mapping[str, float],
    policy: ReroutePolicy,
) -> str | None:
    """Path to reroute to, or None when no candidate clears the hysteresis.

    Candidates are all paths in the snapshot. The minimum-delay path is
    chosen iff it beats the active path by at least ``hysteresis_ms``.
    """
    if assignment.active_path not in snapshot:
        raise StaleSnapshotError(
            f"active path {assignment.active_path!r} missing from snapshot"
        )
    best = _ranked(snapshot)[0]
    if best == assignment.active_path:
        return None
    improvement = snapshot[assignment.active_path] - snapshot[best]
    if improvement >= policy.hysteresis_ms:
        return best
    return None


def apply_reroute(
    assignment: FlowAssignment,
    new_path: str,
    at_ms: float,
    snapshot: Mapping[str, float],
    backup_count: int,
) -> tuple[FlowAssignment, RerouteRecord]:
    """Switch the flow to ``new_path`` and refresh the backup list.

    The previous active path joins the backups; the list is re-sorted
    by estimate and trimmed to ``backup_count``, dropping the
    worst-estimated paths first.
    """
    if new_path == assignment.active_path:
        raise InvalidPathError(f"path {new_path!r} is already active")
    if new_path not in snapshot:
        raise InvalidPathError(f"unknown path {new_path!r}")
    pool = [p for p in assignment.backups if p != new_path] + [assignment.active_path]
    order = {pid: i for i, pid in enumerate(snapshot)}
    pool.sort(key=lambda pid: (snapshot.get(pid, float("inf")), order.get(pid, len(order))))
    updated = FlowAssignment(
        session_id=assignment.session_id,
        active_path=new_path,
        backups=tuple(pool[:backup_count]),
        installed_at_ms=at_ms,
    )
    record = RerouteRecord(
        at_ms=at_ms,
        old_path=assignment.active_path,
        new_path=new_path,
        old_estimate_ms=snapshot[assignment.active_path],
        new_estimate_ms=snapshot[new_path],
    )
    return updated, record
