"""Deterministic event loop binding monitoring, routing and sessions.

Events are built up front from the scenario (schedule steps, probes,
decision sweeps, session starts, end of run) and executed in
(timestamp, kind priority, declaration order). A decision sweep runs
after every probe batch: per session it records a measurement row,
applies at most one reroute, then drives the mode ladder. Time is
virtual; runs are reproducible bit for bit for a fixed seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import kernels, trace
from .controller import apply_reroute, assign_initial_path, reroute_decision
from .core import DelayBudget, DelaySample
from .errors import ScenarioError
from .monitoring import Monitor, schedule_probes
from .network import path_stream_id
from .scenario import Scenario, SessionRuntime, build_session_runtimes
from .session import ModeAction, mode_switch_decision, notify_application, pair_blocking
from .trace import TraceEvent, make_trace_event


class EventKind(enum.IntEnum):
    """Engine event kinds; the numeric value is the same-time priority."""

    SCHEDULE_STEP = 0
    PROBE = 1
    DECISION_SWEEP = 2
    SESSION_START = 3
    END_OF_RUN = 4


@dataclass(frozen=True, slots=True)
class Event:
    at_ms: float
    kind: EventKind
    subject: str = ""


def build_events(scenario: Scenario) -> list[Event]:
    """The full event list of a run, in execution order."""
    events: list[Event] = []
    for path in scenario.topology.paths:
        for start_ms, _ in path.schedule.segments[1:]:
            if start_ms <= scenario.duration_ms:
                events.append(Event(start_ms, EventKind.SCHEDULE_STEP, path.id))
    probe_events = schedule_probes(
        scenario.topology.paths, scenario.probe, scenario.duration_ms
    )
    for at_ms, path_id in probe_events:
        events.append(Event(at_ms, EventKind.PROBE, path_id))
    for at_ms in sorted({at for at, _ in probe_events}):
        events.append(Event(at_ms, EventKind.DECISION_SWEEP))
    for session_id in scenario.session_ids():
        events.append(Event(0.0, EventKind.SESSION_START, session_id))
    events.append(Event(scenario.duration_ms, EventKind.END_OF_RUN))
    events.sort(key=lambda e: (e.at_ms, e.kind))
    return events


def _snapshot_detail(snapshot: Mapping[str, float]) -> str:
    return "est " + ";".join(f"{pid}={snapshot[pid]:.4f}" for pid in sorted(snapshot))


class _Loop:
    """State of one run; produces the trace."""

    def __init__(self, scenario: Scenario, adapt_paths: bool, adapt_modes: bool):
        self.scenario = scenario
        self.adapt_paths = adapt_paths
        self.adapt_modes = adapt_modes
        self.monitor = Monitor(scenario.probe)
        self.sessions = build_session_runtimes(scenario)
        self.rows: list[TraceEvent] = []
        self._measured: dict[str, list[float]] = {}
        self._probe_index: dict[str, int] = {}

    def _precompute_measurements(self) -> None:
        # Probe samples depend only on the schedule, the seed and the
        # probe grid, so the whole horizon is sampled in one kernel
        # sweep per path. This is the hot loop of large runs.
        grid = []
        k = 0
        while True:
            t = k * self.scenario.probe.interval_ms
            if t > self.scenario.duration_ms:
                break
            grid.append(t)
            k += 1
        for path in self.scenario.topology.paths:
            schedule = path.schedule
            self._measured[path.id] = kernels.sweep_delays(
                schedule.starts,
                schedule.values,
                grid,
                schedule.jitter_std_ms,
                self.scenario.seed,
                path_stream_id(path.id),
            )
            self._probe_index[path.id] = 0

    def run(self) -> list[TraceEvent]:
        errors = self.scenario.validate()
        if errors:
            raise ScenarioError(errors)
        self._precompute_measurements()
        for event in build_events(self.scenario):
            if event.kind is EventKind.PROBE:
                self._handle_probe(event)
            elif event.kind is EventKind.DECISION_SWEEP:
                self._handle_sweep(event.at_ms)
            elif event.kind is EventKind.SESSION_START:
                self._handle_session_start(event)
            elif event.kind is EventKind.END_OF_RUN:
                self._handle_end(event.at_ms)
            # schedule steps need no action: sampling is time-driven
        return self.rows

    def _handle_probe(self, event: Event) -> None:
        index = self._probe_index[event.subject]
        self._probe_index[event.subject] = index + 1
        measured = self._measured[event.subject][index]
        self.monitor.ingest(event.subject, DelaySample(event.at_ms, measured))

    def _session_snapshot(self, runtime: SessionRuntime) -> dict[str, float]:
        snapshot = self.monitor.snapshot()
        return {pid: snapshot[pid] for pid in runtime.candidate_ids if pid in snapshot}

    def _emit(
        self,
        at_ms: float,
        runtime: SessionRuntime,
        event_type: str,
        network_delay_ms: float,
        detail: str,
    ) -> None:
        state = runtime.state
        mode = runtime.tx_profile.card.supported_modes[state.mode_index]
        blocking = pair_blocking(runtime.tx_profile, runtime.rx_profile, state.mode_index)
        assert runtime.assignment is not None
        self.rows.append(
            make_trace_event(
                at_ms=at_ms,
                session_id=state.session_id,
                event_type=event_type,
                active_path=runtime.assignment.active_path,
                fs_hz=mode.sampling_rate_hz,
                fr_samples=mode.frame_size_samples,
                network_delay_ms=network_delay_ms,
                blocking_delay_ms=blocking / 2.0,
                detail=detail,
            )
        )

    def _handle_session_start(self, event: Event) -> None:
        runtime = next(s for s in self.sessions if s.session_id == event.subject)
        snapshot = self._session_snapshot(runtime)
        runtime.assignment = assign_initial_path(
            runtime.session_id,
            snapshot,
            self.scenario.policy,
            runtime.premium,
            at_ms=event.at_ms,
        )
        active = runtime.assignment.active_path
        self._emit(
            event.at_ms,
            runtime,
            trace.MEASUREMENT,
            snapshot[active],
            _snapshot_detail(snapshot),
        )

    def _handle_sweep(self, at_ms: float) -> None:
        for runtime in self.sessions:
            if runtime.assignment is None:
                continue
            snapshot = self._session_snapshot(runtime)
            self._emit(
                at_ms,
                runtime,
                trace.MEASUREMENT,
                snapshot[runtime.assignment.active_path],
                _snapshot_detail(snapshot),
            )
            if self.adapt_paths:
                self._apply_routing(runtime, snapshot, at_ms)
            if self.adapt_modes:
                self._apply_mode_ladder(runtime, snapshot, at_ms)

    def _apply_routing(
        self, runtime: SessionRuntime, snapshot: Mapping[str, float], at_ms: float
    ) -> None:
        target = reroute_decision(runtime.assignment, snapshot, self.scenario.policy)
        if target is None:
            return
        runtime.assignment, record = apply_reroute(
            runtime.assignment,
            target,
            at_ms,
            snapshot,
            self.scenario.policy.backup_count(runtime.premium),
        )
        improvement = record.old_estimate_ms - record.new_estimate_ms
        self._emit(
            at_ms,
            runtime,
            trace.REROUTE,
            record.new_estimate_ms,
            f"{record.old_path}->{record.new_path} "
            f"old={record.old_estimate_ms:.4f};new={record.new_estimate_ms:.4f};"
            f"improvement={improvement:.4f}",
        )

    def _apply_mode_ladder(
        self, runtime: SessionRuntime, snapshot: Mapping[str, float], at_ms: float
    ) -> None:
        state = runtime.state
        best_delay = min(snapshot.values())
        decision = mode_switch_decision(
            state, best_delay, runtime.tx_profile, runtime.rx_profile
        )
        active_delay = snapshot[runtime.assignment.active_path]

        if decision.action in (ModeAction.UPGRADE, ModeAction.HOLD) and state.best_effort:
            state.best_effort = False
            self._emit(
                at_ms,
                runtime,
                trace.BEST_EFFORT_EXIT,
                active_delay,
                "end-to-end delay back within budget",
            )

        if decision.action in (ModeAction.DEGRADE, ModeAction.UPGRADE):
            record = notify_application(
                state,
                decision,
                at_ms,
                runtime.tx_profile,
                runtime.rx_profile,
                trigger_delay_ms=best_delay,
            )
            self._emit(
                at_ms,
                runtime,
                trace.MODE_SWITCH,
                active_delay,
                f"{record.old_mode}->{record.new_mode} trigger={best_delay:.4f}",
            )
        elif decision.action is ModeAction.BEST_EFFORT:
            if decision.new_index != state.mode_index:
                record = notify_application(
                    state,
                    decision,
                    at_ms,
                    runtime.tx_profile,
                    runtime.rx_profile,
                    trigger_delay_ms=best_delay,
                )
                self._emit(
                    at_ms,
                    runtime,
                    trace.MODE_SWITCH,
                    active_delay,
                    f"{record.old_mode}->{record.new_mode} trigger={best_delay:.4f}",
                )
            if not state.best_effort:
                state.best_effort = True
                self._emit(
                    at_ms,
                    runtime,
                    trace.BEST_EFFORT_ENTER,
                    active_delay,
                    f"no mode at or above floor index {decision.new_index} fits the budget",
                )

    def _handle_end(self, at_ms: float) -> None:
        for runtime in self.sessions:
            if runtime.assignment is None:
                continue
            snapshot = self._session_snapshot(runtime)
            self._emit(
                at_ms,
                runtime,
                trace.END_OF_RUN,
                snapshot[runtime.assignment.active_path],
                "run complete",
            )


def run(scenario: Scenario) -> list[TraceEvent]:
    """Execute the scenario with rerouting and mode adaptation active."""
    return _Loop(scenario, adapt_paths=True, adapt_modes=True).run()


def run_baseline(scenario: Scenario, pin_paths: bool = False) -> list[TraceEvent]:
    """Execute with mode adaptation disabled.

    Rerouting stays active by default (the baseline lacks the
    application side of the loop, not the routing side); ``pin_paths``
    additionally locks the flow to its initial path.
    """
    return _Loop(scenario, adapt_paths=not pin_paths, adapt_modes=False).run()


@dataclass(frozen=True, slots=True)
class TraceSummary:
    """Time-weighted statistics of one trace."""

    mean_e2e_ms: float
    max_e2e_ms: float
    over_budget_fraction: float
    event_counts: dict[str, int]
    span_ms: float

    def as_dict(self) -> dict[str, object]:
        return {
            "mean_e2e_ms": self.mean_e2e_ms,
            "max_e2e_ms": self.max_e2e_ms,
            "over_budget_fraction": self.over_budget_fraction,
            "event_counts": dict(self.event_counts),
            "span_ms": self.span_ms,
        }


def summarize(rows: Sequence[TraceEvent], budget: DelayBudget) -> TraceSummary:
    """Statistics over a trace: each row's state holds until the next
    row of the same session, so rows sharing a timestamp give the
    transient state zero weight. Multi-session traces pool the
    session-local intervals.
    """
    if not rows:
        raise ValueError("cannot summarize an empty trace")
    by_session: dict[str, list[TraceEvent]] = {}
    for row in rows:
        by_session.setdefault(row.session_id, []).append(row)

    weighted_sum = 0.0
    weighted_over = 0.0
    total_span = 0.0
    max_e2e = max(row.e2e_ms for row in rows)
    counts: dict[str, int] = {}
    for row in rows:
        counts[row.event_type] = counts.get(row.event_type, 0) + 1

    for series in by_session.values():
        for current, nxt in zip(series, series[1:]):
            dt = nxt.at_ms - current.at_ms
            if dt < 0:
                raise ValueError("trace rows out of order")
            weighted_sum += current.e2e_ms * dt
            if current.e2e_ms > budget.ept_ms:
                weighted_over += dt
            total_span += dt

    if total_span == 0.0:
        # degenerate single-instant trace
        mean = rows[-1].e2e_ms
        over = 1.0 if mean > budget.ept_ms else 0.0
        return TraceSummary(mean, max_e2e, over, counts, 0.0)
    return TraceSummary(
        mean_e2e_ms=weighted_sum / total_span,
        max_e2e_ms=max_e2e,
        over_budget_fraction=weighted_over / total_span,
        event_counts=counts,
        span_ms=total_span,
    )


def improvement_pct(adaptive: TraceSummary, baseline: TraceSummary) -> float:
    """Relative mean-delay improvement of ``adaptive`` over ``baseline``."""
    if baseline.mean_e2e_ms == 0:
        raise ValueError("baseline mean delay is zero")
    return (baseline.mean_e2e_ms - adaptive.mean_e2e_ms) / baseline.mean_e2e_ms * 100.0
