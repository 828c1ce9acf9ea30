"""Trace rows and their CSV serialization.

A trace is the full record of a run: one measurement row per session
per probe batch plus a row for every reroute, mode switch, best-effort
transition and the closing end-of-run marker. Float cells are written
with four decimals; to keep every written row internally consistent,
delay fields are quantized to four decimals when the row is built and
the end-to-end figure is computed from the quantized parts. A row
therefore satisfies e2e = 2 * block + net exactly, before and after a
round trip through the file.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

CSV_HEADER = "t_ms,session,event,path,fs_hz,fr_samples,net_ms,block_ms,e2e_ms,detail"

MEASUREMENT = "measurement"
REROUTE = "reroute"
MODE_SWITCH = "mode-switch"
BEST_EFFORT_ENTER = "best-effort-enter"
BEST_EFFORT_EXIT = "best-effort-exit"
END_OF_RUN = "end-of-run"

EVENT_TYPES = (
    MEASUREMENT,
    REROUTE,
    MODE_SWITCH,
    BEST_EFFORT_ENTER,
    BEST_EFFORT_EXIT,
    END_OF_RUN,
)

#: Tolerance for the per-row delay conservation check.
CONSERVATION_TOL_MS = 1e-9


@dataclass(frozen=True, slots=True)
class TraceEvent:
    """One timestamped row of session state or state transition."""

    at_ms: float
    session_id: str
    event_type: str
    active_path: str
    fs_hz: int
    fr_samples: int
    network_delay_ms: float
    blocking_delay_ms: float
    e2e_ms: float
    detail: str


def make_trace_event(
    at_ms: float,
    session_id: str,
    event_type: str,
    active_path: str,
    fs_hz: int,
    fr_samples: int,
    network_delay_ms: float,
    blocking_delay_ms: float,
    detail: str,
) -> TraceEvent:
    """Build a row with quantized delays and a conserved e2e field.

    ``blocking_delay_ms`` is the per-endpoint average, so asymmetric
    sessions still satisfy e2e = 2 * block + net.
    """
    net = round(network_delay_ms, 4)
    block = round(blocking_delay_ms, 4)
    e2e = 2.0 * block + net
    event = TraceEvent(
        at_ms=at_ms,
        session_id=session_id,
        event_type=event_type,
        active_path=active_path,
        fs_hz=fs_hz,
        fr_samples=fr_samples,
        network_delay_ms=net,
        blocking_delay_ms=block,
        e2e_ms=e2e,
        detail=detail,
    )
    assert abs(event.e2e_ms - (2.0 * event.blocking_delay_ms + event.network_delay_ms)) <= CONSERVATION_TOL_MS
    return event


def _format_row(event: TraceEvent) -> str:
    detail = event.detail.replace('"', '""')
    return (
        f"{event.at_ms:.4f},{event.session_id},{event.event_type},{event.active_path},"
        f"{event.fs_hz},{event.fr_samples},{event.network_delay_ms:.4f},"
        f"{event.blocking_delay_ms:.4f},{event.e2e_ms:.4f},\"{detail}\""
    )


def format_trace_csv(events: Iterable[TraceEvent]) -> str:
    lines = [CSV_HEADER]
    lines.extend(_format_row(e) for e in events)
    return "\n".join(lines) + "\n"


def write_trace_csv(events: Sequence[TraceEvent], path: str | Path) -> None:
    """Write the trace; the file is created only after a full render."""
    text = format_trace_csv(events)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _split_row(line: str) -> list[str]:
    head, sep, detail = line.partition(',"')
    if not sep or not detail.endswith('"'):
        raise ValueError(f"malformed trace row: {line!r}")
    fields = head.split(",")
    fields.append(detail[:-1].replace('""', '"'))
    return fields


def read_trace_csv(source: str | Path | io.TextIOBase) -> list[TraceEvent]:
    """Parse a trace file written by :func:`write_trace_csv`."""
    if isinstance(source, io.TextIOBase):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or unexpected trace header")
    events = []
    for line in lines[1:]:
        f = _split_row(line)
        if len(f) != 10:
            raise ValueError(f"expected 10 fields, got {len(f)}: {line!r}")
        events.append(
            TraceEvent(
                at_ms=float(f[0]),
                session_id=f[1],
                event_type=f[2],
                active_path=f[3],
                fs_hz=int(f[4]),
                fr_samples=int(f[5]),
                network_delay_ms=float(f[6]),
                blocking_delay_ms=float(f[7]),
                e2e_ms=float(f[8]),
                detail=f[9],
            )
        )
    return events
