"""Discrete-event simulator for delay-budgeted multi-path audio flows.

The control loop under simulation keeps a live audio session inside its
end-to-end delay budget by monitoring every candidate path, rerouting
the flow when a clearly better path appears, and adapting the audio
processing mode (sampling rate and frame size) when no path alone can
keep the session within budget.
"""

from .core import (
    DEFAULT_EPT_MS,
    AudioMode,
    DelayBudget,
    DelaySample,
    SoundCardProfile,
    blocking_delay,
    end_to_end_delay,
    end_to_end_delay_asymmetric,
    meets_ept,
)
from .engine import improvement_pct, run, run_baseline, summarize
from .scenario import (
    Scenario,
    bundled_scenario_names,
    load_bundled_scenario,
    load_scenario_file,
    parse_scenario,
    serialize_scenario,
)
from .trace import TraceEvent, read_trace_csv, write_trace_csv

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_EPT_MS",
    "AudioMode",
    "DelayBudget",
    "DelaySample",
    "Scenario",
    "SoundCardProfile",
    "TraceEvent",
    "blocking_delay",
    "bundled_scenario_names",
    "end_to_end_delay",
    "end_to_end_delay_asymmetric",
    "improvement_pct",
    "load_bundled_scenario",
    "load_scenario_file",
    "meets_ept",
    "parse_scenario",
    "read_trace_csv",
    "run",
    "run_baseline",
    "serialize_scenario",
    "summarize",
    "write_trace_csv",
]
