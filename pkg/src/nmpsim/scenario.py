"""Scenario documents: schema, parsing, validation and serialization.

A scenario is one JSON document (conventionally ``*.scn``) with the
sections ``topology``, ``users``, ``sessions``, ``probe``, ``policy``,
``budget`` and ``run``. The schema is strict: unknown keys are
rejected, and parsing either returns a fully validated scenario or
raises with the complete list of violations.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from .controller import ReroutePolicy
from .core import AudioMode, DelayBudget, SoundCardProfile
from .errors import ConfigurationError, ScenarioError
from .monitoring import ProbeConfig
from .network import DelaySchedule, PathDescriptor, Topology, validate_topology
from .session import (
    DEFAULT_UPGRADE_GUARD_MS,
    ServiceClass,
    SessionState,
    UserProfile,
    validate_ladder,
)

_SCENARIO_SUFFIX = ".scn"

# node/path/user identifiers end up in CSV cells and session ids
_ID_PATTERN = re.compile(r"^[A-Za-z0-9_.-]+$")

# fail fast instead of allocating a runaway probe grid
_MAX_PROBES_PER_PATH = 20_000_000

_TOP_KEYS = {"topology", "users", "sessions", "probe", "policy", "budget", "run"}
_TOPOLOGY_KEYS = {"nodes", "links", "paths"}
_PATH_KEYS = {"id", "hops", "schedule", "jitter_std_ms"}
_USER_KEYS = {"id", "class", "d0_ms", "ladder", "mode_floor_index"}
_SESSION_KEYS = {"tx", "rx", "initial_mode_index"}
_PROBE_KEYS = {"interval_ms", "alpha"}
_POLICY_KEYS = {"hysteresis_ms", "backup_premium", "backup_regular", "upgrade_guard_ms"}
_BUDGET_KEYS = {"ept_ms"}
_RUN_KEYS = {"duration_ms", "seed"}


@dataclass(frozen=True, slots=True)
class SessionDecl:
    """One declared flow: transmitter, receiver, starting ladder index."""

    tx: str
    rx: str
    initial_mode_index: int = 0


@dataclass(frozen=True, slots=True)
class Scenario:
    topology: Topology
    users: tuple[UserProfile, ...]
    sessions: tuple[SessionDecl, ...]
    probe: ProbeConfig
    policy: ReroutePolicy
    budget: DelayBudget
    duration_ms: float
    seed: int
    upgrade_guard_ms: float = DEFAULT_UPGRADE_GUARD_MS

    def user_by_id(self, user_id: str) -> UserProfile:
        for user in self.users:
            if user.user_id == user_id:
                return user
        raise KeyError(user_id)

    def session_ids(self) -> tuple[str, ...]:
        """Stable ids for the declared sessions (``tx->rx``, deduplicated)."""
        ids: list[str] = []
        seen: dict[str, int] = {}
        for decl in self.sessions:
            base = f"{decl.tx}->{decl.rx}"
            n = seen.get(base, 0)
            seen[base] = n + 1
            ids.append(base if n == 0 else f"{base}#{n + 1}")
        return tuple(ids)

    def validate(self) -> list[str]:
        """Cross-reference and ladder checks; empty when sound."""
        violations: list[str] = []
        user_ids = {u.user_id for u in self.users}
        pairs = [(d.tx, d.rx) for d in self.sessions]
        violations.extend(validate_topology(self.topology, user_ids, pairs))

        for user in self.users:
            if user.user_id not in self.topology.nodes:
                violations.append(f"user {user.user_id!r} is not a topology node")
            for issue in validate_ladder(user.card):
                violations.append(f"user {user.user_id}: {issue}")

        if not self.sessions:
            violations.append("at least one session must be declared")
        for decl in self.sessions:
            for end in (decl.tx, decl.rx):
                if end not in user_ids:
                    violations.append(f"session references unknown user {end!r}")
            if decl.tx == decl.rx:
                violations.append(f"session {decl.tx}->{decl.rx} loops to itself")
            if decl.tx in user_ids and decl.rx in user_ids:
                tx, rx = self.user_by_id(decl.tx), self.user_by_id(decl.rx)
                if tx.card.supported_modes != rx.card.supported_modes:
                    violations.append(
                        f"session {decl.tx}->{decl.rx}: endpoints declare different ladders"
                    )
                else:
                    floor = min(tx.floor_index, rx.floor_index)
                    if not 0 <= decl.initial_mode_index <= floor:
                        violations.append(
                            f"session {decl.tx}->{decl.rx}: initial_mode_index "
                            f"{decl.initial_mode_index} outside [0, {floor}]"
                        )
        if self.duration_ms <= 0:
            violations.append(f"run duration_ms must be > 0, got {self.duration_ms}")
        elif self.duration_ms / self.probe.interval_ms > _MAX_PROBES_PER_PATH:
            violations.append(
                f"probe grid too large: duration_ms/interval_ms exceeds "
                f"{_MAX_PROBES_PER_PATH} probes per path"
            )
        return violations


@dataclass(slots=True)
class SessionRuntime:
    """Engine-side state of one declared session."""

    session_id: str
    state: SessionState
    tx_profile: UserProfile
    rx_profile: UserProfile
    candidate_ids: tuple[str, ...]
    premium: bool
    assignment: Any = None


def build_session_runtimes(scenario: Scenario) -> list[SessionRuntime]:
    """Create the per-session runtime records the engine drives."""
    runtimes = []
    for decl, session_id in zip(scenario.sessions, scenario.session_ids()):
        tx = scenario.user_by_id(decl.tx)
        rx = scenario.user_by_id(decl.rx)
        state = SessionState(
            session_id=session_id,
            tx_user=decl.tx,
            rx_user=decl.rx,
            mode_index=decl.initial_mode_index,
            budget=scenario.budget,
            upgrade_guard_ms=scenario.upgrade_guard_ms,
        )
        candidates = tuple(
            p.id for p in scenario.topology.paths_between(decl.tx, decl.rx)
        )
        premium = ServiceClass.PREMIUM in (tx.service_class, rx.service_class)
        runtimes.append(
            SessionRuntime(
                session_id=session_id,
                state=state,
                tx_profile=tx,
                rx_profile=rx,
                candidate_ids=candidates,
                premium=premium,
            )
        )
    return runtimes


class _Reader:
    """Collects violations while pulling typed values from the document."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def fail(self, message: str) -> None:
        self.errors.append(message)

    def check_keys(self, obj: dict, allowed: set[str], where: str) -> None:
        for key in obj:
            if key not in allowed:
                self.fail(f"{where}: unknown key {key!r}")

    def require(self, obj: dict, key: str, where: str) -> Any:
        if key not in obj:
            self.fail(f"{where}: missing required key {key!r}")
            return None
        return obj[key]

    def number(self, value: Any, where: str) -> float | None:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"{where}: expected a number, got {value!r}")
            return None
        return float(value)

    def integer(self, value: Any, where: str) -> int | None:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(f"{where}: expected an integer, got {value!r}")
            return None
        return value

    def string(self, value: Any, where: str) -> str | None:
        if not isinstance(value, str):
            self.fail(f"{where}: expected a string, got {value!r}")
            return None
        return value

    def identifier(self, value: Any, where: str) -> str | None:
        name = self.string(value, where)
        if name is None:
            return None
        if not _ID_PATTERN.match(name):
            self.fail(
                f"{where}: identifier {name!r} may only use letters, digits, '_', '.', '-'"
            )
            return None
        return name

    def array(self, value: Any, where: str) -> list | None:
        if not isinstance(value, list):
            self.fail(f"{where}: expected a list, got {value!r}")
            return None
        return value

    def mapping(self, value: Any, where: str) -> dict | None:
        if not isinstance(value, dict):
            self.fail(f"{where}: expected an object, got {value!r}")
            return None
        return value


def _parse_schedule(reader: _Reader, raw: Any, where: str) -> DelaySchedule | None:
    items = reader.array(raw, where)
    if items is None:
        return None
    segments = []
    for i, pair in enumerate(items):
        entry = reader.array(pair, f"{where}[{i}]")
        if entry is None or len(entry) != 2:
            reader.fail(f"{where}[{i}]: expected a [start_ms, delay_ms] pair")
            return None
        start = reader.number(entry[0], f"{where}[{i}].start_ms")
        delay = reader.number(entry[1], f"{where}[{i}].delay_ms")
        if start is None or delay is None:
            return None
        segments.append((start, delay))
    try:
        return DelaySchedule(segments=tuple(segments))
    except ConfigurationError as exc:
        reader.fail(f"{where}: {exc}")
        return None


def _parse_ladder(reader: _Reader, raw: Any, where: str) -> tuple[AudioMode, ...] | None:
    items = reader.array(raw, where)
    if items is None:
        return None
    modes = []
    for i, pair in enumerate(items):
        entry = reader.array(pair, f"{where}[{i}]")
        if entry is None or len(entry) != 2:
            reader.fail(f"{where}[{i}]: expected a [fs_hz, fr_samples] pair")
            return None
        fs = reader.integer(entry[0], f"{where}[{i}].fs_hz")
        fr = reader.integer(entry[1], f"{where}[{i}].fr_samples")
        if fs is None or fr is None:
            return None
        try:
            modes.append(AudioMode(fs, fr))
        except ValueError as exc:
            reader.fail(f"{where}[{i}]: {exc}")
            return None
    if not modes:
        reader.fail(f"{where}: ladder must not be empty")
        return None
    return tuple(modes)


def _parse_topology(reader: _Reader, raw: Any) -> Topology | None:
    checkpoint = len(reader.errors)
    obj = reader.mapping(raw, "topology")
    if obj is None:
        return None
    reader.check_keys(obj, _TOPOLOGY_KEYS, "topology")

    nodes: set[str] = set()
    raw_nodes = reader.require(obj, "nodes", "topology")
    items = reader.array(raw_nodes, "topology.nodes") if raw_nodes is not None else None
    if items is not None:
        for i, node in enumerate(items):
            name = reader.identifier(node, f"topology.nodes[{i}]")
            if name is not None:
                nodes.add(name)

    links: list[tuple[str, str, float]] = []
    raw_links = reader.require(obj, "links", "topology")
    items = reader.array(raw_links, "topology.links") if raw_links is not None else None
    if items is not None:
        for i, link in enumerate(items):
            entry = reader.array(link, f"topology.links[{i}]")
            if entry is None or len(entry) != 3:
                reader.fail(f"topology.links[{i}]: expected [node, node, base_delay_ms]")
                continue
            a = reader.identifier(entry[0], f"topology.links[{i}][0]")
            b = reader.identifier(entry[1], f"topology.links[{i}][1]")
            base = reader.number(entry[2], f"topology.links[{i}][2]")
            if a is not None and b is not None and base is not None:
                links.append((a, b, base))

    paths: list[PathDescriptor] = []
    raw_paths = reader.require(obj, "paths", "topology")
    items = reader.array(raw_paths, "topology.paths") if raw_paths is not None else None
    if items is not None:
        for i, raw_path in enumerate(items):
            pobj = reader.mapping(raw_path, f"topology.paths[{i}]")
            if pobj is None:
                continue
            reader.check_keys(pobj, _PATH_KEYS, f"topology.paths[{i}]")
            pid = reader.identifier(reader.require(pobj, "id", f"topology.paths[{i}]"), f"topology.paths[{i}].id")
            hops_raw = reader.require(pobj, "hops", f"topology.paths[{i}]")
            hops = reader.array(hops_raw, f"topology.paths[{i}].hops") if hops_raw is not None else None
            schedule_raw = reader.require(pobj, "schedule", f"topology.paths[{i}]")
            schedule = (
                _parse_schedule(reader, schedule_raw, f"topology.paths[{i}].schedule")
                if schedule_raw is not None
                else None
            )
            jitter = 0.0
            if "jitter_std_ms" in pobj:
                jitter_val = reader.number(pobj["jitter_std_ms"], f"topology.paths[{i}].jitter_std_ms")
                if jitter_val is not None:
                    jitter = jitter_val
            if pid is None or hops is None or schedule is None:
                continue
            hop_names = []
            for j, hop in enumerate(hops):
                name = reader.identifier(hop, f"topology.paths[{i}].hops[{j}]")
                if name is not None:
                    hop_names.append(name)
            if len(hop_names) < 2:
                reader.fail(f"topology.paths[{i}]: hops must list at least two nodes")
                continue
            try:
                schedule_with_jitter = DelaySchedule(schedule.segments, jitter)
                paths.append(PathDescriptor(pid, tuple(hop_names), schedule_with_jitter))
            except ConfigurationError as exc:
                reader.fail(f"topology.paths[{i}]: {exc}")

    if len(reader.errors) > checkpoint:
        return None
    return Topology(nodes=frozenset(nodes), links=tuple(links), paths=tuple(paths))


def _parse_users(reader: _Reader, raw: Any) -> tuple[UserProfile, ...]:
    items = reader.array(raw, "users")
    if items is None:
        return ()
    users: list[UserProfile] = []
    seen: set[str] = set()
    for i, raw_user in enumerate(items):
        obj = reader.mapping(raw_user, f"users[{i}]")
        if obj is None:
            continue
        reader.check_keys(obj, _USER_KEYS, f"users[{i}]")
        uid = reader.identifier(reader.require(obj, "id", f"users[{i}]"), f"users[{i}].id")
        cls_raw = reader.string(reader.require(obj, "class", f"users[{i}]"), f"users[{i}].class")
        d0 = reader.number(reader.require(obj, "d0_ms", f"users[{i}]"), f"users[{i}].d0_ms")
        ladder_raw = reader.require(obj, "ladder", f"users[{i}]")
        ladder = _parse_ladder(reader, ladder_raw, f"users[{i}].ladder") if ladder_raw is not None else None
        floor = None
        if "mode_floor_index" in obj:
            floor = reader.integer(obj["mode_floor_index"], f"users[{i}].mode_floor_index")
        if uid is None or cls_raw is None or d0 is None or ladder is None:
            continue
        if uid in seen:
            reader.fail(f"users[{i}]: duplicate user id {uid!r}")
            continue
        seen.add(uid)
        try:
            service_class = ServiceClass(cls_raw)
        except ValueError:
            reader.fail(f"users[{i}].class: expected 'premium' or 'regular', got {cls_raw!r}")
            continue
        try:
            card = SoundCardProfile(d0_ms=d0, supported_modes=ladder)
            users.append(
                UserProfile(
                    user_id=uid,
                    card=card,
                    service_class=service_class,
                    mode_floor_index=floor,
                )
            )
        except (ConfigurationError, ValueError) as exc:
            reader.fail(f"users[{i}]: {exc}")
    return tuple(users)


def _parse_sessions(reader: _Reader, raw: Any) -> tuple[SessionDecl, ...]:
    items = reader.array(raw, "sessions")
    if items is None:
        return ()
    sessions = []
    for i, raw_session in enumerate(items):
        obj = reader.mapping(raw_session, f"sessions[{i}]")
        if obj is None:
            continue
        reader.check_keys(obj, _SESSION_KEYS, f"sessions[{i}]")
        tx = reader.identifier(reader.require(obj, "tx", f"sessions[{i}]"), f"sessions[{i}].tx")
        rx = reader.identifier(reader.require(obj, "rx", f"sessions[{i}]"), f"sessions[{i}].rx")
        index = 0
        if "initial_mode_index" in obj:
            parsed = reader.integer(obj["initial_mode_index"], f"sessions[{i}].initial_mode_index")
            if parsed is not None:
                index = parsed
        if tx is None or rx is None:
            continue
        sessions.append(SessionDecl(tx=tx, rx=rx, initial_mode_index=index))
    return tuple(sessions)


def parse_scenario(document: str) -> Scenario:
    """Parse and fully validate a scenario document.

    Raises :class:`ScenarioError` carrying every violation found;
    a scenario is never partially usable.
    """
    reader = _Reader()
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"not valid JSON: {exc}"]) from exc
    obj = reader.mapping(data, "document")
    if obj is None:
        raise ScenarioError(reader.errors)
    reader.check_keys(obj, _TOP_KEYS, "document")

    topology_raw = reader.require(obj, "topology", "document")
    users_raw = reader.require(obj, "users", "document")
    sessions_raw = reader.require(obj, "sessions", "document")
    run_raw = reader.require(obj, "run", "document")

    topology = _parse_topology(reader, topology_raw) if topology_raw is not None else None
    users = _parse_users(reader, users_raw) if users_raw is not None else ()
    sessions = _parse_sessions(reader, sessions_raw) if sessions_raw is not None else ()

    probe = ProbeConfig()
    if "probe" in obj:
        pobj = reader.mapping(obj["probe"], "probe")
        if pobj is not None:
            reader.check_keys(pobj, _PROBE_KEYS, "probe")
            interval = probe.interval_ms
            alpha = probe.smoothing_alpha
            if "interval_ms" in pobj:
                value = reader.number(pobj["interval_ms"], "probe.interval_ms")
                interval = interval if value is None else value
            if "alpha" in pobj:
                value = reader.number(pobj["alpha"], "probe.alpha")
                alpha = alpha if value is None else value
            try:
                probe = ProbeConfig(interval_ms=interval, smoothing_alpha=alpha)
            except ConfigurationError as exc:
                reader.fail(f"probe: {exc}")

    policy = ReroutePolicy()
    guard = DEFAULT_UPGRADE_GUARD_MS
    if "policy" in obj:
        pobj = reader.mapping(obj["policy"], "policy")
        if pobj is not None:
            reader.check_keys(pobj, _POLICY_KEYS, "policy")
            hysteresis = policy.hysteresis_ms
            premium = policy.backup_count_premium
            regular = policy.backup_count_regular
            if "hysteresis_ms" in pobj:
                value = reader.number(pobj["hysteresis_ms"], "policy.hysteresis_ms")
                hysteresis = hysteresis if value is None else value
            if "backup_premium" in pobj:
                value = reader.integer(pobj["backup_premium"], "policy.backup_premium")
                premium = premium if value is None else value
            if "backup_regular" in pobj:
                value = reader.integer(pobj["backup_regular"], "policy.backup_regular")
                regular = regular if value is None else value
            if "upgrade_guard_ms" in pobj:
                value = reader.number(pobj["upgrade_guard_ms"], "policy.upgrade_guard_ms")
                guard = guard if value is None else value
            if guard < 0:
                reader.fail(f"policy.upgrade_guard_ms must be >= 0, got {guard}")
            try:
                policy = ReroutePolicy(
                    hysteresis_ms=hysteresis,
                    backup_count_premium=premium,
                    backup_count_regular=regular,
                )
            except ConfigurationError as exc:
                reader.fail(f"policy: {exc}")

    budget = DelayBudget()
    if "budget" in obj:
        bobj = reader.mapping(obj["budget"], "budget")
        if bobj is not None:
            reader.check_keys(bobj, _BUDGET_KEYS, "budget")
            if "ept_ms" in bobj:
                ept = reader.number(bobj["ept_ms"], "budget.ept_ms")
                if ept is not None:
                    try:
                        budget = DelayBudget(ept_ms=ept)
                    except ConfigurationError as exc:
                        reader.fail(f"budget: {exc}")

    duration = 0.0
    seed = 0
    if run_raw is not None:
        robj = reader.mapping(run_raw, "run")
        if robj is not None:
            reader.check_keys(robj, _RUN_KEYS, "run")
            raw_duration = reader.require(robj, "duration_ms", "run")
            if raw_duration is not None:
                parsed = reader.number(raw_duration, "run.duration_ms")
                if parsed is not None:
                    duration = parsed
            if "seed" in robj:
                parsed_seed = reader.integer(robj["seed"], "run.seed")
                if parsed_seed is not None:
                    seed = parsed_seed

    violations = list(reader.errors)
    if topology is None:
        raise ScenarioError(violations or ["topology section unusable"])

    scenario = Scenario(
        topology=topology,
        users=users,
        sessions=sessions,
        probe=probe,
        policy=policy,
        budget=budget,
        duration_ms=duration,
        seed=seed,
        upgrade_guard_ms=guard,
    )
    violations.extend(scenario.validate())
    if violations:
        raise ScenarioError(violations)
    return scenario


def serialize_scenario(scenario: Scenario) -> str:
    """Render a scenario back to its document form (parse round-trips)."""
    doc: dict[str, Any] = {
        "topology": {
            "nodes": sorted(scenario.topology.nodes),
            "links": [list(link) for link in scenario.topology.links],
            "paths": [
                {
                    "id": p.id,
                    "hops": list(p.hops),
                    "schedule": [list(seg) for seg in p.schedule.segments],
                    **(
                        {"jitter_std_ms": p.schedule.jitter_std_ms}
                        if p.schedule.jitter_std_ms
                        else {}
                    ),
                }
                for p in scenario.topology.paths
            ],
        },
        "users": [
            {
                "id": u.user_id,
                "class": u.service_class.value,
                "d0_ms": u.card.d0_ms,
                "ladder": [
                    [m.sampling_rate_hz, m.frame_size_samples]
                    for m in u.card.supported_modes
                ],
                **(
                    {"mode_floor_index": u.mode_floor_index}
                    if u.mode_floor_index is not None
                    else {}
                ),
            }
            for u in scenario.users
        ],
        "sessions": [
            {"tx": s.tx, "rx": s.rx, "initial_mode_index": s.initial_mode_index}
            for s in scenario.sessions
        ],
        "probe": {
            "interval_ms": scenario.probe.interval_ms,
            "alpha": scenario.probe.smoothing_alpha,
        },
        "policy": {
            "hysteresis_ms": scenario.policy.hysteresis_ms,
            "backup_premium": scenario.policy.backup_count_premium,
            "backup_regular": scenario.policy.backup_count_regular,
            "upgrade_guard_ms": scenario.upgrade_guard_ms,
        },
        "budget": {"ept_ms": scenario.budget.ept_ms},
        "run": {"duration_ms": scenario.duration_ms, "seed": scenario.seed},
    }
    return json.dumps(doc, indent=2) + "\n"


def load_scenario_file(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def bundled_scenario_names() -> list[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files(__package__) / "scenarios"
    return sorted(
        entry.name[: -len(_SCENARIO_SUFFIX)]
        for entry in root.iterdir()
        if entry.name.endswith(_SCENARIO_SUFFIX)
    )


def load_bundled_scenario(name: str) -> Scenario:
    """Load a bundled scenario by its name (without extension)."""
    resource = resources.files(__package__) / "scenarios" / f"{name}{_SCENARIO_SUFFIX}"
    try:
        text = resource.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(
            f"no bundled scenario {name!r}; available: {', '.join(bundled_scenario_names())}"
        ) from None
    return parse_scenario(text)
