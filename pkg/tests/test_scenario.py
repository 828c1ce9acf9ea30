import json

import pytest

from nmpsim.errors import ScenarioError
from nmpsim.scenario import (
    Scenario,
    bundled_scenario_names,
    load_bundled_scenario,
    parse_scenario,
    serialize_scenario,
)


def minimal_doc():
    return {
        "topology": {
            "nodes": ["A", "B", "S1"],
            "links": [["A", "S1", 0.5], ["S1", "B", 0.5]],
            "paths": [{"id": "P1", "hops": ["A", "S1", "B"], "schedule": [[0, 1.0]]}],
        },
        "users": [
            {"id": "A", "class": "regular", "d0_ms": 0.0, "ladder": [[44100, 512]]},
            {"id": "B", "class": "regular", "d0_ms": 0.0, "ladder": [[44100, 512]]},
        ],
        "sessions": [{"tx": "A", "rx": "B"}],
        "run": {"duration_ms": 10000.0, "seed": 0},
    }


def parse(doc) -> Scenario:
    return parse_scenario(json.dumps(doc))


def violations_of(doc) -> list[str]:
    with pytest.raises(ScenarioError) as err:
        parse(doc)
    return err.value.violations


class TestParseScenario:
    def test_bundled_ramp_document(self):
        scenario = load_bundled_scenario("congestion-ramp")
        assert [p.id for p in scenario.topology.paths] == ["P1", "P2", "P3"]
        assert len(scenario.users) == 2
        assert all(len(u.card.supported_modes) == 3 for u in scenario.users)
        assert scenario.probe.interval_ms == 500.0
        assert scenario.budget.ept_ms == 25.0

    def test_minimal_document_with_defaults(self):
        scenario = parse(minimal_doc())
        assert scenario.probe.interval_ms == 500.0
        assert scenario.probe.smoothing_alpha == 1.0
        assert scenario.policy.hysteresis_ms == 2.0
        assert scenario.budget.ept_ms == 25.0
        assert scenario.upgrade_guard_ms == 1.0
        assert scenario.seed == 0

    def test_unknown_keys_rejected(self):
        doc = minimal_doc()
        doc["probes"] = {}
        assert any("unknown key 'probes'" in v for v in violations_of(doc))
        doc = minimal_doc()
        doc["run"]["duration"] = 5
        assert any("run: unknown key 'duration'" in v for v in violations_of(doc))

    def test_missing_keys_named(self):
        assert any("missing required key 'topology'" in v for v in violations_of({}))
        doc = minimal_doc()
        del doc["run"]["duration_ms"]
        assert any("missing required key 'duration_ms'" in v for v in violations_of(doc))

    def test_empty_document_lists_all_missing_sections(self):
        out = violations_of({})
        for key in ("topology", "users", "sessions", "run"):
            assert any(f"'{key}'" in v for v in out)

    def test_ladder_ordering_violation(self):
        doc = minimal_doc()
        doc["users"][0]["ladder"] = [[48000, 256], [44100, 512]]
        doc["users"][1]["ladder"] = [[48000, 256], [44100, 512]]
        assert any("does not reduce blocking delay" in v for v in violations_of(doc))

    def test_mismatched_session_ladders(self):
        doc = minimal_doc()
        doc["users"][1]["ladder"] = [[48000, 512]]
        assert any("different ladders" in v for v in violations_of(doc))

    def test_unknown_session_user(self):
        doc = minimal_doc()
        doc["sessions"][0]["rx"] = "C"
        assert any("unknown user 'C'" in v for v in violations_of(doc))

    def test_session_self_loop(self):
        doc = minimal_doc()
        doc["sessions"][0]["rx"] = "A"
        assert any("loops to itself" in v for v in violations_of(doc))

    def test_no_path_between_endpoints(self):
        doc = minimal_doc()
        doc["topology"]["nodes"].append("C")
        doc["users"].append(
            {"id": "C", "class": "regular", "d0_ms": 0.0, "ladder": [[44100, 512]]}
        )
        doc["sessions"] = [{"tx": "A", "rx": "C"}]
        assert any("no path declared between" in v for v in violations_of(doc))

    def test_floor_on_regular_user_rejected(self):
        doc = minimal_doc()
        doc["users"][0]["mode_floor_index"] = 0
        assert any("premium-only" in v for v in violations_of(doc))

    def test_initial_mode_outside_floor(self):
        doc = minimal_doc()
        doc["sessions"][0]["initial_mode_index"] = 1
        assert any("initial_mode_index 1 outside" in v for v in violations_of(doc))

    def test_duplicate_user_id(self):
        doc = minimal_doc()
        doc["users"].append(dict(doc["users"][0]))
        assert any("duplicate user id" in v for v in violations_of(doc))

    def test_schedule_must_start_at_zero(self):
        doc = minimal_doc()
        doc["topology"]["paths"][0]["schedule"] = [[100, 1.0]]
        assert any("start at 0" in v for v in violations_of(doc))

    def test_multiple_violations_reported_together(self):
        doc = minimal_doc()
        doc["sessions"][0]["rx"] = "C"
        doc["users"][0]["ladder"] = [[48000, 256], [44100, 512]]
        doc["extra"] = 1
        assert len(violations_of(doc)) >= 3

    def test_not_json(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario("probe: fast")
        assert any("not valid JSON" in v for v in err.value.violations)

    def test_type_errors_are_named(self):
        doc = minimal_doc()
        doc["run"]["seed"] = "abc"
        assert any("run.seed: expected an integer" in v for v in violations_of(doc))
        doc = minimal_doc()
        doc["users"][0]["ladder"] = [[44100.5, 512]]
        assert any("expected an integer" in v for v in violations_of(doc))

    def test_runaway_probe_grid_rejected(self):
        doc = minimal_doc()
        doc["run"]["duration_ms"] = 1e15
        assert any("probe grid too large" in v for v in violations_of(doc))

    def test_identifiers_reject_csv_hostile_characters(self):
        # ids land in CSV cells, so commas/quotes/spaces are refused
        doc = minimal_doc()
        doc["topology"]["paths"][0]["id"] = "P,1"
        assert any("identifier" in v for v in violations_of(doc))
        doc = minimal_doc()
        doc["users"][0]["id"] = 'A"B'
        doc["sessions"][0]["tx"] = 'A"B'
        assert any("identifier" in v for v in violations_of(doc))


class TestRoundTrip:
    @pytest.mark.parametrize("name", sorted(bundled_scenario_names()))
    def test_parse_serialize_parse_is_identity(self, name):
        first = load_bundled_scenario(name)
        second = parse_scenario(serialize_scenario(first))
        assert first == second

    def test_serialized_form_is_stable(self):
        scenario = load_bundled_scenario("congestion-ramp")
        text = serialize_scenario(scenario)
        assert serialize_scenario(parse_scenario(text)) == text


class TestSessionIds:
    def test_duplicate_declarations_get_suffixes(self):
        doc = minimal_doc()
        doc["sessions"] = [{"tx": "A", "rx": "B"}, {"tx": "A", "rx": "B"}]
        scenario = parse(doc)
        assert scenario.session_ids() == ("A->B", "A->B#2")
