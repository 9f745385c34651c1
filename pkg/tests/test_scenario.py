"""Scenario file parsing, templates, and round-trip serialization."""

import pytest

from iotbed.errors import ScenarioError
from iotbed.model import Command, Phase
from iotbed.scenario import parse_scenario, serialize_scenario, load_scenario

BASIC = """\
scenario: smoke
option: devices=devices.dev
option: k=3

test: first
action: USER, cam1, TEST, {}
action: USER, port_risk, TEST, {target=cam1, ports=1-1024}

test: second
phase: context
action: USER, GPS_SIM, START, {route.ctx}
"""


def test_parse_basic_shape():
    s = parse_scenario(BASIC)
    assert s.name == "smoke"
    assert s.option_dict() == {"devices": "devices.dev", "k": 3}
    assert [t.name for t in s.tests] == ["first", "second"]
    assert s.tests[0].phase is Phase.STANDARD
    assert s.tests[1].phase is Phase.CONTEXT


def test_parse_action_fields():
    s = parse_scenario(BASIC)
    probe = s.tests[0].actions[1]
    assert probe.initiator == "USER"
    assert probe.element == "port_risk"
    assert probe.command is Command.TEST
    assert probe.param_dict() == {"target": "cam1", "ports": "1-1024"}


def test_bare_token_param_becomes_file():
    s = parse_scenario(BASIC)
    start = s.tests[1].actions[0]
    assert start.param_dict() == {"file": "route.ctx"}


def test_param_values_coerce_int_then_float_then_str():
    s = parse_scenario(
        "scenario: s\ntest: t\n"
        "action: USER, e, SET, {a=3, b=2.5, c=hello}\n")
    act = s.tests[0].actions[0]
    assert act.get("a") == 3 and isinstance(act.get("a"), int)
    assert act.get("b") == 2.5
    assert act.get("c") == "hello"


def test_comments_and_blanks_ignored():
    s = parse_scenario(
        "# header\nscenario: s\n\n   # indent\ntest: t\n"
        "action: USER, e, TEST, {}\n")
    assert len(s.tests) == 1


def test_duplicate_test_name_rejected():
    text = ("scenario: s\ntest: t\naction: USER, e, TEST, {}\n"
            "test: t\naction: USER, e, TEST, {}\n")
    with pytest.raises(ScenarioError):
        parse_scenario(text)


def test_action_outside_test_rejected():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("scenario: s\naction: USER, e, TEST, {}\n")
    assert "line 2" in str(err.value)


def test_unknown_phase_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("scenario: s\ntest: t\nphase: bogus\n"
                       "action: USER, e, TEST, {}\n")


def test_unknown_directive_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("scenario: s\nbogus: x\n")


def test_malformed_action_reports_line():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("scenario: s\ntest: t\naction: USER, e, TEST\n")
    assert "line 3" in str(err.value)


def test_unknown_command_rejected_with_line():
    with pytest.raises(ScenarioError):
        parse_scenario("scenario: s\ntest: t\naction: USER, e, FLY, {}\n")


def test_empty_test_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("scenario: s\ntest: t\ntest: u\n"
                       "action: USER, e, TEST, {}\n")


def test_template_expansion(tmp_path):
    tpl = tmp_path / "tpl"
    tpl.mkdir()
    (tpl / "probe.test").write_text(
        "action: USER, cam1, TEST, {}\n"
        "action: USER, port_risk, TEST, {target=cam1}\n")
    scn = tmp_path / "s.scn"
    scn.write_text(
        "scenario: s\n"
        f"template_dir: {tpl}\n"
        "test: t\n"
        "use: probe\n"
        "action: USER, fingerprint, TEST, {target=cam1}\n")
    s = load_scenario(str(scn))
    cmds = [(a.element, a.command) for a in s.tests[0].actions]
    assert cmds == [("cam1", Command.TEST), ("port_risk", Command.TEST),
                    ("fingerprint", Command.TEST)]


def test_missing_template_rejected(tmp_path):
    scn = tmp_path / "s.scn"
    scn.write_text("scenario: s\ntest: t\nuse: nothere\n"
                   "action: USER, e, TEST, {}\n")
    with pytest.raises(ScenarioError):
        load_scenario(str(scn))


def test_serialize_round_trip():
    s = parse_scenario(BASIC)
    text = serialize_scenario(s)
    again = parse_scenario(text)
    assert again == s
    # render is stable too
    assert serialize_scenario(again) == text


def test_serialize_phase_line_only_for_context():
    text = serialize_scenario(parse_scenario(BASIC))
    assert text.count("phase: context") == 1
    assert "phase: standard" not in text
