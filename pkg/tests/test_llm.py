import json
from pathlib import Path

import httpx
import pytest

from conftest import small_universe
from meetmate.coder import CoderContext, CoderError, RuleBasedCoder
from meetmate.llm import (
    FixtureTransport,
    HttpTransport,
    LlmChecker,
    LlmCoder,
    LlmConfig,
    LlmTranslator,
    PromptBundle,
    TransportError,
    parse_checker_output,
    parse_manager_output,
)
from meetmate.session import (
    AddConstraint,
    ChangePriority,
    DeleteConstraint,
    GenerateSuggestion,
    MeetingRequest,
    MessageUser,
    RuleChecker,
    TranslationError,
    dispatch,
    handle_message,
    open_session,
)
from meetmate.timegrid import Instant

FIXTURES = Path(__file__).parent / "fixtures"
UNIVERSE = small_universe()
CONFIG = LlmConfig(endpoint="https://llm.invalid/v1/chat", api_key="sk-secret-123")
CODER_CTX = CoderContext("Anton", ("Anton", "Bella"), 30)


def fresh_session():
    request = MeetingRequest(
        organizer="p1",
        attendees=("p1", "p2"),
        duration_minutes=30,
        horizon_start=Instant(0),
        horizon_end=Instant(5 * 24 * 60),
    )
    return open_session("s-000001", request, UNIVERSE)


def session_with_constraint():
    session = fresh_session()
    dispatch(session, [AddConstraint("before 11am")], UNIVERSE, RuleChecker(), RuleBasedCoder())
    return session


# --------------------------------------------------------------------------
# Config


def test_api_key_never_in_repr():
    assert "sk-secret-123" not in repr(CONFIG)


def test_config_from_env():
    env = {
        "MEETMATE_LLM_ENDPOINT": "https://example.invalid/chat",
        "MEETMATE_LLM_KEY": "k",
        "MEETMATE_LLM_MODEL": "m",
    }
    config = LlmConfig.from_env(env)
    assert (config.endpoint, config.api_key, config.model) == (
        "https://example.invalid/chat", "k", "m",
    )
    with pytest.raises(ValueError):
        LlmConfig.from_env({})


def test_temperature_is_pinned():
    with pytest.raises(ValueError):
        LlmConfig(endpoint="x", temperature=0.7)


# --------------------------------------------------------------------------
# Prompts


def test_prompts_render_fully():
    bundle = PromptBundle()
    session = session_with_constraint()
    for messages in (
        bundle.render_manager(session, "hello"),
        bundle.render_checker("before 11am"),
        bundle.render_coder("before 11am", CODER_CTX),
        bundle.render_rephrase("before 11am"),
    ):
        [message] = messages
        assert message["role"] == "user"
        for token in ("$constraints", "$message", "$text", "$duration", "$organizer"):
            assert token not in message["content"]
    listing = bundle.render_manager(session, "hi")[0]["content"]
    assert "c-1 (priority 1): before 11am" in listing


# --------------------------------------------------------------------------
# Manager parsing and the translator


def test_translate_add_from_recorded_fixture():
    transport = FixtureTransport.from_file(FIXTURES / "manager_transcript.json")
    translator = LlmTranslator(CONFIG, transport)
    actions = translator.translate("I have to meet before 11am", fresh_session())
    assert actions == [AddConstraint("Meeting before 11am", rank_hint=0)]


def test_translate_two_lines_in_order():
    reply = "\n".join(
        [
            '{"ACTION": "ADD", "INPUT": {"constraint": "Meeting before 11am", "priority": 1}}',
            '{"ACTION": "MESSAGE", "INPUT": {"text": "Done."}}',
        ]
    )
    transport = FixtureTransport([{"reply": reply}])
    actions = LlmTranslator(CONFIG, transport).translate("msg", fresh_session())
    assert actions == [
        AddConstraint("Meeting before 11am", rank_hint=0),
        MessageUser("Done."),
    ]


def test_translate_garbage_fails_after_retries():
    transport = FixtureTransport([{"reply": "I cannot help with that."}] * 3)
    with pytest.raises(TranslationError):
        LlmTranslator(CONFIG, transport).translate("msg", fresh_session())
    assert transport.index == 3  # initial try plus two retries


def test_parse_delete_requires_known_id():
    session = session_with_constraint()
    good = parse_manager_output(
        '{"ACTION": "DELETE", "INPUT": {"constraint_id": "c-1"}}', session
    )
    assert good == [DeleteConstraint("c-1")]
    with pytest.raises(TranslationError):
        parse_manager_output(
            '{"ACTION": "DELETE", "INPUT": {"constraint_id": "c-9"}}', session
        )


def test_parse_change_priority_is_one_based():
    session = session_with_constraint()
    [action] = parse_manager_output(
        '{"ACTION": "CHANGE_PRIORITY", "INPUT": {"constraint_id": "c-1", "priority": 2}}',
        session,
    )
    assert action == ChangePriority("c-1", new_rank=1)


def test_parse_suggest_and_unknown_action():
    session = fresh_session()
    assert parse_manager_output('{"ACTION": "SUGGEST", "INPUT": {}}', session) == [
        GenerateSuggestion()
    ]
    with pytest.raises(TranslationError):
        parse_manager_output('{"ACTION": "RESCHEDULE", "INPUT": {}}', session)


def test_add_default_priority_goes_on_top():
    session = fresh_session()
    [action] = parse_manager_output(
        '{"ACTION": "ADD", "INPUT": {"constraint": "whatever"}}', session
    )
    assert action == AddConstraint("whatever", rank_hint="top")


# --------------------------------------------------------------------------
# Checker parsing


def test_checker_yes_no_and_rationale():
    yes = parse_checker_output('{"response": "yes", "rationale": "calendars suffice"}')
    assert yes.supported and yes.rationale == "calendars suffice"
    no = parse_checker_output('{"response": "No", "rationale": "needs weather"}')
    assert not no.supported


def test_checker_via_fixture_transport():
    transport = FixtureTransport(
        [
            {"expect_user": "before 11am", "reply": '{"response": "yes", "rationale": "ok"}'},
            {"expect_user": "sunny", "reply": '{"response": "no", "rationale": "weather"}'},
        ]
    )
    checker = LlmChecker(CONFIG, transport)
    assert checker.check("before 11am").supported
    assert not checker.check("only if it is sunny").supported


def test_checker_malformed_reply_raises_transport_error():
    transport = FixtureTransport([{"reply": "maybe?"}] * 3)
    with pytest.raises(TransportError):
        LlmChecker(CONFIG, transport).check("before 11am")


# --------------------------------------------------------------------------
# Coder


def test_coder_from_recorded_fixture():
    transport = FixtureTransport.from_file(FIXTURES / "coder_transcript.json")
    coder = LlmCoder(CONFIG, transport)
    assert coder.code("Meeting before 11am", CODER_CTX) == "start.hour < 11"
    assert coder.code("Tuesday or Wednesday would suit everyone", CODER_CTX) == "day in {TUE, WED}"


def test_coder_strips_code_fences():
    transport = FixtureTransport([{"reply": "```\nstart.hour < 11\n```"}])
    assert LlmCoder(CONFIG, transport).code("x", CODER_CTX) == "start.hour < 11"


def test_coder_invalid_dsl_is_a_coder_failure():
    transport = FixtureTransport([{"reply": "candidate_time.start.hour < 11"}] * 3)
    with pytest.raises(CoderError):
        LlmCoder(CONFIG, transport).code("before 11am", CODER_CTX)


def test_coder_rephrase_pre_pass():
    transport = FixtureTransport(
        [
            {"expect_user": "really early, like before lunch starts", "reply": "Meeting before 11am"},
            {"expect_user": "Meeting before 11am", "reply": "start.hour < 11"},
        ]
    )
    coder = LlmCoder(CONFIG, transport, rephrase=True)
    assert coder.code("really early, like before lunch starts", CODER_CTX) == "start.hour < 11"
    assert transport.index == 2


# --------------------------------------------------------------------------
# No bypass: adapter output rides the normal session rails


def test_llm_translated_add_still_faces_the_checker():
    reply = '{"ACTION": "ADD", "INPUT": {"constraint": "we need a conference room", "priority": 1}}'
    translator = LlmTranslator(CONFIG, FixtureTransport([{"reply": reply}]))
    session = fresh_session()
    result = handle_message(
        session, "book a room", UNIVERSE, translator, RuleChecker(), RuleBasedCoder()
    )
    assert session.constraints == []
    assert "cannot schedule" in result.message


def test_llm_translated_add_lands_when_supported():
    reply = '{"ACTION": "ADD", "INPUT": {"constraint": "Meeting before 11am", "priority": 1}}'
    translator = LlmTranslator(CONFIG, FixtureTransport([{"reply": reply}]))
    session = fresh_session()
    handle_message(session, "early please", UNIVERSE, translator, RuleChecker(), RuleBasedCoder())
    assert [c.source for c in session.constraints] == ["start.hour < 11"]


# --------------------------------------------------------------------------
# Transports


def test_fixture_transport_flags_prompt_drift():
    transport = FixtureTransport([{"expect_user": "unrelated", "reply": "x"}])
    with pytest.raises(TransportError):
        transport.complete([{"role": "user", "content": "something else"}], CONFIG)


def canned_http(handler):
    return HttpTransport(client=httpx.Client(transport=httpx.MockTransport(handler)))


def test_http_transport_round_trip():
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return httpx.Response(
            200, json={"choices": [{"message": {"content": "start.hour < 11"}}]}
        )

    text = canned_http(handler).complete([{"role": "user", "content": "hi"}], CONFIG)
    assert text == "start.hour < 11"
    assert seen["auth"] == "Bearer sk-secret-123"
    assert seen["body"]["temperature"] == 0.0
    assert seen["body"]["messages"] == [{"role": "user", "content": "hi"}]


def test_http_transport_maps_failures():
    def server_error(request):
        return httpx.Response(500, text="boom")

    with pytest.raises(TransportError):
        canned_http(server_error).complete([{"role": "user", "content": "hi"}], CONFIG)

    def wrong_shape(request):
        return httpx.Response(200, json={"unexpected": True})

    with pytest.raises(TransportError):
        canned_http(wrong_shape).complete([{"role": "user", "content": "hi"}], CONFIG)
