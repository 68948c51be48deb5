import pytest

from meetmate import dsl
from meetmate.coder import Coder, CoderContext, CoderError, RuleBasedCoder

CTX = CoderContext(
    organizer_name="Anton",
    attendee_names=("Anton", "Bella", "Dana Holt"),
    duration_minutes=30,
)

GOLDEN = [
    ("I need something before 11am", "start.hour < 11"),
    ("Meeting before 11am", "start.hour < 11"),
    ("before 2:30pm", "start.time < 14:30"),
    ("no later than 9:15am", "start.time < 09:15"),
    ("after 2pm", "start.time >= 14:00"),
    ("from 14:00", "start.time >= 14:00"),
    ("by 5pm", "end.time <= 17:00"),
    ("must end by 17:00", "end.time <= 17:00"),
    ("wrap up by 3pm", "end.time <= 15:00"),
    ("in the morning", "end.time <= 12:00"),
    ("No meetings in the morning", "start.time >= 12:00"),
    ("sometime in the afternoon", "start.time >= 12:00"),
    ("not in the afternoon", "end.time <= 12:00"),
    ("in the evening", "start.time >= 17:00"),
    ("on Tuesday or Wednesday", "day in {TUE, WED}"),
    ("Monday works", "day in {MON}"),
    ("No meetings on Friday", "not day in {FRI}"),
    ("avoid Mondays and Tuesdays", "not day in {MON, TUE}"),
    ("If possible, Anton should attend", 'free("Anton")'),
    ("Anton needs to be at this meeting", 'free("Anton")'),
    ("Dana Holt must be there", 'free("Dana Holt")'),
    ("everyone should attend", "all_free"),
    ("all attendees must be available", "all_free"),
    ("30 minute break before the meeting", "gap_before >= 30m"),
    ("15 minute buffer after", "gap_after >= 15m"),
    ("5 minute gap between meetings", "gap_before >= 5m and gap_after >= 5m"),
    ("keep my lunch free", "avoid(12:00-13:00)"),
    ("not during lunch", "avoid(12:00-13:00)"),
    ("before lunch", "start.time < 12:00"),
    ("after lunch", "start.time >= 13:00"),
    ("within the next 3 days", "within_days(3)"),
    ("in the next 10 days", "within_days(10)"),
    ("today if you can", "day_index == 0"),
    ("tomorrow", "day_index == 1"),
    ("on 2024-03-05", "on(2024-03-05)"),
    ("between 2pm and 4pm", "start.time >= 14:00 and end.time <= 16:00"),
    ("between 4pm and 2pm", "start.time >= 14:00 and end.time <= 16:00"),
    ("start at 10am", "start.time == 10:00"),
]


@pytest.mark.parametrize("text,expected", GOLDEN)
def test_translation_table(text, expected):
    assert RuleBasedCoder().code(text, CTX) == expected


@pytest.mark.parametrize("text,_", GOLDEN)
def test_output_always_parses(text, _):
    source = RuleBasedCoder().code(text, CTX)
    assert dsl.render(dsl.parse(source)) == source


def test_two_names_combine():
    out = RuleBasedCoder().code("Anton and Bella must attend", CTX)
    assert out == 'free("Anton") and free("Bella")'


def test_name_outside_context_is_not_attendance():
    with pytest.raises(CoderError):
        RuleBasedCoder().code("Zora should attend", CTX)


@pytest.mark.parametrize(
    "text",
    [
        "bring snacks",
        "make it fun",
        "a sunny day please",
        "before teatime",
        "lunch would be nice",  # ambiguous: no avoid/keep cue
    ],
)
def test_untranslatable_raises(text):
    with pytest.raises(CoderError):
        RuleBasedCoder().code(text, CTX)


def test_error_carries_original_text():
    with pytest.raises(CoderError, match="bring snacks"):
        RuleBasedCoder().code("bring snacks", CTX)


def test_whole_hour_without_meridiem_uses_clock_form():
    # "before 11" has no am/pm, so we do not commit to the hour idiom
    assert RuleBasedCoder().code("before 11", CTX) == "start.time < 11:00"


def test_satisfies_coder_protocol():
    coder: Coder = RuleBasedCoder()
    assert coder.code("tomorrow", CTX) == "day_index == 1"
