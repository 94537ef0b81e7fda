import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import respondent_priors_dict
from mobilicast.backend import GenerationRecord
from mobilicast.ingest import priors_from_dict
from mobilicast.model import LAST_MINUTE, DiaryEntry
from mobilicast.parser import (
    FilterConfig,
    RejectionKind,
    RejectionReason,
    TableError,
    TableRow,
    build_corpus,
    extract_table,
    format_time,
    parse_completion,
    parse_diary,
    parse_entries,
    parse_time,
    render_diary_table,
)
from mobilicast.persona import plan_assignments

SAMPLE_CHATTER = """Sure! Here is the table she created:

| Place Visited | Arrival Time | Departure Time | Location Type |
|---|---|---|---|
| Home | 00:00 AM | 07:30 AM | 1 |
| Work | 08:00 AM | 05:00 PM | 3 |
| Home | 05:30 PM | 11:59 PM | 1 |

I hope this helps! Let me know if you need another table.
"""


def rows(*cells):
    """TableRow list from (place, arrive, depart, code) tuples."""
    return [TableRow(*map(str, r)) for r in cells]


def hm(minute):
    return format_time(minute)


def test_extract_sample_with_chatter():
    out = extract_table(SAMPLE_CHATTER)
    assert [r.place for r in out] == ["Home", "Work", "Home"]
    assert out[1] == TableRow("Work", "08:00 AM", "05:00 PM", "3")


def test_extract_no_pipes():
    with pytest.raises(TableError) as e:
        extract_table("I cannot produce a travel diary for this person.")
    assert e.value.kind is RejectionKind.NoTableFound


def test_extract_empty_table():
    raw = "| Place Visited | Arrival Time | Departure Time | Location Type |\n|---|---|---|---|\n\nDone."
    with pytest.raises(TableError) as e:
        extract_table(raw)
    assert e.value.kind is RejectionKind.EmptyTable


def test_extract_header_tolerance_and_column_order():
    raw = (
        "|  **location TYPE** | place   visited | Departure time | ARRIVAL TIME |\n"
        "|:---:|:---|---:|---|\n"
        "| 1 | Home | 07:00 AM | 00:00 AM |\n"
    )
    assert extract_table(raw) == [TableRow("Home", "00:00 AM", "07:00 AM", "1")]


def test_extract_skips_unrelated_table_and_ignores_later_ones():
    raw = (
        "| a | b |\n|---|---|\n| 1 | 2 |\n\n"
        + SAMPLE_CHATTER
        + "\n| Place Visited | Arrival Time | Departure Time | Location Type |\n|--|--|--|--|\n| X | 1:00 AM | 2:00 AM | 5 |\n"
    )
    assert len(extract_table(raw)) == 3


def test_escaped_pipe_in_place_name():
    raw = render_diary_table([DiaryEntry("Bar | Grill", 0, 1439, 15)])
    assert extract_table(raw)[0].place == "Bar | Grill"


@pytest.mark.parametrize("text,minute", [
    ("00:00 AM", 0),
    ("11:59 PM", 1439),
    ("12:30 PM", 750),
    ("12:00 AM", 0),
    ("12:15 AM", 15),
    ("7:30 AM", 450),
    ("07:30 am", 450),
    ("5:00PM", 1020),
    ("5:00 p.m.", 1020),
    ("17:45", 1065),
    ("00:05", 5),
])
def test_parse_time(text, minute):
    assert parse_time(text) == minute


@pytest.mark.parametrize("text", ["", "noon", "13:00 PM", "00:10 PM", "24:00", "7:60 AM", "[HH:MM AM/PM]", "7 AM"])
def test_parse_time_rejects(text):
    with pytest.raises(Exception):
        parse_time(text)


def test_format_time_round_trip_all_minutes():
    for m in range(LAST_MINUTE + 1):
        assert parse_time(format_time(m)) == m
    assert format_time(0) == "00:00 AM" and format_time(1439) == "11:59 PM" and format_time(750) == "12:30 PM"


def test_valid_commuter_day():
    r = rows(("Home", hm(0), hm(450), 1), ("Work", hm(480), hm(1020), 3), ("Home", hm(1050), hm(1439), 1))
    entries = parse_entries(r)
    assert [(e.arrival_min, e.departure_min) for e in entries] == [(0, 450), (480, 1020), (1050, 1439)]
    gaps = [b.arrival_min - a.departure_min for a, b in zip(entries, entries[1:])]
    assert gaps == [30, 30]


def test_afternoon_typo_is_non_monotonic():
    # a plausible slip: AM written for the 5 PM Work departure
    r = rows(("Home", "00:00 AM", "07:30 AM", 1), ("Work", "08:00 AM", "05:00 AM", 3),
             ("Home", "05:30 AM", "11:59 PM", 1))
    assert parse_entries(r).kind is RejectionKind.NonMonotonicTimes


@pytest.mark.parametrize("gap,kind", [(120, None), (121, RejectionKind.GapTooLarge), (180, RejectionKind.GapTooLarge)])
def test_gap_threshold(gap, kind):
    r = rows(("Home", hm(0), hm(400), 1), ("Work", hm(400 + gap), hm(1439), 3))
    result = parse_entries(r)
    if kind is None:
        assert isinstance(result, tuple) and len(result) == 2
    else:
        assert result.kind is kind


def test_negative_gap():
    r = rows(("Home", hm(0), hm(500), 1), ("Work", hm(450), hm(1439), 3))
    assert parse_entries(r).kind is RejectionKind.NegativeGap


def test_missing_time():
    r = rows(("Home", hm(0), "", 1), ("Work", hm(480), hm(1439), 3))
    assert parse_entries(r).kind is RejectionKind.MissingTime


def test_missing_time_allowed_when_not_required():
    r = rows(("Home", "", "", 1), ("Work", "", "", 3))
    entries = parse_entries(r, FilterConfig(require_times=False))
    assert [(e.arrival_min, e.departure_min) for e in entries] == [(0, 0), (0, 0)]


def test_unparseable_time():
    r = rows(("Home", "sometime", hm(450), 1))
    assert parse_entries(r).kind is RejectionKind.UnparseableTime


def test_code_97_dropped_or_kept():
    r = rows(("Home", hm(0), hm(450), 1), ("Somewhere", hm(480), hm(1439), 97))
    assert parse_entries(r, FilterConfig(drop_code_97=True)).kind is RejectionKind.Code97Present
    assert parse_entries(r, FilterConfig(drop_code_97=False))[1].nhts_code == 97


@pytest.mark.parametrize("code", ["20", "0", "Home", "", "98"])
def test_unknown_code(code):
    assert parse_entries(rows(("Home", hm(0), hm(1439), code))).kind is RejectionKind.UnknownCode


def test_code_with_label_text():
    assert parse_entries(rows(("Home", hm(0), hm(1439), "1: Regular home activities")))[0].nhts_code == 1


def test_first_failure_reported():
    r = rows(("Home", hm(0), hm(450), 1), ("Work", hm(700), hm(800), 3), ("X", "", hm(1439), 1))
    assert parse_entries(r).kind is RejectionKind.GapTooLarge


def test_parse_diary_attaches_assignment():
    (a, _), = plan_assignments(priors_from_dict(respondent_priors_dict()), dt.date(2016, 5, 5), dt.date(2016, 5, 5), 1, 0)
    d = parse_diary(extract_table(SAMPLE_CHATTER), a)
    assert d.persona_id == a.persona_id and d.survey_date == dt.date(2016, 5, 5)
    assert d.persona["sex"] == "female"


def _cell_text(draw_kind, minute):
    return format_time(minute) if draw_kind else ""


@settings(max_examples=300, deadline=None)
@given(st.lists(
    st.tuples(st.integers(0, 1439), st.integers(0, 1439), st.sampled_from([1, 3, 11, 13, 97, 20, 5]),
              st.booleans(), st.booleans()),
    min_size=1, max_size=8,
), st.integers(1, 200), st.booleans(), st.booleans())
def test_accepted_diaries_satisfy_all_constraints(table, max_gap, drop97, require):
    """Adversarial tables: acceptance implies every invariant and filter holds."""
    r = [TableRow("p", _cell_text(ha, a), _cell_text(hd, d), str(c)) for a, d, c, ha, hd in table]
    f = FilterConfig(max_gap_minutes=max_gap, drop_code_97=drop97, require_times=require)
    result = parse_entries(r, f)
    if isinstance(result, RejectionReason):
        return
    assert len(result) == len(r)
    for e in result:
        assert 0 <= e.arrival_min <= e.departure_min <= 1439
        assert e.nhts_code != 97 or not drop97
    for x, y in zip(result, result[1:]):
        assert 0 <= y.arrival_min - x.departure_min <= max_gap
    if require:
        assert all(ha and hd for _, _, _, ha, hd in table)


def _record(assignment, raw, error=None):
    return GenerationRecord(assignment, "prompt", raw, "test", 0, 1, error)


def test_build_corpus_counts_rejections():
    plan = plan_assignments(priors_from_dict(respondent_priors_dict()), dt.date(2016, 5, 1), dt.date(2016, 5, 9), 100, 3)
    recs = [_record(a, SAMPLE_CHATTER if i % 10 else "no table here") for i, (a, _) in enumerate(plan)]
    corpus, summary = build_corpus(recs)
    assert len(corpus) == 90 and summary == {"NoTableFound": 10}
    assert corpus.source == "generated" and corpus.region_id == "41860"
    again = build_corpus(recs)
    assert again == (corpus, summary)
    assert len(corpus) + sum(summary.values()) == len(recs)


def test_build_corpus_failed_generation_counts_as_no_table():
    (a, _), = plan_assignments(priors_from_dict(respondent_priors_dict()), dt.date(2016, 5, 1), dt.date(2016, 5, 9), 1, 3)
    corpus, summary = build_corpus([_record(a, "", error="RateLimited: x")])
    assert len(corpus) == 0 and summary == {"NoTableFound": 1}


def test_parse_completion_handles_windows_newlines():
    raw = SAMPLE_CHATTER.replace("\n", "\r\n")
    assert len(parse_completion(raw)) == 3
