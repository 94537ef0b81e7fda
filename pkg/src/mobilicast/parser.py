"""Post-processing of raw completions: table extraction, time parsing, filtering.

The table rendering used by the mock backend and the fine-tuning export lives
here too, so the writer and the reader share one format contract.
"""
from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import ParseFailure
from .model import (
    GENERATED,
    LAST_MINUTE,
    NHTS_CODES,
    TABLE_COLUMNS,
    Corpus,
    DiaryEntry,
    LocationTaxonomy,
    TravelDiary,
    builtin_taxonomy,
)


class RejectionKind(str, enum.Enum):
    NoTableFound = "NoTableFound"
    UnparseableTime = "UnparseableTime"
    MissingTime = "MissingTime"
    NegativeGap = "NegativeGap"
    GapTooLarge = "GapTooLarge"
    NonMonotonicTimes = "NonMonotonicTimes"
    Code97Present = "Code97Present"
    UnknownCode = "UnknownCode"
    EmptyTable = "EmptyTable"


@dataclass(frozen=True)
class RejectionReason:
    kind: RejectionKind
    detail: str = ""


class TableError(ParseFailure):
    """Raised by :func:`extract_table`; carries the rejection kind."""

    def __init__(self, kind: RejectionKind, detail: str = ""):
        super().__init__(detail or kind.value)
        self.kind = kind


class UnparseableTime(ParseFailure):
    pass


@dataclass(frozen=True)
class FilterConfig:
    max_gap_minutes: int = 120
    drop_code_97: bool = True
    require_times: bool = True

    def __post_init__(self):
        if self.max_gap_minutes <= 0:
            raise ValueError("max_gap_minutes must be positive")


PERMISSIVE = FilterConfig(max_gap_minutes=LAST_MINUTE + 1, drop_code_97=False)


class TableRow(NamedTuple):
    place: str
    arrival: str
    departure: str
    code: str


_CELL_SPLIT = re.compile(r"(?<!\\)\|")
_SEPARATOR_CELL = re.compile(r"^:?-+:?$")
_TIME = re.compile(
    r"^(?P<h>\d{1,2}):(?P<m>\d{2})\s*(?:(?P<ap>[AaPp])\.?\s*[Mm]\.?)?$"
)
_LEADING_INT = re.compile(r"^\D{0,3}?(\d+)")
_MARKUP = re.compile(r"[*_`]")


def _split_cells(line: str) -> list[str]:
    body = line.strip()
    if body.startswith("|"):
        body = body[1:]
    if body.endswith("|") and not body.endswith("\\|"):
        body = body[:-1]
    return [c.strip().replace("\\|", "|") for c in _CELL_SPLIT.split(body)]


def _norm(cell: str) -> str:
    return " ".join(_MARKUP.sub("", cell).lower().split())


def _header_columns(cells: Sequence[str]) -> list[int] | None:
    normed = [_norm(c) for c in cells]
    idx = []
    for name in TABLE_COLUMNS:
        key = name.lower()
        hit = next((i for i, c in enumerate(normed) if key in c), None)
        if hit is None:
            return None
        idx.append(hit)
    return idx


def _is_separator(cells: Sequence[str]) -> bool:
    parts = [c.replace(" ", "") for c in cells if c.strip()]
    return bool(parts) and all(_SEPARATOR_CELL.match(p) for p in parts)


def extract_table(raw: str) -> list[TableRow]:
    """Rows of the first markdown table whose header names the four diary columns.

    Prose before and after the table is ignored, as is any later table.
    """
    lines = raw.splitlines()
    for i, line in enumerate(lines):
        if "|" not in line:
            continue
        columns = _header_columns(_split_cells(line))
        if columns is None:
            continue
        rows = []
        for data_line in lines[i + 1:]:
            if "|" not in data_line:
                break
            cells = _split_cells(data_line)
            if _is_separator(cells):
                continue
            get = lambda k: cells[k] if k < len(cells) else ""  # noqa: E731
            rows.append(TableRow(*(get(k) for k in columns)))
        if not rows:
            raise TableError(RejectionKind.EmptyTable, "table header found but no data rows")
        return rows
    raise TableError(RejectionKind.NoTableFound, "no diary table in completion")


def parse_time(text: str) -> int:
    """Minute of day for ``H:MM AM/PM``, ``HH:MM AM/PM`` or 24-hour ``HH:MM``."""
    m = _TIME.match(_MARKUP.sub("", text).strip())
    if not m:
        raise UnparseableTime(f"unparseable time {text!r}")
    hour, minute = int(m.group("h")), int(m.group("m"))
    if minute > 59:
        raise UnparseableTime(f"minute out of range in {text!r}")
    ap = m.group("ap")
    if ap is None:
        if hour > 23:
            raise UnparseableTime(f"hour out of range in {text!r}")
    else:
        pm = ap.lower() == "p"
        if hour > 12 or (hour == 0 and pm):
            raise UnparseableTime(f"hour out of range in {text!r}")
        hour = hour % 12 + (12 if pm else 0)
    return hour * 60 + minute


def format_time(minute: int) -> str:
    """``HH:MM AM/PM``, writing the midnight hour as ``00``."""
    if not 0 <= minute <= LAST_MINUTE:
        raise ValueError(f"minute {minute} outside the day")
    hour, mm = divmod(minute, 60)
    suffix = "PM" if hour >= 12 else "AM"
    h12 = hour % 12
    if h12 == 0 and suffix == "PM":
        h12 = 12
    return f"{h12:02d}:{mm:02d} {suffix}"


def _escape(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def render_diary_table(entries: Iterable[DiaryEntry]) -> str:
    lines = [
        "| " + " | ".join(TABLE_COLUMNS) + " |",
        "|---------------|--------------|----------------|---------------|",
    ]
    for e in entries:
        lines.append(
            f"| {_escape(e.place_name)} | {format_time(e.arrival_min)} | "
            f"{format_time(e.departure_min)} | {e.nhts_code} |"
        )
    return "\n".join(lines) + "\n"


def parse_entries(
    rows: Sequence[TableRow], filters: FilterConfig = FilterConfig()
) -> tuple[DiaryEntry, ...] | RejectionReason:
    """Validate rows in order; the first failure rejects the whole diary."""
    if not rows:
        return RejectionReason(RejectionKind.EmptyTable, "no rows")
    entries: list[DiaryEntry] = []
    prev_depart: int | None = None
    for n, row in enumerate(rows, 1):
        times = []
        for label, cell in (("arrival", row.arrival), ("departure", row.departure)):
            if not _norm(cell):
                if filters.require_times:
                    return RejectionReason(RejectionKind.MissingTime, f"row {n}: no {label} time")
                times.append(None)
                continue
            try:
                times.append(parse_time(cell))
            except UnparseableTime as exc:
                return RejectionReason(RejectionKind.UnparseableTime, f"row {n}: {exc}")
        arrive, depart = times
        if arrive is None:
            arrive = prev_depart if prev_depart is not None else 0
        if depart is None:
            depart = arrive

        m = _LEADING_INT.match(row.code.strip())
        code = int(m.group(1)) if m else None
        if code not in NHTS_CODES:
            return RejectionReason(RejectionKind.UnknownCode, f"row {n}: location type {row.code!r}")
        if code == 97 and filters.drop_code_97:
            return RejectionReason(RejectionKind.Code97Present, f"row {n}: location type 97")
        if arrive > depart:
            return RejectionReason(
                RejectionKind.NonMonotonicTimes, f"row {n}: arrival {arrive} after departure {depart}"
            )
        if prev_depart is not None:
            gap = arrive - prev_depart
            if gap < 0:
                return RejectionReason(RejectionKind.NegativeGap, f"row {n}: gap {gap} min")
            if gap > filters.max_gap_minutes:
                return RejectionReason(
                    RejectionKind.GapTooLarge,
                    f"row {n}: gap {gap} min exceeds {filters.max_gap_minutes}",
                )
        entries.append(DiaryEntry(row.place, arrive, depart, code))
        prev_depart = depart
    return tuple(entries)


def parse_diary(rows, assignment, filters: FilterConfig = FilterConfig()) -> TravelDiary | RejectionReason:
    """Turn extracted rows into a diary for ``assignment`` (or a rejection)."""
    entries = parse_entries(rows, filters)
    if isinstance(entries, RejectionReason):
        return entries
    return TravelDiary(
        assignment.persona_id, assignment.survey_date, entries, assignment.persona.to_dict()
    )


def parse_completion(raw: str, filters: FilterConfig = FilterConfig()) -> tuple[DiaryEntry, ...] | RejectionReason:
    try:
        rows = extract_table(raw)
    except TableError as exc:
        return RejectionReason(exc.kind, str(exc))
    return parse_entries(rows, filters)


def build_corpus(
    records: Sequence,
    filters: FilterConfig = FilterConfig(),
    taxonomy: LocationTaxonomy | None = None,
    region_id: str | None = None,
) -> tuple[Corpus, dict[str, int]]:
    """Parse every generation record; rejections are counted, never raised.

    Records whose generation failed count as ``NoTableFound``.
    """
    # codes are validated against the taxonomy the metrics will use
    taxonomy = taxonomy or builtin_taxonomy()
    diaries = []
    summary: Counter = Counter()
    for rec in records:
        if getattr(rec, "error", None):
            summary[RejectionKind.NoTableFound.value] += 1
            continue
        result = parse_completion(rec.raw_completion, filters)
        if isinstance(result, RejectionReason):
            summary[result.kind.value] += 1
            continue
        if any(e.nhts_code not in taxonomy.nhts_codes for e in result):
            summary[RejectionKind.UnknownCode.value] += 1
            continue
        a = rec.assignment
        diaries.append(TravelDiary(a.persona_id, a.survey_date, result, a.persona.to_dict()))
    if region_id is None:
        region_id = records[0].assignment.persona.region_id if records else "unknown"
    corpus = Corpus(region_id or "unknown", GENERATED, tuple(diaries))
    return corpus, dict(sorted(summary.items()))
