"""Event-log ingestion: CSV/XES parsing, validation, and dataset statistics.

Logs are parsed into immutable in-memory structures: an :class:`EventLog` is a
mapping of case id to :class:`Trace`, each trace an ordered, time-sorted list
of :class:`Event`. Timestamps are normalized to UTC and truncated to
millisecond precision so that a serialize/parse round trip is exact.
"""

from __future__ import annotations

import csv
import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Mapping

from .errors import ConfigurationError, EmptyLogError, ParseError

MS_PER_DAY = 86_400_000.0

_FALLBACK_FORMATS = ("%Y-%m-%d %H:%M:%S",)


@dataclass(frozen=True)
class Event:
    case_id: str
    activity: str
    timestamp: datetime
    resource: str | None = None
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.activity:
            raise ParseError(f"event in case {self.case_id!r} has an empty activity")
        if self.timestamp.tzinfo is None:
            raise ParseError(f"event in case {self.case_id!r} has a naive timestamp")


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise ParseError(f"trace {self.case_id!r} has no events")
        for ev in self.events:
            if ev.case_id != self.case_id:
                raise ParseError(
                    f"trace {self.case_id!r} contains an event of case {ev.case_id!r}"
                )
        for a, b in zip(self.events, self.events[1:]):
            if b.timestamp < a.timestamp:
                raise ParseError(f"trace {self.case_id!r} is not time-ordered")

    def __len__(self) -> int:
        return len(self.events)

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(ev.activity for ev in self.events)

    @property
    def start(self) -> datetime:
        return self.events[0].timestamp

    @property
    def end(self) -> datetime:
        return self.events[-1].timestamp


@dataclass(frozen=True)
class EventLog:
    traces: Mapping[str, Trace]

    def __post_init__(self):
        if not self.traces:
            raise EmptyLogError("event log contains no traces")

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces.values())

    def case_ids(self) -> list[str]:
        return list(self.traces.keys())

    def activity_alphabet(self) -> set[str]:
        return {ev.activity for trace in self for ev in trace.events}


@dataclass(frozen=True)
class DatasetStats:
    n_cases: int
    n_unique_activities: int
    avg_case_length: float
    max_case_length: int
    avg_throughput_days: float

    def to_dict(self) -> dict:
        return {
            "n_cases": self.n_cases,
            "n_unique_activities": self.n_unique_activities,
            "avg_case_length": self.avg_case_length,
            "max_case_length": self.max_case_length,
            "avg_throughput_days": self.avg_throughput_days,
        }


def parse_timestamp(raw: str, timestamp_format: str = "auto") -> datetime:
    """Parse one timestamp string to a UTC datetime with millisecond precision.

    ``"auto"`` accepts ISO-8601 (with or without timezone, ``Z`` allowed) and
    ``YYYY-MM-DD HH:MM:SS``; anything else must be given as a strptime
    pattern. Naive timestamps are taken as UTC.
    """
    text = raw.strip()
    if not text:
        raise ParseError("empty timestamp")
    dt: datetime | None = None
    if timestamp_format == "auto":
        candidate = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
        try:
            dt = datetime.fromisoformat(candidate)
        except ValueError:
            for fmt in _FALLBACK_FORMATS:
                try:
                    dt = datetime.strptime(text, fmt)
                    break
                except ValueError:
                    continue
        if dt is None:
            raise ParseError(f"cannot parse timestamp {raw!r} with format 'auto'")
    else:
        try:
            dt = datetime.strptime(text, timestamp_format)
        except ValueError as exc:
            raise ParseError(f"cannot parse timestamp {raw!r}: {exc}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    else:
        dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def _decode(source: IO[bytes] | bytes | str) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, bytes):
        return source.decode("utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _build_log(events: Iterable[Event]) -> EventLog:
    grouped: dict[str, list[Event]] = {}
    for ev in events:
        grouped.setdefault(ev.case_id, []).append(ev)
    if not grouped:
        raise EmptyLogError("no events parsed")
    traces = {}
    for case_id, evs in grouped.items():
        evs.sort(key=lambda e: e.timestamp)  # stable: file order breaks ties
        traces[case_id] = Trace(case_id=case_id, events=tuple(evs))
    return EventLog(traces=traces)


def parse_csv(
    source: IO[bytes] | bytes | str,
    mapping: Mapping[str, str],
    timestamp_format: str = "auto",
) -> EventLog:
    """Parse a CSV event log.

    ``mapping`` names the ``case``, ``activity`` and ``timestamp`` columns and
    optionally a ``resource`` column. Remaining columns are kept verbatim in
    each event's attribute map. Events are grouped by case and stably sorted
    by timestamp, so ties keep their file order.
    """
    for key in ("case", "activity", "timestamp"):
        if key not in mapping:
            raise ConfigurationError(f"column mapping lacks required key {key!r}")
    text = _decode(source)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise EmptyLogError("CSV source has no header row")
    header = list(reader.fieldnames)
    wanted = [mapping["case"], mapping["activity"], mapping["timestamp"]]
    if mapping.get("resource"):
        wanted.append(mapping["resource"])
    for col in wanted:
        if col not in header:
            raise ConfigurationError(f"mapped column {col!r} not found in CSV header")
    resource_col = mapping.get("resource")
    extra_cols = [c for c in header if c is not None and c not in wanted]

    events = []
    for row in reader:
        line = reader.line_num
        case_id = (row.get(mapping["case"]) or "").strip()
        activity = (row.get(mapping["activity"]) or "").strip()
        raw_ts = row.get(mapping["timestamp"]) or ""
        if not case_id:
            raise ParseError(f"line {line}: empty case id")
        if not activity:
            raise ParseError(f"line {line}: empty activity")
        try:
            ts = parse_timestamp(raw_ts, timestamp_format)
        except ParseError as exc:
            raise ParseError(f"line {line}: {exc}") from None
        resource = (row.get(resource_col) or "").strip() if resource_col else None
        attrs = {c: row[c] for c in extra_cols if row.get(c) not in (None, "")}
        events.append(
            Event(
                case_id=case_id,
                activity=activity,
                timestamp=ts,
                resource=resource or None,
                attributes=attrs,
            )
        )
    if not events:
        raise EmptyLogError("CSV source has a header but zero data rows")
    return _build_log(events)


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_xes(source: IO[bytes] | bytes | str) -> EventLog:
    """Parse an IEEE XES event log (``string`` and ``date`` attributes).

    ``concept:name`` and ``time:timestamp`` are required on every event;
    ``org:resource`` maps to the resource field and any other string/date
    attribute is preserved in the attribute map.
    """
    text = _decode(source)
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XES XML: {exc}") from None
    if _local_name(root.tag) != "log":
        raise ParseError(f"XES root element is {root.tag!r}, expected 'log'")

    events = []
    for index, trace_el in enumerate(el for el in root if _local_name(el.tag) == "trace"):
        trace_attrs = _xes_attributes(trace_el)
        case_id = trace_attrs.get("concept:name", f"trace-{index}")
        for ev_el in (el for el in trace_el if _local_name(el.tag) == "event"):
            attrs = _xes_attributes(ev_el)
            activity = attrs.pop("concept:name", None)
            raw_ts = attrs.pop("time:timestamp", None)
            if activity is None:
                raise ParseError(f"trace {case_id!r}: event missing concept:name")
            if raw_ts is None:
                raise ParseError(f"trace {case_id!r}: event missing time:timestamp")
            try:
                ts = parse_timestamp(raw_ts, "auto")
            except ParseError as exc:
                raise ParseError(f"trace {case_id!r}: {exc}") from None
            resource = attrs.pop("org:resource", None)
            events.append(
                Event(
                    case_id=case_id,
                    activity=activity,
                    timestamp=ts,
                    resource=resource,
                    attributes=attrs,
                )
            )
    if not events:
        raise EmptyLogError("XES source contains no events")
    return _build_log(events)


def _xes_attributes(element: ET.Element) -> dict[str, str]:
    attrs: dict[str, str] = {}
    for child in element:
        if _local_name(child.tag) in ("string", "date", "int", "float", "boolean"):
            key = child.get("key")
            value = child.get("value")
            if key is not None and value is not None:
                attrs[key] = value
    return attrs


def serialize_csv(log: EventLog, sink: IO[str] | None = None) -> str:
    """Write a log back to canonical CSV (case_id, activity, timestamp, resource).

    The output re-parses to an identical log; extra attributes are not
    emitted because their column set is not uniform across events.
    """
    buf = sink if sink is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["case_id", "activity", "timestamp", "resource"])
    for trace in log:
        for ev in trace.events:
            writer.writerow(
                [
                    ev.case_id,
                    ev.activity,
                    ev.timestamp.isoformat(timespec="milliseconds"),
                    ev.resource or "",
                ]
            )
    if sink is None:
        return buf.getvalue()
    return ""


def throughput_days(trace: Trace) -> float:
    delta = trace.end - trace.start
    return delta.total_seconds() * 1000.0 / MS_PER_DAY


def compute_stats(log: EventLog) -> DatasetStats:
    """Descriptive statistics over the raw log (no sentinel tokens)."""
    lengths = [len(trace) for trace in log]
    return DatasetStats(
        n_cases=len(log),
        n_unique_activities=len(log.activity_alphabet()),
        avg_case_length=sum(lengths) / len(lengths),
        max_case_length=max(lengths),
        avg_throughput_days=sum(throughput_days(t) for t in log) / len(log),
    )
