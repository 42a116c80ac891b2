from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from ppmbench.eventlog import Event, EventLog, Trace

EPOCH = datetime(2020, 1, 6, tzinfo=timezone.utc)  # a Monday


def make_trace(case_id: str, activities: list[str], start_day: float = 0.0,
               gap_days: float = 1.0) -> Trace:
    events = []
    for i, activity in enumerate(activities):
        ts = EPOCH + timedelta(days=start_day + i * gap_days)
        events.append(Event(case_id=case_id, activity=activity, timestamp=ts))
    return Trace(case_id=case_id, events=tuple(events))


def make_log(specs: dict[str, list[str]], start_days: dict[str, float] | None = None,
             gap_days: float = 1.0) -> EventLog:
    """Log from {case_id: activities}; cases start at start_days (default 0)."""
    start_days = start_days or {}
    traces = {
        cid: make_trace(cid, acts, start_days.get(cid, 0.0), gap_days)
        for cid, acts in specs.items()
    }
    return EventLog(traces=traces)


@pytest.fixture
def chain_log() -> EventLog:
    """Deterministic process: every case runs A->B->C with exact 1-day gaps."""
    return make_log(
        {f"c{i:02d}": ["A", "B", "C"] for i in range(20)},
        start_days={f"c{i:02d}": float(i) for i in range(20)},
    )


@pytest.fixture
def skewed_log() -> EventLog:
    """90% of cases follow A,B,C; 10% deviate to A,B,D at the third step."""
    specs = {}
    for i in range(90):
        specs[f"x{i:03d}"] = ["A", "B", "C"]
    for i in range(10):
        specs[f"y{i:03d}"] = ["A", "B", "D"]
    return make_log(specs)


@pytest.fixture
def two_trace_log() -> EventLog:
    """Two traces <A,B> and <A,B,C>, each spanning exactly one day."""
    return EventLog(
        traces={
            "c1": make_trace("c1", ["A", "B"], start_day=0.0, gap_days=1.0),
            "c2": make_trace("c2", ["A", "B", "C"], start_day=0.0, gap_days=0.5),
        }
    )


@pytest.fixture
def fifty_case_log() -> EventLog:
    return make_log(
        {f"c{i:02d}": ["A", "B"] for i in range(50)},
        start_days={f"c{i:02d}": float(i) for i in range(50)},
    )
