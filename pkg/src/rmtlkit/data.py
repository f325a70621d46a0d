"""Subject-level data structures, CSV ingestion, and event tables.

Event codes are fixed to 0 = censored, 1 = event of interest,
2 = competing event; group codes to 0 = control, 1 = treatment.
Arbitrary user codes can be remapped at ingestion time.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import RowError, SampleSizeError, SchemaError

EVENT_CENSORED = 0
EVENT_INTEREST = 1
EVENT_COMPETING = 2

GROUP_CONTROL = 0
GROUP_TREATMENT = 1


class SubjectRecord(NamedTuple):
    """One subject: observed time, event code (0/1/2), group label (0/1)."""

    time: float
    event: int
    group: int


def _validate_arrays(time, event):
    if time.ndim != 1 or event.shape != time.shape:
        raise ValueError("time and event must be 1-d arrays of equal length")
    if not np.all(np.isfinite(time)):
        raise ValueError("times must be finite")
    if np.any(time < 0):
        raise ValueError("times must be non-negative")
    bad = ~np.isin(event, (EVENT_CENSORED, EVENT_INTEREST, EVENT_COMPETING))
    if np.any(bad):
        raise ValueError(f"event codes must be 0, 1 or 2 (got {event[bad][0]})")


@dataclass(frozen=True)
class GroupSample:
    """All subjects of one arm. Immutable after construction.

    Parameters
    ----------
    time : array of observed times (event or censoring), non-negative.
    event : array of event codes, same length.
    group : the arm label this sample belongs to (0 or 1).
    """

    time: np.ndarray
    event: np.ndarray
    group: int = GROUP_CONTROL

    def __post_init__(self):
        time = np.ascontiguousarray(np.asarray(self.time, dtype=float))
        event = np.ascontiguousarray(np.asarray(self.event, dtype=np.int64))
        _validate_arrays(time, event)
        if time.size < 2:
            raise SampleSizeError(
                f"group {self.group} has {time.size} subject(s); at least 2 required"
            )
        if time.max() <= 0.0:
            raise ValueError("maximum follow-up must be strictly positive")
        if self.group not in (GROUP_CONTROL, GROUP_TREATMENT):
            raise ValueError("group must be 0 or 1")
        time.setflags(write=False)
        event.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)

    @property
    def n(self) -> int:
        return self.time.size

    @property
    def max_followup(self) -> float:
        return float(self.time.max())

    @property
    def n_events(self) -> int:
        return int(np.count_nonzero(self.event))

    def records(self) -> list[SubjectRecord]:
        return [
            SubjectRecord(float(t), int(e), self.group)
            for t, e in zip(self.time, self.event)
        ]

    @classmethod
    def from_records(cls, records, group=None) -> "GroupSample":
        records = list(records)
        if group is None:
            groups = {r[2] for r in records} if records and len(records[0]) > 2 else set()
            if len(groups) > 1:
                raise ValueError("records span multiple groups")
            group = groups.pop() if groups else GROUP_CONTROL
        time = np.array([r[0] for r in records], dtype=float)
        event = np.array([r[1] for r in records], dtype=np.int64)
        return cls(time, event, group)


@dataclass(frozen=True)
class TwoGroupSample:
    """Disjoint control and treatment samples from one dataset."""

    control: GroupSample
    treatment: GroupSample

    def __post_init__(self):
        if self.control.group == self.treatment.group:
            raise ValueError("control and treatment must carry distinct group labels")


@dataclass(frozen=True)
class EventTable:
    """Per distinct event time: cause-specific counts and the risk set.

    ``times`` is strictly increasing and holds only times at which an
    event (code 1 or 2) occurred. ``at_risk[i]`` counts subjects with
    observed time >= times[i]; a subject censored exactly at times[i]
    is still in the risk set there.
    """

    times: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    at_risk: np.ndarray

    def __post_init__(self):
        for name in ("times", "d1", "d2", "at_risk"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name)))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.times.size:
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("event times must be strictly increasing")
            if np.any(self.at_risk < self.d1 + self.d2):
                raise ValueError("risk set smaller than event count")

    @property
    def n_times(self) -> int:
        return self.times.size

    @property
    def total_events(self) -> int:
        return int(self.d1.sum() + self.d2.sum())


def build_event_table(sample: GroupSample) -> EventTable:
    """Aggregate a sample into its event table.

    Ties within one time and cause are pooled; the result is invariant
    under permutation of the input records. A sample with no events
    yields an empty table.
    """
    is_event = sample.event != EVENT_CENSORED
    if not np.any(is_event):
        empty = np.array([], dtype=float)
        zero = np.array([], dtype=np.int64)
        return EventTable(empty, zero, zero.copy(), zero.copy())
    etimes = sample.time[is_event]
    ecodes = sample.event[is_event]
    times = np.unique(etimes)
    d1 = np.zeros(times.size, dtype=np.int64)
    d2 = np.zeros(times.size, dtype=np.int64)
    idx = np.searchsorted(times, etimes)
    np.add.at(d1, idx[ecodes == EVENT_INTEREST], 1)
    np.add.at(d2, idx[ecodes == EVENT_COMPETING], 1)
    sorted_all = np.sort(sample.time)
    # Y(t) = #{observed time >= t}; side="left" keeps exact ties in the risk set
    at_risk = sample.n - np.searchsorted(sorted_all, times, side="left")
    return EventTable(times, d1, d2, at_risk.astype(np.int64))


def select_tau(sample0: GroupSample, sample1: GroupSample) -> float:
    """Restriction time by the min-max rule: the shorter of the two
    groups' maximum follow-up times."""
    return min(sample0.max_followup, sample1.max_followup)


@dataclass
class _ParsedRows:
    """Intermediate ingestion result, before group-level validation."""

    by_group: dict = field(default_factory=dict)

    def groups(self):
        return sorted(self.by_group)


def _parse_csv_rows(
    source,
    time_col,
    event_col,
    group_col,
    event_codes=None,
    group_codes=None,
):
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    if isinstance(source, str):
        handle = open(source, "r", encoding="utf-8-sig", newline="")
        close = True
    elif hasattr(source, "read"):
        raw = source.read()
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8-sig")
        handle = io.StringIO(raw)
        close = False
    else:
        handle = io.StringIO(str(source))
        close = False

    event_map = {str(k): v for k, v in (event_codes or {}).items()}
    group_map = {str(k): v for k, v in (group_codes or {}).items()}

    parsed = _ParsedRows()
    try:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for col in (time_col, event_col, group_col):
            if col is not None and col not in header:
                raise SchemaError(col)
        for rownum, row in enumerate(reader, start=1):
            raw_time = (row.get(time_col) or "").strip()
            try:
                t = float(raw_time)
            except ValueError:
                raise RowError(rownum, f"non-numeric time {raw_time!r}") from None
            if not np.isfinite(t):
                raise RowError(rownum, f"non-finite time {raw_time!r}")
            if t < 0:
                raise RowError(rownum, f"negative time {raw_time!r}")

            raw_event = (row.get(event_col) or "").strip()
            raw_event = event_map.get(raw_event, raw_event)
            try:
                e = int(float(raw_event))
            except (ValueError, TypeError):
                raise RowError(rownum, f"non-numeric event code {raw_event!r}") from None
            if e not in (EVENT_CENSORED, EVENT_INTEREST, EVENT_COMPETING):
                raise RowError(rownum, f"event code {e} outside {{0,1,2}}")

            if group_col is None:
                g = GROUP_CONTROL
            else:
                raw_group = (row.get(group_col) or "").strip()
                raw_group = group_map.get(raw_group, raw_group)
                try:
                    g = int(float(raw_group))
                except (ValueError, TypeError):
                    raise RowError(
                        rownum, f"non-numeric group code {raw_group!r}"
                    ) from None
                if g not in (GROUP_CONTROL, GROUP_TREATMENT):
                    raise RowError(rownum, f"group code {g} outside {{0,1}}")
            parsed.by_group.setdefault(g, []).append((t, e))
    finally:
        if close:
            handle.close()
    return parsed


def _group_from_rows(rows, group):
    time = np.array([r[0] for r in rows], dtype=float)
    event = np.array([r[1] for r in rows], dtype=np.int64)
    return GroupSample(time, event, group)


def ingest_csv(
    source,
    time_col: str = "time",
    event_col: str = "event",
    group_col: str = "group",
    event_codes: dict | None = None,
    group_codes: dict | None = None,
) -> TwoGroupSample:
    """Read and validate a two-arm CSV into a :class:`TwoGroupSample`.

    ``source`` may be a path, bytes, or a file-like object holding UTF-8
    CSV with a header row. Row order is preserved within each group.
    ``event_codes`` / ``group_codes`` optionally remap user codes onto
    the canonical 0/1/2 and 0/1.

    Raises :class:`SchemaError` for missing columns, :class:`RowError`
    (with a 1-based data-row number) for invalid cells, and
    :class:`SampleSizeError` when either arm has fewer than 2 subjects.
    """
    parsed = _parse_csv_rows(
        source, time_col, event_col, group_col, event_codes, group_codes
    )
    for g in (GROUP_CONTROL, GROUP_TREATMENT):
        if len(parsed.by_group.get(g, [])) < 2:
            raise SampleSizeError(
                f"group {g} has {len(parsed.by_group.get(g, []))} subject(s); "
                "at least 2 required in each arm"
            )
    return TwoGroupSample(
        control=_group_from_rows(parsed.by_group[GROUP_CONTROL], GROUP_CONTROL),
        treatment=_group_from_rows(parsed.by_group[GROUP_TREATMENT], GROUP_TREATMENT),
    )


def ingest_single_group_csv(
    source,
    time_col: str = "time",
    event_col: str = "event",
    group_col: str | None = None,
    event_codes: dict | None = None,
    group_codes: dict | None = None,
):
    """Read a CSV that may hold one arm or two.

    Returns a :class:`TwoGroupSample` when both arms are present,
    otherwise the single :class:`GroupSample`. Used by the CLI so a
    one-group file still gets a descriptive analysis.
    """
    parsed = _parse_csv_rows(
        source, time_col, event_col, group_col, event_codes, group_codes
    )
    groups = parsed.groups()
    if len(groups) == 1:
        g = groups[0]
        return _group_from_rows(parsed.by_group[g], g)
    for g in groups:
        if len(parsed.by_group[g]) < 2:
            raise SampleSizeError(
                f"group {g} has {len(parsed.by_group[g])} subject(s); "
                "at least 2 required in each arm"
            )
    return TwoGroupSample(
        control=_group_from_rows(parsed.by_group[GROUP_CONTROL], GROUP_CONTROL),
        treatment=_group_from_rows(parsed.by_group[GROUP_TREATMENT], GROUP_TREATMENT),
    )
