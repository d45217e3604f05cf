"""Session data ingestion.

A session directory holds five UTF-8, comma-separated files with `.` decimal
points and fixed headers:

    eda.csv      unix_ms,eda_us
    env.csv      unix_ms,noise_db,ir,dust,co2_ppm,temp_c,rh_pct,pressure,wind
    events.csv   event_id,start_ms,end_ms,label
    sam.csv      event_id,valence,arousal,dominance
    reports.csv  window_id,difficulty,stress

Timestamps are integer milliseconds UTC. Sample rates are inferred from the
median inter-row gap rather than trusted from metadata; traces are treated as
uniformly sampled at the inferred rate from their first timestamp on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    EmptyFile,
    EmptyWindow,
    InvalidTimeline,
    MalformedRow,
    MissingChannel,
    NonMonotonicTime,
    PartialCoverage,
)

__all__ = [
    "ENV_CHANNELS",
    "EVENT_LABELS",
    "RawEdaTrace",
    "EnvTrace",
    "TimelineEvent",
    "EventTimeline",
    "SamResponse",
    "SelfReport",
    "SignalView",
    "AlignedWindow",
    "parse_eda_csv",
    "parse_env_csv",
    "parse_events_csv",
    "parse_sam_csv",
    "parse_reports_csv",
    "write_eda_csv",
    "write_env_csv",
    "write_events_csv",
    "write_sam_csv",
    "write_reports_csv",
    "label_stress",
    "window_align",
]

ENV_CHANNELS = ("noise_db", "ir", "dust", "co2_ppm", "temp_c", "rh_pct", "pressure", "wind")

EVENT_LABELS = frozenset(
    {"baseline", "task", "survey", "stimulus_pristine", "stimulus_polluted",
     "stimulus_genfill", "prompting"}
)

ENV_GAP_THRESHOLD_S = 5.0


@dataclass(frozen=True)
class RawEdaTrace:
    """Uniform skin-conductance samples in microsiemens."""

    start_time: int            # unix ms of the first sample
    sample_rate: float         # Hz
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", arr)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if arr.size and arr.min() < 0:
            raise ValueError("conductance cannot be negative")

    @property
    def step_ms(self) -> float:
        return 1000.0 / self.sample_rate

    @property
    def end_time(self) -> float:
        """Exclusive end of the covered span in unix ms."""
        return self.start_time + self.samples.size * self.step_ms

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def times_ms(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) * self.step_ms


@dataclass(frozen=True)
class EnvTrace:
    """The eight microclimate channels on a shared uniform clock."""

    start_time: int
    sample_rate: float
    channels: dict
    gaps: tuple = ()           # (row index after the gap, gap seconds)

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        chans = {}
        n = None
        for name in ENV_CHANNELS:
            if name not in self.channels:
                raise ValueError(f"missing channel {name}")
            arr = np.asarray(self.channels[name], dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"channel {name} has non-finite values")
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise ValueError("channels must share length")
            chans[name] = arr
        object.__setattr__(self, "channels", chans)

    @property
    def n_samples(self) -> int:
        return self.channels[ENV_CHANNELS[0]].size

    @property
    def step_ms(self) -> float:
        return 1000.0 / self.sample_rate

    @property
    def end_time(self) -> float:
        return self.start_time + self.n_samples * self.step_ms


@dataclass(frozen=True)
class TimelineEvent:
    event_id: str
    start_ms: int
    end_ms: int
    label: str

    def __post_init__(self):
        if self.end_ms <= self.start_ms:
            raise InvalidTimeline(f"event {self.event_id}: end_ms must exceed start_ms")
        if self.label not in EVENT_LABELS:
            raise InvalidTimeline(f"event {self.event_id}: unknown label {self.label!r}")


@dataclass(frozen=True)
class EventTimeline:
    events: tuple

    def __post_init__(self):
        ev = tuple(sorted(self.events, key=lambda e: (e.start_ms, e.end_ms)))
        ids = [e.event_id for e in ev]
        if len(set(ids)) != len(ids):
            raise InvalidTimeline("event ids must be unique")
        for a, b in zip(ev, ev[1:]):
            if b.start_ms < a.end_ms:
                raise InvalidTimeline(f"events {a.event_id} and {b.event_id} overlap")
        object.__setattr__(self, "events", ev)


@dataclass(frozen=True)
class SamResponse:
    event_id: str
    valence: int
    arousal: int
    dominance: int

    def __post_init__(self):
        for name in ("valence", "arousal", "dominance"):
            v = getattr(self, name)
            if not (1 <= v <= 9):
                raise ValueError(f"{name} must be in [1, 9], got {v}")


@dataclass(frozen=True)
class SelfReport:
    window_id: str
    difficulty: int
    stress: int

    def __post_init__(self):
        if not (1 <= self.difficulty <= 10):
            raise ValueError(f"difficulty must be in [1, 10], got {self.difficulty}")
        if not (1 <= self.stress <= 7):
            raise ValueError(f"stress must be in [1, 7], got {self.stress}")


STRESS_HIGH = "high"
STRESS_LOW = "low"
STRESS_UNLABELED = "unlabeled"


def label_stress(report: SelfReport) -> str:
    """High iff difficulty > 6 and stress > 4; low iff both below 3."""
    if report.difficulty > 6 and report.stress > 4:
        return STRESS_HIGH
    if report.difficulty < 3 and report.stress < 3:
        return STRESS_LOW
    return STRESS_UNLABELED


# --- CSV parsing ------------------------------------------------------------

def _read_table(path, expected_header):
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if header != list(expected_header):
            missing = set(expected_header) - set(header)
            if missing:
                raise MissingChannel(f"{path}: missing column(s) {sorted(missing)}")
            raise MalformedRow(f"{path}: unexpected header {header}")
        rows = list(reader)
    return rows


def _parse_float(path, lineno, name, text):
    try:
        v = float(text)
    except ValueError:
        raise MalformedRow(f"{path}:{lineno}: bad numeric {name}={text!r}") from None
    if not math.isfinite(v):
        raise MalformedRow(f"{path}:{lineno}: non-finite {name}={text!r}")
    return v


def _parse_int(path, lineno, name, text):
    try:
        return int(text)
    except ValueError:
        raise MalformedRow(f"{path}:{lineno}: bad integer {name}={text!r}") from None


def _infer_rate(path, times_ms):
    diffs = np.diff(times_ms)
    if np.any(diffs < 0):
        raise NonMonotonicTime(f"{path}: timestamps must be nondecreasing")
    med = float(np.median(diffs))
    if med <= 0:
        raise NonMonotonicTime(f"{path}: cannot infer rate from duplicate timestamps")
    return 1000.0 / med


def parse_eda_csv(path) -> RawEdaTrace:
    """Load eda.csv; the sample rate is the median inter-sample gap."""
    rows = _read_table(path, ("unix_ms", "eda_us"))
    if len(rows) < 2:
        raise EmptyFile(f"{path}: need at least 2 data rows to infer the sample rate")
    times = np.empty(len(rows), dtype=np.int64)
    values = np.empty(len(rows), dtype=np.float64)
    for k, row in enumerate(rows):
        if len(row) != 2:
            raise MalformedRow(f"{path}:{k + 2}: expected 2 fields, got {len(row)}")
        times[k] = _parse_int(path, k + 2, "unix_ms", row[0])
        v = _parse_float(path, k + 2, "eda_us", row[1])
        if v < 0:
            raise MalformedRow(f"{path}:{k + 2}: negative conductance {v}")
        values[k] = v
    rate = _infer_rate(path, times)
    return RawEdaTrace(start_time=int(times[0]), sample_rate=rate, samples=values)


def parse_env_csv(path) -> EnvTrace:
    """Load env.csv; inter-row gaps above 5 s are recorded in ``trace.gaps``."""
    header = ("unix_ms",) + ENV_CHANNELS
    rows = _read_table(path, header)
    if len(rows) < 2:
        raise EmptyFile(f"{path}: need at least 2 data rows to infer the sample rate")
    times = np.empty(len(rows), dtype=np.int64)
    data = np.empty((len(rows), len(ENV_CHANNELS)), dtype=np.float64)
    for k, row in enumerate(rows):
        if len(row) != len(header):
            raise MalformedRow(f"{path}:{k + 2}: expected {len(header)} fields, got {len(row)}")
        times[k] = _parse_int(path, k + 2, "unix_ms", row[0])
        for j, name in enumerate(ENV_CHANNELS):
            data[k, j] = _parse_float(path, k + 2, name, row[j + 1])
    rate = _infer_rate(path, times)
    gaps = []
    diffs = np.diff(times) / 1000.0
    for idx in np.nonzero(diffs > ENV_GAP_THRESHOLD_S)[0]:
        gaps.append((int(idx) + 1, float(diffs[idx])))
    channels = {name: data[:, j] for j, name in enumerate(ENV_CHANNELS)}
    return EnvTrace(start_time=int(times[0]), sample_rate=rate,
                    channels=channels, gaps=tuple(gaps))


def parse_events_csv(path) -> EventTimeline:
    rows = _read_table(path, ("event_id", "start_ms", "end_ms", "label"))
    if not rows:
        raise EmptyFile(f"{path}: no events")
    events = []
    for k, row in enumerate(rows):
        if len(row) != 4:
            raise MalformedRow(f"{path}:{k + 2}: expected 4 fields, got {len(row)}")
        events.append(
            TimelineEvent(
                event_id=row[0].strip(),
                start_ms=_parse_int(path, k + 2, "start_ms", row[1]),
                end_ms=_parse_int(path, k + 2, "end_ms", row[2]),
                label=row[3].strip(),
            )
        )
    return EventTimeline(events=tuple(events))


def parse_sam_csv(path) -> dict:
    rows = _read_table(path, ("event_id", "valence", "arousal", "dominance"))
    out = {}
    for k, row in enumerate(rows):
        if len(row) != 4:
            raise MalformedRow(f"{path}:{k + 2}: expected 4 fields, got {len(row)}")
        try:
            resp = SamResponse(
                event_id=row[0].strip(),
                valence=_parse_int(path, k + 2, "valence", row[1]),
                arousal=_parse_int(path, k + 2, "arousal", row[2]),
                dominance=_parse_int(path, k + 2, "dominance", row[3]),
            )
        except ValueError as exc:
            raise MalformedRow(f"{path}:{k + 2}: {exc}") from None
        out[resp.event_id] = resp
    return out


def parse_reports_csv(path) -> dict:
    rows = _read_table(path, ("window_id", "difficulty", "stress"))
    out = {}
    for k, row in enumerate(rows):
        if len(row) != 3:
            raise MalformedRow(f"{path}:{k + 2}: expected 3 fields, got {len(row)}")
        try:
            rep = SelfReport(
                window_id=row[0].strip(),
                difficulty=_parse_int(path, k + 2, "difficulty", row[1]),
                stress=_parse_int(path, k + 2, "stress", row[2]),
            )
        except ValueError as exc:
            raise MalformedRow(f"{path}:{k + 2}: {exc}") from None
        out[rep.window_id] = rep
    return out


# --- CSV writing ------------------------------------------------------------
# Floats are written with repr (shortest round-trip), so parse(write(x))
# reproduces values exactly, well past the 6-significant-digit requirement.

def write_eda_csv(trace: RawEdaTrace, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("unix_ms,eda_us\n")
        step = trace.step_ms
        for i, v in enumerate(trace.samples):
            fh.write(f"{trace.start_time + round(i * step)},{float(v)!r}\n")


def write_env_csv(trace: EnvTrace, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("unix_ms," + ",".join(ENV_CHANNELS) + "\n")
        step = trace.step_ms
        cols = [trace.channels[name] for name in ENV_CHANNELS]
        for i in range(trace.n_samples):
            vals = ",".join(repr(float(c[i])) for c in cols)
            fh.write(f"{trace.start_time + round(i * step)},{vals}\n")


def write_events_csv(timeline: EventTimeline, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("event_id,start_ms,end_ms,label\n")
        for e in timeline.events:
            fh.write(f"{e.event_id},{e.start_ms},{e.end_ms},{e.label}\n")


def write_sam_csv(responses, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("event_id,valence,arousal,dominance\n")
        for r in responses:
            fh.write(f"{r.event_id},{r.valence},{r.arousal},{r.dominance}\n")


def write_reports_csv(reports, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("window_id,difficulty,stress\n")
        for r in reports:
            fh.write(f"{r.window_id},{r.difficulty},{r.stress}\n")


# --- alignment --------------------------------------------------------------

@dataclass(frozen=True)
class SignalView:
    """A processed signal on a raw trace's clock. Unlike RawEdaTrace it may
    hold negative values (e.g. after standardization)."""

    start_time: int
    sample_rate: float
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", arr)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def step_ms(self) -> float:
        return 1000.0 / self.sample_rate

    @property
    def end_time(self) -> float:
        return self.start_time + self.samples.size * self.step_ms


@dataclass(frozen=True)
class AlignedWindow:
    """One timeline event's EDA clip plus its averaged environment."""

    window_id: str
    label: str
    start_ms: int
    end_ms: int
    sample_rate: float
    samples: np.ndarray
    env_means: dict

    @property
    def duration_s(self) -> float:
        return (self.end_ms - self.start_ms) / 1000.0

    def with_samples(self, samples) -> "AlignedWindow":
        return replace(self, samples=np.asarray(samples, dtype=np.float64))


def _clip_indices(start_ms, end_ms, t0, step_ms, n):
    # half-open [start, end): first index with t >= start up to first with t >= end
    i0 = math.ceil((start_ms - t0) / step_ms - 1e-9)
    i1 = math.ceil((end_ms - t0) / step_ms - 1e-9)
    return max(int(i0), 0), min(int(i1), n)


def window_align(eda: RawEdaTrace, env: EnvTrace, timeline: EventTimeline):
    """Clip the EDA trace to each event's [start, end) span and average every
    environment channel over the same span.

    Raises PartialCoverage when an event extends beyond either trace and
    EmptyWindow when a clip holds fewer than 2 EDA samples or no environment
    sample at all.
    """
    windows = []
    for ev in timeline.events:
        if ev.start_ms < eda.start_time or ev.end_ms > eda.end_time:
            raise PartialCoverage(
                f"event {ev.event_id} [{ev.start_ms}, {ev.end_ms}) outside EDA span "
                f"[{eda.start_time}, {eda.end_time})"
            )
        if ev.start_ms < env.start_time or ev.end_ms > env.end_time:
            raise PartialCoverage(
                f"event {ev.event_id} [{ev.start_ms}, {ev.end_ms}) outside environment span "
                f"[{env.start_time}, {env.end_time})"
            )
        i0, i1 = _clip_indices(ev.start_ms, ev.end_ms, eda.start_time, eda.step_ms,
                               eda.samples.size)
        if i1 - i0 < 2:
            raise EmptyWindow(f"event {ev.event_id}: fewer than 2 EDA samples")
        j0, j1 = _clip_indices(ev.start_ms, ev.end_ms, env.start_time, env.step_ms,
                               env.n_samples)
        if j1 - j0 < 1:
            raise EmptyWindow(f"event {ev.event_id}: no environment samples")
        env_means = {name: float(env.channels[name][j0:j1].mean()) for name in ENV_CHANNELS}
        windows.append(
            AlignedWindow(
                window_id=ev.event_id,
                label=ev.label,
                start_ms=ev.start_ms,
                end_ms=ev.end_ms,
                sample_rate=eda.sample_rate,
                samples=eda.samples[i0:i1].copy(),
                env_means=env_means,
            )
        )
    return windows
