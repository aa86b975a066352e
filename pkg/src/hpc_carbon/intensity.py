"""Regional carbon-intensity traces: loading, statistics and hourly winners.

A sample holds its value from its timestamp until the next sample, but never
longer than the trace resolution (the smallest spacing between samples). Any
longer spacing is a gap, and gaps carry no intensity.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import BinaryIO, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import PreconditionError, ValidationError

HEADER = ("timestamp", "intensity_gco2_per_kwh")
HOUR = 3600.0
TIE = "tie"

Source = Union[bytes, str, BinaryIO, io.TextIOBase]


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO 8601 timestamp that carries an explicit UTC offset."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None or ts.utcoffset() is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return ts


def _epoch(ts: datetime) -> float:
    if ts.tzinfo is None:
        raise ValidationError(f"timestamp {ts.isoformat()} must be timezone-aware")
    return ts.timestamp()


@dataclass(frozen=True)
class IntensityTrace:
    region_id: str
    utc_offset_minutes: int
    samples: tuple[tuple[datetime, float], ...]
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _v: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        samples = tuple((ts, float(v)) for ts, v in self.samples)
        if not samples:
            raise ValidationError(f"{self.region_id}: trace needs at least one sample")
        t = np.array([_epoch(ts) for ts, _ in samples], dtype=float)
        v = np.array([val for _, val in samples], dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValidationError(f"{self.region_id}: timestamps must be strictly increasing")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValidationError(f"{self.region_id}: intensities must be finite and >= 0")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_v", v)
        t.setflags(write=False)
        v.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        """UTC epoch seconds of every sample."""
        return self._t

    @property
    def values(self) -> np.ndarray:
        return self._v

    @property
    def resolution(self) -> float:
        """Nominal sample spacing in seconds (one hour for a single sample)."""
        if len(self._t) < 2:
            return HOUR
        return float(np.min(np.diff(self._t)))

    def intervals(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end epoch seconds of the span each sample covers."""
        starts = self._t
        ends = starts + self.resolution
        if len(starts) > 1:
            ends[:-1] = np.minimum(ends[:-1], starts[1:])
        return starts, ends

    def scaled(self, k: float) -> "IntensityTrace":
        return IntensityTrace(
            self.region_id, self.utc_offset_minutes, tuple((ts, v * k) for ts, v in self.samples)
        )


@dataclass(frozen=True)
class IntensityStats:
    n: int
    mean: float
    median: float
    std: float
    cov_percent: float
    min: float
    max: float
    q1: float
    q3: float


@dataclass(frozen=True)
class HourlyWinnerTable:
    reference_utc_offset_minutes: int
    regions: tuple[str, ...]
    counts: dict[int, dict[str, int]]
    ties: dict[int, int]

    def instants(self, hour: int) -> int:
        """Days on which every region had data at this local hour."""
        return sum(self.counts[hour].values()) + self.ties[hour]


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, str):
        return source
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"trace is not valid UTF-8: {exc}") from None


def load_trace(source: Source, region_id: str, utc_offset_minutes: Optional[int] = None) -> IntensityTrace:
    """Parse an intensity CSV (``timestamp,intensity_gco2_per_kwh``) into a sorted trace.

    When ``utc_offset_minutes`` is omitted, the offset of the first row is
    used as the region's local offset.
    """
    text = _read_text(source)
    header_seen = False
    rows: list[tuple[datetime, float, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if not header_seen:
            if tuple(cells) != HEADER:
                raise ValidationError(f"expected header {','.join(HEADER)!r}, got {line!r}", line=lineno)
            header_seen = True
            continue
        if len(cells) != 2:
            raise ValidationError(f"expected 2 columns, got {len(cells)}", line=lineno)
        try:
            ts = parse_timestamp(cells[0])
        except ValueError as exc:
            raise ValidationError(f"bad timestamp: {exc}", line=lineno) from None
        try:
            value = float(cells[1])
        except ValueError:
            raise ValidationError(f"bad intensity {cells[1]!r}", line=lineno) from None
        if not math.isfinite(value):
            raise ValidationError(f"intensity must be finite, got {cells[1]!r}", line=lineno)
        if value < 0:
            raise ValidationError(f"negative intensity {cells[1]}", line=lineno)
        rows.append((ts, value, lineno))
    if not header_seen:
        raise ValidationError("missing header row")
    if not rows:
        raise ValidationError(f"{region_id}: trace has no samples")

    rows.sort(key=lambda r: _epoch(r[0]))
    for prev, cur in zip(rows, rows[1:]):
        if _epoch(prev[0]) == _epoch(cur[0]):
            raise ValidationError(
                f"duplicate timestamp {cur[0].isoformat()} (also on line {prev[2]})", line=cur[2]
            )
    if utc_offset_minutes is None:
        utc_offset_minutes = int(rows[0][0].utcoffset().total_seconds() // 60)
    utc_samples = tuple((ts.astimezone(timezone.utc), v) for ts, v, _ in rows)
    return IntensityTrace(region_id, utc_offset_minutes, utc_samples)


def dump_trace(trace: IntensityTrace) -> str:
    out = [",".join(HEADER)]
    for ts, v in trace.samples:
        out.append(f"{ts.astimezone(timezone.utc).isoformat()},{v!r}")
    return "\n".join(out) + "\n"


def stats(trace: IntensityTrace) -> IntensityStats:
    """Population statistics of the sample values (unweighted)."""
    v = trace.values
    mean = float(np.mean(v))
    std = float(np.std(v))
    q1, median, q3 = (float(x) for x in np.percentile(v, [25, 50, 75]))
    return IntensityStats(
        n=len(v),
        mean=mean,
        median=median,
        std=std,
        cov_percent=100.0 * std / mean if mean > 0 else 0.0,
        min=float(np.min(v)),
        max=float(np.max(v)),
        q1=q1,
        q3=q3,
    )


def _window_bounds(start: datetime, end: datetime) -> tuple[float, float]:
    lo, hi = _epoch(start), _epoch(end)
    if not lo < hi:
        raise ValidationError("window start must be before end")
    return lo, hi


def covered_overlap(trace: IntensityTrace, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Seconds of each sample's span inside [lo, hi), and the sample values."""
    starts, ends = trace.intervals()
    overlap = np.clip(np.minimum(ends, hi) - np.maximum(starts, lo), 0.0, None)
    return overlap, trace.values


def window_average(trace: IntensityTrace, start: datetime, end: datetime) -> float:
    """Time-weighted mean intensity over ``[start, end)``."""
    lo, hi = _window_bounds(start, end)
    overlap, values = covered_overlap(trace, lo, hi)
    covered = math.fsum(overlap)
    if covered <= 0:
        raise ValidationError(f"{trace.region_id}: window does not overlap the trace")
    return math.fsum(overlap * values) / covered


def hourly_series(trace: IntensityTrace) -> dict[int, float]:
    """Map UTC hour index (epoch // 3600) to the hour's time-weighted mean intensity.

    Hours with no covered time are absent.
    """
    starts, ends = trace.intervals()
    values = trace.values
    aligned = trace.resolution == HOUR and not np.any(np.mod(starts, HOUR))
    if aligned:
        return {int(s // HOUR): float(v) for s, v in zip(starts, values)}

    weighted: dict[int, float] = defaultdict(float)
    covered: dict[int, float] = defaultdict(float)
    for s, e, v in zip(starts.tolist(), ends.tolist(), values.tolist()):
        h = math.floor(s / HOUR)
        while s < e:
            boundary = (h + 1) * HOUR
            piece = min(e, boundary) - s
            weighted[h] += piece * v
            covered[h] += piece
            s = min(e, boundary)
            h += 1
    return {h: weighted[h] / covered[h] for h in sorted(covered) if covered[h] > 0}


def local_hour(utc_hour_index: int, utc_offset_minutes: int) -> int:
    """Hour of day, in a zone ``utc_offset_minutes`` from UTC, of a UTC hour start."""
    return ((utc_hour_index * 60 + utc_offset_minutes) // 60) % 24


def hourly_winners(traces: Sequence[IntensityTrace], reference_utc_offset_minutes: int = 0) -> HourlyWinnerTable:
    """Count, for each local hour of day, the days on which each region had the lowest intensity.

    Only UTC instants where every region has data are considered. A strict
    minimum wins; an exact tie for the minimum goes to the ``tie`` bucket.
    """
    if len(traces) < 2:
        raise PreconditionError(f"winner analysis needs at least 2 traces, got {len(traces)}")
    regions = tuple(t.region_id for t in traces)
    if len(set(regions)) != len(regions):
        raise ValidationError(f"duplicate region ids in {regions}")

    series = [hourly_series(t) for t in traces]
    common = set(series[0])
    for s in series[1:]:
        common.intersection_update(s)

    counts = {h: {r: 0 for r in regions} for h in range(24)}
    ties = {h: 0 for h in range(24)}
    for idx in sorted(common):
        hour = local_hour(idx, reference_utc_offset_minutes)
        vals = [s[idx] for s in series]
        best = min(vals)
        winners = [r for r, v in zip(regions, vals) if v == best]
        if len(winners) == 1:
            counts[hour][winners[0]] += 1
        else:
            ties[hour] += 1
    return HourlyWinnerTable(reference_utc_offset_minutes, regions, counts, ties)


def hourly_trace(
    region_id: str,
    start: datetime,
    values: Iterable[float],
    utc_offset_minutes: int = 0,
) -> IntensityTrace:
    """Build an hourly trace starting at ``start`` from consecutive values."""
    return IntensityTrace(
        region_id,
        utc_offset_minutes,
        tuple((start + timedelta(hours=i), float(v)) for i, v in enumerate(values)),
    )
