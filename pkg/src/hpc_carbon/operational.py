"""Operational energy and carbon from a linear active/idle power blend."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Union

from .errors import ValidationError
from .intensity import HOUR, IntensityTrace, _window_bounds, covered_overlap

USAGE_MEDIUM = 0.40
USAGE_LOW = USAGE_MEDIUM / 1.5
USAGE_HIGH = USAGE_MEDIUM * 1.5
DEFAULT_USAGE_SWEEP = (USAGE_LOW, USAGE_MEDIUM, USAGE_HIGH)


def _fraction(value: float, name: str) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value) or not 0 <= value <= 1:
        raise ValidationError(f"{name} must be in [0, 1], got {value!r}", field=name)


@dataclass(frozen=True)
class UsagePattern:
    """Share of time the device is busy, and share of time the node is allocated."""

    usage_rate: float = USAGE_MEDIUM
    allocation_rate: float = 1.0
    name: Optional[str] = None

    def __post_init__(self):
        _fraction(self.usage_rate, "usage_rate")
        _fraction(self.allocation_rate, "allocation_rate")

    def with_usage(self, usage_rate: float) -> "UsagePattern":
        return UsagePattern(usage_rate, self.allocation_rate, self.name)


LOW_USAGE = UsagePattern(USAGE_LOW, name="low")
MEDIUM_USAGE = UsagePattern(USAGE_MEDIUM, name="medium")
HIGH_USAGE = UsagePattern(USAGE_HIGH, name="high")


@dataclass(frozen=True)
class PowerModel:
    active_power: float  # W per device
    idle_power: float = 0.0  # W per device
    device_count: int = 1
    pue: float = 1.0

    def __post_init__(self):
        for name in ("active_power", "idle_power"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be a finite value >= 0, got {v!r}", field=name)
        if self.idle_power > self.active_power:
            raise ValidationError(
                f"idle_power ({self.idle_power}) must not exceed active_power ({self.active_power})",
                field="idle_power",
            )
        if isinstance(self.device_count, bool) or not isinstance(self.device_count, int) or self.device_count < 1:
            raise ValidationError(f"device_count must be a positive integer, got {self.device_count!r}", field="device_count")
        if not isinstance(self.pue, (int, float)) or not math.isfinite(self.pue) or self.pue < 1:
            raise ValidationError(f"pue must be ≥ 1, got {self.pue!r}", field="pue")


@dataclass(frozen=True)
class EnergyQuantity:
    kwh: float

    def __post_init__(self):
        if not math.isfinite(self.kwh) or self.kwh < 0:
            raise ValidationError(f"energy must be >= 0 kWh, got {self.kwh!r}", field="kwh")


def average_power_kw(model: PowerModel, pattern: UsagePattern, effective_active_fraction: float = 1.0) -> float:
    """Mean facility-level draw in kW, PUE included.

    ``effective_active_fraction`` scales the busy share of time, e.g. a
    faster device doing the same work is busy for a smaller fraction.
    """
    _fraction(effective_active_fraction, "effective_active_fraction")
    busy = pattern.usage_rate * effective_active_fraction
    per_device = busy * model.active_power + (1.0 - busy) * model.idle_power
    return model.device_count * model.pue * pattern.allocation_rate * per_device / 1000.0


def operational_energy(model: PowerModel, pattern: UsagePattern, duration: float) -> EnergyQuantity:
    """Energy drawn over ``duration`` hours."""
    if not math.isfinite(duration) or duration < 0:
        raise ValidationError(f"duration must be >= 0 hours, got {duration!r}", field="duration")
    return EnergyQuantity(average_power_kw(model, pattern) * duration)


def operational(energy: Union[EnergyQuantity, float], intensity: float) -> float:
    """Operational carbon in gCO2: energy (kWh) times grid intensity (gCO2/kWh)."""
    kwh = energy.kwh if isinstance(energy, EnergyQuantity) else EnergyQuantity(energy).kwh
    if not math.isfinite(intensity) or intensity < 0:
        raise ValidationError(f"intensity must be >= 0 gCO2/kWh, got {intensity!r}", field="intensity")
    return kwh * intensity


def operational_over_trace(
    model: PowerModel,
    pattern: UsagePattern,
    trace: IntensityTrace,
    start: datetime,
    end: datetime,
) -> float:
    """Operational carbon over ``[start, end)`` with a time-varying intensity.

    Parts of the window the trace does not cover contribute nothing; a
    warning is issued when that happens.
    """
    lo, hi = _window_bounds(start, end)
    overlap, values = covered_overlap(trace, lo, hi)
    covered = math.fsum(overlap)
    if covered <= 0:
        raise ValidationError(f"{trace.region_id}: window does not overlap the trace")
    if covered < hi - lo:
        warnings.warn(
            f"{trace.region_id}: trace covers {covered / HOUR:.3f} h of a {(hi - lo) / HOUR:.3f} h window",
            stacklevel=2,
        )
    kw = average_power_kw(model, pattern)
    return kw * math.fsum(overlap * values) / HOUR
