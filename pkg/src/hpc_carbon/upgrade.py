"""Carbon break-even analysis for hardware upgrades.

The saving after ``t`` years is the operational carbon the old hardware
would have emitted minus what the new hardware emits for the same work,
less the embodied carbon of the new hardware. It starts negative and, if
the new hardware is more efficient, crosses zero at the break-even time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .errors import ValidationError
from .intensity import HOUR, IntensityTrace
from .operational import PowerModel, UsagePattern, average_power_kw

HOURS_PER_YEAR = 8760.0
INTENSITY_HIGH = 400.0
INTENSITY_MEDIUM = 200.0
INTENSITY_LOW = 20.0
DEFAULT_INTENSITY_SWEEP = (INTENSITY_HIGH, INTENSITY_MEDIUM, INTENSITY_LOW)

WORK_CONSERVING = "work-conserving"
CONSTANT_ACTIVE_TIME = "constant-active-time"
MODES = (WORK_CONSERVING, CONSTANT_ACTIVE_TIME)

Intensity = Union[float, IntensityTrace]


@dataclass(frozen=True)
class UpgradeScenario:
    """Replace ``old_power`` hardware by ``new_power`` hardware at t=0.

    ``perf_improvement`` is the fractional reduction in run time for the
    same work. In ``work-conserving`` mode the new devices are busy for
    ``1 - perf_improvement`` of the old busy time; in ``constant-active-time``
    mode they are busy just as long and only the power draw differs.
    """

    new_embodied: float
    old_power: PowerModel
    new_power: PowerModel
    pattern: UsagePattern = UsagePattern()
    perf_improvement: float = 0.0
    intensity: Intensity = INTENSITY_MEDIUM
    horizon: float = 5.0
    mode: str = WORK_CONSERVING
    name: str = ""

    def __post_init__(self):
        if not math.isfinite(self.new_embodied) or self.new_embodied < 0:
            raise ValidationError(f"new_embodied must be >= 0, got {self.new_embodied!r}", field="new_embodied")
        if not math.isfinite(self.perf_improvement) or not 0 <= self.perf_improvement < 1:
            raise ValidationError(
                f"perf_improvement must be in [0, 1), got {self.perf_improvement!r}", field="perf_improvement"
            )
        if not math.isfinite(self.horizon) or self.horizon <= 0:
            raise ValidationError(f"horizon must be > 0 years, got {self.horizon!r}", field="horizon")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}", field="mode")
        if not isinstance(self.intensity, IntensityTrace):
            if isinstance(self.intensity, bool) or not isinstance(self.intensity, (int, float)):
                raise ValidationError(f"intensity must be a number or a trace, got {self.intensity!r}", field="intensity")
            if not math.isfinite(self.intensity) or self.intensity < 0:
                raise ValidationError(f"intensity must be >= 0, got {self.intensity!r}", field="intensity")

    @property
    def new_active_fraction(self) -> float:
        return 1.0 - self.perf_improvement if self.mode == WORK_CONSERVING else 1.0


@dataclass(frozen=True)
class SavingCurve:
    points: tuple[tuple[float, float], ...]
    break_even: Optional[float]

    def to_csv(self) -> str:
        lines = ["t_years,cumulative_saving_g"]
        lines += [f"{t:.4f},{s:.1f}" for t, s in self.points]
        return "\n".join(lines) + "\n"


def annual_operational_rate(power: PowerModel, pattern: UsagePattern, effective_active_fraction: float = 1.0) -> float:
    """kWh drawn per year (8760 h)."""
    return average_power_kw(power, pattern, effective_active_fraction) * HOURS_PER_YEAR


def annual_energy_saving(scenario: UpgradeScenario) -> float:
    """kWh per year saved by running the new hardware instead of the old."""
    old = annual_operational_rate(scenario.old_power, scenario.pattern, 1.0)
    new = annual_operational_rate(scenario.new_power, scenario.pattern, scenario.new_active_fraction)
    return old - new


class _TraceIntegral:
    """Cumulative intensity-hours of a trace, repeated end to end."""

    def __init__(self, trace: IntensityTrace):
        starts, ends = trace.intervals()
        origin = starts[0]
        self.period = float(ends[-1] - origin)
        pieces = trace.values * (ends - starts) / HOUR
        before = np.concatenate(([0.0], np.cumsum(pieces)[:-1]))
        self.x = np.column_stack((starts - origin, ends - origin)).ravel()
        self.y = np.column_stack((before, before + pieces)).ravel()
        self.per_period = float(self.y[-1])

    def __call__(self, seconds: float) -> float:
        k, rest = divmod(seconds, self.period)
        return k * self.per_period + float(np.interp(rest, self.x, self.y))


def _saving_function(scenario: UpgradeScenario):
    delta = annual_energy_saving(scenario)
    if isinstance(scenario.intensity, IntensityTrace):
        integral = _TraceIntegral(scenario.intensity)
        delta_kw = delta / HOURS_PER_YEAR
        return lambda t: delta_kw * integral(t * HOURS_PER_YEAR * HOUR) - scenario.new_embodied
    rate = scenario.intensity * delta
    return lambda t: rate * t - scenario.new_embodied


def cumulative_saving(scenario: UpgradeScenario, t: float) -> float:
    """Net carbon saved (g) ``t`` years after the upgrade; negative while in debt."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t!r}")
    return _saving_function(scenario)(t)


def _sample_times(horizon: float, samples_per_year: int) -> list[float]:
    if isinstance(samples_per_year, bool) or not isinstance(samples_per_year, int) or samples_per_year < 1:
        raise ValidationError(f"samples_per_year must be a positive integer, got {samples_per_year!r}")
    n = math.ceil(horizon * samples_per_year - 1e-9)
    times = [k / samples_per_year for k in range(n)]
    times.append(horizon)
    return times


def _closed_form_break_even(scenario: UpgradeScenario) -> Optional[float]:
    if scenario.new_embodied == 0:
        return 0.0
    slope = scenario.intensity * annual_energy_saving(scenario)
    if slope <= 0:
        return None
    t = scenario.new_embodied / slope
    return t if t <= scenario.horizon else None


def _bracketed_break_even(scenario: UpgradeScenario, times: Sequence[float], savings: Sequence[float]) -> Optional[float]:
    f = _saving_function(scenario)
    for k, s in enumerate(savings):
        if s >= 0:
            if k == 0:
                return 0.0
            return brentq(f, times[k - 1], times[k], xtol=1e-12)
    return None


def saving_curve(scenario: UpgradeScenario, samples_per_year: int = 52) -> SavingCurve:
    times = _sample_times(scenario.horizon, samples_per_year)
    f = _saving_function(scenario)
    savings = [f(t) for t in times]
    if isinstance(scenario.intensity, IntensityTrace):
        be = _bracketed_break_even(scenario, times, savings)
    else:
        be = _closed_form_break_even(scenario)
    return SavingCurve(tuple(zip(times, savings)), be)


def break_even(scenario: UpgradeScenario, samples_per_year: int = 365) -> Optional[float]:
    """Years until cumulative saving reaches zero, or None if not within the horizon.

    Closed form under constant intensity; for a trace, the first sampled sign
    change is refined by root bracketing.
    """
    if not isinstance(scenario.intensity, IntensityTrace):
        return _closed_form_break_even(scenario)
    return saving_curve(scenario, samples_per_year).break_even


def usage_sensitivity(
    scenario: UpgradeScenario, usage_rates: Iterable[float], samples_per_year: int = 52
) -> list[SavingCurve]:
    """One saving curve per usage rate, everything else unchanged."""
    return [
        saving_curve(replace(scenario, pattern=scenario.pattern.with_usage(u)), samples_per_year)
        for u in usage_rates
    ]


def intensity_sensitivity(
    scenario: UpgradeScenario, intensities: Iterable[float], samples_per_year: int = 52
) -> list[SavingCurve]:
    """One saving curve per constant average intensity."""
    return [saving_curve(replace(scenario, intensity=float(i)), samples_per_year) for i in intensities]
