"""Per-device embodied carbon: manufacturing, packaging and normalized metrics.

All carbon quantities are grams of CO2. Registry values that were shipped as
``UNKNOWN`` are carried as ``None`` and raise :class:`MissingDataError` the
moment a computation needs them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Union

from .errors import MissingDataError, ValidationError

DEFAULT_FAB_YIELD = 0.875
PACKAGING_G_PER_IC = 150.0


class Kind(str, enum.Enum):
    GPU = "GPU"
    CPU = "CPU"
    DRAM = "DRAM"
    SSD = "SSD"
    HDD = "HDD"

    @property
    def is_processor(self) -> bool:
        return self in PROCESSOR_KINDS


PROCESSOR_KINDS = frozenset({Kind.GPU, Kind.CPU})
CAPACITY_KINDS = frozenset({Kind.DRAM, Kind.SSD, Kind.HDD})


def _finite(value: float, name: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}", field=name)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}", field=name)


def _non_negative(value: Optional[float], name: str) -> None:
    if value is None:
        return
    _finite(value, name)
    if value < 0:
        raise ValidationError(f"{name} must be >= 0, got {value!r}", field=name)


def _positive(value: Optional[float], name: str) -> None:
    if value is None:
        return
    _finite(value, name)
    if value <= 0:
        raise ValidationError(f"{name} must be > 0, got {value!r}", field=name)


def _count(value: Optional[int], name: str) -> None:
    if value is None:
        return
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{name} must be an integer, got {value!r}", field=name)
    if value < 0:
        raise ValidationError(f"{name} must be >= 0, got {value!r}", field=name)


def _require(value, name: str, owner: str = ""):
    if value is None:
        where = f"{owner}: " if owner else ""
        raise MissingDataError(f"{where}{name} is UNKNOWN; supply a value in the registry")
    return value


@dataclass(frozen=True)
class ProcessorDieSpec:
    """Die-level parameters of a GPU or CPU.

    ``fpa``, ``gpa`` and ``mpa`` are fab, gas/chemical and raw-material
    emissions per cm^2 of die. Any field may be ``None`` (unknown).
    """

    die_area: Optional[float]
    fpa: Optional[float]
    gpa: Optional[float]
    mpa: Optional[float]
    ic_count: Optional[int]
    fab_yield: Optional[float] = DEFAULT_FAB_YIELD

    def __post_init__(self):
        _positive(self.die_area, "die_area")
        _non_negative(self.fpa, "fpa")
        _non_negative(self.gpa, "gpa")
        _non_negative(self.mpa, "mpa")
        _count(self.ic_count, "ic_count")
        if self.fab_yield is not None:
            _finite(self.fab_yield, "fab_yield")
            if not 0 < self.fab_yield <= 1:
                raise ValidationError(
                    f"fab_yield must be in (0, 1], got {self.fab_yield!r}", field="fab_yield"
                )


@dataclass(frozen=True)
class PerIc:
    ic_count: Optional[int]

    def __post_init__(self):
        _count(self.ic_count, "ic_count")


@dataclass(frozen=True)
class RatioOfManufacturing:
    ratio: Optional[float]

    def __post_init__(self):
        _non_negative(self.ratio, "packaging_ratio")


PackagingMode = Union[PerIc, RatioOfManufacturing]


@dataclass(frozen=True)
class CapacityDeviceSpec:
    """Memory or storage device priced by emission per GB of capacity."""

    capacity: Optional[float]
    epc: Optional[float]
    packaging_mode: PackagingMode

    def __post_init__(self):
        _positive(self.capacity, "capacity")
        _non_negative(self.epc, "epc")
        if not isinstance(self.packaging_mode, (PerIc, RatioOfManufacturing)):
            raise ValidationError(
                f"packaging_mode must be PerIc or RatioOfManufacturing, got {self.packaging_mode!r}",
                field="packaging_mode",
            )


@dataclass(frozen=True)
class ComponentRecord:
    id: str
    kind: Kind
    spec: Union[ProcessorDieSpec, CapacityDeviceSpec]
    peak_fp64: Optional[float] = None  # TFLOPS
    bandwidth: Optional[float] = None  # GB/s
    active_power: Optional[float] = None  # W
    idle_power: Optional[float] = None  # W
    release_date: Optional[date] = None
    label: str = ""

    def __post_init__(self):
        if not self.id or not isinstance(self.id, str):
            raise ValidationError(f"component id must be a non-empty string, got {self.id!r}", field="id")
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise ValidationError(f"{self.id}: unknown kind {self.kind!r}", field="kind") from None
        object.__setattr__(self, "kind", kind)
        expected = ProcessorDieSpec if kind.is_processor else CapacityDeviceSpec
        if not isinstance(self.spec, expected):
            raise ValidationError(
                f"{self.id}: kind/spec mismatch ({kind.value} requires {expected.__name__})",
                field="spec",
            )
        _positive(self.peak_fp64, "peak_fp64")
        _positive(self.bandwidth, "bandwidth")
        _positive(self.active_power, "active_power")
        _non_negative(self.idle_power, "idle_power")


@dataclass(frozen=True)
class EmbodiedBreakdown:
    manufacturing: float
    packaging: float
    total: float = field(init=False)

    def __post_init__(self):
        _non_negative(self.manufacturing, "manufacturing")
        _non_negative(self.packaging, "packaging")
        object.__setattr__(self, "total", self.manufacturing + self.packaging)

    @property
    def packaging_share(self) -> float:
        return self.packaging / self.total if self.total > 0 else 0.0


def manufacturing_processor(spec: ProcessorDieSpec, owner: str = "") -> float:
    """Manufacturing carbon of one processor die in gCO2.

    ``(fpa + gpa + mpa) * die_area / fab_yield``
    """
    per_area = (
        _require(spec.fpa, "fpa_g_per_cm2", owner)
        + _require(spec.gpa, "gpa_g_per_cm2", owner)
        + _require(spec.mpa, "mpa_g_per_cm2", owner)
    )
    area = _require(spec.die_area, "die_area_cm2", owner)
    return per_area * area / _require(spec.fab_yield, "fab_yield", owner)


def manufacturing_capacity(spec: CapacityDeviceSpec, owner: str = "") -> float:
    """Manufacturing carbon of a memory/storage device: ``epc * capacity``."""
    return _require(spec.epc, "epc_g_per_gb", owner) * _require(spec.capacity, "capacity_gb", owner)


def packaging(record: ComponentRecord) -> float:
    spec = record.spec
    if isinstance(spec, ProcessorDieSpec):
        return PACKAGING_G_PER_IC * _require(spec.ic_count, "ic_count", record.id)
    mode = spec.packaging_mode
    if isinstance(mode, PerIc):
        return PACKAGING_G_PER_IC * _require(mode.ic_count, "ic_count", record.id)
    ratio = _require(mode.ratio, "packaging_ratio", record.id)
    return ratio * manufacturing_capacity(spec, record.id)


def manufacturing(record: ComponentRecord) -> float:
    if isinstance(record.spec, ProcessorDieSpec):
        return manufacturing_processor(record.spec, record.id)
    return manufacturing_capacity(record.spec, record.id)


def embodied(record: ComponentRecord) -> EmbodiedBreakdown:
    """Manufacturing plus packaging carbon of a single device."""
    return EmbodiedBreakdown(manufacturing=manufacturing(record), packaging=packaging(record))


def _normalize(total: float, figure: Optional[float], what: str) -> float:
    if figure is None or not math.isfinite(figure) or figure <= 0:
        raise MissingDataError(f"{what} figure required for normalization (got {figure!r})")
    return total / figure


def normalize_per_flops(breakdown: EmbodiedBreakdown, peak_fp64: Optional[float]) -> float:
    """Total embodied carbon per TFLOPS of peak FP64 throughput."""
    return _normalize(breakdown.total, peak_fp64, "performance")


def normalize_per_bandwidth(breakdown: EmbodiedBreakdown, bandwidth: Optional[float]) -> float:
    """Total embodied carbon per GB/s of device bandwidth."""
    return _normalize(breakdown.total, bandwidth, "bandwidth")
