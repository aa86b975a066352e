"""Carbon footprint modeling for HPC components, systems and upgrades."""

from .components import (
    CapacityDeviceSpec,
    ComponentRecord,
    EmbodiedBreakdown,
    Kind,
    PerIc,
    ProcessorDieSpec,
    RatioOfManufacturing,
    embodied,
    manufacturing_capacity,
    manufacturing_processor,
    normalize_per_bandwidth,
    normalize_per_flops,
    packaging,
)
from .errors import CarbonModelError, MissingDataError, PreconditionError, ValidationError
from .intensity import IntensityStats, IntensityTrace, hourly_winners, load_trace, stats, window_average
from .operational import EnergyQuantity, PowerModel, UsagePattern, operational, operational_energy, operational_over_trace
from .registry import Registry, load_registry, load_scenario, load_system
from .system import SystemConfig, SystemEmbodiedReport, compute_vs_memstorage, perf_to_embodied_ratios, system_embodied
from .upgrade import SavingCurve, UpgradeScenario, break_even, saving_curve, usage_sensitivity

__version__ = "0.1.0"

__all__ = [
    "CapacityDeviceSpec",
    "ComponentRecord",
    "EmbodiedBreakdown",
    "Kind",
    "PerIc",
    "ProcessorDieSpec",
    "RatioOfManufacturing",
    "embodied",
    "manufacturing_capacity",
    "manufacturing_processor",
    "normalize_per_bandwidth",
    "normalize_per_flops",
    "packaging",
    "CarbonModelError",
    "MissingDataError",
    "PreconditionError",
    "ValidationError",
    "IntensityStats",
    "IntensityTrace",
    "hourly_winners",
    "load_trace",
    "stats",
    "window_average",
    "EnergyQuantity",
    "PowerModel",
    "UsagePattern",
    "operational",
    "operational_energy",
    "operational_over_trace",
    "Registry",
    "load_registry",
    "load_scenario",
    "load_system",
    "SystemConfig",
    "SystemEmbodiedReport",
    "compute_vs_memstorage",
    "perf_to_embodied_ratios",
    "system_embodied",
    "SavingCurve",
    "UpgradeScenario",
    "break_even",
    "saving_curve",
    "usage_sensitivity",
]
