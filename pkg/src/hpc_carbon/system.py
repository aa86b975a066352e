"""Bill-of-materials aggregation of embodied carbon."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .components import CAPACITY_KINDS, PROCESSOR_KINDS, ComponentRecord, Kind, embodied
from .errors import ValidationError


@dataclass(frozen=True)
class SystemConfig:
    """A machine or a node: component ids with counts, plus facility PUE."""

    name: str
    items: tuple[tuple[str, int], ...]
    pue: float = 1.0
    region: Optional[str] = None

    def __post_init__(self):
        items = tuple((str(cid), count) for cid, count in self.items)
        object.__setattr__(self, "items", items)
        seen = set()
        for cid, count in items:
            if cid in seen:
                raise ValidationError(f"{self.name}: duplicate component id {cid!r}", field="items")
            seen.add(cid)
            if isinstance(count, bool) or not isinstance(count, int) or count < 1:
                raise ValidationError(
                    f"{self.name}: count for {cid!r} must be a positive integer, got {count!r}",
                    field="items",
                )
        if not isinstance(self.pue, (int, float)) or not math.isfinite(self.pue) or self.pue < 1:
            raise ValidationError(f"pue must be ≥ 1, got {self.pue!r}", field="pue")

    def scaled(self, factor: int) -> "SystemConfig":
        return SystemConfig(
            self.name, tuple((cid, n * factor) for cid, n in self.items), self.pue, self.region
        )


@dataclass(frozen=True)
class SystemEmbodiedReport:
    total: float
    per_component: dict[str, float]
    per_kind: dict[Kind, float]
    shares: dict[Kind, float]
    compute_share: float
    memstorage_share: float
    # set when total is zero and every share was reported as 0
    degenerate: bool = field(default=False)


def system_embodied(config: SystemConfig, registry: Mapping[str, ComponentRecord]) -> SystemEmbodiedReport:
    """Embodied carbon of every component in ``config``, broken down by id and kind.

    Sums use :func:`math.fsum`, so the report is independent of item order.
    """
    if not config.items:
        raise ValidationError(f"{config.name}: empty system", field="items")
    per_component: dict[str, float] = {}
    by_kind: dict[Kind, list[float]] = {kind: [] for kind in Kind}
    for cid, count in sorted(config.items):
        try:
            record = registry[cid]
        except KeyError:
            raise ValidationError(f"{config.name}: unknown component id {cid!r}", field="items") from None
        value = count * embodied(record).total
        per_component[cid] = value
        by_kind[record.kind].append(value)

    per_kind = {kind: math.fsum(vals) for kind, vals in by_kind.items()}
    total = math.fsum(per_component.values())
    degenerate = total <= 0
    if degenerate:
        shares = {kind: 0.0 for kind in Kind}
    else:
        shares = {kind: v / total for kind, v in per_kind.items()}
    compute = math.fsum(per_kind[k] for k in PROCESSOR_KINDS)
    memstorage = math.fsum(per_kind[k] for k in CAPACITY_KINDS)
    return SystemEmbodiedReport(
        total=total,
        per_component=per_component,
        per_kind=per_kind,
        shares=shares,
        compute_share=0.0 if degenerate else compute / total,
        memstorage_share=0.0 if degenerate else memstorage / total,
        degenerate=degenerate,
    )


def compute_vs_memstorage(report: SystemEmbodiedReport) -> tuple[float, float]:
    """(GPU+CPU share, DRAM+SSD+HDD share) of the system's embodied carbon."""
    return report.compute_share, report.memstorage_share


def perf_to_embodied_ratios(
    embodied_totals: Sequence[float], performance: Sequence[float], baseline_index: int = 0
) -> list[float]:
    """Normalized performance over normalized embodied carbon, relative to a baseline.

    A value below 1 means each added unit of embodied carbon bought less
    throughput than at the baseline configuration.
    """
    if len(embodied_totals) != len(performance):
        raise ValidationError(
            f"length mismatch: {len(embodied_totals)} embodied values vs {len(performance)} performance values"
        )
    if not embodied_totals:
        raise ValidationError("at least one configuration is required")
    if not -len(embodied_totals) <= baseline_index < len(embodied_totals):
        raise ValidationError(f"baseline_index {baseline_index} out of range")
    for name, seq in (("embodied", embodied_totals), ("performance", performance)):
        for v in seq:
            if not math.isfinite(v) or v <= 0:
                raise ValidationError(f"{name} values must be > 0, got {v!r}")
    base_e = embodied_totals[baseline_index]
    base_p = performance[baseline_index]
    return [(p / base_p) / (e / base_e) for e, p in zip(embodied_totals, performance)]
