"""On-disk formats: component registry, system configs and upgrade scenarios.

All three share one line-oriented grammar::

    # comment
    format_version = 1

    [component dram64]
    kind = DRAM
    capacity_gb = 64
    epc_g_per_gb = 65
    ic_count = 20

A file starts with ``format_version``; each ``[<type> <id>]`` header opens a
section of ``key = value`` lines. Numbers are plain decimals (no exponents,
no ``nan``/``inf``). Units are fixed by the key suffix. Spec parameters of a
component may be ``UNKNOWN``; computing with one raises MissingDataError.
See docs/formats.md for every key.
"""

from __future__ import annotations

import hashlib
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal
from pathlib import Path
from typing import BinaryIO, Iterator, Optional, Union

from .components import (
    DEFAULT_FAB_YIELD,
    CapacityDeviceSpec,
    ComponentRecord,
    Kind,
    PerIc,
    ProcessorDieSpec,
    RatioOfManufacturing,
)
from .errors import CarbonModelError, ValidationError
from .system import SystemConfig

FORMAT_VERSION = 1
UNKNOWN = "UNKNOWN"
STARTER_REGISTRY = Path(__file__).with_name("data") / "starter_registry.cfg"

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")
_INTEGER = re.compile(r"^[+-]?\d+$")
_HEADER = re.compile(r"^\[\s*([a-z]+)\s+([A-Za-z0-9_.\-]+)\s*\]$")
_KEY_VALUE = re.compile(r"^([a-z0-9_]+)\s*=\s*(.*)$")

Source = Union[bytes, BinaryIO]

PROCESSOR_KEYS = ("die_area_cm2", "fpa_g_per_cm2", "gpa_g_per_cm2", "mpa_g_per_cm2", "fab_yield", "ic_count")
CAPACITY_KEYS = ("capacity_gb", "epc_g_per_gb", "ic_count", "packaging_ratio")
COMMON_KEYS = (
    "kind",
    "label",
    "peak_fp64_tflops",
    "bandwidth_gb_per_s",
    "active_power_w",
    "idle_power_w",
    "release_date",
)


@dataclass
class Entry:
    key: str
    value: str
    line: int


@dataclass
class Section:
    type: str
    name: str
    line: int
    entries: list[Entry] = field(default_factory=list)

    def path(self, key: str) -> str:
        return f"{self.type}.{self.name}.{key}"


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    data = source.read()
    if isinstance(data, str):
        return data.encode("utf-8")
    return data


def parse_sections(data: bytes, allowed: tuple[str, ...]) -> list[Section]:
    """Split a file into sections, checking the version header and line syntax."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"file is not valid UTF-8: {exc}") from None
    sections: list[Section] = []
    version_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not version_seen:
            m = _KEY_VALUE.match(line)
            if not m or m.group(1) != "format_version":
                raise ValidationError("file must start with 'format_version = 1'", line=lineno)
            if not _INTEGER.match(m.group(2).strip()) or int(m.group(2)) != FORMAT_VERSION:
                raise ValidationError(
                    f"unsupported format_version {m.group(2).strip()!r} (this reader handles {FORMAT_VERSION})",
                    line=lineno,
                )
            version_seen = True
            continue
        header = _HEADER.match(line)
        if header:
            if header.group(1) not in allowed:
                raise ValidationError(
                    f"unexpected section type {header.group(1)!r}; expected one of {', '.join(allowed)}",
                    line=lineno,
                )
            sections.append(Section(header.group(1), header.group(2), lineno))
            continue
        kv = _KEY_VALUE.match(line)
        if not kv:
            raise ValidationError(f"cannot parse {line!r}; expected '[type id]' or 'key = value'", line=lineno)
        if not sections:
            raise ValidationError(f"key {kv.group(1)!r} outside of any section", line=lineno)
        sections[-1].entries.append(Entry(kv.group(1), kv.group(2).strip(), lineno))
    if not version_seen:
        raise ValidationError("empty file: missing 'format_version = 1'")
    return sections


def _single_valued(section: Section, allowed: tuple[str, ...], repeated: tuple[str, ...] = ()) -> dict[str, Entry]:
    values: dict[str, Entry] = {}
    for e in section.entries:
        if e.key not in allowed and e.key not in repeated:
            raise ValidationError(f"{section.path(e.key)}: unknown key", field=e.key, line=e.line)
        if e.key in repeated:
            continue
        if e.key in values:
            raise ValidationError(
                f"{section.path(e.key)}: repeated key (first on line {values[e.key].line})", field=e.key, line=e.line
            )
        values[e.key] = e
    return values


def _decimal(entry: Entry, section: Section, unknown_ok: bool = False) -> Optional[float]:
    if entry.value == UNKNOWN:
        if unknown_ok:
            return None
        raise ValidationError(f"{section.path(entry.key)}: UNKNOWN is not allowed here", field=entry.key, line=entry.line)
    if not _DECIMAL.match(entry.value):
        raise ValidationError(
            f"{section.path(entry.key)}: expected a decimal number, got {entry.value!r}", field=entry.key, line=entry.line
        )
    return float(entry.value)


def _integer(entry: Entry, section: Section, unknown_ok: bool = False) -> Optional[int]:
    if entry.value == UNKNOWN and unknown_ok:
        return None
    if not _INTEGER.match(entry.value):
        raise ValidationError(
            f"{section.path(entry.key)}: expected an integer, got {entry.value!r}", field=entry.key, line=entry.line
        )
    return int(entry.value)


def _required(values: dict[str, Entry], key: str, section: Section) -> Entry:
    if key not in values:
        raise ValidationError(f"{section.path(key)}: missing required field", field=key, line=section.line)
    return values[key]


def _build(section: Section, factory, *args, **kwargs):
    """Run a dataclass constructor, re-raising its validation error with a location."""
    try:
        return factory(*args, **kwargs)
    except ValidationError as exc:
        line = section.line
        for e in section.entries:
            if exc.field and e.key.startswith(exc.field):
                line = e.line
                break
        raise ValidationError(f"{section.type} {section.name}: {exc}", field=exc.field, line=line) from None


def _component(section: Section) -> ComponentRecord:
    values = _single_valued(section, COMMON_KEYS + PROCESSOR_KEYS + CAPACITY_KEYS)
    kind_entry = _required(values, "kind", section)
    try:
        kind = Kind(kind_entry.value)
    except ValueError:
        raise ValidationError(
            f"{section.path('kind')}: unknown kind {kind_entry.value!r}; expected one of "
            + ", ".join(k.value for k in Kind),
            field="kind",
            line=kind_entry.line,
        ) from None

    foreign = set(CAPACITY_KEYS) - set(PROCESSOR_KEYS) if kind.is_processor else set(PROCESSOR_KEYS) - set(CAPACITY_KEYS)
    for key in sorted(foreign & set(values)):
        raise ValidationError(
            f"{section.path(key)}: kind/spec mismatch ({kind.value} records do not take {key})",
            field=key,
            line=values[key].line,
        )

    def num(key, unknown_ok=True):
        return _decimal(values[key], section, unknown_ok) if key in values else None

    if kind.is_processor:
        fields = {k: _decimal(_required(values, k, section), section, True) for k in PROCESSOR_KEYS[:4]}
        ic = _integer(_required(values, "ic_count", section), section, True)
        fab_yield = num("fab_yield") if "fab_yield" in values else DEFAULT_FAB_YIELD
        spec = _build(
            section,
            ProcessorDieSpec,
            die_area=fields["die_area_cm2"],
            fpa=fields["fpa_g_per_cm2"],
            gpa=fields["gpa_g_per_cm2"],
            mpa=fields["mpa_g_per_cm2"],
            ic_count=ic,
            fab_yield=fab_yield,
        )
    else:
        capacity = _decimal(_required(values, "capacity_gb", section), section, True)
        epc = _decimal(_required(values, "epc_g_per_gb", section), section, True)
        if "ic_count" in values and "packaging_ratio" in values:
            raise ValidationError(
                f"{section.path('packaging_ratio')}: give either ic_count or packaging_ratio, not both",
                field="packaging_ratio",
                line=values["packaging_ratio"].line,
            )
        if "ic_count" in values:
            mode = _build(section, PerIc, _integer(values["ic_count"], section, True))
        elif "packaging_ratio" in values:
            mode = _build(section, RatioOfManufacturing, num("packaging_ratio"))
        else:
            raise ValidationError(
                f"{section.path('ic_count')}: missing required field (or packaging_ratio)",
                field="ic_count",
                line=section.line,
            )
        spec = _build(section, CapacityDeviceSpec, capacity=capacity, epc=epc, packaging_mode=mode)

    release = None
    if "release_date" in values and values["release_date"].value != UNKNOWN:
        e = values["release_date"]
        try:
            release = date.fromisoformat(e.value)
        except ValueError:
            raise ValidationError(
                f"{section.path('release_date')}: expected YYYY-MM-DD, got {e.value!r}", field="release_date", line=e.line
            ) from None
    return _build(
        section,
        ComponentRecord,
        id=section.name,
        kind=kind,
        spec=spec,
        peak_fp64=num("peak_fp64_tflops"),
        bandwidth=num("bandwidth_gb_per_s"),
        active_power=num("active_power_w"),
        idle_power=num("idle_power_w"),
        release_date=release,
        label=values["label"].value if "label" in values else "",
    )


@dataclass(frozen=True)
class Registry(Mapping):
    """Validated, read-only component lookup keyed by component id."""

    components: dict[str, ComponentRecord]
    source_digest: str = field(default="", compare=False)

    def __getitem__(self, key: str) -> ComponentRecord:
        return self.components[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def load_registry(source: Source) -> Registry:
    """Parse and validate a registry file; any error rejects the whole file."""
    data = _read_bytes(source)
    components: dict[str, ComponentRecord] = {}
    first_line: dict[str, int] = {}
    for section in parse_sections(data, ("component",)):
        if section.name in components:
            raise ValidationError(
                f"duplicate component id {section.name!r} (first defined on line {first_line[section.name]})",
                field="id",
                line=section.line,
            )
        components[section.name] = _component(section)
        first_line[section.name] = section.line
    return Registry(components, digest(data))


def load_registry_path(path: Union[str, Path, None] = None) -> Registry:
    with open(path or STARTER_REGISTRY, "rb") as fh:
        return load_registry(fh)


def _fmt(value) -> str:
    if value is None:
        return UNKNOWN
    if isinstance(value, int):
        return str(value)
    return format(Decimal(repr(float(value))), "f")


def dump_registry(registry: Mapping[str, ComponentRecord]) -> str:
    """Serialize a registry back into the file grammar."""
    out = [f"format_version = {FORMAT_VERSION}"]
    for cid, rec in registry.items():
        out += ["", f"[component {cid}]", f"kind = {rec.kind.value}"]
        if rec.label:
            out.append(f"label = {rec.label}")
        spec = rec.spec
        if isinstance(spec, ProcessorDieSpec):
            out += [
                f"die_area_cm2 = {_fmt(spec.die_area)}",
                f"fpa_g_per_cm2 = {_fmt(spec.fpa)}",
                f"gpa_g_per_cm2 = {_fmt(spec.gpa)}",
                f"mpa_g_per_cm2 = {_fmt(spec.mpa)}",
                f"fab_yield = {_fmt(spec.fab_yield)}",
                f"ic_count = {_fmt(spec.ic_count)}",
            ]
        else:
            out += [f"capacity_gb = {_fmt(spec.capacity)}", f"epc_g_per_gb = {_fmt(spec.epc)}"]
            mode = spec.packaging_mode
            if isinstance(mode, PerIc):
                out.append(f"ic_count = {_fmt(mode.ic_count)}")
            else:
                out.append(f"packaging_ratio = {_fmt(mode.ratio)}")
        for key, value in (
            ("peak_fp64_tflops", rec.peak_fp64),
            ("bandwidth_gb_per_s", rec.bandwidth),
            ("active_power_w", rec.active_power),
            ("idle_power_w", rec.idle_power),
        ):
            if value is not None:
                out.append(f"{key} = {_fmt(value)}")
        if rec.release_date is not None:
            out.append(f"release_date = {rec.release_date.isoformat()}")
    return "\n".join(out) + "\n"


def _only_section(data: bytes, kind: str) -> Section:
    sections = parse_sections(data, (kind,))
    if len(sections) != 1:
        raise ValidationError(f"expected exactly one [{kind} ...] section, found {len(sections)}")
    return sections[0]


def load_system(source: Source, registry: Optional[Mapping[str, ComponentRecord]] = None) -> SystemConfig:
    """Parse a system file.

    With a registry, every item must name a registered component.
    """
    section = _only_section(_read_bytes(source), "system")
    values = _single_valued(section, ("pue", "region"), repeated=("item",))
    items: list[tuple[str, int]] = []
    seen: dict[str, int] = {}
    for e in section.entries:
        if e.key != "item":
            continue
        parts = e.value.split()
        if len(parts) != 2:
            raise ValidationError(f"{section.path('item')}: expected '<component_id> <count>'", field="item", line=e.line)
        cid, count_text = parts
        if cid in seen:
            raise ValidationError(
                f"{section.path('item')}: duplicate component id {cid!r} (first on line {seen[cid]})",
                field="item",
                line=e.line,
            )
        if not _INTEGER.match(count_text) or int(count_text) < 1:
            raise ValidationError(
                f"{section.path('item')}: count for {cid!r} must be a positive integer, got {count_text!r}",
                field="item",
                line=e.line,
            )
        if registry is not None and cid not in registry:
            raise ValidationError(f"{section.path('item')}: unknown component id {cid!r}", field="item", line=e.line)
        seen[cid] = e.line
        items.append((cid, int(count_text)))
    if not items:
        raise ValidationError(f"system {section.name}: empty system (no 'item' lines)", line=section.line)
    pue = _decimal(values["pue"], section) if "pue" in values else 1.0
    region = values["region"].value if "region" in values else None
    return _build(section, SystemConfig, section.name, tuple(items), pue, region)


SCENARIO_KEYS = (
    "new_embodied_g",
    "new_system",
    "perf_improvement",
    "usage_rate",
    "allocation_rate",
    "intensity_g_per_kwh",
    "intensity_trace",
    "horizon_years",
    "mode",
    "old_active_power_w",
    "old_idle_power_w",
    "old_device_count",
    "old_pue",
    "new_active_power_w",
    "new_idle_power_w",
    "new_device_count",
    "new_pue",
)


def load_scenario(
    source: Source,
    base_dir: Union[str, Path, None] = None,
    registry: Optional[Mapping[str, ComponentRecord]] = None,
):
    """Parse an upgrade scenario file into an :class:`UpgradeScenario`.

    ``intensity_trace`` and ``new_system`` paths are resolved against
    ``base_dir``. ``new_system`` derives the embodied cost from the registry.
    """
    from .intensity import load_trace
    from .operational import PowerModel, UsagePattern
    from .system import system_embodied
    from .upgrade import WORK_CONSERVING, UpgradeScenario

    section = _only_section(_read_bytes(source), "scenario")
    values = _single_valued(section, SCENARIO_KEYS)
    base = Path(base_dir) if base_dir is not None else Path.cwd()

    def num(key, default=None):
        if key in values:
            return _decimal(values[key], section)
        if default is None:
            raise ValidationError(f"{section.path(key)}: missing required field", field=key, line=section.line)
        return default

    def count(key):
        return _integer(values[key], section) if key in values else 1

    def power(prefix):
        return _build(
            section,
            PowerModel,
            active_power=num(f"{prefix}_active_power_w"),
            idle_power=num(f"{prefix}_idle_power_w", 0.0),
            device_count=count(f"{prefix}_device_count"),
            pue=num(f"{prefix}_pue", 1.0),
        )

    if ("new_embodied_g" in values) == ("new_system" in values):
        raise ValidationError(
            f"scenario {section.name}: give exactly one of new_embodied_g or new_system", line=section.line
        )
    if "new_system" in values:
        if registry is None:
            raise ValidationError(f"{section.path('new_system')}: a registry is needed to resolve it")
        with open(base / values["new_system"].value, "rb") as fh:
            new_embodied = system_embodied(load_system(fh, registry), registry).total
    else:
        new_embodied = num("new_embodied_g")

    if ("intensity_g_per_kwh" in values) == ("intensity_trace" in values):
        raise ValidationError(
            f"scenario {section.name}: give exactly one of intensity_g_per_kwh or intensity_trace", line=section.line
        )
    if "intensity_trace" in values:
        path = base / values["intensity_trace"].value
        with open(path, "rb") as fh:
            try:
                intensity = load_trace(fh, path.stem)
            except CarbonModelError as exc:
                raise ValidationError(f"{path.name}: {exc}") from None
    else:
        intensity = num("intensity_g_per_kwh")

    pattern = _build(section, UsagePattern, num("usage_rate", 0.40), num("allocation_rate", 1.0), section.name)
    return _build(
        section,
        UpgradeScenario,
        new_embodied=new_embodied,
        old_power=power("old"),
        new_power=power("new"),
        pattern=pattern,
        perf_improvement=num("perf_improvement", 0.0),
        intensity=intensity,
        horizon=num("horizon_years", 5.0),
        mode=values["mode"].value if "mode" in values else WORK_CONSERVING,
        name=section.name,
    )
