"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 missing optional data (including
UNKNOWN registry values), 4 analysis precondition not met.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from .components import Kind, embodied, normalize_per_bandwidth, normalize_per_flops
from .errors import CarbonModelError, MissingDataError, ValidationError
from .intensity import TIE, hourly_winners, load_trace, stats
from .operational import DEFAULT_USAGE_SWEEP
from .registry import STARTER_REGISTRY, load_registry, load_scenario, load_system
from .system import system_embodied
from .upgrade import DEFAULT_INTENSITY_SWEEP, intensity_sensitivity, usage_sensitivity

SCHEMA_VERSION = "1"
REGISTRY_ENV = "HPC_CARBON_REGISTRY"
NO_BREAK_EVEN = "none within horizon"


def g(x: float) -> str:
    return f"{x:.1f}"


def frac(x: float) -> str:
    return f"{x:.4f}"


def pct(x: float) -> str:
    return f"{100 * x:.1f}%"


class Inputs:
    """Accumulates everything that determines a command's output."""

    def __init__(self, command: str):
        self.command = command
        self._h = hashlib.sha256(command.encode())

    def add_file(self, path: Path) -> bytes:
        data = Path(path).read_bytes()
        self._h.update(b"\0file\0" + hashlib.sha256(data).digest())
        return data

    def add_arg(self, name: str, value) -> None:
        self._h.update(f"\0arg\0{name}={value!r}".encode())

    @property
    def digest(self) -> str:
        return "sha256:" + self._h.hexdigest()


class Output:
    def __init__(self, body: dict, table: str, csv: str):
        self.body = body
        self.table = table
        self.csv = csv


def _table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines)


def _registry(args, inputs: Inputs):
    path = Path(args.registry or os.environ.get(REGISTRY_ENV) or STARTER_REGISTRY)
    return load_registry(inputs.add_file(path))


def cmd_embodied(args, inputs: Inputs) -> Output:
    registry = _registry(args, inputs)
    inputs.add_arg("component", args.component)
    inputs.add_arg("per_flops", args.per_flops)
    inputs.add_arg("per_bandwidth", args.per_bandwidth)
    if args.component not in registry:
        raise ValidationError(f"unknown component id {args.component!r}")
    rec = registry[args.component]
    eb = embodied(rec)
    body = {
        "component": rec.id,
        "kind": rec.kind.value,
        "label": rec.label,
        "manufacturing_g": round(eb.manufacturing, 1),
        "packaging_g": round(eb.packaging, 1),
        "total_g": round(eb.total, 1),
        "packaging_share": round(eb.packaging_share, 4),
    }
    rows = [
        ["component", f"{rec.id} ({rec.kind.value})"],
        ["manufacturing_g", g(eb.manufacturing)],
        ["packaging_g", g(eb.packaging)],
        ["total_g", g(eb.total)],
        ["packaging_share", frac(eb.packaging_share)],
    ]
    if args.per_flops:
        if rec.peak_fp64 is None:
            raise MissingDataError(f"{rec.id}: performance figure required for normalization (peak_fp64_tflops not set)")
        v = normalize_per_flops(eb, rec.peak_fp64)
        body["g_per_tflops"] = round(v, 1)
        rows.append(["g_per_tflops", g(v)])
    if args.per_bandwidth:
        if rec.bandwidth is None:
            raise MissingDataError(f"{rec.id}: bandwidth figure required for normalization (bandwidth_gb_per_s not set)")
        v = normalize_per_bandwidth(eb, rec.bandwidth)
        body["g_per_gb_per_s"] = round(v, 1)
        rows.append(["g_per_gb_per_s", g(v)])
    header = [r[0] for r in rows]
    header[0] = "component_id"
    values = [rec.id] + [r[1] for r in rows[1:]]
    csv = ",".join(header) + "\n" + ",".join(values) + "\n"
    return Output(body, _table(rows) + "\n", csv)


def cmd_system(args, inputs: Inputs) -> Output:
    registry = _registry(args, inputs)
    config = load_system(inputs.add_file(args.system), registry)
    report = system_embodied(config, registry)
    counts = dict(config.items)
    total = report.total

    def share(v):
        return v / total if total > 0 else 0.0

    comp_rows = [["component", "kind", "count", "embodied_g", "share"]]
    csv_rows = ["scope,key,embodied_g,share_percent"]
    for cid, v in report.per_component.items():
        comp_rows.append([cid, registry[cid].kind.value, str(counts[cid]), g(v), pct(share(v))])
        csv_rows.append(f"component,{cid},{g(v)},{100 * share(v):.1f}")
    kind_rows = [["kind", "embodied_g", "share"]]
    for kind in Kind:
        v = report.per_kind[kind]
        kind_rows.append([kind.value, g(v), pct(report.shares[kind])])
        csv_rows.append(f"kind,{kind.value},{g(v)},{100 * report.shares[kind]:.1f}")
    compute = total * report.compute_share
    memstorage = total * report.memstorage_share
    csv_rows.append(f"group,compute,{g(compute)},{100 * report.compute_share:.1f}")
    csv_rows.append(f"group,memory_storage,{g(memstorage)},{100 * report.memstorage_share:.1f}")
    csv_rows.append(f"total,{config.name},{g(total)},{100.0 if total > 0 else 0.0:.1f}")

    table = "\n\n".join(
        [
            f"system {config.name} (pue {config.pue:g}" + (f", region {config.region})" if config.region else ")"),
            _table(comp_rows),
            _table(kind_rows),
            _table(
                [
                    ["compute (GPU+CPU)", g(compute), pct(report.compute_share)],
                    ["memory/storage (DRAM+SSD+HDD)", g(memstorage), pct(report.memstorage_share)],
                    ["total", g(total), ""],
                ]
            ),
        ]
    )
    if report.degenerate:
        table += "\n\nwarning: total embodied carbon is zero; shares reported as 0"
    body = {
        "system": config.name,
        "pue": config.pue,
        "region": config.region,
        "total_g": round(total, 1),
        "per_component_g": {k: round(v, 1) for k, v in report.per_component.items()},
        "per_kind_g": {k.value: round(v, 1) for k, v in report.per_kind.items()},
        "shares": {k.value: round(v, 4) for k, v in report.shares.items()},
        "compute_share": round(report.compute_share, 4),
        "memstorage_share": round(report.memstorage_share, 4),
        "degenerate": report.degenerate,
    }
    return Output(body, table + "\n", "\n".join(csv_rows) + "\n")


_OFFSET = re.compile(r"^(?:UTC([+-])(\d{1,2})(?::(\d{2}))?|([+-])(\d{2}):(\d{2}))$")


def parse_offset(text: str) -> int:
    """``+09:00``, ``UTC+9``, ``UTC-5:30`` or whole minutes such as ``540``."""
    text = text.strip()
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    m = _OFFSET.match(text)
    if not m:
        raise ValidationError(f"cannot parse UTC offset {text!r}; use +HH:MM, UTC+H or minutes")
    sign, hours, mins = (m.group(1), m.group(2), m.group(3)) if m.group(1) else (m.group(4), m.group(5), m.group(6))
    minutes = int(hours) * 60 + int(mins or 0)
    return -minutes if sign == "-" else minutes


def cmd_intensity(args, inputs: Inputs) -> Output:
    traces = []
    for path in args.traces:
        path = Path(path)
        data = inputs.add_file(path)
        try:
            traces.append(load_trace(data, path.stem))
        except ValidationError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if args.winners:
        offset = parse_offset(args.ref_offset)
        inputs.add_arg("ref_offset", offset)
        table = hourly_winners(traces, offset)
        header = ["hour"] + list(table.regions) + [TIE]
        rows = [header]
        for h in range(24):
            rows.append([str(h)] + [str(table.counts[h][r]) for r in table.regions] + [str(table.ties[h])])
        body = {
            "reference_utc_offset_minutes": offset,
            "regions": list(table.regions),
            "counts": {str(h): table.counts[h] for h in range(24)},
            "ties": {str(h): table.ties[h] for h in range(24)},
        }
        csv = "\n".join(",".join(r) for r in rows) + "\n"
        return Output(body, _table(rows) + "\n", csv)

    header = ["region", "n", "mean", "median", "std", "cov_percent", "min", "q1", "q3", "max"]
    rows = [header]
    body = {}
    for t in traces:
        s = stats(t)
        rows.append(
            [t.region_id, str(s.n), g(s.mean), g(s.median), g(s.std), f"{s.cov_percent:.1f}%", g(s.min), g(s.q1), g(s.q3), g(s.max)]
        )
        body[t.region_id] = {
            "n": s.n,
            **{k: round(getattr(s, k), 1) for k in ("mean", "median", "std", "cov_percent", "min", "q1", "q3", "max")},
        }
    csv = "\n".join(",".join(c.rstrip("%") for c in r) for r in rows) + "\n"
    return Output({"stats": body}, _table(rows) + "\n", csv)


def _parse_list(text: str, name: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ValidationError(f"{name}: empty list")
    return values


def cmd_upgrade(args, inputs: Inputs) -> Output:
    path = Path(args.scenario)
    data = inputs.add_file(path)
    registry = None
    if args.registry or os.environ.get(REGISTRY_ENV):
        registry = _registry(args, inputs)
    scenario = load_scenario(data, base_dir=path.parent, registry=registry)

    sweeps: list[tuple[str, list[float], Callable[[float], str]]] = []
    if args.sweep_intensity is None and args.sweep_usage is None:
        sweeps.append(("intensity", list(DEFAULT_INTENSITY_SWEEP), g))
        sweeps.append(("usage", list(DEFAULT_USAGE_SWEEP), frac))
    if args.sweep_intensity is not None:
        sweeps.append(("intensity", _parse_list(args.sweep_intensity, "--sweep-intensity"), g))
    if args.sweep_usage is not None:
        sweeps.append(("usage", _parse_list(args.sweep_usage, "--sweep-usage"), frac))
    inputs.add_arg("sweeps", [(n, v) for n, v, _ in sweeps])
    inputs.add_arg("samples_per_year", args.samples_per_year)

    rows = [["sweep", "value", "break_even_years"]]
    body_curves = []
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for name, values, fmt in sweeps:
        if name == "intensity":
            curves = intensity_sensitivity(scenario, values, args.samples_per_year)
        else:
            curves = usage_sensitivity(scenario, values, args.samples_per_year)
        for value, curve in zip(values, curves):
            be = NO_BREAK_EVEN if curve.break_even is None else frac(curve.break_even)
            rows.append([name, fmt(value), be])
            body_curves.append(
                {
                    "sweep": name,
                    "value": float(fmt(value)),
                    "break_even_years": None if curve.break_even is None else round(curve.break_even, 4),
                    "points": [[round(t, 4), round(s, 1)] for t, s in curve.points],
                }
            )
            if out_dir:
                (out_dir / f"{name}_{fmt(value)}.csv").write_text(curve.to_csv())
    body = {"scenario": scenario.name, "new_embodied_g": round(scenario.new_embodied, 1), "curves": body_curves}
    csv = "\n".join(",".join(r) for r in rows) + "\n"
    return Output(body, _table(rows) + "\n", csv)


COMMANDS = {
    "embodied": cmd_embodied,
    "system": cmd_system,
    "intensity": cmd_intensity,
    "upgrade": cmd_upgrade,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--registry", help=f"registry file (default: ${REGISTRY_ENV} or the starter registry)")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--stamp", action="store_true", help="add a generation timestamp to the output")

    parser = argparse.ArgumentParser(prog="hpc-carbon", description="Embodied and operational carbon of HPC hardware.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embodied", parents=[common], help="embodied carbon of one component")
    p.add_argument("component")
    p.add_argument("--per-flops", action="store_true", help="also report gCO2 per peak FP64 TFLOPS")
    p.add_argument("--per-bandwidth", action="store_true", help="also report gCO2 per GB/s")

    p = sub.add_parser("system", parents=[common], help="embodied carbon breakdown of a system")
    p.add_argument("system")

    p = sub.add_parser("intensity", parents=[common], help="carbon-intensity trace analysis")
    p.add_argument("traces", nargs="+")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stats", action="store_true")
    mode.add_argument("--winners", action="store_true")
    p.add_argument("--ref-offset", default="+00:00", help="reference zone for hour of day, e.g. +09:00")

    p = sub.add_parser("upgrade", parents=[common], help="upgrade break-even analysis")
    p.add_argument("scenario")
    p.add_argument("--sweep-intensity", metavar="LIST", help="e.g. 400,200,20")
    p.add_argument("--sweep-usage", metavar="LIST", help="e.g. 0.2667,0.40,0.60")
    p.add_argument("--samples-per-year", type=int, default=52)
    p.add_argument("--out-dir", help="write one t_years,cumulative_saving_g CSV per sweep point")
    return parser


def render(output: Output, args, inputs: Inputs) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if args.stamp else None
    if args.format == "json":
        envelope = {
            "schema_version": SCHEMA_VERSION,
            "command": inputs.command,
            "inputs_digest": inputs.digest,
            "body": output.body,
        }
        if stamp:
            envelope["generated_at"] = stamp
        return json.dumps(envelope, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    text = output.csv if args.format == "csv" else output.table
    if stamp:
        text += f"# generated_at {stamp}\n"
    return text


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    inputs = Inputs(args.command)
    try:
        output = COMMANDS[args.command](args, inputs)
    except CarbonModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render(output, args, inputs))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
