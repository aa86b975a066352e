"""Malformed-input corpus: each case is (name, argv, expected exit code).

``{reg}`` is replaced by a valid registry path and ``{data}`` by tests/data.
"""

from pathlib import Path

DATA = Path(__file__).parent / "data"

CASES = [
    ("duplicate ids", ["embodied", "a100", "--registry", "{data}/malformed/duplicate_ids.cfg"], 2),
    ("kind/spec mismatch", ["embodied", "a100", "--registry", "{data}/malformed/kind_spec_mismatch.cfg"], 2),
    ("future format version", ["embodied", "dram64", "--registry", "{data}/malformed/future_version.cfg"], 2),
    ("exponent notation", ["embodied", "dram64", "--registry", "{data}/malformed/exponent_number.cfg"], 2),
    ("registry not utf-8", ["embodied", "dram64", "--registry", "{data}/malformed/not_utf8.cfg"], 2),
    ("missing registry file", ["embodied", "dram64", "--registry", "{data}/malformed/nope.cfg"], 2),
    ("unknown component", ["embodied", "nosuch", "--registry", "{reg}"], 2),
    ("empty system", ["system", "{data}/malformed/empty_system.cfg", "--registry", "{reg}"], 2),
    ("unregistered system item", ["system", "{data}/malformed/unregistered_item.cfg", "--registry", "{reg}"], 2),
    ("pue below one", ["system", "{data}/malformed/low_pue.cfg", "--registry", "{reg}"], 2),
    ("negative intensity", ["intensity", "{data}/malformed/negative_intensity.csv", "--stats"], 2),
    ("timestamp without offset", ["intensity", "{data}/malformed/naive_timestamp.csv", "--stats"], 2),
    ("bad reference offset", ["intensity", "{data}/good/single.csv", "{data}/good/single.csv", "--winners", "--ref-offset", "Tokyo"], 2),
    ("single-trace winners", ["intensity", "{data}/good/single.csv", "--winners"], 4),
    ("invalid scenario", ["upgrade", "{data}/malformed/bad_scenario.cfg"], 2),
    ("bad sweep list", ["upgrade", "{data}/good/constant_scenario.cfg", "--sweep-usage", "low"], 2),
    ("missing bandwidth", ["embodied", "dram64", "--per-bandwidth", "--registry", "{reg}"], 3),
    ("missing performance", ["embodied", "cpu1", "--per-flops", "--registry", "{reg}"], 3),
    ("UNKNOWN packaging ratio", ["embodied", "hdd16"], 3),
    ("unknown subcommand", ["plot"], 2),
]


def expand(argv, registry_path):
    return [a.replace("{data}", str(DATA)).replace("{reg}", str(registry_path)) for a in argv]
