from datetime import datetime, timezone
from pathlib import Path

import pytest

from hpc_carbon import cli
from hpc_carbon.components import CapacityDeviceSpec, ComponentRecord, PerIc, ProcessorDieSpec

T0 = datetime(2021, 1, 1, tzinfo=timezone.utc)

TEST_REGISTRY = """\
format_version = 1

[component gpu1]
kind = GPU
die_area_cm2 = 8.0
fpa_g_per_cm2 = 300
gpa_g_per_cm2 = 200
mpa_g_per_cm2 = 100
fab_yield = 0.8
ic_count = 2
peak_fp64_tflops = 10

[component cpu1]
kind = CPU
die_area_cm2 = 4.0
fpa_g_per_cm2 = 300
gpa_g_per_cm2 = 200
mpa_g_per_cm2 = 100
ic_count = 1

[component dram64]
kind = DRAM
capacity_gb = 64
epc_g_per_gb = 65
ic_count = 20

[component ssd3200]
kind = SSD
capacity_gb = 3200
epc_g_per_gb = 6.21
packaging_ratio = 0.10

[component hdd16]
kind = HDD
capacity_gb = 16000
epc_g_per_gb = 1.33
packaging_ratio = 0
bandwidth_gb_per_s = 0.25
"""


def dram(id="dram64", capacity=64.0, epc=65.0, ics=20, **kw):
    return ComponentRecord(id, "DRAM", CapacityDeviceSpec(capacity, epc, PerIc(ics)), **kw)


def gpu(id="gpu1", per_area=(300.0, 200.0, 100.0), area=8.0, fab_yield=0.8, ics=2, **kw):
    return ComponentRecord(id, "GPU", ProcessorDieSpec(area, *per_area, ic_count=ics, fab_yield=fab_yield), **kw)


@pytest.fixture
def registry_file(tmp_path: Path) -> Path:
    path = tmp_path / "registry.cfg"
    path.write_text(TEST_REGISTRY)
    return path


@pytest.fixture
def run_cli(capsys, monkeypatch):
    """Run the CLI in-process; returns (exit_code, stdout, stderr)."""
    monkeypatch.delenv(cli.REGISTRY_ENV, raising=False)

    def run(*argv):
        code = cli.main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return run


ACCEPTANCE: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    status = "PASS" if rep.passed else "FAIL"
    if ACCEPTANCE.get(number, ("PASS",))[0] == "FAIL":
        return
    ACCEPTANCE[number] = (status, f"{status}  criterion {number}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number][1])
