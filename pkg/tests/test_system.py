import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpc_carbon.components import CapacityDeviceSpec, ComponentRecord, Kind, PerIc, ProcessorDieSpec
from hpc_carbon.errors import ValidationError
from hpc_carbon.system import SystemConfig, compute_vs_memstorage, perf_to_embodied_ratios, system_embodied

from conftest import dram, gpu


def _registry(*records):
    return {r.id: r for r in records}


def _fixed(id, kind, total):
    """A record whose embodied total is exactly ``total`` grams (epc * 1 GB or per-area * 1 cm^2)."""
    if kind in ("GPU", "CPU"):
        return ComponentRecord(id, kind, ProcessorDieSpec(1.0, total, 0.0, 0.0, ic_count=0, fab_yield=1.0))
    return ComponentRecord(id, kind, CapacityDeviceSpec(1.0, total, PerIc(0)))


class TestSystemEmbodied:
    def test_single_item(self):
        report = system_embodied(SystemConfig("one", (("dram64", 1),)), _registry(dram()))
        assert report.total == 7160.0
        assert report.shares[Kind.DRAM] == 1.0
        assert report.per_component == {"dram64": 7160.0}

    def test_two_kinds(self):
        reg = _registry(gpu(), dram())
        report = system_embodied(SystemConfig("node", (("gpu1", 4), ("dram64", 8))), reg)
        assert report.total == pytest.approx(82480.0, rel=1e-12)
        assert report.per_kind[Kind.GPU] == pytest.approx(25200.0, rel=1e-12)
        assert report.per_kind[Kind.DRAM] == 57280.0
        assert round(report.shares[Kind.GPU], 4) == 0.3055
        assert round(report.shares[Kind.DRAM], 4) == 0.6945
        assert tuple(round(x, 4) for x in compute_vs_memstorage(report)) == (0.3055, 0.6945)

    def test_many_cheap_drams_outweigh_cpus(self):
        cpu = _fixed("cpu", "CPU", 20000.0)
        ram = _fixed("ram", "DRAM", 7000.0)
        assert ram.spec.epc < cpu.spec.fpa
        report = system_embodied(SystemConfig("s", (("cpu", 2), ("ram", 16))), _registry(cpu, ram))
        assert report.per_kind[Kind.DRAM] > report.per_kind[Kind.CPU]

    def test_gpu_only(self):
        report = system_embodied(SystemConfig("g", (("gpu1", 3),)), _registry(gpu()))
        assert compute_vs_memstorage(report) == (1.0, 0.0)

    def test_equal_kinds_split_two_to_three(self):
        recs = [_fixed(k.lower(), k, 1000.0) for k in ("GPU", "CPU", "DRAM", "SSD", "HDD")]
        report = system_embodied(SystemConfig("s", tuple((r.id, 1) for r in recs)), _registry(*recs))
        c, m = compute_vs_memstorage(report)
        assert c == pytest.approx(0.4, abs=1e-12)
        assert m == pytest.approx(0.6, abs=1e-12)

    def test_unknown_id_named(self):
        with pytest.raises(ValidationError, match="mi250x"):
            system_embodied(SystemConfig("s", (("mi250x", 1),)), _registry(dram()))

    def test_empty_system(self):
        with pytest.raises(ValidationError, match="empty system"):
            system_embodied(SystemConfig("s", ()), _registry(dram()))

    def test_zero_total_is_flagged_not_nan(self):
        report = system_embodied(SystemConfig("z", (("z", 5),)), _registry(_fixed("z", "SSD", 0.0)))
        assert report.degenerate
        assert report.total == 0.0
        assert all(v == 0.0 for v in report.shares.values())
        assert compute_vs_memstorage(report) == (0.0, 0.0)

    def test_deterministic(self):
        reg = _registry(gpu(), dram())
        cfg = SystemConfig("node", (("gpu1", 4), ("dram64", 8)))
        assert system_embodied(cfg, reg) == system_embodied(cfg, reg)


class TestSystemConfig:
    def test_duplicate_ids(self):
        with pytest.raises(ValidationError, match="duplicate"):
            SystemConfig("s", (("a", 1), ("a", 2)))

    @pytest.mark.parametrize("count", [0, -3, 1.5, True])
    def test_bad_counts(self, count):
        with pytest.raises(ValidationError, match="positive integer"):
            SystemConfig("s", (("a", count),))

    def test_pue_below_one(self):
        with pytest.raises(ValidationError, match="pue must be ≥ 1"):
            SystemConfig("s", (("a", 1),), pue=0.9)


kinds = st.sampled_from(["GPU", "CPU", "DRAM", "SSD", "HDD"])
bom = st.lists(st.tuples(kinds, st.floats(0.0, 1e6), st.integers(1, 100_000)), min_size=1, max_size=12)


def _build(items):
    recs = [_fixed(f"c{i}", kind, total) for i, (kind, total, _) in enumerate(items)]
    cfg = SystemConfig("s", tuple((r.id, n) for r, (_, _, n) in zip(recs, items)))
    return cfg, _registry(*recs)


class TestProperties:
    @given(bom)
    def test_shares_and_sums(self, items):
        cfg, reg = _build(items)
        report = system_embodied(cfg, reg)
        if report.total > 0:
            assert math.fsum(report.shares.values()) == pytest.approx(1.0, abs=1e-9)
            assert report.compute_share + report.memstorage_share == pytest.approx(1.0, abs=1e-9)
            assert math.fsum(report.per_component.values()) == pytest.approx(report.total, rel=1e-9)

    @given(bom)
    def test_count_linearity(self, items):
        cfg, reg = _build(items)
        once = system_embodied(cfg, reg)
        twice = system_embodied(cfg.scaled(2), reg)
        assert twice.total == pytest.approx(2 * once.total, rel=1e-12)
        for kind in Kind:
            assert twice.shares[kind] == pytest.approx(once.shares[kind], abs=1e-9)

    @settings(max_examples=50)
    @given(bom, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, items, rnd):
        cfg, reg = _build(items)
        shuffled = list(cfg.items)
        rnd.shuffle(shuffled)
        assert system_embodied(cfg, reg) == system_embodied(SystemConfig("s", tuple(shuffled)), reg)


class TestPerfToEmbodied:
    def test_linear_scaling(self):
        assert perf_to_embodied_ratios([1, 2, 4], [1, 2, 4]) == [1.0, 1.0, 1.0]

    def test_hand_arithmetic(self):
        got = perf_to_embodied_ratios([25, 40, 70], [1.0, 1.38, 1.95], 0)
        assert got == pytest.approx([1.0, 0.8625, 0.6964], abs=5e-5)

    @given(
        st.lists(st.tuples(st.floats(0.01, 1e6), st.floats(0.01, 1e6)), min_size=1, max_size=8),
        st.data(),
    )
    def test_baseline_is_one(self, pairs, data):
        idx = data.draw(st.integers(0, len(pairs) - 1))
        e, p = zip(*pairs)
        assert perf_to_embodied_ratios(list(e), list(p), idx)[idx] == 1.0

    @given(st.integers(2, 16), st.floats(0.3, 0.95), st.floats(1.0, 1e5))
    def test_sublinear_performance_decreases(self, n, exponent, unit):
        counts = list(range(1, n + 1))
        ratios = perf_to_embodied_ratios([unit * k for k in counts], [k**exponent for k in counts])
        assert all(b < a for a, b in zip(ratios, ratios[1:]))

    @pytest.mark.parametrize(
        "e, p, idx",
        [([1, 2], [1], 0), ([], [], 0), ([1, 0], [1, 1], 0), ([1, 2], [1, -1], 0), ([1], [1], 3)],
    )
    def test_invalid(self, e, p, idx):
        with pytest.raises(ValidationError):
            perf_to_embodied_ratios(e, p, idx)


def test_random_node_configs_reproducible():
    rnd = random.Random(7)
    reg = _registry(gpu(), dram(), _fixed("hdd", "HDD", 21280.0))
    for _ in range(20):
        cfg = SystemConfig("n", (("gpu1", rnd.randint(1, 8)), ("dram64", rnd.randint(1, 32)), ("hdd", rnd.randint(1, 4))))
        r = system_embodied(cfg, reg)
        assert r.total == pytest.approx(sum(n * {"gpu1": 6300.0, "dram64": 7160.0, "hdd": 21280.0}[c] for c, n in cfg.items))
