import json

import pytest

import colorvibe.bench as bench
from colorvibe.colorspace import SrgbColor
from colorvibe.errors import BenchmarkInvalidError, InputDomainError
from colorvibe.feasibility import SearchConfig
from colorvibe.search import BitPattern, VibrationGrid


@pytest.fixture
def small_cfg():
    return SearchConfig(
        colors={"Black": SrgbColor(100, 100, 100), "Gray": SrgbColor(170, 170, 170)},
        patterns=(BitPattern.parse("001"), BitPattern.parse("101")),
        v_th_list=(50.0, 100.0),
        r_novib_list=(0.5,),
        grid=VibrationGrid.from_ranges(1, 100, 5, 0, 360, 10),
    )


def test_report(small_cfg):
    rep = bench.run_benchmark(small_cfg, repetitions=2, parallel_workers=2)
    assert rep.result_parity
    assert rep.workload_size == 8
    assert rep.candidate_count == 8 * 20 * 36
    assert rep.repetitions == 2 and len(rep.serial_runs) == 2 and len(rep.batch_runs) == 2
    assert rep.serial_seconds == min(rep.serial_runs)
    assert rep.speedup == pytest.approx(rep.serial_seconds / rep.batch_seconds)
    assert rep.parallel_speedup == pytest.approx(rep.serial_seconds / rep.batch_parallel_seconds)
    assert rep.pair_count > 0
    assert rep.config_hash == small_cfg.digest()


def test_reference_speedup():
    rep_ref = bench.REFERENCE_TIMING
    assert rep_ref["serial_seconds"] / rep_ref["batch_seconds"] == pytest.approx(54.7, abs=0.05)


def test_json_fields(small_cfg):
    doc = json.loads(bench.run_benchmark(small_cfg, repetitions=1).to_json())
    for key in ("config_hash", "candidate_count", "serial_seconds", "batch_seconds", "speedup",
                "result_parity", "repetitions", "serial_runs", "batch_runs", "batch_parallel_seconds"):
        assert key in doc
    assert doc["reference"]["speedup"] == pytest.approx(54.6646, abs=1e-3)


def test_repetitions_validated(small_cfg):
    with pytest.raises(InputDomainError):
        bench.run_benchmark(small_cfg, repetitions=0)


def test_parity_failure_is_fatal(small_cfg, monkeypatch):
    real = bench.batch_search

    def broken(*args, **kw):
        return real(*args, **kw)[1:]

    monkeypatch.setattr(bench, "batch_search", broken)
    with pytest.raises(BenchmarkInvalidError):
        bench.run_benchmark(small_cfg, repetitions=1)


def test_doubling_angle_density_doubles_serial_work(small_cfg):
    coarse = SearchConfig(**{**small_cfg.__dict__, "grid": VibrationGrid.from_ranges(1, 100, 5, 0, 360, 10)})
    fine = SearchConfig(**{**small_cfg.__dict__, "grid": VibrationGrid.from_ranges(1, 100, 5, 0, 360, 5)})
    s1, s2 = {}, {}
    bench.run_sweep(coarse, "serial", stats=s1)
    bench.run_sweep(fine, "serial", stats=s2)
    assert s2["evaluated"] == 2 * s1["evaluated"]
    assert s1["evaluated"] == len(list(coarse.workload())) * len(coarse.grid)
