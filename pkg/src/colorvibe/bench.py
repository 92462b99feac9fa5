"""Serial vs batched search timing over a whole sweep."""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

from colorvibe.errors import BenchmarkInvalidError, InputDomainError
from colorvibe.feasibility import SearchConfig, round6
from colorvibe.presets import REFERENCE_TIMING
from colorvibe.search import ColorPair, batch_search, serial_search

SweepResult = list[list[ColorPair]]


@dataclass
class BenchReport:
    config_hash: str
    candidate_count: int
    workload_size: int
    repetitions: int
    serial_seconds: float
    batch_seconds: float
    speedup: float
    batch_parallel_seconds: float
    parallel_workers: int
    parallel_speedup: float
    result_parity: bool
    pair_count: int
    serial_runs: list[float] = field(default_factory=list)
    batch_runs: list[float] = field(default_factory=list)
    batch_parallel_runs: list[float] = field(default_factory=list)
    reference: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, float):
                d[k] = round6(v)
            elif isinstance(v, list):
                d[k] = [round6(x) for x in v]
            elif isinstance(v, dict):
                d[k] = {kk: round6(vv) for kk, vv in v.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def run_sweep(cfg: SearchConfig, method: str, workers: int = 1, stats: dict | None = None) -> SweepResult:
    """Run one search method over every tuple of the workload."""
    kw = cfg.search_kwargs()
    out = []
    for name, pattern, th in cfg.workload():
        color = cfg.colors[name]
        if method == "serial":
            out.append(serial_search(color, cfg.grid, pattern, th, stats=stats, **kw))
        elif method == "batch":
            out.append(batch_search(color, cfg.grid, pattern, th, workers=workers, **kw))
        else:
            raise InputDomainError(f"unknown method {method!r}")
    return out


def _time(fn: Callable[[], SweepResult], repetitions: int) -> tuple[list[float], SweepResult]:
    runs, result = [], None
    for _ in range(repetitions):
        t0 = time.perf_counter()
        result = fn()
        runs.append(time.perf_counter() - t0)
    return runs, result  # type: ignore[return-value]


def run_benchmark(
    cfg: SearchConfig,
    repetitions: int = 3,
    parallel_workers: int | None = None,
) -> BenchReport:
    """Time both methods on the full workload and check they agree.

    Each method is timed ``repetitions`` times and the best run is reported.
    The batch method is timed twice: single-worker (vectorization alone) and
    with ``parallel_workers`` threads (defaults to ``cfg.workers`` if above
    1, else the CPU count).

    Raises:
        BenchmarkInvalidError: if any method's results differ from serial.
    """
    if repetitions < 1:
        raise InputDomainError("repetitions must be >= 1")
    if parallel_workers is None:
        parallel_workers = cfg.workers if cfg.workers > 1 else (os.cpu_count() or 1)

    # Untimed warm-up on the first workload tuple only.
    name, pattern, th = next(cfg.workload())
    serial_search(cfg.colors[name], cfg.grid, pattern, th, **cfg.search_kwargs())
    batch_search(cfg.colors[name], cfg.grid, pattern, th, **cfg.search_kwargs())

    serial_runs, serial_res = _time(lambda: run_sweep(cfg, "serial"), repetitions)
    batch_runs, batch_res = _time(lambda: run_sweep(cfg, "batch", 1), repetitions)
    par_runs, par_res = _time(lambda: run_sweep(cfg, "batch", parallel_workers), repetitions)

    if batch_res != serial_res or par_res != serial_res:
        mismatched = sum(a != b or a != c for a, b, c in zip(serial_res, batch_res, par_res))
        raise BenchmarkInvalidError(f"serial and batch results differ on {mismatched} workload tuples")

    workload_size = len(serial_res)
    serial_s, batch_s, par_s = min(serial_runs), min(batch_runs), min(par_runs)
    ref = dict(REFERENCE_TIMING)
    ref["speedup"] = ref["serial_seconds"] / ref["batch_seconds"]
    return BenchReport(
        config_hash=cfg.digest(),
        candidate_count=workload_size * len(cfg.grid),
        workload_size=workload_size,
        repetitions=repetitions,
        serial_seconds=serial_s,
        batch_seconds=batch_s,
        speedup=serial_s / batch_s,
        batch_parallel_seconds=par_s,
        parallel_workers=parallel_workers,
        parallel_speedup=serial_s / par_s,
        result_parity=True,
        pair_count=sum(len(r) for r in serial_res),
        serial_runs=serial_runs,
        batch_runs=batch_runs,
        batch_parallel_runs=par_runs,
        reference=ref,
    )
