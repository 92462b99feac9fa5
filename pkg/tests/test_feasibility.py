import json
import random
from dataclasses import replace
from pathlib import Path

import pytest

from colorvibe.colorspace import SrgbColor
from colorvibe.errors import ConfigError, InputDomainError
from colorvibe.feasibility import (
    Cell,
    FeasibilityMatrix,
    SearchConfig,
    aggregate_any,
    export_filename,
    export_matrix,
    feasibility_matrix,
    reference_agreement,
)
from colorvibe.presets import TABLE1_COLORS, TABLE1_PATTERNS
from colorvibe.search import BitPattern, Thresholds, VibrationGrid, serial_search

GOLDEN = Path(__file__).parent / "golden"
CONFIG_FILE = Path(__file__).parents[1] / "configs" / "table1.json"


@pytest.fixture(scope="module")
def default_matrix():
    return feasibility_matrix(SearchConfig())


@pytest.fixture(scope="module")
def coarse_cfg():
    return SearchConfig(grid=VibrationGrid.from_ranges(2, 100, 7, 0, 360, 10))


def _blank(m: FeasibilityMatrix) -> FeasibilityMatrix:
    return replace(m, cells={k: Cell(False, 0, None) for k in m.cells})


class TestSearchConfig:
    def test_defaults_are_the_standard_sweep(self):
        cfg = SearchConfig()
        assert list(cfg.colors) == ["Black", "Gray", "White", "Red", "Green", "Blue", "Yellow", "Cyan", "Magenta"]
        assert [str(p) for p in cfg.patterns] == list(TABLE1_PATTERNS)
        assert cfg.v_th_list == (50, 100, 150, 200)
        assert cfg.r_novib_list == (0.5, 0.25, 0.125)
        assert len(cfg.grid) == 36_000
        assert len(list(cfg.workload())) == 9 * 7 * 4 * 3

    def test_config_file_matches_defaults(self):
        assert SearchConfig.load(CONFIG_FILE).digest() == SearchConfig().digest()

    def test_dict_round_trip(self):
        cfg = SearchConfig(grid=VibrationGrid.from_ranges(1, 50, 5, 0, 360, 30), workers=3)
        again = SearchConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again.to_dict() == cfg.to_dict()

    def test_digest_ignores_workers(self):
        assert SearchConfig().digest() == SearchConfig(workers=4).digest()
        assert SearchConfig().digest() != SearchConfig(v_th_list=(50,)).digest()

    @pytest.mark.parametrize(
        "patch",
        [
            {"version": 2},
            {"colors": []},
            {"patterns": []},
            {"patterns": ["000"]},
            {"patterns": ["100", "100"]},
            {"v_th": []},
            {"r_novib": [0]},
            {"colors": [{"name": "A", "rgb": [1, 2, 3]}, {"name": "A", "rgb": [4, 5, 6]}]},
            {"colors": [{"name": "A", "rgb": [1, 2, 300]}]},
            {"grid": {"radius": [1, 10, 1], "angle_deg": [0, 0, 1]}},
            {"delta_mode": "analog"},
            {"workers": 0},
            {"frobnicate": 1},
        ],
    )
    def test_validation(self, patch):
        data = {"version": 1, **patch}
        with pytest.raises(ConfigError):
            SearchConfig.from_dict(data)

    def test_missing_version(self):
        with pytest.raises(ConfigError):
            SearchConfig.from_dict({})

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            SearchConfig.load(p)


class TestFeasibilityMatrix:
    def test_zero_radius_all_infeasible(self):
        cfg = SearchConfig(grid=VibrationGrid((0.0,), tuple(i * 0.5 for i in range(12))))
        m = feasibility_matrix(cfg)
        assert len(m.cells) == 756
        assert not any(c.feasible for c in m.cells.values())

    def test_one_cell_per_tuple(self, coarse_cfg):
        m = feasibility_matrix(coarse_cfg)
        assert set(m.cells) == {(n, str(p), th.v_th, th.r_novib) for n, p, th in coarse_cfg.workload()}

    def test_cell_invariant(self, default_matrix):
        for cell in default_matrix.cells.values():
            assert cell.feasible == (cell.pair_count > 0) == (cell.best_pair is not None)
        with pytest.raises(ValueError):
            Cell(True, 0, None)

    def test_cells_agree_with_serial_oracle(self, default_matrix):
        cfg = SearchConfig()
        rng = random.Random(20)
        feasible = [k for k, c in default_matrix.cells.items() if c.feasible]
        infeasible = [k for k, c in default_matrix.cells.items() if not c.feasible]
        sample = rng.sample(feasible, 12) + rng.sample(infeasible, 12)
        for color, pattern, v, r in sample:
            pairs = serial_search(cfg.colors[color], cfg.grid, BitPattern.parse(pattern), Thresholds(v, r))
            cell = default_matrix.cell(color, pattern, v, r)
            assert cell.feasible == bool(pairs)
            assert cell.pair_count == len(pairs)

    def test_deterministic(self, coarse_cfg):
        a = export_matrix(feasibility_matrix(coarse_cfg), "json", aggregated=False)
        b = export_matrix(feasibility_matrix(replace(coarse_cfg, workers=3)), "json", aggregated=False)
        assert a == b

    def test_green_rows_empty(self, default_matrix):
        agg = aggregate_any(default_matrix)
        for name in TABLE1_COLORS:
            assert not agg[(name, "010")]
            assert not agg[(name, "011")]


class TestAggregate:
    def test_all_false(self, default_matrix):
        assert not any(aggregate_any(_blank(default_matrix)).values())

    def test_single_true_cell(self, default_matrix):
        m = _blank(default_matrix)
        key = ("Cyan", "110", 150.0, 0.25)
        m.cells[key] = default_matrix.cells[("Gray", "001", 50.0, 0.5)]
        agg = aggregate_any(m)
        assert agg[("Cyan", "110")]
        assert sum(agg.values()) == 1

    def test_is_or_over_thresholds(self, default_matrix):
        agg = aggregate_any(default_matrix)
        assert len(agg) == 63
        for (c, p), flag in agg.items():
            expected = any(
                default_matrix.cell(c, p, v, r).feasible
                for v in default_matrix.v_th_list
                for r in default_matrix.r_novib_list
            )
            assert flag == expected

    def test_reference_agreement_self(self):
        agg = {(n, p): True for n in TABLE1_COLORS for p in TABLE1_PATTERNS}
        agree, total, diff = reference_agreement(agg)
        assert total == 63
        assert agree == 63 - len(diff)
        assert all(ours and not theirs for _, _, ours, theirs in diff)


class TestExport:
    def test_aggregated_csv_layout(self, default_matrix):
        lines = export_matrix(default_matrix, "csv", aggregated=True).decode().splitlines()
        assert lines[0] == "pattern,Black,Gray,White,Red,Green,Blue,Yellow,Cyan,Magenta"
        assert [ln.split(",")[0] for ln in lines[1:]] == list(TABLE1_PATTERNS)
        assert all(len(ln.split(",")) == 10 and set(ln.split(",")[1:]) <= {"0", "1"} for ln in lines[1:])

    def test_byte_stable(self, default_matrix):
        for fmt in ("csv", "json"):
            for agg in (True, False):
                assert export_matrix(default_matrix, fmt, agg) == export_matrix(default_matrix, fmt, agg)

    def test_empty_matrix_all_zero(self, default_matrix):
        lines = export_matrix(_blank(default_matrix), "csv", aggregated=True).decode().splitlines()
        assert len(lines) == 8
        assert all(ln.split(",")[1:] == ["0"] * 9 for ln in lines[1:])

    def test_json_detail(self, default_matrix):
        doc = json.loads(export_matrix(default_matrix, "json", aggregated=False))
        assert len(doc["cells"]) == 756
        feasible = [c for c in doc["cells"] if c["feasible"]]
        assert feasible and all(c["best_pair"] is not None for c in feasible)
        assert doc["aggregated"]["010"]["Gray"] is False

    def test_unsupported_format(self, default_matrix):
        with pytest.raises(InputDomainError):
            export_matrix(default_matrix, "xml")

    def test_filenames(self):
        assert export_filename("csv", True) == "matrix_aggregated.csv"
        assert export_filename("json", False) == "matrix_full.json"

    @pytest.mark.parametrize("fmt,agg", [("csv", True), ("csv", False), ("json", True)])
    def test_golden(self, default_matrix, fmt, agg):
        golden = GOLDEN / export_filename(fmt, agg)
        assert export_matrix(default_matrix, fmt, agg) == golden.read_bytes()
