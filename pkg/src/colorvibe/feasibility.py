"""Feasibility of every (color, pattern, threshold) combination in a sweep."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from colorvibe.colorspace import D65, SrgbColor, WhitePoint
from colorvibe.errors import ConfigError, InputDomainError
from colorvibe.presets import (
    REFERENCE_FEASIBILITY,
    TABLE1_COLORS,
    TABLE1_PATTERNS,
    TABLE1_R_NOVIB,
    TABLE1_V_TH,
)
from colorvibe.search import (
    BitPattern,
    ColorPair,
    Thresholds,
    VibrationGrid,
    batch_search,
    select_best,
)

CONFIG_VERSION = 1


def fmt6(x: float) -> str:
    """Six significant digits, used for every numeric value we emit."""
    return f"{x:.6g}"


def round6(x: float) -> float:
    return float(fmt6(x))


@dataclass(frozen=True)
class SearchConfig:
    colors: dict[str, SrgbColor] = field(default_factory=lambda: dict(TABLE1_COLORS))
    patterns: tuple[BitPattern, ...] = tuple(BitPattern.parse(p) for p in TABLE1_PATTERNS)
    v_th_list: tuple[float, ...] = TABLE1_V_TH
    r_novib_list: tuple[float, ...] = TABLE1_R_NOVIB
    grid: VibrationGrid = field(default_factory=VibrationGrid.default)
    white_point: WhitePoint = D65
    delta_mode: str = "quantized"
    swing: str = "peak"
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.colors:
            raise ConfigError("colors must not be empty")
        if not self.patterns:
            raise ConfigError("patterns must not be empty")
        if len(set(map(str, self.patterns))) != len(self.patterns):
            raise ConfigError("patterns must be unique")
        if not self.v_th_list or not self.r_novib_list:
            raise ConfigError("threshold lists must not be empty")
        for v in self.v_th_list:
            for r in self.r_novib_list:
                try:
                    Thresholds(v, r)
                except InputDomainError as exc:
                    raise ConfigError(str(exc)) from exc
        if not self.grid.radii or not self.grid.angles:
            raise ConfigError("grid must contain at least one radius and one angle")
        if self.delta_mode not in ("quantized", "continuous"):
            raise ConfigError(f"unknown delta_mode {self.delta_mode!r}")
        if self.swing not in ("peak", "half"):
            raise ConfigError(f"unknown swing {self.swing!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def thresholds(self) -> Iterator[Thresholds]:
        for v in self.v_th_list:
            for r in self.r_novib_list:
                yield Thresholds(v, r)

    def workload(self) -> Iterator[tuple[str, BitPattern, Thresholds]]:
        """Every (color name, pattern, thresholds) tuple, in export order."""
        for name in self.colors:
            for pattern in self.patterns:
                for th in self.thresholds():
                    yield name, pattern, th

    def search_kwargs(self) -> dict[str, Any]:
        return {"wp": self.white_point, "delta_mode": self.delta_mode, "swing": self.swing}

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": CONFIG_VERSION,
            "colors": [{"name": n, "rgb": list(c.as_tuple())} for n, c in self.colors.items()],
            "patterns": [str(p) for p in self.patterns],
            "v_th": list(self.v_th_list),
            "r_novib": list(self.r_novib_list),
            "grid": {"radii": list(self.grid.radii), "angles": list(self.grid.angles)},
            "white_point": list(self.white_point.as_tuple()),
            "delta_mode": self.delta_mode,
            "swing": self.swing,
            "workers": self.workers,
        }

    def digest(self) -> str:
        """SHA-256 of the workload-defining fields (``workers`` excluded)."""
        d = self.to_dict()
        del d["workers"]
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SearchConfig:
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if data.get("version") != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {data.get('version')!r}; expected {CONFIG_VERSION}")
        known = {"version", "colors", "patterns", "v_th", "r_novib", "grid", "white_point", "delta_mode", "swing", "workers"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw: dict[str, Any] = {}
        try:
            if "colors" in data:
                colors: dict[str, SrgbColor] = {}
                for entry in data["colors"]:
                    name = entry["name"]
                    if name in colors:
                        raise ConfigError(f"duplicate color name {name!r}")
                    colors[name] = SrgbColor(*entry["rgb"])
                kw["colors"] = colors
            if "patterns" in data:
                kw["patterns"] = tuple(BitPattern.parse(p) for p in data["patterns"])
            if "v_th" in data:
                kw["v_th_list"] = tuple(float(v) for v in data["v_th"])
            if "r_novib" in data:
                kw["r_novib_list"] = tuple(float(v) for v in data["r_novib"])
            if "grid" in data:
                kw["grid"] = grid_from_dict(data["grid"])
            if "white_point" in data:
                kw["white_point"] = WhitePoint(*data["white_point"])
            for key in ("delta_mode", "swing", "workers"):
                if key in data:
                    kw[key] = data[key]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        except InputDomainError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> SearchConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)


def grid_from_dict(d: dict[str, Any]) -> VibrationGrid:
    """Accept either ``{"radius": [min, max, step], "angle_deg": [...]}`` or explicit lists."""
    if "radius" in d or "angle_deg" in d:
        return VibrationGrid.from_ranges(*d["radius"], *d["angle_deg"])
    return VibrationGrid(tuple(d["radii"]), tuple(d["angles"]))


@dataclass(frozen=True)
class Cell:
    feasible: bool
    pair_count: int
    best_pair: ColorPair | None

    def __post_init__(self) -> None:
        if self.feasible != (self.pair_count > 0) or self.feasible != (self.best_pair is not None):
            raise ValueError("inconsistent feasibility cell")


CellKey = tuple[str, str, float, float]


@dataclass
class FeasibilityMatrix:
    colors: list[str]
    patterns: list[str]
    v_th_list: list[float]
    r_novib_list: list[float]
    cells: dict[CellKey, Cell]

    def cell(self, color: str, pattern: str, v_th: float, r_novib: float) -> Cell:
        return self.cells[(color, pattern, v_th, r_novib)]


def evaluate_cell(cfg: SearchConfig, color: str, pattern: BitPattern, th: Thresholds) -> Cell:
    pairs = batch_search(cfg.colors[color], cfg.grid, pattern, th, workers=cfg.workers, **cfg.search_kwargs())
    if not pairs:
        return Cell(False, 0, None)
    return Cell(True, len(pairs), select_best(pairs, th))


def feasibility_matrix(cfg: SearchConfig) -> FeasibilityMatrix:
    cells = {
        (name, str(pattern), th.v_th, th.r_novib): evaluate_cell(cfg, name, pattern, th)
        for name, pattern, th in cfg.workload()
    }
    return FeasibilityMatrix(
        colors=list(cfg.colors),
        patterns=[str(p) for p in cfg.patterns],
        v_th_list=list(cfg.v_th_list),
        r_novib_list=list(cfg.r_novib_list),
        cells=cells,
    )


def aggregate_any(m: FeasibilityMatrix) -> dict[tuple[str, str], bool]:
    """Collapse the threshold grid: a (color, pattern) is feasible if any cell is."""
    out = {(c, p): False for p in m.patterns for c in m.colors}
    for (c, p, _, _), cell in m.cells.items():
        if cell.feasible:
            out[(c, p)] = True
    return out


def reference_agreement(
    agg: dict[tuple[str, str], bool], reference: dict[str, str] = REFERENCE_FEASIBILITY
) -> tuple[int, int, list[tuple[str, str, bool, bool]]]:
    """Compare an aggregated Table-1-ordered matrix with the published one.

    Returns:
        ``(agreeing, total, disagreements)`` where each disagreement is
        ``(color, pattern, ours, published)``.
    """
    names = list(TABLE1_COLORS)
    agree, total, diff = 0, 0, []
    for pattern, row in reference.items():
        for i, name in enumerate(names):
            if (name, pattern) not in agg:
                continue
            ours, theirs = agg[(name, pattern)], row[i] == "1"
            total += 1
            if ours == theirs:
                agree += 1
            else:
                diff.append((name, pattern, ours, theirs))
    return agree, total, diff


def _pair_fields(pair: ColorPair | None) -> list[str]:
    if pair is None:
        return [""] * 7
    return [
        fmt6(pair.radius),
        fmt6(pair.angle),
        " ".join(map(str, pair.plus.as_tuple())),
        " ".join(map(str, pair.minus.as_tuple())),
        *(fmt6(d) for d in pair.deltas.as_tuple()),
    ]


def _pair_json(pair: ColorPair | None) -> dict[str, Any] | None:
    if pair is None:
        return None
    return {
        "radius": round6(pair.radius),
        "angle": round6(pair.angle),
        "plus": list(pair.plus.as_tuple()),
        "minus": list(pair.minus.as_tuple()),
        "deltas": [round6(d) for d in pair.deltas.as_tuple()],
    }


def export_matrix(m: FeasibilityMatrix, format: str = "csv", aggregated: bool = True) -> bytes:
    """Serialize a matrix.

    The aggregated CSV has one row per pattern and one column per color,
    cells ``1``/``0``. The full CSV has one row per cell. JSON always lists
    the axes; the full form adds every cell with its pair count and best pair.
    """
    if format not in ("csv", "json"):
        raise InputDomainError(f"unsupported export format {format!r}")
    agg = aggregate_any(m)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if aggregated:
            w.writerow(["pattern", *m.colors])
            for p in m.patterns:
                w.writerow([p, *("1" if agg[(c, p)] else "0" for c in m.colors)])
        else:
            w.writerow(
                ["color", "pattern", "v_th", "r_novib", "feasible", "pair_count",
                 "best_radius", "best_angle", "best_plus", "best_minus", "d_r", "d_g", "d_b"]
            )
            for (c, p, v, r), cell in m.cells.items():
                w.writerow([c, p, fmt6(v), fmt6(r), int(cell.feasible), cell.pair_count, *_pair_fields(cell.best_pair)])
        return buf.getvalue().encode()

    doc: dict[str, Any] = {
        "colors": m.colors,
        "patterns": m.patterns,
        "v_th": [round6(v) for v in m.v_th_list],
        "r_novib": [round6(r) for r in m.r_novib_list],
        "aggregated": {p: {c: agg[(c, p)] for c in m.colors} for p in m.patterns},
    }
    if not aggregated:
        doc["cells"] = [
            {
                "color": c,
                "pattern": p,
                "v_th": round6(v),
                "r_novib": round6(r),
                "feasible": cell.feasible,
                "pair_count": cell.pair_count,
                "best_pair": _pair_json(cell.best_pair),
            }
            for (c, p, v, r), cell in m.cells.items()
        ]
    return (json.dumps(doc, indent=2) + "\n").encode()


def export_filename(format: str, aggregated: bool) -> str:
    return f"matrix_{'aggregated' if aggregated else 'full'}.{format}"


def plot_matrix(m: FeasibilityMatrix, path: str | Path) -> None:
    """Render the aggregated matrix as a checkmark grid (needs matplotlib)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    agg = aggregate_any(m)
    data = [[1 if agg[(c, p)] else 0 for c in m.colors] for p in m.patterns]
    fig, ax = plt.subplots(figsize=(1 + 0.8 * len(m.colors), 1 + 0.45 * len(m.patterns)))
    ax.imshow(data, cmap="Greens", vmin=0, vmax=1.5)
    ax.set_xticks(range(len(m.colors)), m.colors, rotation=45, ha="right")
    ax.set_yticks(range(len(m.patterns)), m.patterns)
    ax.set_ylabel("pattern (RGB)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
