"""Frame-pair encoder/decoder for block-wise color vibration.

A frame pair is two 8-bit RGB images shown on alternate display refreshes.
Each payload block is filled with the ``plus`` color of a selected pair in
the first frame and its ``minus`` color in the second; everything else is
copied from the base image into both frames. Decoding averages the per-pixel
``|frame_a - frame_b|`` over each block and applies the threshold bands.
"""

from __future__ import annotations

import enum
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from PIL import Image

from colorvibe.colorspace import D65, SrgbColor, WhitePoint
from colorvibe.errors import (
    ConfigError,
    DisplayConstraintError,
    InputDomainError,
    LayoutError,
    NoPairError,
)
from colorvibe.presets import TABLE1_COLORS
from colorvibe.search import BitPattern, Thresholds, VibrationGrid, batch_search, select_best

CCFF_HZ = 25.0
LAYOUT_VERSION = 1


@dataclass(frozen=True)
class DisplayParams:
    refresh_hz: float = 60.0
    ccff_hz: float = CCFF_HZ

    def __post_init__(self) -> None:
        check_display(self.refresh_hz, self.ccff_hz)


def check_display(refresh_hz: float, ccff_hz: float = CCFF_HZ) -> None:
    # Colors alternate every refresh, so the vibration runs at refresh_hz / 2.
    if not refresh_hz / 2.0 > ccff_hz:
        raise DisplayConstraintError(
            f"vibration at {refresh_hz / 2.0:g} Hz does not exceed the {ccff_hz:g} Hz fusion frequency"
        )


@dataclass(frozen=True)
class Block:
    x: int
    y: int
    color: SrgbColor
    pattern: BitPattern
    name: str | None = None

    def label(self, index: int) -> str:
        color = self.name or str(self.color)
        return f"block {index} at ({self.x}, {self.y}) [{color}, {self.pattern}]"


@dataclass(frozen=True)
class BlockLayout:
    block_width: int
    block_height: int
    blocks: tuple[Block, ...] = ()

    def __post_init__(self) -> None:
        if self.block_width < 1 or self.block_height < 1:
            raise LayoutError("block size must be positive")
        object.__setattr__(self, "blocks", tuple(self.blocks))

    def validate(self, width: int, height: int) -> None:
        """Check every block lies inside a ``width`` x ``height`` image and none overlap."""
        occupied = np.zeros((height, width), dtype=bool)
        for i, b in enumerate(self.blocks):
            if b.x < 0 or b.y < 0 or b.x + self.block_width > width or b.y + self.block_height > height:
                raise LayoutError(f"{b.label(i)} exceeds the {width}x{height} image")
            region = occupied[b.y : b.y + self.block_height, b.x : b.x + self.block_width]
            if region.any():
                raise LayoutError(f"{b.label(i)} overlaps an earlier block")
            region[...] = True

    def region(self, block: Block) -> tuple[slice, slice]:
        return slice(block.y, block.y + self.block_height), slice(block.x, block.x + self.block_width)

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": LAYOUT_VERSION,
            "block_width": self.block_width,
            "block_height": self.block_height,
            "blocks": [
                {
                    "x": b.x,
                    "y": b.y,
                    "color": b.name if b.name else list(b.color.as_tuple()),
                    "pattern": str(b.pattern),
                }
                for b in self.blocks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], palette: Mapping[str, SrgbColor] = TABLE1_COLORS) -> BlockLayout:
        """Parse a layout sidecar. Block colors are palette names or ``[r, g, b]``."""
        if data.get("version", LAYOUT_VERSION) != LAYOUT_VERSION:
            raise ConfigError(f"unsupported layout version {data.get('version')!r}")
        try:
            blocks = []
            for entry in data["blocks"]:
                color = entry["color"]
                if isinstance(color, str):
                    if color not in palette:
                        raise ConfigError(f"unknown color name {color!r}")
                    blocks.append(Block(int(entry["x"]), int(entry["y"]), palette[color], BitPattern.parse(entry["pattern"]), color))
                else:
                    blocks.append(Block(int(entry["x"]), int(entry["y"]), SrgbColor(*color), BitPattern.parse(entry["pattern"])))
            return cls(int(data["block_width"]), int(data["block_height"]), tuple(blocks))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (ConfigError, LayoutError)):
                raise
            raise ConfigError(f"malformed layout: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> BlockLayout:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


@dataclass
class FramePair:
    frame_a: np.ndarray
    frame_b: np.ndarray
    block_layout: BlockLayout

    def __post_init__(self) -> None:
        if self.frame_a.shape != self.frame_b.shape:
            raise InputDomainError(f"frame shapes differ: {self.frame_a.shape} vs {self.frame_b.shape}")
        if self.frame_a.ndim != 3 or self.frame_a.shape[2] != 3:
            raise InputDomainError("frames must be H x W x 3 RGB arrays")

    @property
    def size(self) -> tuple[int, int]:
        """``(width, height)``."""
        return self.frame_a.shape[1], self.frame_a.shape[0]


class Signal(enum.Enum):
    NO_SIGNAL = "no_signal"
    AMBIGUOUS = "ambiguous"


BlockResult = BitPattern | Signal


def _select_pair(color, pattern, th, grid, wp, label, **search_kw):
    pairs = batch_search(color, grid, pattern, th, wp=wp, **search_kw)
    if not pairs:
        raise NoPairError(f"{label}: no pair for pattern {pattern} at v_th={th.v_th:g}, r_novib={th.r_novib:g}")
    return select_best(pairs, th)


def make_testcard(
    color: SrgbColor,
    pattern: BitPattern,
    th: Thresholds,
    grid: VibrationGrid,
    disp: DisplayParams = DisplayParams(),
    size: tuple[int, int] = (64, 64),
    wp: WhitePoint = D65,
    **search_kw: Any,
) -> FramePair:
    """A single full-frame block carrying ``pattern`` around ``color``.

    ``size`` is ``(width, height)``.
    """
    check_display(disp.refresh_hz, disp.ccff_hz)
    width, height = size
    if width < 1 or height < 1:
        raise InputDomainError(f"invalid size {size}")
    pair = _select_pair(color, pattern, th, grid, wp, f"color {color}", **search_kw)
    frame_a = np.empty((height, width, 3), dtype=np.uint8)
    frame_b = np.empty((height, width, 3), dtype=np.uint8)
    frame_a[...] = pair.plus.as_tuple()
    frame_b[...] = pair.minus.as_tuple()
    layout = BlockLayout(width, height, (Block(0, 0, color, pattern),))
    return FramePair(frame_a, frame_b, layout)


def embed_blocks(
    base: np.ndarray,
    layout: BlockLayout,
    th: Thresholds,
    grid: VibrationGrid,
    disp: DisplayParams = DisplayParams(),
    wp: WhitePoint = D65,
    **search_kw: Any,
) -> FramePair:
    check_display(disp.refresh_hz, disp.ccff_hz)
    base = np.asarray(base)
    if base.ndim != 3 or base.shape[2] != 3 or base.dtype != np.uint8:
        raise InputDomainError("base image must be an H x W x 3 uint8 array")
    layout.validate(base.shape[1], base.shape[0])
    frame_a = base.copy()
    frame_b = base.copy()
    for i, block in enumerate(layout.blocks):
        pair = _select_pair(block.color, block.pattern, th, grid, wp, block.label(i), **search_kw)
        region = layout.region(block)
        frame_a[region] = pair.plus.as_tuple()
        frame_b[region] = pair.minus.as_tuple()
    return FramePair(frame_a, frame_b, layout)


def block_mean_deltas(fp: FramePair) -> list[tuple[float, float, float]]:
    diff = np.abs(fp.frame_a.astype(np.int16) - fp.frame_b.astype(np.int16))
    out = []
    for block in fp.block_layout.blocks:
        mean = diff[fp.block_layout.region(block)].reshape(-1, 3).mean(axis=0)
        out.append(tuple(float(v) for v in mean))
    return out


def classify_means(means: Sequence[float], th: Thresholds) -> BlockResult:
    bits = []
    for d in means:
        if d > th.v_th:
            bits.append(1)
        elif d < th.low_bound:
            bits.append(0)
        else:
            return Signal.AMBIGUOUS
    if not any(bits):
        return Signal.NO_SIGNAL
    return BitPattern(*bits)


def decode_blocks(fp: FramePair, th: Thresholds) -> list[BlockResult]:
    """Read each block's pattern back from a frame pair, in layout order."""
    fp.block_layout.validate(*fp.size)
    return [classify_means(m, th) for m in block_mean_deltas(fp)]


def result_label(result: BlockResult) -> str:
    return result.value if isinstance(result, Signal) else str(result)


def decode_report(fp: FramePair, th: Thresholds) -> dict[str, Any]:
    means = block_mean_deltas(fp)
    return {
        "v_th": th.v_th,
        "r_novib": th.r_novib,
        "blocks": [
            {
                "index": i,
                "x": b.x,
                "y": b.y,
                "expected": str(b.pattern),
                "result": result_label(classify_means(m, th)),
                "mean_deltas": [float(f"{v:.6g}") for v in m],
            }
            for i, (b, m) in enumerate(zip(fp.block_layout.blocks, means))
        ],
    }


def encode_png(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), "RGB").save(buf, format="PNG")
    return buf.getvalue()


def read_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode != "RGB":
            im = im.convert("RGB")
        return np.array(im, dtype=np.uint8)
