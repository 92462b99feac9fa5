"""Point-symmetric color-pair search at fixed L*.

A target color is displaced in the (a*, b*) plane by ``(r sin j, r cos j)``
in both directions, giving a pair that straddles the target at the same
luminance. Each pair is converted back to 8-bit sRGB (out-of-gamut endpoints
are discarded) and its per-channel frame-to-frame difference is compared
with a 3-bit pattern.

Two search routes produce identical output:

* :func:`serial_search` walks the grid one candidate at a time in pure
  Python. It is the baseline and the oracle.
* :func:`batch_search` evaluates the whole grid as numpy arrays and filters
  with a boolean mask, optionally splitting the radius axis across threads.

Both return pairs in canonical order: radius ascending, then angle ascending.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from colorvibe.colorspace import (
    D65,
    LabColor,
    SrgbColor,
    WhitePoint,
    lab_to_encoded,
    lab_to_encoded_channels,
    quantize,
    quantize_array,
    srgb_to_lab,
)
from colorvibe.errors import EmptySelectionError, InputDomainError

DeltaMode = Literal["quantized", "continuous"]
Swing = Literal["peak", "half"]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class BitPattern:
    """A 3-bit (R, G, B) vibration signal; ``000`` is not a signal."""

    r_bit: int
    g_bit: int
    b_bit: int

    def __post_init__(self) -> None:
        bits = self.bits
        if any(b not in (0, 1) for b in bits):
            raise InputDomainError(f"bits must be 0 or 1, got {bits}")
        if not any(bits):
            raise InputDomainError("pattern 000 carries no signal")

    @property
    def bits(self) -> tuple[int, int, int]:
        return (self.r_bit, self.g_bit, self.b_bit)

    @classmethod
    def parse(cls, text: str) -> BitPattern:
        text = text.strip()
        if len(text) != 3 or any(c not in "01" for c in text):
            raise InputDomainError(f"pattern must be three of 0/1, got {text!r}")
        return cls(*(int(c) for c in text))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


ALL_PATTERNS = tuple(BitPattern.parse(s) for s in ("100", "010", "001", "110", "101", "011", "111"))


@dataclass(frozen=True, slots=True)
class Thresholds:
    """High band ``delta > v_th``; low band ``delta < v_th * r_novib``."""

    v_th: float
    r_novib: float

    def __post_init__(self) -> None:
        if not self.v_th > 0:
            raise InputDomainError(f"v_th must be positive, got {self.v_th}")
        if not 0 < self.r_novib <= 1:
            raise InputDomainError(f"r_novib must lie in (0, 1], got {self.r_novib}")

    @property
    def low_bound(self) -> float:
        return self.v_th * self.r_novib


@dataclass(frozen=True)
class VibrationGrid:
    """Displacement radii (Lab units) and angles (radians) to sweep."""

    radii: tuple[float, ...]
    angles: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if any(r < 0 for r in self.radii):
            raise InputDomainError("radii must be non-negative")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise InputDomainError("radii must be strictly increasing")
        if any(not 0 <= a < TWO_PI for a in self.angles):
            raise InputDomainError("angles must lie in [0, 2*pi)")
        if any(b <= a for a, b in zip(self.angles, self.angles[1:])):
            raise InputDomainError("angles must be strictly increasing")

    def __len__(self) -> int:
        return len(self.radii) * len(self.angles)

    @classmethod
    def from_ranges(
        cls,
        r_min: float,
        r_max: float,
        r_step: float,
        a_min_deg: float = 0.0,
        a_max_deg: float = 360.0,
        a_step_deg: float = 1.0,
    ) -> VibrationGrid:
        """Build a grid from inclusive radius and half-open angle ranges.

        Radii run ``r_min, r_min + r_step, ...`` up to and including ``r_max``.
        Angles run in degrees from ``a_min_deg`` up to but excluding
        ``a_max_deg`` and are stored in radians.
        """
        if r_step <= 0 or a_step_deg <= 0:
            raise InputDomainError("grid steps must be positive")
        n_r = int(math.floor((r_max - r_min) / r_step + 1e-9)) + 1 if r_max >= r_min else 0
        n_a = int(math.ceil((a_max_deg - a_min_deg) / a_step_deg - 1e-9)) if a_max_deg > a_min_deg else 0
        radii = [r_min + k * r_step for k in range(n_r)]
        angles = [math.radians(a_min_deg + k * a_step_deg) for k in range(n_a)]
        return cls(tuple(radii), tuple(angles))

    @classmethod
    def parse(cls, text: str) -> VibrationGrid:
        """Parse ``"rmin:rmax:rstep,amin:amax:astep"`` (angles in degrees)."""
        try:
            radius_part, angle_part = text.split(",")
            r = [float(v) for v in radius_part.split(":")]
            a = [float(v) for v in angle_part.split(":")]
        except ValueError as exc:
            raise InputDomainError(f"bad grid spec {text!r}") from exc
        if len(r) != 3 or len(a) != 3:
            raise InputDomainError(f"bad grid spec {text!r}")
        return cls.from_ranges(*r, *a)

    @classmethod
    def default(cls) -> VibrationGrid:
        """Radius 1..100 step 1, angle 0..359 degrees step 1."""
        return cls.from_ranges(1, 100, 1, 0, 360, 1)


@dataclass(frozen=True, slots=True)
class ChannelDeltas:
    d_r: float
    d_g: float
    d_b: float

    def __post_init__(self) -> None:
        for v in (self.d_r, self.d_g, self.d_b):
            if not 0 <= v <= 255:
                raise InputDomainError(f"channel delta {v} outside [0, 255]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.d_r, self.d_g, self.d_b)


@dataclass(frozen=True, slots=True)
class ColorPair:
    """Two display colors alternated around ``target``.

    ``plus`` is the target displaced by ``(+r sin j, +r cos j)`` in (a*, b*),
    ``minus`` by the opposite offset.
    """

    target: SrgbColor
    plus: SrgbColor
    minus: SrgbColor
    radius: float
    angle: float
    deltas: ChannelDeltas

    def lab_pair(self, wp: WhitePoint = D65) -> tuple[LabColor, LabColor]:
        """The unquantized Lab endpoints this pair was built from."""
        return displaced_pair(srgb_to_lab(self.target, wp), self.radius, self.angle)

    def swapped(self) -> ColorPair:
        return ColorPair(self.target, self.minus, self.plus, self.radius, self.angle, self.deltas)


def displaced_pair(target: LabColor, radius: float, angle: float) -> tuple[LabColor, LabColor]:
    if radius < 0:
        raise InputDomainError(f"radius must be non-negative, got {radius}")
    da = radius * math.sin(angle)
    db = radius * math.cos(angle)
    L, a, b = target.as_tuple()
    return LabColor(L, a + da, b + db), LabColor(L, a - da, b - db)


def channel_deltas(plus: SrgbColor, minus: SrgbColor) -> ChannelDeltas:
    return ChannelDeltas(abs(plus.r - minus.r), abs(plus.g - minus.g), abs(plus.b - minus.b))


def classify_pair(deltas: ChannelDeltas, pattern: BitPattern, th: Thresholds) -> bool:
    """True iff every high bit exceeds ``v_th`` and every low bit is below ``v_th * r_novib``.

    Both comparisons are strict, so deltas in ``[v_th * r_novib, v_th]`` fail.
    """
    low = th.low_bound
    for bit, d in zip(pattern.bits, deltas.as_tuple()):
        if bit:
            if not d > th.v_th:
                return False
        elif not d < low:
            return False
    return True


def classify_array(deltas: np.ndarray, pattern: BitPattern, th: Thresholds) -> np.ndarray:
    """Vectorized :func:`classify_pair` over a ``(..., 3)`` delta array."""
    bits = np.array(pattern.bits, dtype=bool)
    return np.all(np.where(bits, deltas > th.v_th, deltas < th.low_bound), axis=-1)


def pair_margin(deltas: ChannelDeltas, th: Thresholds) -> float:
    """Smallest distance of any channel from its band edge.

    A channel counts as high when its delta exceeds ``v_th``; for pairs that
    pass :func:`classify_pair` this recovers the pattern exactly.
    """
    return min(d - th.v_th if d > th.v_th else th.low_bound - d for d in deltas.as_tuple())


def select_best(pairs: Sequence[ColorPair], th: Thresholds) -> ColorPair:
    """Pick the pair with the largest classification margin.

    Ties go to the smaller radius, then the smaller angle.
    """
    if not pairs:
        raise EmptySelectionError("no color pairs to select from")
    return max(pairs, key=lambda p: (pair_margin(p.deltas, th), -p.radius, -p.angle))


def _check_modes(delta_mode: str, swing: str) -> None:
    if delta_mode not in ("quantized", "continuous"):
        raise InputDomainError(f"unknown delta_mode {delta_mode!r}")
    if swing not in ("peak", "half"):
        raise InputDomainError(f"unknown swing {swing!r}")


def serial_search(
    target: SrgbColor,
    grid: VibrationGrid,
    pattern: BitPattern,
    th: Thresholds,
    *,
    wp: WhitePoint = D65,
    delta_mode: DeltaMode = "quantized",
    swing: Swing = "peak",
    stats: dict | None = None,
) -> list[ColorPair]:
    """Evaluate every grid point in a plain Python loop.

    If ``stats`` is given, ``stats["evaluated"]`` is incremented once per
    candidate examined.
    """
    _check_modes(delta_mode, swing)
    lab = srgb_to_lab(target, wp)
    t_codes = target.as_tuple()
    found = []
    evaluated = 0
    for r in grid.radii:
        for j in grid.angles:
            evaluated += 1
            plus_lab, minus_lab = displaced_pair(lab, r, j)
            p = lab_to_encoded(*plus_lab.as_tuple(), wp)
            if p is None:
                continue
            m = lab_to_encoded(*minus_lab.as_tuple(), wp)
            if m is None:
                continue
            plus = SrgbColor(*(quantize(v) for v in p))
            minus = SrgbColor(*(quantize(v) for v in m))
            if delta_mode == "continuous":
                pv, mv = p, m
            else:
                pv, mv = plus.as_tuple(), minus.as_tuple()
            if swing == "peak":
                d = tuple(abs(x - y) for x, y in zip(pv, mv))
            else:
                d = tuple(max(abs(x - t), abs(y - t)) for x, y, t in zip(pv, mv, t_codes))
            deltas = ChannelDeltas(*d)
            if classify_pair(deltas, pattern, th):
                found.append(ColorPair(target, plus, minus, r, j, deltas))
    if stats is not None:
        stats["evaluated"] = stats.get("evaluated", 0) + evaluated
    return found


def _mirror_partners(angles: Sequence[float]) -> dict[int, int]:
    """Map index m -> k where ``angles[m] == angles[k] + pi`` (within 1e-9)."""
    partners = {}
    arr = np.asarray(angles)
    for k, a in enumerate(angles):
        if a >= math.pi:
            break
        hits = np.flatnonzero(np.abs(arr - (a + math.pi)) <= 1e-9)
        if hits.size:
            partners[int(hits[0])] = k
    return partners


def _evaluate_rows(
    lab: LabColor,
    radii: np.ndarray,
    sin_j: np.ndarray,
    cos_j: np.ndarray,
    pattern: BitPattern,
    th: Thresholds,
    wp: WhitePoint,
    delta_mode: str,
    swing: str,
    t_codes: tuple[int, int, int],
):
    da = radii[:, None] * sin_j[None, :]
    db = radii[:, None] * cos_j[None, :]
    L, a, b = lab.as_tuple()
    enc_p, ok_p = lab_to_encoded_channels(L, a + da, b + db, wp)
    enc_m, ok_m = lab_to_encoded_channels(L, a - da, b - db, wp)
    mask = ok_p & ok_m
    q_p = [quantize_array(e) for e in enc_p]
    q_m = [quantize_array(e) for e in enc_m]
    pv, mv = (enc_p, enc_m) if delta_mode == "continuous" else (q_p, q_m)
    deltas = []
    for bit, p, m, t in zip(pattern.bits, pv, mv, t_codes):
        d = np.abs(p - m) if swing == "peak" else np.maximum(np.abs(p - t), np.abs(m - t))
        mask &= (d > th.v_th) if bit else (d < th.low_bound)
        deltas.append(d)
    rows, cols = np.nonzero(mask)
    pick = lambda chans: np.stack([c[rows, cols] for c in chans], axis=-1)  # noqa: E731
    return rows, cols, pick(q_p), pick(q_m), pick(deltas)


def batch_search(
    target: SrgbColor,
    grid: VibrationGrid,
    pattern: BitPattern,
    th: Thresholds,
    *,
    wp: WhitePoint = D65,
    delta_mode: DeltaMode = "quantized",
    swing: Swing = "peak",
    workers: int = 1,
    half_sweep: bool = False,
) -> list[ColorPair]:
    """Array-based equivalent of :func:`serial_search`.

    The radius axis is split into ``workers`` contiguous chunks evaluated on
    a thread pool; chunks are concatenated in order, so the output does not
    depend on ``workers``.

    With ``half_sweep``, angles ``j + pi`` that have a partner ``j`` in the
    grid are not evaluated; their pairs are the partner's pairs swapped.
    """
    _check_modes(delta_mode, swing)
    if workers < 1:
        raise InputDomainError(f"workers must be >= 1, got {workers}")
    if len(grid) == 0:
        return []
    lab = srgb_to_lab(target, wp)
    t_codes = target.as_tuple()
    radii = np.array(grid.radii)
    angles = list(grid.angles)
    partners = _mirror_partners(angles) if half_sweep else {}
    evaluated_cols = [k for k in range(len(angles)) if k not in partners]
    # libm sin/cos on the (short) angle axis keeps batch and serial bit-identical.
    sin_j = np.array([math.sin(angles[k]) for k in evaluated_cols])
    cos_j = np.array([math.cos(angles[k]) for k in evaluated_cols])

    chunks = [c for c in np.array_split(np.arange(radii.size), min(workers, radii.size)) if c.size]

    def run(chunk: np.ndarray):
        rows, cols, qp, qm, d = _evaluate_rows(
            lab, radii[chunk], sin_j, cos_j, pattern, th, wp, delta_mode, swing, t_codes
        )
        return rows + chunk[0], cols, qp, qm, d

    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(chunks[0])]

    col_to_angle = np.array(evaluated_cols, dtype=np.int64)
    rows = np.concatenate([p[0] for p in parts])
    cols = col_to_angle[np.concatenate([p[1] for p in parts])]
    qp = np.concatenate([p[2] for p in parts])
    qm = np.concatenate([p[3] for p in parts])
    d = np.concatenate([p[4] for p in parts])

    if partners:
        inverse = {k: m for m, k in partners.items()}
        mirror = np.array([k in inverse for k in cols.tolist()], dtype=bool)
        m_cols = np.array([inverse[k] for k in cols[mirror].tolist()], dtype=np.int64)
        rows = np.concatenate([rows, rows[mirror]])
        cols = np.concatenate([cols, m_cols])
        qp, qm = np.concatenate([qp, qm[mirror]]), np.concatenate([qm, qp[mirror]])
        d = np.concatenate([d, d[mirror]])

    order = np.lexsort((cols, rows))
    radii_list = grid.radii
    if delta_mode == "continuous":
        d_list = d[order].tolist()
    else:
        d_list = d[order].astype(np.int64).tolist()
    return [
        ColorPair(target, SrgbColor(*p), SrgbColor(*m), radii_list[r], angles[c], ChannelDeltas(*dd))
        for r, c, p, m, dd in zip(
            rows[order].tolist(), cols[order].tolist(), qp[order].tolist(), qm[order].tolist(), d_list
        )
    ]
