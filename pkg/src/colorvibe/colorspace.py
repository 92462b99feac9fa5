"""sRGB <-> CIELAB conversion with strict gamut testing.

All constants are pinned so that conversions are bit-stable across runs:

* sRGB transfer function from IEC 61966-2-1 (threshold 0.04045 / 0.0031308).
* Linear sRGB -> XYZ matrix from IEC 61966-2-1 (four decimals). The inverse
  is the exact numerical inverse of that matrix, written out to 17 digits.
* Reference white D65, taken as the row sums of the forward matrix so that
  neutral inputs map to a* = b* = 0 up to floating rounding.
* CIE f(t) with the 6/29 linear-segment threshold.

Scalar functions use :mod:`math` and back the serial search. The ``*_array``
functions are the numpy equivalents used by the batched search; they are
written separately so one can serve as a check on the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from colorvibe.errors import InputDomainError, OutOfGamutError

RGB_TO_XYZ = (
    (0.4124, 0.3576, 0.1805),
    (0.2126, 0.7152, 0.0722),
    (0.0193, 0.1192, 0.9505),
)

XYZ_TO_RGB = (
    (3.240625477320054, -1.537207972210319, -0.4986285986982478),
    (-0.9689307147293196, 1.8757560608852415, 0.04151752384295395),
    (0.05571012044551064, -0.20402105059848671, 1.0569959422543882),
)

_RGB_TO_XYZ_NP = np.array(RGB_TO_XYZ)

_DELTA = 6.0 / 29.0
_DELTA_SQ3 = 3.0 * _DELTA * _DELTA
_DELTA_CUBE = _DELTA**3
_F_OFFSET = 4.0 / 29.0

# Slack on the [0, 1] linear gamut test; absorbs matrix round-off at the
# gamut surface (e.g. Lab white -> 1.0000000000000002).
GAMUT_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class SrgbColor:
    """An 8-bit display color."""

    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        if type(self.r) is int and type(self.g) is int and type(self.b) is int:
            if 0 <= self.r <= 255 and 0 <= self.g <= 255 and 0 <= self.b <= 255:
                return
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise InputDomainError(f"channel {name} must be an integer, got {v!r}")
            if not 0 <= v <= 255:
                raise InputDomainError(f"channel {name}={v} outside [0, 255]")
            object.__setattr__(self, name, int(v))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)

    @classmethod
    def parse(cls, text: str) -> SrgbColor:
        """Parse ``"R,G,B"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise InputDomainError(f"expected R,G,B, got {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError as exc:
            if isinstance(exc, InputDomainError):
                raise
            raise InputDomainError(f"non-integer channel in {text!r}") from exc

    def __str__(self) -> str:
        return f"({self.r}, {self.g}, {self.b})"


@dataclass(frozen=True, slots=True)
class LabColor:
    l_star: float
    a_star: float
    b_star: float

    def __post_init__(self) -> None:
        if not (-GAMUT_EPS <= self.l_star <= 100.0 + 1e-6):
            raise InputDomainError(f"L*={self.l_star} outside [0, 100]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l_star, self.a_star, self.b_star)


@dataclass(frozen=True, slots=True)
class WhitePoint:
    """Reference-white tristimulus values, normalized so that ``y == 1``."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if min(self.x, self.y, self.z) <= 0:
            raise InputDomainError("white point components must be positive")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


D65 = WhitePoint(*(sum(row) for row in RGB_TO_XYZ))


def srgb_to_linear(code: int) -> float:
    """Decode one 8-bit sRGB channel code to linear intensity in [0, 1]."""
    if isinstance(code, bool) or not isinstance(code, (int, np.integer)):
        raise InputDomainError(f"channel code must be an integer, got {code!r}")
    if not 0 <= code <= 255:
        raise InputDomainError(f"channel code {code} outside [0, 255]")
    v = code / 255.0
    if v <= 0.04045:
        return v / 12.92
    return ((v + 0.055) / 1.055) ** 2.4


def linear_to_encoded(lin: float) -> float:
    """Encode linear intensity to a continuous (unrounded) 0-255 code."""
    if lin <= 0.0031308:
        return 12.92 * lin * 255.0
    return (1.055 * math.pow(lin, 1.0 / 2.4) - 0.055) * 255.0


def quantize(value: float) -> int:
    """Round half away from zero."""
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def _f(t: float) -> float:
    if t > _DELTA_CUBE:
        return t ** (1.0 / 3.0)
    return t / _DELTA_SQ3 + _F_OFFSET


def _f_inv(t: float) -> float:
    if t > _DELTA:
        return t * t * t
    return _DELTA_SQ3 * (t - _F_OFFSET)


def srgb_to_lab(color: SrgbColor, wp: WhitePoint = D65) -> LabColor:
    lin = [srgb_to_linear(c) for c in color.as_tuple()]
    x, y, z = (
        (row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]) / w
        for row, w in zip(RGB_TO_XYZ, wp.as_tuple())
    )
    fx, fy, fz = _f(x), _f(y), _f(z)
    return LabColor(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))


def lab_to_linear(l_star: float, a_star: float, b_star: float, wp: WhitePoint = D65) -> tuple[float, float, float]:
    """Lab -> linear sRGB without any range check."""
    fy = (l_star + 16.0) / 116.0
    fx = fy + a_star / 500.0
    fz = fy - b_star / 200.0
    x = _f_inv(fx) * wp.x
    y = _f_inv(fy) * wp.y
    z = _f_inv(fz) * wp.z
    return tuple(row[0] * x + row[1] * y + row[2] * z for row in XYZ_TO_RGB)  # type: ignore[return-value]


def lab_to_encoded(
    l_star: float, a_star: float, b_star: float, wp: WhitePoint = D65
) -> tuple[float, float, float] | None:
    """Continuous 0-255 codes for a Lab color, or ``None`` when out of gamut."""
    lin = lab_to_linear(l_star, a_star, b_star, wp)
    for v in lin:
        if v < -GAMUT_EPS or v > 1.0 + GAMUT_EPS:
            return None
    return tuple(linear_to_encoded(min(max(v, 0.0), 1.0)) for v in lin)  # type: ignore[return-value]


def lab_to_srgb(lab: LabColor, wp: WhitePoint = D65) -> SrgbColor:
    """Convert Lab to quantized sRGB.

    Raises:
        OutOfGamutError: if any linear channel falls outside [0, 1] before
            quantization. Out-of-gamut colors are never clipped.
    """
    enc = lab_to_encoded(lab.l_star, lab.a_star, lab.b_star, wp)
    if enc is None:
        raise OutOfGamutError(f"{lab} is outside the sRGB gamut")
    return SrgbColor(*(quantize(v) for v in enc))


def in_gamut(lab: LabColor, wp: WhitePoint = D65) -> bool:
    return lab_to_encoded(lab.l_star, lab.a_star, lab.b_star, wp) is not None


# -- vectorized -------------------------------------------------------------


def srgb_to_lab_array(codes: np.ndarray, wp: WhitePoint = D65) -> np.ndarray:
    """Vectorized :func:`srgb_to_lab` over a ``(..., 3)`` array of codes."""
    c = np.asarray(codes, dtype=np.float64) / 255.0
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB_TO_XYZ_NP.T / np.array(wp.as_tuple())
    f = np.where(xyz > _DELTA_CUBE, np.cbrt(xyz), xyz / _DELTA_SQ3 + _F_OFFSET)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def lab_to_encoded_channels(
    l_star: float,
    a_star: np.ndarray,
    b_star: np.ndarray,
    wp: WhitePoint = D65,
) -> tuple[list[np.ndarray], np.ndarray]:
    """Per-channel form of :func:`lab_to_encoded_array`: ``([R, G, B], valid)``."""
    a_star = np.asarray(a_star, dtype=np.float64)
    b_star = np.asarray(b_star, dtype=np.float64)
    fy = (np.asarray(l_star, dtype=np.float64) + 16.0) / 116.0
    fy = np.broadcast_to(fy, a_star.shape)
    x, y, z = (
        np.where(f > _DELTA, f * f * f, _DELTA_SQ3 * (f - _F_OFFSET)) * w
        for f, w in zip((fy + a_star / 500.0, fy, fy - b_star / 200.0), wp.as_tuple())
    )
    valid = np.ones(a_star.shape, dtype=bool)
    channels = []
    for row in XYZ_TO_RGB:
        # Elementwise rather than matmul: same summation order as the scalar
        # path, so the gamut test sees identical linear values.
        lin = row[0] * x + row[1] * y + row[2] * z
        valid &= (lin >= -GAMUT_EPS) & (lin <= 1.0 + GAMUT_EPS)
        np.clip(lin, 0.0, 1.0, out=lin)
        enc = np.where(lin <= 0.0031308, 12.92 * lin, 1.055 * np.power(lin, 1.0 / 2.4) - 0.055) * 255.0
        channels.append(enc)
    return channels, valid


def lab_to_encoded_array(
    l_star: np.ndarray | float,
    a_star: np.ndarray,
    b_star: np.ndarray,
    wp: WhitePoint = D65,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Lab -> continuous codes.

    Returns:
        ``(encoded, valid)``: encoded codes of shape ``(..., 3)`` and a boolean
        gamut mask of shape ``(...)``. Encoded values where ``valid`` is False
        are meaningless.
    """
    channels, valid = lab_to_encoded_channels(l_star, a_star, b_star, wp)
    return np.stack(channels, axis=-1), valid


def quantize_array(values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`quantize`, returning int64."""
    return (np.sign(values) * np.floor(np.abs(values) + 0.5)).astype(np.int64)
