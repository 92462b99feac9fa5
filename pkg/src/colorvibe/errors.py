"""Exception types raised across the package."""


class ColorVibeError(Exception):
    """Base class for all package errors."""


class InputDomainError(ColorVibeError, ValueError):
    """An argument lies outside the domain of the operation."""


class OutOfGamutError(ColorVibeError, ValueError):
    """A Lab color has no sRGB representation without clipping."""


class EmptySelectionError(ColorVibeError, ValueError):
    """A selection was requested from an empty candidate list."""


class ConfigError(ColorVibeError, ValueError):
    """A search configuration or layout file failed validation."""


class NoPairError(ColorVibeError, ValueError):
    """No color pair satisfies the requested pattern and thresholds."""


class DisplayConstraintError(ColorVibeError, ValueError):
    """Alternating at the display refresh rate would not exceed color fusion."""


class LayoutError(ColorVibeError, ValueError):
    """A block layout does not fit the image or has overlapping blocks."""


class BenchmarkInvalidError(ColorVibeError, RuntimeError):
    """Serial and batch searches disagreed, so timings are meaningless."""
