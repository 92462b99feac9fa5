"""Search for imperceptible color-vibration pairs and embed them in frame pairs."""

__version__ = "0.1.0"
