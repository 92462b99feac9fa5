"""Standard sweep parameters and the published feasibility table."""

from colorvibe.colorspace import SrgbColor

TABLE1_COLORS: dict[str, SrgbColor] = {
    "Black": SrgbColor(100, 100, 100),
    "Gray": SrgbColor(170, 170, 170),
    "White": SrgbColor(240, 240, 240),
    "Red": SrgbColor(240, 100, 100),
    "Green": SrgbColor(100, 240, 100),
    "Blue": SrgbColor(100, 100, 240),
    "Yellow": SrgbColor(240, 240, 100),
    "Cyan": SrgbColor(100, 240, 240),
    "Magenta": SrgbColor(240, 100, 240),
}

TABLE1_PATTERNS = ("100", "010", "001", "110", "101", "011", "111")
TABLE1_V_TH = (50.0, 100.0, 150.0, 200.0)
TABLE1_R_NOVIB = (0.5, 0.25, 0.125)

# Published presence of a satisfying pair per (pattern, color); one character
# per color in TABLE1_COLORS order.
REFERENCE_FEASIBILITY: dict[str, str] = {
    "100": "111011111",
    "010": "000000000",
    "001": "111111111",
    "110": "011100001",
    "101": "111111111",
    "011": "000000000",
    "111": "111101101",
}

# Colors reported to carry at least four patterns.
LOW_GREEN_COLORS = ("Black", "Gray", "White", "Red", "Blue", "Magenta")

# Reported timings for the full sweep (seconds) on the authors' laptop.
REFERENCE_TIMING = {"serial_seconds": 3423.07, "batch_seconds": 62.62}


def reference_aggregate() -> dict[tuple[str, str], bool]:
    names = list(TABLE1_COLORS)
    return {
        (name, pattern): row[i] == "1"
        for pattern, row in REFERENCE_FEASIBILITY.items()
        for i, name in enumerate(names)
    }
