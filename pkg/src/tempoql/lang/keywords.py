"""Machine-readable vocabulary of the language, for editors and the API."""

from __future__ import annotations

from .nodes import AGG_FUNCTIONS, BUILTIN_FUNCTIONS, INTERVAL_MODES
from .tokens import KEYWORDS, UNIT_WORDS

ALL_KEYWORDS = sorted(KEYWORDS | {"inf"})
UNITS = sorted(set(UNIT_WORDS.values()))
MARKERS = ["#maxtime", "#mintime", "#now", "#value"]


def language_vocabulary() -> dict:
    """Everything an editor needs for highlighting and completion."""
    return {
        "keywords": ALL_KEYWORDS,
        "aggregation_functions": sorted(AGG_FUNCTIONS),
        "builtin_functions": sorted(BUILTIN_FUNCTIONS),
        "interval_modes": sorted(INTERVAL_MODES),
        "units": UNITS,
        "markers": MARKERS,
    }
