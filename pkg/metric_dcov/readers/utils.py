# Some helper functions

import math


def convert_to_number(value):
    """Convert a text cell to a float, or return the stripped text if it is not numeric."""
    if isinstance(value, str):
        value = value.strip()
        try:
            return float(value)
        except ValueError:
            return value
    return value


def is_number(value) -> bool:
    """True when ``value`` converts to a finite float."""
    value = convert_to_number(value)
    return isinstance(value, float) and math.isfinite(value)
