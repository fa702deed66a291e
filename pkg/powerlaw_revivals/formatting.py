"""Lossless text encoding of numerical results."""

import math
from typing import Any, Dict, Mapping

from .const import INFINITY_TOKEN


def encode_value(value: Any) -> Any:
    """Map floats onto JSON-safe values; infinities become the string token."""
    if isinstance(value, bool) or value is None:
        return value
    if hasattr(value, "value") and isinstance(value.value, str):
        return value.value
    if isinstance(value, (int, float)) or hasattr(value, "dtype"):
        number = float(value) if not isinstance(value, int) else value
        if isinstance(number, float):
            if math.isnan(number):
                return None
            if math.isinf(number):
                return INFINITY_TOKEN if number > 0 else f"-{INFINITY_TOKEN}"
        return number
    return value


def encode_mapping(values: Mapping[str, Any]) -> Dict[str, Any]:
    return {key: encode_value(value) for key, value in values.items()}


def csv_cell(value: Any) -> str:
    """Render one CSV cell with shortest round-trip float formatting."""
    encoded = encode_value(value)
    if encoded is None:
        return ""
    return str(encoded)
