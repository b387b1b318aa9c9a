"""Typed cell values under the supported column types.

DECIMAL values are held as integers scaled by 10**scale so every aggregation
is exact integer arithmetic -- no binary floating point anywhere near a
measure. Aggregates are range-checked against the signed 64-bit window the
star schema's storage types promise.
"""

from __future__ import annotations

import re
from datetime import date, datetime

from .catalog import ColumnType

INT32_MIN, INT32_MAX = -(2**31), 2**31 - 1
INT64_MIN, INT64_MAX = -(2**63), 2**63 - 1

_DECIMAL_TEXT = re.compile(r"^([+-]?)(\d+)(?:\.(\d+))?$")
_TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%S"

Value = int | str | bool | date | datetime | None


def parse_value(text: str, col_type: ColumnType) -> Value:
    """Parse one CSV field (already stripped of quoting) under a column type.

    Raises ValueError with a human-readable reason; callers attach the
    table/row/column position.
    """
    base = col_type.base
    if base == "INTEGER":
        value = _parse_int(text)
        if not (INT32_MIN <= value <= INT32_MAX):
            raise ValueError(f"{text!r} outside INTEGER range")
        return value
    if base == "BIGINT":
        value = _parse_int(text)
        if not (INT64_MIN <= value <= INT64_MAX):
            raise ValueError(f"{text!r} outside BIGINT range")
        return value
    if base == "DECIMAL":
        return parse_decimal(text, col_type.precision, col_type.scale)
    if base == "VARCHAR":
        if len(text) > (col_type.length or 0):
            raise ValueError(f"value longer than VARCHAR({col_type.length})")
        return text
    if base == "DATE":
        try:
            return date.fromisoformat(text)
        except ValueError:
            raise ValueError(f"{text!r} is not a YYYY-MM-DD date") from None
    if base == "TIMESTAMP":
        try:
            return datetime.strptime(text, _TIMESTAMP_FORMAT)
        except ValueError:
            raise ValueError(f"{text!r} is not a YYYY-MM-DDTHH:MM:SS timestamp") from None
    if base == "BOOLEAN":
        lowered = text.lower()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
        raise ValueError(f"{text!r} is not true/false")
    raise ValueError(f"unsupported type {base}")


def _parse_int(text: str) -> int:
    stripped = text.strip()
    if not re.fullmatch(r"[+-]?\d+", stripped):
        raise ValueError(f"{text!r} is not an integer")
    return int(stripped)


def parse_decimal(text: str, precision: int | None, scale: int | None) -> int:
    """Parse decimal text into an integer scaled by 10**scale, exactly."""
    assert precision is not None and scale is not None
    m = _DECIMAL_TEXT.match(text.strip())
    if not m:
        raise ValueError(f"{text!r} is not a decimal number")
    sign, whole, frac = m.group(1), m.group(2), m.group(3) or ""
    if len(frac) > scale:
        raise ValueError(f"{text!r} has more than {scale} fractional digit(s)")
    value = int(whole + frac.ljust(scale, "0"))
    if value >= 10**precision:
        raise ValueError(f"{text!r} exceeds DECIMAL({precision},{scale})")
    return -value if sign == "-" else value


def render_decimal(scaled: int, scale: int) -> str:
    """Render a scaled integer with exactly ``scale`` fractional digits."""
    if scale == 0:
        return str(scaled)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(scale + 1, "0")
    return f"{sign}{digits[:-scale]}.{digits[-scale:]}"


def render_value(value: Value, col_type: ColumnType) -> str:
    """Deterministic text form of a value; NULL renders as the empty string."""
    if value is None:
        return ""
    base = col_type.base
    if base == "DECIMAL":
        return render_decimal(value, col_type.scale or 0)
    if base == "DATE":
        return value.isoformat()
    if base == "TIMESTAMP":
        return value.strftime(_TIMESTAMP_FORMAT)
    if base == "BOOLEAN":
        return "true" if value else "false"
    return str(value)


def check_int64(value: int, what: str) -> int:
    if not (INT64_MIN <= value <= INT64_MAX):
        raise OverflowError(f"{what} exceeds the 64-bit aggregate range")
    return value
