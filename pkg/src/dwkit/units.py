"""Unit-suffixed quantity parsing.

All quantities are stored internally in base SI units: bytes, bytes/s,
seconds, watts.  Decimal prefixes only (GB = 10^9 bytes); binary prefixes
(GiB, MiB, ...) are rejected so configs cannot silently mix conventions.
"""
from __future__ import annotations

import re

from .errors import UnitError

_PREFIX = {"": 1.0, "k": 1e3, "K": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
           "P": 1e15}

_QUANTITY_RE = re.compile(
    r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([A-Za-z/]*)\s*$")

# dimension -> base unit symbols accepted after an optional decimal prefix
_BASE_UNITS = {
    "bytes": ("B",),
    "rate": ("B/s",),
    "seconds": ("s", "sec"),
    "watts": ("W",),
}


def _split(text):
    m = _QUANTITY_RE.match(str(text))
    if m is None:
        raise UnitError(text, "expected '<number><unit>'")
    return float(m.group(1)), m.group(2)


def parse_quantity(text, dimension):
    """Parse ``text`` (number or unit-suffixed string) to base SI units.

    ``dimension`` is one of ``bytes``, ``rate``, ``seconds``, ``watts``.
    Bare numbers are taken as already being in base units.
    """
    if isinstance(text, (int, float)):
        return float(text)
    value, suffix = _split(text)
    if suffix == "":
        return value
    if suffix.lower().startswith(("ki", "mi", "gi", "ti", "pi")):
        raise UnitError(text, "binary prefixes are not accepted; "
                               "use decimal units (GB = 10^9)")
    for base in _BASE_UNITS[dimension]:
        for prefix, scale in _PREFIX.items():
            if suffix == prefix + base:
                return value * scale
    raise UnitError(text, f"unit {suffix!r} does not measure {dimension}")


def parse_bytes(text):
    return parse_quantity(text, "bytes")


def parse_rate(text):
    return parse_quantity(text, "rate")


def parse_seconds(text):
    return parse_quantity(text, "seconds")


def parse_watts(text):
    return parse_quantity(text, "watts")
