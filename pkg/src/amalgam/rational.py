"""Exact rational scalars.

Every distance, norm value, tolerance and coefficient in this package is a
`fractions.Fraction`; nothing is ever represented in floating point.  This
module only adds the strict string grammar used by files and CLI flags:
an optional sign, digits, and an optional "/denominator" part.  `Fraction`'s
own constructor would also accept decimal and float syntax, which we must
reject to keep every value exact and every file byte-stable.
"""

from __future__ import annotations

import re
from fractions import Fraction

Rat = Fraction

_RAT_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


def parse_rat(text: str) -> Fraction:
    """Parse "num" or "num/den" into a Fraction; reject any other syntax."""
    if not isinstance(text, str) or not _RAT_RE.match(text.strip()):
        raise ValueError(f"not a rational literal: {text!r}")
    return Fraction(text.strip())


def format_rat(value: Fraction) -> str:
    """Render as "num" when integral, otherwise "num/den" in lowest terms."""
    return str(Fraction(value))


def as_rat(value) -> Fraction:
    """Coerce int / Fraction / rational string to Fraction, nothing else."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot treat {type(value).__name__} as an exact rational")
