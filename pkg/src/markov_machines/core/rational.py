"""Exact probabilities: parsing and printing ``Fraction`` values as ``"p/q"`` strings."""

from __future__ import annotations

import re
from fractions import Fraction

from markov_machines.errors import ParseError

_RAT_PATTERN = re.compile(r"^\s*(?P<num>[+-]?\d+)\s*(?:/\s*(?P<den>\d+)\s*)?$")


def parse_rat(text: str | int, *, field: str | None = None) -> Fraction:
    """Parse ``"p/q"`` or an integer literal into a reduced fraction.

    Decimal notation is rejected so that no file ever carries a rounded probability.
    """
    if isinstance(text, bool):
        raise ParseError(f"expected a rational, got {text!r}", field=field)
    if isinstance(text, int):
        return Fraction(text)
    match = _RAT_PATTERN.match(str(text))
    if match is None:
        raise ParseError(f"expected a rational 'p/q', got {text!r}", field=field)
    den = int(match.group("den") or 1)
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}", field=field)
    return Fraction(int(match.group("num")), den)


def format_rat(value: Fraction) -> str:
    """Lowest-terms ``"p/q"``; integers print without a denominator."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rat_list(text: str, *, field: str | None = None) -> list[Fraction]:
    """Parse a comma separated list such as ``"1/2,1/2"``."""
    parts = [part for part in text.split(",") if part.strip()]
    return [parse_rat(part, field=field) for part in parts]
