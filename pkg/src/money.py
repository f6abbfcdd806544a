"""Exact rational money.

Bids, payments and burns are ``fractions.Fraction`` values. ``Fraction``
keeps itself in lowest terms with a positive denominator, so equality is
structural and arithmetic never rounds.
"""

from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

from .errors import MoneyError

Money = Fraction
SignedMoney = Fraction
MoneyLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def to_money(value: MoneyLike, allow_negative: bool = False) -> Fraction:
    """Convert an int, Fraction or string to an exact rational.

    Strings may be ``"p/q"``, an integer or a finite decimal such as
    ``"1.25"``; decimals are converted exactly.
    """
    if isinstance(value, bool):
        raise MoneyError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        result = value
    elif isinstance(value, int):
        result = Fraction(value)
    elif isinstance(value, str):
        text = value.strip()
        if not text:
            raise MoneyError("empty rational string")
        try:
            result = Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise MoneyError(f"malformed rational {value!r}: {e}")
    else:
        raise MoneyError(f"not a rational: {value!r}")

    if result < 0 and not allow_negative:
        raise MoneyError(f"negative amount {format_money(result)} where money is required")
    return result


def format_money(value: Fraction) -> str:
    """Canonical ``"num/den"`` string; integers keep ``/1``."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_money_list(text: str, allow_negative: bool = False) -> Tuple[Fraction, ...]:
    """Parse a comma separated list of rationals, keeping order."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise MoneyError(f"no values in {text!r}")
    return tuple(to_money(p, allow_negative) for p in parts)


def parse_grid(text: str) -> Tuple[Fraction, ...]:
    """Parse a grid: sorted ascending, duplicates removed."""
    return normalize_grid(parse_money_list(text))


def normalize_grid(values: Iterable[MoneyLike]) -> Tuple[Fraction, ...]:
    grid = tuple(sorted({to_money(v) for v in values}))
    if not grid:
        raise MoneyError("grid must contain at least one value")
    return grid


def format_money_list(values: Sequence[Fraction]) -> list:
    return [format_money(v) for v in values]
