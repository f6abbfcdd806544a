"""Tests for exact rational money."""

from fractions import Fraction

import pytest

from src.errors import MoneyError
from src.money import format_money, parse_grid, parse_money_list, to_money


@pytest.mark.parametrize(
    "value, expected",
    [
        (3, Fraction(3)),
        ("1/2", Fraction(1, 2)),
        (" 7/4 ", Fraction(7, 4)),
        ("1.25", Fraction(5, 4)),
        ("4/8", Fraction(1, 2)),
        (Fraction(2, 3), Fraction(2, 3)),
    ],
)
def test_to_money_accepts_rationals(value, expected):
    assert to_money(value) == expected


@pytest.mark.parametrize("value", ["", "abc", "1/0", True, 1.5, None])
def test_to_money_rejects_garbage(value):
    with pytest.raises(MoneyError):
        to_money(value)


def test_negative_money_needs_permission():
    with pytest.raises(MoneyError):
        to_money("-1")
    assert to_money("-1", allow_negative=True) == Fraction(-1)


def test_format_money_is_canonical():
    assert format_money(Fraction(0)) == "0/1"
    assert format_money(Fraction(4, 8)) == "1/2"
    assert format_money(Fraction(-2)) == "-2/1"


def test_parse_money_list_keeps_order():
    assert parse_money_list("2,1/2,2") == (Fraction(2), Fraction(1, 2), Fraction(2))


def test_parse_grid_sorts_and_dedupes():
    assert parse_grid("2,0,1/2,2") == (Fraction(0), Fraction(1, 2), Fraction(2))


def test_parse_grid_rejects_empty():
    with pytest.raises(MoneyError):
        parse_grid(" , ")
