"""Tests for report serialization."""

import json
from enum import Enum
from fractions import Fraction
from pathlib import Path

import pytest

from src.report import (
    build_report,
    dumps_report,
    emit_csv,
    emit_report,
    summary_rows,
    to_jsonable,
)
from src.search import Verdict


class Color(Enum):
    RED = "red"


def test_to_jsonable_converts_rationals_and_containers():
    value = {
        "price": Fraction(13, 2),
        "grid": (Fraction(0), Fraction(1)),
        "ids": {2, 1},
        "verdict": Verdict.HOLDS,
        "color": Color.RED,
        "path": Path("a/b.json"),
        "flag": True,
        "none": None,
    }
    assert to_jsonable(value) == {
        "price": "13/2",
        "grid": ["0/1", "1/1"],
        "ids": [1, 2],
        "verdict": "holds",
        "color": "red",
        "path": "a/b.json",
        "flag": True,
        "none": None,
    }


def test_to_jsonable_rejects_unknown_objects():
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_dumps_report_is_sorted_with_trailing_newline():
    text = dumps_report({"b": 1, "a": Fraction(1, 2)})
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": "1/2", "b": 1}


def test_emit_report_creates_parents(tmp_path):
    path = emit_report(build_report("zoo", {"n": 2}, {"IR": "pass"}), tmp_path / "x" / "r.json")
    data = json.loads(path.read_text())
    assert data == {"command": "zoo", "inputs": {"n": 2}, "verdicts": {"IR": "pass"}, "scope": None}


def test_build_report_adds_sections():
    report = build_report("find-sc", {}, {}, "grid certificate only", result={"status": "holds"})
    assert report["scope"] == "grid certificate only"
    assert report["result"] == {"status": "holds"}


def test_summary_rows_compact_details():
    rows = summary_rows(
        [
            {"check": "burn-balance", "status": "pass", "detail": None},
            {"check": "uic", "status": "violation", "detail": {"bidder": 1, "profile": ["0/1"]}},
        ]
    )
    assert rows == [
        ["burn-balance", "pass", ""],
        ["uic", "violation", '{"bidder":1,"profile":["0/1"]}'],
    ]


def test_emit_csv(tmp_path):
    path = emit_csv([["uic", "pass", ""], ["anonymity", "violation", "a,b"]], tmp_path / "s.csv")
    assert path.read_text() == 'check,status,detail\nuic,pass,\nanonymity,violation,"a,b"\n'
