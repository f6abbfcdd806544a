"""Tests for table-driven mechanisms and the random generator."""

import json
from fractions import Fraction

import pytest

from src.axioms import check_core_axioms
from src.errors import GenerationError, OutOfGridError, SchemaError
from src.money import normalize_grid
from src.tabulated import (
    load_tabulated,
    random_tabulated,
    save_tabulated,
    tabulate,
    tabulated_from_dict,
)
from src.zoo import first_price_burned_reserve

GRID = normalize_grid([0, 1, 2])


def _table_dict():
    return tabulate(first_price_burned_reserve(1), GRID, 2).to_dict()


def test_tabulate_matches_the_rule():
    mech = first_price_burned_reserve(1)
    table = tabulate(mech, GRID, 2)
    assert table.domain == GRID
    assert len(table.table) == 9
    for bids in [(0, 0), (2, 1), (1, 2), (2, 2)]:
        key = tuple(Fraction(b) for b in bids)
        assert table.evaluate(key) == mech.evaluate(key)


def test_off_grid_bid_is_rejected():
    table = tabulate(first_price_burned_reserve(1), GRID, 2)
    with pytest.raises(OutOfGridError):
        table.evaluate([Fraction(1, 2), Fraction(1)])


def test_save_and_load(tmp_path):
    path = save_tabulated(first_price_burned_reserve(1), GRID, 2, tmp_path / "fp.json")
    loaded = load_tabulated(path)
    assert loaded.n == 2
    assert loaded.values == GRID
    assert loaded.evaluate([Fraction(2), Fraction(1)]).to_dict() == {
        "confirm": [1, 0],
        "pay": ["2/1", "0/1"],
        "burn": ["1/1", "0/1"],
    }


def test_missing_profile_is_reported():
    data = _table_dict()
    data["table"] = data["table"][:-1]
    with pytest.raises(SchemaError, match="non-total table"):
        tabulated_from_dict(data)


def test_duplicate_profile_is_reported():
    data = _table_dict()
    data["table"].append(dict(data["table"][0]))
    with pytest.raises(SchemaError, match="duplicate"):
        tabulated_from_dict(data)


@pytest.mark.parametrize(
    "field, value",
    [
        ("values", ["1/1", "0/1", "2/1"]),
        ("values", ["x", "1/1", "2/1"]),
        ("n", 0),
        ("n", True),
    ],
)
def test_bad_header_is_reported(field, value):
    data = _table_dict()
    data[field] = value
    with pytest.raises(SchemaError):
        tabulated_from_dict(data)


def test_bad_confirm_bits_are_reported():
    data = _table_dict()
    data["table"][0]["confirm"] = [2, 0]
    with pytest.raises(SchemaError):
        tabulated_from_dict(data)


def test_invalid_json_is_a_schema_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        load_tabulated(path)


def test_loaded_name_defaults_to_file_stem(tmp_path):
    data = _table_dict()
    data.pop("name")
    path = tmp_path / "mine.json"
    path.write_text(json.dumps(data))
    assert load_tabulated(path).name == "mine"


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_random_tabulated_passes_requested_axioms(seed):
    mech = random_tabulated(GRID, 2, seed)
    assert all(r.passed for r in check_core_axioms(mech, GRID, 2))


def test_random_tabulated_is_seeded():
    a = random_tabulated(GRID, 3, 42)
    b = random_tabulated(GRID, 3, 42)
    assert a.to_dict() == b.to_dict()


def test_random_tabulated_rejects_unknown_axioms():
    with pytest.raises(GenerationError):
        random_tabulated(GRID, 2, 0, axioms={"IR", "UIC"})


def test_random_tabulated_treats_tied_bids_alike():
    grid = normalize_grid([0, 5])
    drawn = 0
    for seed in range(70, 80):
        try:
            mech = random_tabulated(grid, 3, seed)
        except GenerationError:
            continue
        drawn += 1
        for profile, outcome in mech.table.items():
            for i in range(3):
                for j in range(i + 1, 3):
                    if profile[i] == profile[j] and outcome.confirmed[i] == outcome.confirmed[j]:
                        assert outcome.pay[i] == outcome.pay[j]
                        assert outcome.burn[i] == outcome.burn[j]
    assert drawn > 0
