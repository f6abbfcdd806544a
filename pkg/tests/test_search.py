"""Tests for the exhaustive side-contract search."""

from fractions import Fraction

import pytest

from src.contracts import MinerModel, verify_witness
from src.money import normalize_grid
from src.search import (
    SearchLimits,
    Verdict,
    coalitions,
    enumerate_contracts,
    find_c_sc,
    is_c_scp_on_grid,
)
from src.zoo import (
    first_price_burned_reserve,
    first_price_shaded_payment,
    fully_burned_posted_price,
    fully_burned_second_price,
    salsa_counterexample,
)

SECOND_PRICE_GRID = normalize_grid([0, 1, 2, 3])


def test_coalition_order():
    assert coalitions(3, 2) == [(), (0,), (0, 1), (0, 2), (1,), (1, 2), (2,)]


def test_passive_enumeration_only_changes_bids():
    contracts = list(
        enumerate_contracts(
            fully_burned_second_price(),
            SECOND_PRICE_GRID,
            (Fraction(1), Fraction(2)),
            1,
            MinerModel.PASSIVE,
            SearchLimits(),
        )
    )
    # empty coalition, then four new bids for each single bidder
    assert len(contracts) == 1 + 4 + 4
    assert all(not c.omitted and not c.fakes for c in contracts)


def test_salsa_first_witness():
    result = find_c_sc(salsa_counterexample(), normalize_grid([1, 8, 9, 10]), 2, 2)
    assert result.verdict == Verdict.REFUTED
    data = result.witness.to_dict()
    assert data["A"] == ["1/1", "10/1"]
    assert data["B"] == ["8/1", "9/1"]
    assert data["coalition"] == [0, 1]
    assert data["delta"] == "1/1"


def test_second_price_resists_single_bidders_with_passive_miner():
    result = find_c_sc(fully_burned_second_price(), SECOND_PRICE_GRID, 2, 1, MinerModel.PASSIVE)
    assert result.verdict == Verdict.HOLDS
    assert result.settings == 16
    assert result.to_dict()["status"] == "holds"


@pytest.mark.parametrize(
    "n, profile, coalition, new_bid, omitted",
    [
        (2, ["1/1", "1/1"], [0], "0/1", [1]),
        (3, ["0/1", "1/1", "1/1"], [1], "1/1", [2]),
    ],
)
def test_second_price_active_miner_omits_runner_up(n, profile, coalition, new_bid, omitted):
    result = find_c_sc(
        fully_burned_second_price(), normalize_grid([0, 1, 2]), n, 1, MinerModel.ACTIVE
    )
    assert result.verdict == Verdict.REFUTED
    data = result.witness.to_dict()
    assert data["A"] == profile
    assert data["coalition"] == coalition
    assert data["new_bids"] == {str(coalition[0]): new_bid}
    assert data["omitted"] == omitted
    assert data["delta"] == "1/1"


def test_single_profile_search():
    mech = fully_burned_second_price()
    result = find_c_sc(
        mech, SECOND_PRICE_GRID, 2, 1, MinerModel.ACTIVE, profiles=[(Fraction(3), Fraction(2))]
    )
    assert result.settings == 1
    assert result.witness.contract.omitted == (1,)
    assert result.witness.delta == 2
    assert verify_witness(mech, result.witness)


def test_contract_budget_truncates():
    result = find_c_sc(
        fully_burned_second_price(),
        SECOND_PRICE_GRID,
        2,
        1,
        MinerModel.ACTIVE,
        SearchLimits(max_contracts=1),
    )
    assert result.verdict == Verdict.TRUNCATED
    assert result.witness is None
    assert result.to_dict()["truncated_at"] == ["0/1", "0/1"]


def test_shaded_payment_refuted_by_single_bidder():
    result = find_c_sc(
        first_price_shaded_payment(1), normalize_grid([0, 1, "3/2", "7/4", 2]), 2, 1
    )
    assert result.verdict == Verdict.REFUTED
    assert result.witness.order == 1


@pytest.mark.parametrize("model", [MinerModel.PASSIVE, MinerModel.ACTIVE])
def test_first_price_burned_reserve_is_collusion_proof(model):
    grid = normalize_grid([0, "1/2", 1, 2])
    result = is_c_scp_on_grid(first_price_burned_reserve(1), grid, 2, 2, model)
    assert result.verdict == Verdict.HOLDS


def test_posted_price_is_collusion_proof():
    grid = normalize_grid([0, "1/2", 1, 2])
    result = is_c_scp_on_grid(fully_burned_posted_price(1), grid, 3, 3)
    assert result.verdict == Verdict.HOLDS


def test_result_does_not_depend_on_workers():
    mech = salsa_counterexample()
    grid = normalize_grid([1, 8, 9, 10])
    serial = find_c_sc(mech, grid, 3, 2, workers=1)
    parallel = find_c_sc(mech, grid, 3, 2, workers=4)
    assert serial.to_dict() == parallel.to_dict()
