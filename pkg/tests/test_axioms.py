"""Tests for the exhaustive axiom checkers."""

from fractions import Fraction

import pytest

from src.axioms import (
    check_anonymity,
    check_burn_balance,
    check_consistent_tie_breaking,
    check_core_axioms,
    check_individual_rationality,
    check_prefix_confirmation,
    check_uic,
    is_zero_utility,
)
from src.mechanism import Mechanism, Outcome
from src.money import normalize_grid
from src.zoo import (
    first_price_burned_reserve,
    fully_burned_posted_price,
    fully_burned_second_price,
    salsa_counterexample,
)

GRID = normalize_grid([0, 1, 2])


def _lowest_bid_wins() -> Mechanism:
    def rule(bids):
        winner = min(range(len(bids)), key=lambda i: (bids[i], i))
        confirmed = tuple(i == winner for i in range(len(bids)))
        return Outcome(confirmed, (0,) * len(bids), (0,) * len(bids))

    return Mechanism("lowest-bid-wins", rule)


def _first_bidder_favoured() -> Mechanism:
    def rule(bids):
        return Outcome((True,) + (False,) * (len(bids) - 1), (0,) * len(bids), (0,) * len(bids))

    return Mechanism("first-bidder", rule)


def _overcharging() -> Mechanism:
    def rule(bids):
        return Outcome((True,) * len(bids), tuple(b + 1 for b in bids), (0,) * len(bids))

    return Mechanism("overcharging", rule)


def _overburning() -> Mechanism:
    def rule(bids):
        return Outcome((False,) * len(bids), (0,) * len(bids), (1,) * len(bids))

    return Mechanism("overburning", rule)


@pytest.mark.parametrize(
    "factory",
    [lambda: first_price_burned_reserve(1), lambda: fully_burned_posted_price(1)],
)
def test_well_behaved_mechanisms_pass_core_axioms(factory):
    reports = check_core_axioms(factory(), GRID, 3)
    assert [r.check for r in reports] == [
        "individual-rationality",
        "burn-balance",
        "anonymity",
        "consistent-tie-breaking",
        "prefix-confirmation",
    ]
    assert all(r.passed for r in reports)
    assert reports[0].profiles == 27
    # every profile under each of the 3! permutations
    assert reports[2].profiles == 27 * 6


def test_individual_rationality_violation():
    report = check_individual_rationality(_overcharging(), GRID, 2)
    assert not report.passed
    assert report.status == "violation"
    assert report.violation == {"profile": ["0/1", "0/1"], "bidder": 0, "utility": "-1/1"}


def test_burn_balance_violation():
    report = check_burn_balance(_overburning(), GRID, 2)
    assert not report.passed
    assert report.violation["profile"] == ["0/1", "0/1"]
    assert report.violation["bidder"] == 0


def test_index_favouritism_breaks_anonymity():
    report = check_anonymity(_first_bidder_favoured(), GRID, 2)
    assert not report.passed


def test_prefix_confirmation_violation_comes_with_swap_witness():
    report = check_prefix_confirmation(_lowest_bid_wins(), GRID, 2)
    assert not report.passed
    assert report.violation == {"profile": ["0/1", "1/1"], "unconfirmed": 1, "confirmed": 0}
    assert report.witness is not None
    assert report.witness.to_dict()["B"] == ["1/1", "0/1"]
    assert report.witness.delta == 1


def test_salsa_breaks_ties_inconsistently():
    grid = normalize_grid([1, 8, 9])
    report = check_consistent_tie_breaking(salsa_counterexample(), grid, 2)
    assert report.violation == {
        "profile": ["1/1", "9/1"],
        "profile_b": ["8/1", "9/1"],
        "mover": 0,
        "bidder": 1,
    }


def test_second_price_is_uic_first_price_is_not():
    assert check_uic(fully_burned_second_price(), GRID, 2).passed
    report = check_uic(first_price_burned_reserve(0), GRID, 2)
    assert not report.passed
    assert report.violation["deviation"] == "1/1"


def test_reports_do_not_depend_on_worker_count():
    mech = salsa_counterexample()
    grid = normalize_grid([0, 1, 8, 9, 10])
    serial = check_consistent_tie_breaking(mech, grid, 3, workers=1)
    parallel = check_consistent_tie_breaking(mech, grid, 3, workers=4)
    assert serial.to_dict() == parallel.to_dict()


def test_zero_utility_classification():
    outcome = Outcome((True, True, False), (Fraction(2), Fraction(1), 0), (0, 0, 0))
    bids = (Fraction(2), Fraction(2), Fraction(5))
    assert is_zero_utility(outcome, bids, 0)
    assert not is_zero_utility(outcome, bids, 1)
    assert is_zero_utility(outcome, bids, 2)


def _first_bidder_charged() -> Mechanism:
    def rule(bids):
        pays = tuple(b if i == 0 else 0 for i, b in enumerate(bids))
        return Outcome((True,) * len(bids), pays, (0,) * len(bids))

    return Mechanism("first-bidder-charged", rule)


def test_tied_bids_must_pay_alike():
    tied = [(Fraction(1), Fraction(1))]
    report = check_anonymity(_first_bidder_charged(), GRID, 2, profiles=tied)
    assert not report.passed
    assert report.violation["tied_bidders"] == [0, 1]


def test_lowest_index_tie_break_is_anonymous():
    tied = [(Fraction(2), Fraction(2), Fraction(1))]
    assert check_anonymity(first_price_burned_reserve(1), GRID, 3, profiles=tied).passed
