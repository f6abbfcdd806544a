"""Tests for outcomes, settings and utility arithmetic."""

from fractions import Fraction

import pytest

from src.errors import ContractError, MechanismError, OutcomeInvariantError
from src.mechanism import (
    Mechanism,
    Outcome,
    Setting,
    bidder_utility,
    coalition_utility,
    joint_utility,
    miner_utility,
    outcome_problems,
)
from src.zoo import first_price_burned_reserve, fully_burned_second_price


def _half_burned_first_price() -> Mechanism:
    def rule(bids):
        winner = max(range(len(bids)), key=lambda i: (bids[i], -i))
        confirmed = tuple(i == winner for i in range(len(bids)))
        pay = tuple(b if a else Fraction(0) for a, b in zip(confirmed, bids))
        return Outcome(confirmed, pay, tuple(p / 2 for p in pay))

    return Mechanism("half-burned", rule)


def test_outcome_requires_equal_lengths():
    with pytest.raises(MechanismError):
        Outcome((True,), (Fraction(1), Fraction(0)), (Fraction(0),))


def test_outcome_to_dict_uses_bits_and_rationals():
    outcome = Outcome((True, False), (Fraction(3, 2), 0), (1, 0))
    assert outcome.to_dict() == {"confirm": [1, 0], "pay": ["3/2", "0/1"], "burn": ["1/1", "0/1"]}
    assert outcome.winners == (0,)


def test_nobody_confirms_nobody():
    outcome = Outcome.nobody(3)
    assert outcome.winners == ()
    assert outcome.pay == (0, 0, 0)


def test_outcome_problems_lists_every_breach():
    outcome = Outcome((False, True), (1, 5), (0, 6))
    problems = outcome_problems((Fraction(2), Fraction(4)), outcome)
    assert len(problems) == 3


def test_first_price_outcome():
    mech = first_price_burned_reserve(1)
    outcome = mech.evaluate(["2", "3/2"])
    assert outcome.confirmed == (True, False)
    assert outcome.pay == (Fraction(2), Fraction(0))
    assert outcome.burn == (Fraction(1), Fraction(0))


def test_evaluate_is_memoized():
    calls = []

    def rule(bids):
        calls.append(bids)
        return Outcome.nobody(len(bids))

    mech = Mechanism("counting", rule)
    mech.evaluate([1, 2])
    mech.evaluate(["1", "2/1"])
    assert len(calls) == 1


def test_fixed_arity_rejects_other_lengths():
    mech = Mechanism("pair", lambda bids: Outcome.nobody(len(bids)), arity=2)
    assert not mech.accepts_length(3)
    with pytest.raises(MechanismError):
        mech.evaluate([1, 2, 3])


def test_debug_mode_checks_outcomes():
    def rule(bids):
        return Outcome((False,) * len(bids), (Fraction(1),) * len(bids), (0,) * len(bids))

    assert Mechanism("charging", rule).evaluate([1]).pay == (1,)
    with pytest.raises(OutcomeInvariantError):
        Mechanism("charging", rule, debug=True).evaluate([1])


def test_describe_reports_continuous_domain():
    info = first_price_burned_reserve(1).describe()
    assert info == {
        "name": "first-price-burned-reserve",
        "params": {"r": "1/1"},
        "domain": "continuous",
    }


def test_setting_rejects_nonzero_omitted_bid():
    with pytest.raises(ContractError):
        Setting((Fraction(1), Fraction(2)), (Fraction(1), Fraction(2)), frozenset({1}))


def test_honest_setting():
    s = Setting.honest([3, 2])
    assert s.is_honest
    assert s.n == 2
    assert not s.with_bid(0, Fraction(1)).is_honest


def test_utilities_in_second_price():
    mech = fully_burned_second_price()
    s = Setting.honest([3, 2])
    assert bidder_utility(mech, s, 0) == 1
    assert bidder_utility(mech, s, 1) == 0
    assert miner_utility(mech, s) == 0


def test_miner_keeps_unburned_payment():
    mech = _half_burned_first_price()
    s = Setting.honest([4, 2])
    assert miner_utility(mech, s) == 2


def test_fake_bids_cost_the_miner_their_burn():
    mech = _half_burned_first_price()
    s = Setting((Fraction(1), Fraction(4)), (Fraction(1),))
    assert s.fake_indices == range(1, 2)
    assert miner_utility(mech, s) == -2


def test_coalition_judged_at_other_values():
    mech = fully_burned_second_price()
    truth = Setting.honest([3, 2])
    deviated = Setting((Fraction(3), Fraction(0)), truth.values)
    assert coalition_utility(mech, deviated, truth, (0, 1)) == 3
    assert joint_utility(mech, deviated, truth, (0, 1)) == 3


def test_omitted_bidder_contributes_nothing():
    mech = fully_burned_second_price()
    s = Setting((Fraction(0), Fraction(2)), (Fraction(5), Fraction(2)), frozenset({0}))
    assert bidder_utility(mech, s, 0) == 0


def test_fake_bid_has_no_value():
    mech = fully_burned_second_price()
    s = Setting((Fraction(1), Fraction(4)), (Fraction(1),))
    with pytest.raises(ContractError):
        bidder_utility(mech, s, 1)
