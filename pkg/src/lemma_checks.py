"""Grid checks of the structural consequences of 2-party collusion resistance.

* non-bossiness: a zero-utility bidder whose confirmation status does not
  change cannot change how many other bidders get non-zero utility;
* increase monotonicity: an unconfirmed bidder raising its bid below the
  lowest confirmed bid either becomes confirmed or nobody loses
  confirmation;
* decrease monotonicity: a confirmed bidder lowering its bid above the
  highest unconfirmed bid either becomes unconfirmed or nobody gains
  confirmation.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence

from .axioms import AxiomReport, Profile, bids_of, is_zero_utility, scan_profiles
from .contracts import SideContract, Witness, verify_witness
from .mechanism import Mechanism, Setting
from .money import format_money, format_money_list

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    INCREASE = "increase"
    DECREASE = "decrease"


def _non_zero_count(mech: Mechanism, bids: Sequence[Fraction], skip: int) -> int:
    outcome = mech.evaluate(bids)
    return sum(1 for j in range(len(bids)) if j != skip and not is_zero_utility(outcome, bids, j))


def bossy_move_witness(
    mech: Mechanism, bids_a: Sequence[Fraction], bids_b: Sequence[Fraction], mover: int
) -> Optional[Witness]:
    """
    Two-party contract exploiting a bossy single move.

    The move is tried in both directions, from A to B and from B back to
    A. The mover acts alone first, then with each other bidder in index
    order. Only a verified witness is returned.
    """
    for start, end in ((bids_a, bids_b), (bids_b, bids_a)):
        setting = Setting.honest(start)
        partners = [None] + [j for j in range(len(start)) if j != mover]
        for j in partners:
            coalition = {mover} if j is None else {mover, j}
            contract = SideContract.build(coalition, {mover: end[mover]})
            witness = Witness.from_contract(mech, setting, contract)
            if witness.delta > 0 and verify_witness(mech, witness):
                return witness
    return None


def check_nonbossiness(
    mech: Mechanism, grid: Sequence[Fraction], n: int, workers: int = 1
) -> AxiomReport:
    """Single moves of a zero-utility bidder that keeps its confirmation
    status leave the number of non-zero-utility bidders unchanged."""

    def check(profile: Profile) -> Optional[Dict[str, Any]]:
        bids_a = bids_of(grid, profile)
        out_a = mech.evaluate(bids_a)
        for i in range(n):
            if not is_zero_utility(out_a, bids_a, i):
                continue
            before = _non_zero_count(mech, bids_a, i)
            for x in grid:
                if x == bids_a[i]:
                    continue
                bids_b = bids_a[:i] + (x,) + bids_a[i + 1 :]
                out_b = mech.evaluate(bids_b)
                same_status = out_b.confirmed[i] == out_a.confirmed[i]
                if not same_status or not is_zero_utility(out_b, bids_b, i):
                    continue
                after = _non_zero_count(mech, bids_b, i)
                if after != before:
                    return {
                        "profile": format_money_list(bids_a),
                        "profile_b": format_money_list(bids_b),
                        "mover": i,
                        "non_zero_before": before,
                        "non_zero_after": after,
                    }
        return None

    report = scan_profiles("non-bossiness", grid, n, check, workers)
    if report.violation is not None:
        v = report.violation
        report.witness = bossy_move_witness(
            mech,
            tuple(Fraction(b) for b in v["profile"]),
            tuple(Fraction(b) for b in v["profile_b"]),
            v["mover"],
        )
        if report.witness is None:
            logger.warning("non-bossiness violation at %s has no two-party witness", v["profile"])
    return report


def _confirmed_set(confirmed: Sequence[bool], want: bool) -> frozenset:
    return frozenset(j for j, a in enumerate(confirmed) if a == want)


def check_monotonicity(
    mech: Mechanism,
    grid: Sequence[Fraction],
    n: int,
    direction: Direction = Direction.INCREASE,
    workers: int = 1,
) -> AxiomReport:
    """
    Check increase or decrease monotonicity exhaustively on ``grid``.

    Increase: an unconfirmed bidder moves up to a bid still strictly below
    every confirmed bid. Then the mover is confirmed afterwards, or the
    confirmed set weakly grows. Decrease mirrors this with confirmed
    movers, unconfirmed bids and the unconfirmed set.
    """
    direction = Direction(direction)
    raising = direction == Direction.INCREASE

    def check(profile: Profile) -> Optional[Dict[str, Any]]:
        bids_a = bids_of(grid, profile)
        out_a = mech.evaluate(bids_a)
        # movers come from the unconfirmed side when raising
        movers = _confirmed_set(out_a.confirmed, not raising)
        others = _confirmed_set(out_a.confirmed, raising)
        for i in sorted(movers):
            for x in grid:
                if raising:
                    if x <= bids_a[i] or any(x >= bids_a[j] for j in others):
                        continue
                elif x >= bids_a[i] or any(x <= bids_a[j] for j in others):
                    continue
                bids_b = bids_a[:i] + (x,) + bids_a[i + 1 :]
                out_b = mech.evaluate(bids_b)
                if out_b.confirmed[i] == raising:
                    continue
                kept = _confirmed_set(out_b.confirmed, raising)
                if not others <= kept:
                    return {
                        "profile": format_money_list(bids_a),
                        "profile_b": format_money_list(bids_b),
                        "mover": i,
                        "new_bid": format_money(x),
                        "lost": sorted(others - kept),
                    }
        return None

    return scan_profiles(f"{direction.value}-monotonicity", grid, n, check, workers)
