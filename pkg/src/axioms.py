"""Exhaustive axiom checkers over finite bid grids.

Every checker enumerates profiles of grid indices in lexicographic order
and reports the first violation it meets, so reports are identical for any
worker count. Violations are report content, never exceptions.
"""

import itertools
import logging
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .contracts import SideContract, Witness, verify_witness
from .mechanism import Mechanism, Outcome, Setting
from .money import ZERO, format_money, format_money_list
from .workers import first_hit

logger = logging.getLogger(__name__)

Profile = Tuple[int, ...]

EXHAUSTIVE_ANONYMITY_MAX_N = 4


class UtilityClass(str, Enum):
    ZERO = "zero-utility"
    NON_ZERO = "non-zero-utility"


@dataclass
class AxiomReport:
    """Result of one axiom check."""

    check: str
    passed: bool
    profiles: int
    violation: Optional[Dict[str, Any]] = None
    witness: Optional[Witness] = None

    @property
    def status(self) -> str:
        return "pass" if self.passed else "violation"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "status": self.status,
            "profiles": self.profiles,
            "violation": self.violation,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def grid_profiles(grid: Sequence[Fraction], n: int) -> List[Profile]:
    return list(itertools.product(range(len(grid)), repeat=n))


def bids_of(grid: Sequence[Fraction], profile: Profile) -> Tuple[Fraction, ...]:
    return tuple(grid[k] for k in profile)


def is_zero_utility(outcome: Outcome, bids: Sequence[Fraction], i: int) -> bool:
    return not outcome.confirmed[i] or outcome.pay[i] == bids[i]


def classify_zero_utility(mech: Mechanism, s: Setting) -> List[UtilityClass]:
    """Zero-utility iff unconfirmed (or omitted), or confirmed paying the bid."""
    outcome = mech.evaluate(s.bids)
    return [
        UtilityClass.ZERO
        if i in s.omitted or is_zero_utility(outcome, s.bids, i)
        else UtilityClass.NON_ZERO
        for i in range(len(s.bids))
    ]


def scan_profiles(
    name: str,
    grid: Sequence[Fraction],
    n: int,
    check: Callable[[Profile], Optional[Dict[str, Any]]],
    workers: int,
) -> AxiomReport:
    profiles = grid_profiles(grid, n)

    def scan(chunk: Sequence[Profile]) -> Optional[Dict[str, Any]]:
        for profile in chunk:
            violation = check(profile)
            if violation is not None:
                return violation
        return None

    violation = first_hit(profiles, scan, workers)
    if violation is not None:
        logger.info("%s: violation at %s", name, violation.get("profile"))
    return AxiomReport(name, violation is None, len(profiles), violation)


def check_individual_rationality(
    mech: Mechanism, grid: Sequence[Fraction], n: int, workers: int = 1
) -> AxiomReport:
    """Truthful bidders never end with negative utility: ``b_i a_i - p_i >= 0``."""

    def check(profile: Profile) -> Optional[Dict[str, Any]]:
        bids = bids_of(grid, profile)
        outcome = mech.evaluate(bids)
        for i, bid in enumerate(bids):
            utility = (bid if outcome.confirmed[i] else ZERO) - outcome.pay[i]
            if utility < 0:
                return {
                    "profile": format_money_list(bids),
                    "bidder": i,
                    "utility": format_money(utility),
                }
        return None

    return scan_profiles("individual-rationality", grid, n, check, workers)


def check_burn_balance(
    mech: Mechanism, grid: Sequence[Fraction], n: int, workers: int = 1
) -> AxiomReport:
    """``0 <= burn_i <= pay_i`` for every bid."""

    def check(profile: Profile) -> Optional[Dict[str, Any]]:
        bids = bids_of(grid, profile)
        outcome = mech.evaluate(bids)
        for i in range(len(bids)):
            if not ZERO <= outcome.burn[i] <= outcome.pay[i]:
                return {
                    "profile": format_money_list(bids),
                    "bidder": i,
                    "pay": format_money(outcome.pay[i]),
                    "burn": format_money(outcome.burn[i]),
                }
        return None

    return scan_profiles("burn-balance", grid, n, check, workers)


def _outcome_multiset(bids: Sequence[Fraction], outcome: Outcome) -> List[tuple]:
    return sorted(
        (bids[i], outcome.confirmed[i], outcome.pay[i], outcome.burn[i]) for i in range(len(bids))
    )


def _tie_asymmetry(bids: Sequence[Fraction], outcome: Outcome) -> Optional[List[int]]:
    """Two bidders with equal bids and equal confirmation but different pay
    or burn."""
    seen: Dict[Tuple[Fraction, bool], int] = {}
    for i, bid in enumerate(bids):
        key = (bid, outcome.confirmed[i])
        j = seen.setdefault(key, i)
        if (outcome.pay[i], outcome.burn[i]) != (outcome.pay[j], outcome.burn[j]):
            return [j, i]
    return None


def _anonymity_violation(
    mech: Mechanism, bids: Tuple[Fraction, ...], perm: Tuple[int, ...]
) -> Optional[Dict[str, Any]]:
    permuted = tuple(bids[k] for k in perm)
    original = mech.evaluate(bids)
    moved = mech.evaluate(permuted)
    tied = _tie_asymmetry(bids, original)
    if tied is None and _outcome_multiset(bids, original) == _outcome_multiset(permuted, moved):
        return None
    violation = {
        "profile": format_money_list(bids),
        "permutation": list(perm),
        "outcome": original.to_dict(),
        "permuted_outcome": moved.to_dict(),
    }
    if tied is not None:
        violation["tied_bidders"] = tied
    return violation


def check_anonymity(
    mech: Mechanism,
    grid: Sequence[Fraction],
    n: int,
    profiles: Optional[Sequence[Sequence[Fraction]]] = None,
    sample_cap: int = 10000,
    seed: int = 0,
    workers: int = 1,
) -> AxiomReport:
    """
    Check that permuting bids permutes the outcome.

    Outcomes are compared as multisets of (bid, confirmed, pay, burn), and
    equal bids with equal confirmation must pay and burn the same. Bids
    that differ identify their bidders, so for them this is equivariance
    under every permutation; among equal bids only the choice of which
    ones are confirmed may follow the index, as a lowest-index tie-break
    does.

    Args:
        mech: Mechanism under test.
        grid: Bid grid; ignored when ``profiles`` is given.
        n: Number of bidders.
        profiles: Explicit bid vectors to check instead of the grid.
        sample_cap: Number of (profile, permutation) pairs sampled when n
            is above the exhaustive bound.
        seed: Seed for sampling.
        workers: Thread count.
    """
    if profiles is not None:
        candidates = [tuple(p) for p in profiles]
    elif n > EXHAUSTIVE_ANONYMITY_MAX_N:
        candidates = []
    else:
        candidates = [bids_of(grid, p) for p in grid_profiles(grid, n)]

    if n <= EXHAUSTIVE_ANONYMITY_MAX_N:
        perms = list(itertools.permutations(range(n)))
        pairs = [(bids, perm) for bids in candidates for perm in perms]
    else:
        rng = random.Random(seed)
        pairs = []
        for _ in range(sample_cap):
            if candidates:
                bids = candidates[rng.randrange(len(candidates))]
            else:
                bids = tuple(grid[rng.randrange(len(grid))] for _ in range(n))
            pairs.append((bids, tuple(rng.sample(range(n), n))))

    def scan(chunk) -> Optional[Dict[str, Any]]:
        for bids, perm in chunk:
            violation = _anonymity_violation(mech, bids, perm)
            if violation is not None:
                return violation
        return None

    violation = first_hit(pairs, scan, workers)
    return AxiomReport("anonymity", violation is None, len(pairs), violation)


def check_consistent_tie_breaking(
    mech: Mechanism, grid: Sequence[Fraction], n: int, workers: int = 1
) -> AxiomReport:
    """An unconfirmed bidder's bid change never flips the confirmation of a
    bidder that is zero-utility before and after."""

    def check(profile: Profile) -> Optional[Dict[str, Any]]:
        bids_a = bids_of(grid, profile)
        out_a = mech.evaluate(bids_a)
        for j in range(n):
            if out_a.confirmed[j]:
                continue
            for y in range(profile[j] + 1, len(grid)):
                bids_b = bids_a[:j] + (grid[y],) + bids_a[j + 1 :]
                out_b = mech.evaluate(bids_b)
                if out_b.confirmed[j]:
                    continue
                for i in range(n):
                    if i == j:
                        continue
                    if (
                        is_zero_utility(out_a, bids_a, i)
                        and is_zero_utility(out_b, bids_b, i)
                        and out_a.confirmed[i] != out_b.confirmed[i]
                    ):
                        return {
                            "profile": format_money_list(bids_a),
                            "profile_b": format_money_list(bids_b),
                            "mover": j,
                            "bidder": i,
                        }
        return None

    return scan_profiles("consistent-tie-breaking", grid, n, check, workers)


def swap_witness(
    mech: Mechanism, bids: Sequence[Fraction], i: int, j: int
) -> Optional[Witness]:
    """Coalition {i, j} trading bids; returned only when it verifies."""
    setting_a = Setting.honest(bids)
    contract = SideContract.build({i, j}, {i: bids[j], j: bids[i]})
    witness = Witness.from_contract(mech, setting_a, contract)
    return witness if verify_witness(mech, witness) else None


def check_prefix_confirmation(
    mech: Mechanism, grid: Sequence[Fraction], n: int, workers: int = 1
) -> AxiomReport:
    """No unconfirmed bid is strictly higher than a confirmed one."""

    def check(profile: Profile) -> Optional[Dict[str, Any]]:
        bids = bids_of(grid, profile)
        outcome = mech.evaluate(bids)
        for i in range(n):
            if outcome.confirmed[i]:
                continue
            for j in range(n):
                if outcome.confirmed[j] and bids[i] > bids[j]:
                    return {
                        "profile": format_money_list(bids),
                        "unconfirmed": i,
                        "confirmed": j,
                    }
        return None

    report = scan_profiles("prefix-confirmation", grid, n, check, workers)
    if report.violation is not None:
        bids = tuple(Fraction(b) for b in report.violation["profile"])
        report.witness = swap_witness(
            mech, bids, report.violation["unconfirmed"], report.violation["confirmed"]
        )
    return report


def check_uic(mech: Mechanism, grid: Sequence[Fraction], n: int, workers: int = 1) -> AxiomReport:
    """Truthful bidding is a best response to every grid profile."""

    def check(profile: Profile) -> Optional[Dict[str, Any]]:
        bids = bids_of(grid, profile)
        truthful = mech.evaluate(bids)
        for i, value in enumerate(bids):
            honest_utility = (value if truthful.confirmed[i] else ZERO) - truthful.pay[i]
            for x in grid:
                if x == value:
                    continue
                deviated = bids[:i] + (x,) + bids[i + 1 :]
                outcome = mech.evaluate(deviated)
                utility = (value if outcome.confirmed[i] else ZERO) - outcome.pay[i]
                if utility > honest_utility:
                    return {
                        "profile": format_money_list(bids),
                        "bidder": i,
                        "deviation": format_money(x),
                        "truthful_utility": format_money(honest_utility),
                        "deviation_utility": format_money(utility),
                    }
        return None

    return scan_profiles("uic", grid, n, check, workers)


def check_core_axioms(
    mech: Mechanism,
    grid: Sequence[Fraction],
    n: int,
    sample_cap: int = 10000,
    seed: int = 0,
    workers: int = 1,
) -> List[AxiomReport]:
    """The five axiom reports: IR, burn-balance, anonymity, consistent
    tie-breaking and prefix confirmation."""
    return [
        check_individual_rationality(mech, grid, n, workers),
        check_burn_balance(mech, grid, n, workers),
        check_anonymity(mech, grid, n, sample_cap=sample_cap, seed=seed, workers=workers),
        check_consistent_tie_breaking(mech, grid, n, workers),
        check_prefix_confirmation(mech, grid, n, workers),
    ]
