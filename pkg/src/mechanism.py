"""Core mechanism types and utility arithmetic.

A mechanism maps a bid vector to an :class:`Outcome` (confirmation, payment
and burn per bid). Utilities follow the usual quasi-linear accounting:

* bidder ``i`` judged at value ``v``: ``v * a_i - p_i``
* miner: ``sum(p_i - burn_i)`` over real bids minus ``sum(burn_i)`` over
  fake bids it injected itself.

Omitted real bids are stored as bid 0 and flagged on the :class:`Setting`;
an omitted index contributes nothing to any utility.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, Iterable, Optional, Sequence, Tuple

from .errors import ContractError, MechanismError, OutcomeInvariantError
from .money import ZERO, format_money, format_money_list, normalize_grid, to_money

logger = logging.getLogger(__name__)

Bids = Tuple[Fraction, ...]


@dataclass(frozen=True)
class Outcome:
    """Result of running a mechanism on one bid vector."""

    confirmed: Tuple[bool, ...]
    pay: Tuple[Fraction, ...]
    burn: Tuple[Fraction, ...]

    def __post_init__(self):
        if not (len(self.confirmed) == len(self.pay) == len(self.burn)):
            raise MechanismError(
                "outcome vectors differ in length: "
                f"{len(self.confirmed)}/{len(self.pay)}/{len(self.burn)}"
            )
        object.__setattr__(self, "confirmed", tuple(bool(a) for a in self.confirmed))
        object.__setattr__(self, "pay", tuple(to_money(p) for p in self.pay))
        object.__setattr__(self, "burn", tuple(to_money(b) for b in self.burn))

    def __len__(self) -> int:
        return len(self.confirmed)

    @classmethod
    def nobody(cls, size: int) -> "Outcome":
        return cls((False,) * size, (ZERO,) * size, (ZERO,) * size)

    @property
    def winners(self) -> Tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.confirmed) if a)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "confirm": [int(a) for a in self.confirmed],
            "pay": format_money_list(self.pay),
            "burn": format_money_list(self.burn),
        }


def outcome_problems(bids: Sequence[Fraction], outcome: Outcome) -> Tuple[str, ...]:
    """Per-bid IR and burn-balance problems of a single outcome."""
    problems = []
    for i, bid in enumerate(bids):
        a, p, b = outcome.confirmed[i], outcome.pay[i], outcome.burn[i]
        if not a and p != 0:
            problems.append(f"bidder {i} unconfirmed but pays {format_money(p)}")
        if a and p > bid:
            problems.append(f"bidder {i} pays {format_money(p)} above bid {format_money(bid)}")
        if b > p:
            problems.append(f"bidder {i} burns {format_money(b)} above payment {format_money(p)}")
    return tuple(problems)


class Mechanism:
    """A deterministic transaction fee mechanism.

    ``rule`` receives a tuple of Fractions and returns an :class:`Outcome`
    of the same length. Results are memoized per bid vector; the memo is a
    plain dict, so concurrent readers at worst recompute an entry.

    Args:
        name: Registry or file name of the mechanism.
        rule: The allocation/payment/burn function.
        params: Parameter map, reported in metadata only.
        domain: Finite grid of admissible bids, or None for any rational.
        arity: Fixed number of bids the rule accepts, or None for any.
        debug: Check IR and burn-balance on every evaluation.
    """

    def __init__(
        self,
        name: str,
        rule: Callable[[Bids], Outcome],
        params: Optional[Dict[str, Any]] = None,
        domain: Optional[Iterable[Fraction]] = None,
        arity: Optional[int] = None,
        debug: bool = False,
    ):
        self.name = name
        self.params = dict(params or {})
        self.domain = normalize_grid(domain) if domain is not None else None
        self.arity = arity
        self.debug = debug
        self._rule = rule
        self._memo: Dict[Bids, Outcome] = {}

    def __repr__(self) -> str:
        return f"Mechanism({self.name!r}, params={self.params!r})"

    def accepts_length(self, length: int) -> bool:
        return length >= 1 and (self.arity is None or length == self.arity)

    def evaluate(self, bids: Sequence[Any]) -> Outcome:
        key = tuple(to_money(b) for b in bids)
        cached = self._memo.get(key)
        if cached is not None:
            return cached

        if not self.accepts_length(len(key)):
            raise MechanismError(
                f"{self.name} cannot evaluate {len(key)} bids (arity {self.arity})"
            )
        outcome = self._rule(key)
        if len(outcome) != len(key):
            raise MechanismError(
                f"{self.name} returned {len(outcome)} outcomes for {len(key)} bids"
            )
        if self.debug:
            problems = outcome_problems(key, outcome)
            if problems:
                raise OutcomeInvariantError(
                    f"{self.name} violates outcome invariants: {'; '.join(problems)}",
                    {"bids": format_money_list(key)},
                )
        self._memo[key] = outcome
        return outcome

    def describe(self) -> Dict[str, Any]:
        params = {
            k: format_money(v) if isinstance(v, (Fraction, int)) else v
            for k, v in sorted(self.params.items())
        }
        return {
            "name": self.name,
            "params": params,
            "domain": format_money_list(self.domain) if self.domain else "continuous",
        }


@dataclass(frozen=True)
class Setting:
    """A bid vector together with the true values of the real bidders.

    Indices ``0..n-1`` are real bidders (``n = len(values)``); any further
    indices are fake bids injected by the miner. ``omitted`` lists real
    bidders whose bid the miner dropped; their bid is stored as 0.
    """

    bids: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]
    omitted: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        bids = tuple(to_money(b) for b in self.bids)
        values = tuple(to_money(v) for v in self.values)
        omitted = frozenset(int(i) for i in self.omitted)
        if not bids:
            raise ContractError("a setting needs at least one bid")
        if len(values) > len(bids):
            raise ContractError(f"{len(values)} true values for only {len(bids)} bids")
        for i in omitted:
            if not 0 <= i < len(values):
                raise ContractError(f"omitted index {i} is not a real bidder")
            if bids[i] != 0:
                raise ContractError(f"omitted bidder {i} must carry bid 0")
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "omitted", omitted)

    @classmethod
    def honest(cls, bids: Sequence[Any]) -> "Setting":
        bids = tuple(to_money(b) for b in bids)
        return cls(bids, bids)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def fake_indices(self) -> range:
        return range(self.n, len(self.bids))

    @property
    def is_honest(self) -> bool:
        return not self.omitted and len(self.bids) == self.n and self.bids == self.values

    def with_bid(self, i: int, bid: Fraction) -> "Setting":
        bids = list(self.bids)
        bids[i] = to_money(bid)
        return Setting(tuple(bids), self.values, self.omitted)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bids": format_money_list(self.bids),
            "values": format_money_list(self.values),
            "omitted": sorted(self.omitted),
        }


def _check_index(s: Setting, i: int):
    if not 0 <= i < len(s.bids):
        raise ContractError(f"bidder index {i} out of range for {len(s.bids)} bids")


def bidder_utility(
    mech: Mechanism, s: Setting, i: int, value: Optional[Fraction] = None
) -> Fraction:
    """``value * a_i - p_i`` under ``mech.evaluate(s.bids)``.

    ``value`` defaults to the true value stored in ``s``.
    """
    _check_index(s, i)
    if i in s.omitted:
        return ZERO
    if value is None:
        if i >= s.n:
            raise ContractError(f"fake bid {i} has no true value")
        value = s.values[i]
    outcome = mech.evaluate(s.bids)
    return (value if outcome.confirmed[i] else ZERO) - outcome.pay[i]


def miner_utility(mech: Mechanism, s: Setting) -> Fraction:
    outcome = mech.evaluate(s.bids)
    total = ZERO
    for i in range(s.n):
        if i not in s.omitted:
            total += outcome.pay[i] - outcome.burn[i]
    for i in s.fake_indices:
        total -= outcome.burn[i]
    return total


def coalition_utility(
    mech: Mechanism, outcome_setting: Setting, value_setting: Setting, coalition: Iterable[int]
) -> Fraction:
    """Sum of coalition utilities under ``outcome_setting``'s bids, judged at
    ``value_setting``'s true values."""
    limit = min(outcome_setting.n, value_setting.n)
    total = ZERO
    for i in coalition:
        if not 0 <= i < limit:
            raise ContractError(f"coalition member {i} is not a real bidder of both settings")
        total += bidder_utility(mech, outcome_setting, i, value_setting.values[i])
    return total


def joint_utility(
    mech: Mechanism, outcome_setting: Setting, value_setting: Setting, coalition: Iterable[int]
) -> Fraction:
    return miner_utility(mech, outcome_setting) + coalition_utility(
        mech, outcome_setting, value_setting, coalition
    )
