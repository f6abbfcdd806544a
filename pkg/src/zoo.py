"""Concrete mechanisms used as oracles and search targets.

All single-item rules break ties towards the lowest index. Payments in the
fully burned mechanisms are burned in full, so the miner earns nothing
from them.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .contracts import SideContract, Witness
from .errors import ConfigError, MechanismError
from .mechanism import Bids, Mechanism, Outcome, Setting
from .money import ZERO, MoneyLike, to_money

SALSA_LOSING_FLOOR = Fraction(8)
SALSA_HIGH_BID = Fraction(10)
SALSA_PRICE = Fraction(13, 2)
DISCOUNT_BLOCK = 10


def _ranking(bids: Bids) -> List[int]:
    """Indices by descending bid, lowest index first among ties."""
    return sorted(range(len(bids)), key=lambda i: (-bids[i], i))


def _single_winner(size: int, winner: int, pay: Fraction, burn: Fraction) -> Outcome:
    confirmed = [False] * size
    pays = [ZERO] * size
    burns = [ZERO] * size
    confirmed[winner] = True
    pays[winner] = pay
    burns[winner] = burn
    return Outcome(tuple(confirmed), tuple(pays), tuple(burns))


def first_price_burned_reserve(
    r: MoneyLike, payment: Optional[Callable[[Fraction], Fraction]] = None, name: str = ""
) -> Mechanism:
    """Highest bid at or above ``r`` wins and pays its bid; ``r`` is burned.

    ``payment`` replaces the pay-as-bid rule with ``f(winning bid)``; it must
    return a value between ``r`` and the bid.
    """
    reserve = to_money(r)

    def rule(bids: Bids) -> Outcome:
        top = max(bids)
        if top < reserve:
            return Outcome.nobody(len(bids))
        winner = bids.index(top)
        pay = top if payment is None else to_money(payment(top))
        if not reserve <= pay <= top:
            raise MechanismError(f"payment rule returned {pay} for winning bid {top}")
        return _single_winner(len(bids), winner, pay, reserve)

    return Mechanism(name or "first-price-burned-reserve", rule, {"r": reserve})


def first_price_shaded_payment(r: MoneyLike, shading: MoneyLike = Fraction(1, 2)) -> Mechanism:
    """First price with burned reserve whose winner pays ``bid - shading``.

    The payment is floored at ``r``: the reserve is burned in full, so a
    winner bidding less than ``r + shading`` would otherwise burn more than
    it pays. Above that floor the rule is exactly ``bid - shading``.
    """
    reserve = to_money(r)
    shade = to_money(shading)
    mech = first_price_burned_reserve(
        reserve, lambda bid: max(reserve, bid - shade), name="first-price-shaded-payment"
    )
    mech.params["shading"] = shade
    return mech


def fully_burned_posted_price(r: MoneyLike) -> Mechanism:
    """Every bid at or above ``r`` is confirmed and pays ``r``, all burned."""
    price = to_money(r)

    def rule(bids: Bids) -> Outcome:
        confirmed = tuple(b >= price for b in bids)
        pays = tuple(price if a else ZERO for a in confirmed)
        return Outcome(confirmed, pays, pays)

    return Mechanism("fully-burned-posted-price", rule, {"r": price})


def fully_burned_second_price() -> Mechanism:
    """Highest bid wins and pays the second highest bid (0 when alone)."""

    def rule(bids: Bids) -> Outcome:
        ranking = _ranking(bids)
        pay = bids[ranking[1]] if len(bids) > 1 else ZERO
        return _single_winner(len(bids), ranking[0], pay, pay)

    return Mechanism("fully-burned-second-price", rule)


def discount_auction(r: MoneyLike, block: int = DISCOUNT_BLOCK) -> Mechanism:
    """
    Threshold auction with a volume discount.

    The threshold is ``f(t) = r`` for ``t <= block`` and ``r/2`` above it.
    ``t*`` is the largest ``t`` such that at least ``t`` bids strictly exceed
    ``f(t)``; the ``t*`` highest bids are confirmed and each pays ``f(t*)``,
    fully burned.
    """
    price = to_money(r)
    if price <= 0:
        raise MechanismError("discount auction needs a positive reserve")

    def threshold(t: int) -> Fraction:
        return price if t <= block else price / 2

    def rule(bids: Bids) -> Outcome:
        size = len(bids)
        t_star = 0
        for t in range(1, size + 1):
            if sum(1 for b in bids if b > threshold(t)) >= t:
                t_star = t
        if t_star == 0:
            return Outcome.nobody(size)
        winners = set(_ranking(bids)[:t_star])
        pay = threshold(t_star)
        confirmed = tuple(i in winners for i in range(size))
        pays = tuple(pay if a else ZERO for a in confirmed)
        return Outcome(confirmed, pays, pays)

    return Mechanism("discount-auction", rule, {"r": price, "block": block})


def salsa_counterexample() -> Mechanism:
    """
    A mechanism built to defeat single-move decompositions.

    Nobody is confirmed unless the second highest bid is at least 8. Then,
    if the highest bid is at least 10, every bid of 8 or more is confirmed
    and pays 13/2; otherwise only the highest bid is confirmed and pays its
    bid. Payments are burned in full.
    """

    def rule(bids: Bids) -> Outcome:
        size = len(bids)
        ranking = _ranking(bids)
        if size < 2 or bids[ranking[1]] < SALSA_LOSING_FLOOR:
            return Outcome.nobody(size)
        top = ranking[0]
        if bids[top] >= SALSA_HIGH_BID:
            confirmed = tuple(b >= SALSA_LOSING_FLOOR for b in bids)
            pays = tuple(SALSA_PRICE if a else ZERO for a in confirmed)
            return Outcome(confirmed, pays, pays)
        return _single_winner(size, top, bids[top], bids[top])

    return Mechanism("salsa-counterexample", rule)


def crowding_out_auction() -> Mechanism:
    """Highest bid is confirmed only while the second highest bid is 0; it
    pays its bid, burned in full. Raising a losing bid can unconfirm the
    winner."""

    def rule(bids: Bids) -> Outcome:
        ranking = _ranking(bids)
        if len(bids) > 1 and bids[ranking[1]] > 0:
            return Outcome.nobody(len(bids))
        top = ranking[0]
        return _single_winner(len(bids), top, bids[top], bids[top])

    return Mechanism("crowding-out-auction", rule)


def surge_threshold_auction() -> Mechanism:
    """Every bid at or above the threshold is confirmed and pays its bid,
    burned in full. The threshold is 2 once some bid reaches 2 and 1
    otherwise, so lowering the top bid can confirm losing bids."""

    def rule(bids: Bids) -> Outcome:
        threshold = Fraction(2) if max(bids) >= 2 else Fraction(1)
        confirmed = tuple(b >= threshold for b in bids)
        pays = tuple(b if a else ZERO for a, b in zip(confirmed, bids))
        return Outcome(confirmed, pays, pays)

    return Mechanism("surge-threshold-auction", rule)


def discount_auction_witness(r: MoneyLike, eps: MoneyLike) -> Witness:
    """Eleven-bidder collusion against :func:`discount_auction`.

    Ten bidders value the item at ``2r`` and one at ``r/2 - eps``. The low
    bidder raises its bid by ``2 eps``, which unlocks the discount for
    everybody; bidder 0 saves ``r/2`` while the low bidder loses ``eps``.
    """
    price = to_money(r)
    step = to_money(eps)
    if not 0 < step < price / 2:
        raise MechanismError("eps must lie strictly between 0 and r/2")
    low = DISCOUNT_BLOCK
    bids = (2 * price,) * DISCOUNT_BLOCK + (price / 2 - step,)
    contract = SideContract.build({0, low}, {low: price / 2 + step})
    return Witness.from_contract(discount_auction(price), Setting.honest(bids), contract)


@dataclass(frozen=True)
class ExpectedProperty:
    holds: bool
    provenance: str


@dataclass
class ZooEntry:
    """A registry entry: factory, parameter defaults and expected properties."""

    name: str
    factory: Callable[..., Mechanism]
    description: str
    params: Dict[str, Fraction] = field(default_factory=dict)
    expected: Dict[str, ExpectedProperty] = field(default_factory=dict)

    def build(self, overrides: Optional[Mapping[str, MoneyLike]] = None) -> Mechanism:
        params = dict(self.params)
        for key, value in (overrides or {}).items():
            if key not in params:
                raise ConfigError(f"{self.name} has no parameter {key!r}")
            params[key] = to_money(value)
        return self.factory(**params)


def _props(claims: Mapping[str, Tuple[bool, str]]) -> Dict[str, ExpectedProperty]:
    return {key: ExpectedProperty(*value) for key, value in claims.items()}


_SINGLE_ITEM = "single-item characterization: first price with burned reserve"
_POSTED = "fully burned posted price theorem"
_SECOND = "second price: 1-SCP with passive miner but not with active miner"
_GRID = "derived: exhaustive grid check"

ZOO: Dict[str, ZooEntry] = {
    entry.name: entry
    for entry in [
        ZooEntry(
            "first-price-burned-reserve",
            first_price_burned_reserve,
            "highest bid >= r wins, pays its bid, r burned",
            {"r": Fraction(1)},
            _props(
                {
                    "IR": (True, _SINGLE_ITEM),
                    "BB": (True, _SINGLE_ITEM),
                    "anonymous": (True, _GRID),
                    "consistent-tie-breaking": (True, _GRID),
                    "1-SCP-passive": (True, _SINGLE_ITEM),
                    "1-SCP-active": (True, _SINGLE_ITEM),
                    "2-SCP": (True, _SINGLE_ITEM),
                    "SCP": (True, _SINGLE_ITEM),
                    "UIC": (False, _GRID),
                }
            ),
        ),
        ZooEntry(
            "first-price-shaded-payment",
            first_price_shaded_payment,
            "first price with burned reserve, winner pays max(r, bid - shading)",
            {"r": Fraction(1), "shading": Fraction(1, 2)},
            _props(
                {
                    "IR": (True, _GRID),
                    "BB": (True, _GRID),
                    "1-SCP-passive": (False, _SINGLE_ITEM),
                }
            ),
        ),
        ZooEntry(
            "fully-burned-posted-price",
            fully_burned_posted_price,
            "every bid >= r confirmed, pays r, all burned",
            {"r": Fraction(1)},
            _props(
                {
                    "IR": (True, _POSTED),
                    "BB": (True, _POSTED),
                    "anonymous": (True, _POSTED),
                    "consistent-tie-breaking": (True, _GRID),
                    "1-SCP-passive": (True, _POSTED),
                    "1-SCP-active": (True, _POSTED),
                    "2-SCP": (True, _POSTED),
                    "SCP": (True, _POSTED),
                    "UIC": (True, _POSTED),
                }
            ),
        ),
        ZooEntry(
            "fully-burned-second-price",
            fully_burned_second_price,
            "highest bid wins, pays the second highest bid, all burned",
            {},
            _props(
                {
                    "IR": (True, _SECOND),
                    "BB": (True, _SECOND),
                    "anonymous": (True, _GRID),
                    "1-SCP-passive": (True, _SECOND),
                    "1-SCP-active": (False, _SECOND),
                    "2-SCP": (False, _GRID),
                    "UIC": (True, _SECOND),
                }
            ),
        ),
        ZooEntry(
            "discount-auction",
            discount_auction,
            "threshold r, halved once more than ten bids clear it, all burned",
            {"r": Fraction(2)},
            _props({"IR": (True, _GRID), "BB": (True, _GRID), "anonymous": (True, _GRID)}),
        ),
        ZooEntry(
            "salsa-counterexample",
            salsa_counterexample,
            "confirms only when a losing bid reaches 8; 13/2 each once a bid reaches 10",
            {},
            _props(
                {
                    "IR": (True, _GRID),
                    "BB": (True, _GRID),
                    "anonymous": (True, _GRID),
                    "consistent-tie-breaking": (False, "built to violate consistent tie-breaking"),
                    "1-SCP-passive": (False, _GRID),
                    "2-SCP": (False, _GRID),
                    "non-bossiness": (True, _GRID),
                    "increase-monotonicity": (True, _GRID),
                    "decrease-monotonicity": (True, _GRID),
                }
            ),
        ),
        ZooEntry(
            "crowding-out-auction",
            crowding_out_auction,
            "highest bid wins only while the second highest bid is 0, pays its bid, burned",
            {},
            _props(
                {
                    "IR": (True, _GRID),
                    "BB": (True, _GRID),
                    "increase-monotonicity": (False, "raising a losing bid unconfirms the winner"),
                }
            ),
        ),
        ZooEntry(
            "surge-threshold-auction",
            surge_threshold_auction,
            "bids >= 2 confirmed once some bid reaches 2, else bids >= 1; pay as bid, burned",
            {},
            _props(
                {
                    "IR": (True, _GRID),
                    "BB": (True, _GRID),
                    "decrease-monotonicity": (False, "lowering the top bid confirms losing bids"),
                }
            ),
        ),
    ]
}


def get_entry(name: str) -> ZooEntry:
    try:
        return ZOO[name]
    except KeyError:
        raise ConfigError(f"unknown mechanism {name!r}; known: {', '.join(sorted(ZOO))}")


def build_mechanism(name: str, params: Optional[Mapping[str, MoneyLike]] = None) -> Mechanism:
    return get_entry(name).build(params)


def zoo_names() -> Sequence[str]:
    return sorted(ZOO)
