"""Exhaustive side-contract search on finite bid grids.

Honest settings are enumerated as grid index tuples in lexicographic order.
For each setting the contracts are enumerated by coalition (sorted tuples,
smaller subsets first among equal prefixes), then new-bid indices, then
omitted bidders and finally fake-bid multisets. The first beneficial
contract in that order is the reported witness.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from .contracts import MinerModel, SideContract, Witness, witness_problems
from .errors import InternalConsistencyError
from .mechanism import Mechanism, Setting
from .money import ZERO, format_money_list, normalize_grid
from .workers import first_hit

logger = logging.getLogger(__name__)

Profile = Tuple[int, ...]


class Verdict(str, Enum):
    HOLDS = "holds"
    REFUTED = "refuted"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class SearchLimits:
    """Bounds on the active-miner enumeration.

    ``max_omissions`` and ``max_contracts`` are unbounded when None. The
    contract budget applies per honest setting.
    """

    max_fakes: int = 2
    max_omissions: Optional[int] = None
    max_contracts: Optional[int] = None

    @classmethod
    def from_config(cls, config: Any) -> "SearchLimits":
        return cls(
            max_fakes=config.max_fakes,
            max_omissions=config.max_omissions or None,
            max_contracts=config.max_contracts or None,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_fakes": self.max_fakes,
            "max_omissions": self.max_omissions,
            "max_contracts": self.max_contracts,
        }


@dataclass
class SearchResult:
    verdict: Verdict
    witness: Optional[Witness]
    settings: int
    truncated_at: Optional[Tuple[Fraction, ...]] = None

    @property
    def found(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.verdict.value,
            "settings": self.settings,
            "witness": self.witness.to_dict() if self.witness else None,
            "truncated_at": format_money_list(self.truncated_at) if self.truncated_at else None,
        }


class _Truncated:
    def __init__(self, bids: Tuple[Fraction, ...]):
        self.bids = bids


def coalitions(n: int, c: int) -> List[Tuple[int, ...]]:
    """All coalitions of size at most ``c`` as sorted tuples, in order."""
    found = []
    for size in range(min(c, n) + 1):
        found.extend(itertools.combinations(range(n), size))
    return sorted(found)


def _subsets(items: Sequence[int], limit: Optional[int]) -> List[Tuple[int, ...]]:
    top = len(items) if limit is None else min(limit, len(items))
    found = []
    for size in range(top + 1):
        found.extend(itertools.combinations(items, size))
    return sorted(found)


def enumerate_contracts(
    mech: Mechanism,
    grid: Sequence[Fraction],
    bids: Sequence[Fraction],
    c: int,
    model: MinerModel,
    limits: SearchLimits,
) -> Iterator[SideContract]:
    """Contracts of order at most ``c`` against the honest setting ``bids``.

    Omissions only touch non-coalition bidders with a positive bid and need
    0 inside the mechanism's domain; fake bids are grid multisets and only
    offered when the mechanism accepts the longer bid vector.
    """
    n = len(bids)
    k = len(grid)
    zero_allowed = mech.domain is None or ZERO in mech.domain
    fake_counts = [0]
    if model == MinerModel.ACTIVE:
        fake_counts += [f for f in range(1, limits.max_fakes + 1) if mech.accepts_length(n + f)]
    for coalition in coalitions(n, c):
        for picks in itertools.product(range(k), repeat=len(coalition)):
            new_bids = {i: grid[x] for i, x in zip(coalition, picks)}
            if model == MinerModel.PASSIVE:
                yield SideContract.build(coalition, new_bids)
                continue
            outsiders = [
                i for i in range(n) if zero_allowed and i not in coalition and bids[i] > 0
            ]
            for omitted in _subsets(outsiders, limits.max_omissions):
                for f in fake_counts:
                    for fakes in itertools.combinations_with_replacement(range(k), f):
                        yield SideContract.build(
                            coalition,
                            new_bids,
                            omitted,
                            [grid[x] for x in fakes],
                            MinerModel.ACTIVE,
                        )


def contract_delta(mech: Mechanism, bids: Sequence[Fraction], contract: SideContract) -> Fraction:
    """Joint gain of ``contract`` against the honest setting ``bids``.

    Same quantity as :func:`contracts.joint_utility_delta`, computed on raw
    outcomes for the search loop.
    """
    n = len(bids)
    members = contract.coalition
    out_a = mech.evaluate(bids)
    before = sum((out_a.pay[i] - out_a.burn[i] for i in range(n)), ZERO)
    before += sum(
        ((bids[i] if out_a.confirmed[i] else ZERO) - out_a.pay[i] for i in members), ZERO
    )

    after_bids = list(bids)
    for i, b in contract.new_bids:
        after_bids[i] = b
    for i in contract.omitted:
        after_bids[i] = ZERO
    after_bids.extend(contract.fakes)
    out_b = mech.evaluate(tuple(after_bids))
    omitted = set(contract.omitted)
    after = sum(
        (out_b.pay[i] - out_b.burn[i] for i in range(n) if i not in omitted), ZERO
    ) - sum((out_b.burn[i] for i in range(n, len(after_bids))), ZERO)
    after += sum(
        ((bids[i] if out_b.confirmed[i] else ZERO) - out_b.pay[i] for i in members), ZERO
    )
    return after - before


def search_setting(
    mech: Mechanism,
    grid: Sequence[Fraction],
    bids: Sequence[Fraction],
    c: int,
    model: MinerModel = MinerModel.PASSIVE,
    limits: SearchLimits = SearchLimits(),
) -> Any:
    """First beneficial contract against one honest setting.

    Returns a verified :class:`Witness`, None when the enumeration finished
    without a hit, or a truncation marker when the contract budget ran out.
    """
    bids = tuple(bids)
    for count, contract in enumerate(enumerate_contracts(mech, grid, bids, c, model, limits)):
        if limits.max_contracts is not None and count >= limits.max_contracts:
            logger.info("contract budget exhausted at %s", format_money_list(bids))
            return _Truncated(bids)
        if contract_delta(mech, bids, contract) > 0:
            witness = Witness.from_contract(mech, Setting.honest(bids), contract)
            problems = witness_problems(mech, witness)
            if problems:
                raise InternalConsistencyError(
                    "search produced a witness that does not verify: " + "; ".join(problems),
                    witness.to_dict(),
                )
            return witness
    return None


def find_c_sc(
    mech: Mechanism,
    grid: Sequence[Any],
    n: int,
    c: int,
    model: MinerModel = MinerModel.PASSIVE,
    limits: SearchLimits = SearchLimits(),
    workers: int = 1,
    profiles: Optional[Sequence[Sequence[Fraction]]] = None,
) -> SearchResult:
    """
    Search for a beneficial side contract of order at most ``c``.

    Args:
        mech: Mechanism under test.
        grid: Bid values for honest settings, new bids and fakes.
        n: Number of real bidders.
        c: Largest coalition size.
        model: Passive or active miner.
        limits: Enumeration bounds.
        workers: Thread count; the result does not depend on it.
        profiles: Honest bid vectors to search instead of all of ``grid^n``.

    Returns:
        A :class:`SearchResult`. The earliest honest setting that either
        yields a witness or exhausts the contract budget decides the verdict.
    """
    values = normalize_grid(grid)
    model = MinerModel(model)
    if profiles is None:
        settings = [
            tuple(values[x] for x in p) for p in itertools.product(range(len(values)), repeat=n)
        ]
    else:
        settings = [tuple(p) for p in profiles]
    logger.debug(
        "find_c_sc %s: %d settings, c=%d, model=%s, workers=%d",
        mech.name,
        len(settings),
        c,
        model.value,
        workers,
    )

    def scan(chunk):
        for bids in chunk:
            hit = search_setting(mech, values, bids, c, model, limits)
            if hit is not None:
                return hit
        return None

    hit = first_hit(settings, scan, workers)
    if hit is None:
        return SearchResult(Verdict.HOLDS, None, len(settings))
    if isinstance(hit, _Truncated):
        return SearchResult(Verdict.TRUNCATED, None, len(settings), hit.bids)
    logger.info(
        "%s: %d-party witness at %s", mech.name, hit.order, format_money_list(hit.setting_a.bids)
    )
    return SearchResult(Verdict.REFUTED, hit, len(settings))


def is_c_scp_on_grid(
    mech: Mechanism,
    grid: Sequence[Any],
    n: int,
    c: int,
    model: MinerModel = MinerModel.PASSIVE,
    limits: SearchLimits = SearchLimits(),
    workers: int = 1,
) -> SearchResult:
    """Tri-state c-SCP verdict; ``holds`` certifies the grid only."""
    return find_c_sc(mech, grid, n, c, model, limits, workers)
