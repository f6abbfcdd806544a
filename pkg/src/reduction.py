"""Reduction of beneficial side contracts to contracts with at most two bidders.

The pipeline runs six stages, each producing a verified witness or a
:class:`StageFailure` that names the broken assumption:

1. ``activize``: fake bids become value-0 colluders and omissions are
   split off, leaving a passive contract or an omission-only one. An
   omission-only contract of more than two bidders goes to the fallback.
2. ``canonicalize``: new bids are reassigned so the coalition keeps its
   internal bid order.
3. ``decompose``: the contract becomes a path of single-bid moves (raisers
   that end confirmed, then all lowerers, then raisers that end
   unconfirmed).
4. ``isolate-mover``: one step of the path is itself beneficial.
5. ``localize``: the single mover's move is narrowed to the jump of the
   coalition value.
6. ``isolate-beneficiary``: the coalition shrinks to the mover plus the
   bidder gaining most.

For single-item mechanisms a two-bidder result can be shrunk once more to
a one-bidder active contract (``pair-to-single``).

When a stage fails the pipeline checks consistent tie-breaking on the
grid, then tries pair contracts around the decomposition steps and finally
the exhaustive two-party search.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .axioms import check_consistent_tie_breaking
from .contracts import MinerModel, SideContract, Witness, verify_witness, witness_problems
from .errors import (
    ConfigError,
    InternalConsistencyError,
    MechanismError,
    PreconditionError,
    StageFailure,
)
from .lemma_checks import bossy_move_witness
from .mechanism import (
    Mechanism,
    Setting,
    bidder_utility,
    coalition_utility,
    joint_utility,
    miner_utility,
)
from .money import ZERO, format_money, format_money_list, normalize_grid
from .search import SearchLimits, find_c_sc

logger = logging.getLogger(__name__)

DEFAULT_BISECT_ITERS = 64
EXPLAIN_MAX_MOVERS = 3

STAGES = (
    "activize",
    "canonicalize",
    "decompose",
    "isolate-mover",
    "localize",
    "isolate-beneficiary",
)


class LocalizeMode(str, Enum):
    GRID = "grid"
    BISECT = "bisect"


@dataclass
class StageRecord:
    stage: str
    status: str
    witness: Optional[Witness] = None
    notes: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stage": self.stage,
            "status": self.status,
            "witness": self.witness.to_dict() if self.witness else None,
            "notes": self.notes,
        }


@dataclass
class FailureDiagnostic:
    stage: str
    assumption: str
    message: str
    profile: Optional[List[str]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_failure(cls, failure: StageFailure) -> "FailureDiagnostic":
        return cls(
            failure.stage, failure.assumption, failure.message, failure.profile, failure.details
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stage": self.stage,
            "assumption": self.assumption,
            "message": self.message,
            "profile": self.profile,
            "details": self.details,
        }


@dataclass
class Decomposition:
    """A single-move path from a witness's A to its B.

    ``steps[0]`` is A and ``steps[-1]`` is B, all as honest settings;
    ``movers[k]`` is the move leading from ``steps[k]`` to ``steps[k + 1]``.
    """

    witness: Witness
    steps: List[Setting]
    movers: List[Tuple[int, Fraction, Fraction]]
    classes: Dict[str, Tuple[int, ...]]
    guarantee_violations: List[Dict[str, Any]] = field(default_factory=list)
    order_violations: List[Dict[str, Any]] = field(default_factory=list)
    side_conditions: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def coalition(self) -> Tuple[int, ...]:
        return self.witness.contract.coalition

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": [format_money_list(s.bids) for s in self.steps],
            "movers": [
                {"bidder": i, "from": format_money(old), "to": format_money(new)}
                for i, old, new in self.movers
            ],
            "classes": {k: list(v) for k, v in sorted(self.classes.items())},
            "guarantee_violations": self.guarantee_violations,
            "order_violations": self.order_violations,
            "side_conditions": self.side_conditions,
        }


@dataclass
class ReductionTrace:
    input: Witness
    stages: List[StageRecord] = field(default_factory=list)
    output: Optional[Witness] = None
    failure: Optional[FailureDiagnostic] = None
    produced_by: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.output is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input": self.input.to_dict(),
            "stages": [s.to_dict() for s in self.stages],
            "status": "reduced" if self.succeeded else "failed",
            "produced_by": self.produced_by,
            "output": self.output.to_dict() if self.output else None,
            "failure": self.failure.to_dict() if self.failure else None,
        }


def _require_verified(mech: Mechanism, witness: Witness, stage: str) -> Witness:
    problems = witness_problems(mech, witness)
    if problems:
        raise InternalConsistencyError(
            f"{stage} produced a witness that does not verify: {'; '.join(problems)}",
            witness.to_dict(),
        )
    return witness


def _bids_with(bids: Sequence[Fraction], i: int, bid: Fraction) -> Tuple[Fraction, ...]:
    return tuple(bids[:i]) + (bid,) + tuple(bids[i + 1 :])


def _full_new_bids(witness: Witness) -> Dict[int, Fraction]:
    """Coalition bids in B, including members that keep their A bid."""
    bids = witness.setting_a.bids
    chosen = witness.contract.new_bid_map()
    return {i: chosen.get(i, bids[i]) for i in witness.contract.coalition}


def activize_to_passive(mech: Mechanism, witness: Witness) -> Witness:
    """
    Remove miner actions from an active witness.

    Fake bids become coalition members of value 0 that bid the fake amount.
    With omissions left, X is A with the omissions applied. If the miner
    and coalition already gain from A to X, the smallest beneficial
    omission-only contract is returned: one bidder (largest gain first),
    the miner alone, a pair (largest joint gain first) and finally the
    whole coalition, which always verifies. Otherwise the passive contract
    from the honest version of X to B is returned.

    Raises:
        InternalConsistencyError: Neither branch verifies.
    """
    contract = witness.contract
    if contract.model == MinerModel.PASSIVE:
        return witness

    setting_a = witness.setting_a
    n = setting_a.n
    new_bids = _full_new_bids(witness)
    coalition = set(contract.coalition)
    base = setting_a.bids
    if contract.fakes:
        base = base + (ZERO,) * len(contract.fakes)
        for k, fake in enumerate(contract.fakes):
            coalition.add(n + k)
            new_bids[n + k] = fake
        logger.debug("activize: %d fake bids became value-0 colluders", len(contract.fakes))
    honest_a = Setting.honest(base)

    if not contract.omitted:
        passive = SideContract.build(coalition, new_bids)
        return _require_verified(mech, Witness.from_contract(mech, honest_a, passive), "activize")

    members = tuple(sorted(coalition))
    omit_only = SideContract.build(members, {}, contract.omitted, model=MinerModel.ACTIVE)
    x_setting = Witness.from_contract(mech, honest_a, omit_only).setting_b
    joint_a = joint_utility(mech, honest_a, honest_a, members)
    joint_x = joint_utility(mech, x_setting, honest_a, members)

    if joint_x > joint_a:
        gains = {
            i: bidder_utility(mech, x_setting, i, honest_a.values[i])
            - bidder_utility(mech, honest_a, i)
            for i in members
        }
        singles = [(i,) for i in sorted(members, key=lambda i: (-gains[i], i))]
        pairs = sorted(
            itertools.combinations(members, 2), key=lambda p: (-(gains[p[0]] + gains[p[1]]), p)
        )
        whole = [members] if len(members) > 2 else []
        for group in singles + [()] + pairs + whole:
            candidate = Witness.from_contract(
                mech,
                honest_a,
                SideContract.build(group, {}, contract.omitted, model=MinerModel.ACTIVE),
            )
            if verify_witness(mech, candidate):
                return candidate

    honest_x = Setting.honest(x_setting.bids)
    to_b = Witness.from_contract(mech, honest_x, SideContract.build(members, new_bids))
    if verify_witness(mech, to_b):
        return to_b

    joint_b = joint_utility(mech, witness.setting_b, setting_a, contract.coalition)
    raise InternalConsistencyError(
        "no branch of the omission split is beneficial",
        {
            "A_to_X": format_money(joint_x - joint_a),
            "X_to_B": format_money(joint_b - joint_x),
        },
    )


def coalition_inversions(
    setting_a: Setting, new_bids: Dict[int, Fraction]
) -> List[Tuple[int, int]]:
    """Pairs ``(i, j)`` with ``A_i > A_j`` but ``B_i < B_j``."""
    members = sorted(new_bids)
    return [
        (i, j)
        for i in members
        for j in members
        if setting_a.bids[i] > setting_a.bids[j] and new_bids[i] < new_bids[j]
    ]


def canonicalize(mech: Mechanism, witness: Witness) -> Witness:
    """
    Reassign new bids so the k-th highest A bid gets the k-th highest B bid.

    The reassigned witness is returned when it is at least as beneficial as
    the input. Otherwise the input is kept if it already has no strict
    inversion.

    Raises:
        StageFailure: The reassignment loses value and the input is not
            canonical.
    """
    setting_a = witness.setting_a
    new_bids = _full_new_bids(witness)
    ranked = sorted(new_bids, key=lambda i: (-setting_a.bids[i], i))
    sorted_bids = sorted(new_bids.values(), reverse=True)
    canonical = dict(zip(ranked, sorted_bids))

    candidate = Witness.from_contract(
        mech, setting_a, SideContract.build(witness.contract.coalition, canonical)
    )
    if candidate.delta >= witness.delta:
        return _require_verified(mech, candidate, "canonicalize")
    inversions = coalition_inversions(setting_a, new_bids)
    if not inversions:
        return witness
    raise StageFailure(
        "canonicalize",
        "prefix-confirmation",
        "sort-matched bids lose value and the coalition order is inverted",
        format_money_list(setting_a.bids),
        {
            "inversions": [list(p) for p in inversions],
            "delta": format_money(witness.delta),
            "canonical_delta": format_money(candidate.delta),
        },
    )


def salsa_decompose(mech: Mechanism, witness: Witness) -> Decomposition:
    """
    Split a passive canonical witness into single-bid moves.

    Raisers confirmed in B move first (highest A bid first), then every
    lowerer (lowest A bid first), then raisers unconfirmed in B (highest A
    bid first). The confirmation guarantees of the path, the coalition order
    at every step and the raise side condition are recorded, not enforced.
    """
    if witness.model != MinerModel.PASSIVE:
        raise PreconditionError("decomposition needs a passive witness")
    setting_a = witness.setting_a
    bids_a = setting_a.bids
    new_bids = _full_new_bids(witness)
    confirmed_b = mech.evaluate(witness.setting_b.bids).confirmed

    raisers = [i for i, b in new_bids.items() if b > bids_a[i]]
    lowerers = [i for i, b in new_bids.items() if b < bids_a[i]]
    classes = {
        "U_I": tuple(sorted(i for i in raisers if confirmed_b[i])),
        "U_O": tuple(sorted(i for i in raisers if not confirmed_b[i])),
        "D_I": tuple(sorted(i for i in lowerers if confirmed_b[i])),
        "D_O": tuple(sorted(i for i in lowerers if not confirmed_b[i])),
    }
    order = (
        sorted(classes["U_I"], key=lambda i: (-bids_a[i], i))
        + sorted(lowerers, key=lambda i: (bids_a[i], -i))
        + sorted(classes["U_O"], key=lambda i: (-bids_a[i], i))
    )

    steps = [Setting.honest(bids_a)]
    movers = []
    decomposition = Decomposition(witness, steps, movers, classes)
    members = sorted(new_bids)
    for k, i in enumerate(order):
        prev = steps[-1].bids
        nxt = _bids_with(prev, i, new_bids[i])
        steps.append(Setting.honest(nxt))
        movers.append((i, prev[i], nxt[i]))
        after = mech.evaluate(nxt)
        before = mech.evaluate(prev)

        if i in classes["U_O"] and after.confirmed[i]:
            decomposition.guarantee_violations.append(
                {
                    "step": k,
                    "bidder": i,
                    "expected": "unconfirmed",
                    "profile": format_money_list(nxt),
                }
            )
        if i in classes["D_I"] and not after.confirmed[i]:
            decomposition.guarantee_violations.append(
                {
                    "step": k,
                    "bidder": i,
                    "expected": "confirmed",
                    "profile": format_money_list(nxt),
                }
            )
        flipped = [
            [p, q]
            for p in members
            for q in members
            if prev[p] > prev[q] and nxt[p] < nxt[q]
        ]
        if flipped:
            decomposition.order_violations.append({"step": k, "pairs": flipped})
        if nxt[i] > prev[i] and not before.confirmed[i]:
            floor = [prev[j] for j in before.winners]
            if floor and nxt[i] >= min(floor):
                decomposition.side_conditions.append(
                    {
                        "step": k,
                        "bidder": i,
                        "new_bid": format_money(nxt[i]),
                        "lowest_confirmed": format_money(min(floor)),
                    }
                )

    if decomposition.guarantee_violations:
        logger.info(
            "decompose: %d confirmation guarantees broken", len(decomposition.guarantee_violations)
        )
    return decomposition


def _step_values(
    mech: Mechanism, prev: Setting, nxt: Setting, coalition: Sequence[int]
) -> Tuple[Fraction, Fraction]:
    before = miner_utility(mech, prev) + coalition_utility(mech, prev, prev, coalition)
    after = miner_utility(mech, nxt) + coalition_utility(mech, nxt, prev, coalition)
    return before, after


def telescoping_residual(mech: Mechanism, decomposition: Decomposition) -> Fraction:
    """
    Residual of the value bookkeeping that closes the single-mover argument.

    With ``i*`` the last mover and ``sigma`` the movers confirmed in B
    (``U_I`` and ``D_I``), the coalition's utility in B judged at A's values,
    minus the same utility judged at the setting just before ``i*`` moves,
    plus ``b'_i - b_i`` summed over ``sigma`` without ``i*``, is 0. Both
    utilities come from the mechanism's B outcome; the correction is bid
    arithmetic only.
    """
    if not decomposition.movers:
        return ZERO
    coalition = decomposition.coalition
    witness = decomposition.witness
    setting_b = witness.setting_b
    last = decomposition.movers[-1][0]
    sigma = set(decomposition.classes["U_I"]) | set(decomposition.classes["D_I"])

    at_a = coalition_utility(mech, setting_b, witness.setting_a, coalition)
    at_last = coalition_utility(mech, setting_b, decomposition.steps[-2], coalition)
    shift = sum(
        (setting_b.bids[i] - witness.setting_a.values[i] for i in sigma if i != last), ZERO
    )
    return at_a - at_last + shift


def _explain_orders(mech: Mechanism, decomposition: Decomposition) -> List[Dict[str, Any]]:
    """Step values along every ordering of the movers."""
    coalition = decomposition.coalition
    start = decomposition.steps[0].bids
    moves = {i: new for i, _, new in decomposition.movers}
    paths = []
    for order in itertools.permutations(sorted(moves)):
        bids = start
        steps = []
        for i in order:
            nxt = _bids_with(bids, i, moves[i])
            before, after = _step_values(mech, Setting.honest(bids), Setting.honest(nxt), coalition)
            steps.append(
                {
                    "mover": i,
                    "from": format_money_list(bids),
                    "to": format_money_list(nxt),
                    "before": format_money(before),
                    "after": format_money(after),
                }
            )
            bids = nxt
        paths.append({"order": list(order), "steps": steps})
    return paths


def isolate_single_mover(mech: Mechanism, decomposition: Decomposition) -> Witness:
    """
    First beneficial step of the decomposition, as a witness whose honest
    baseline is the setting before the step.

    Raises:
        StageFailure: No step is beneficial on its own.
        InternalConsistencyError: The telescoping identity does not hold.
    """
    residual = telescoping_residual(mech, decomposition)
    if residual != 0:
        raise InternalConsistencyError(
            "telescoping identity violated", {"residual": format_money(residual)}
        )
    if len(decomposition.movers) <= 1:
        return decomposition.witness

    coalition = decomposition.coalition
    values = []
    for k, (prev, nxt) in enumerate(zip(decomposition.steps, decomposition.steps[1:])):
        before, after = _step_values(mech, prev, nxt, coalition)
        values.append(
            {
                "step": k,
                "mover": decomposition.movers[k][0],
                "from": format_money_list(prev.bids),
                "to": format_money_list(nxt.bids),
                "before": format_money(before),
                "after": format_money(after),
            }
        )
        if after > before:
            contract = SideContract.build(coalition, {i: nxt.bids[i] for i in coalition})
            return _require_verified(
                mech, Witness.from_contract(mech, prev, contract), "isolate-mover"
            )

    details: Dict[str, Any] = {"steps": values}
    if len(decomposition.movers) <= EXPLAIN_MAX_MOVERS:
        details["orders"] = _explain_orders(mech, decomposition)
    raise StageFailure(
        "isolate-mover",
        "consistent-tie-breaking",
        "no single-move step of the decomposition is beneficial",
        format_money_list(decomposition.witness.setting_a.bids),
        details,
    )


def _single_mover(witness: Witness) -> int:
    movers = witness.movers()
    if len(movers) != 1:
        raise PreconditionError(f"expected a single mover, got {list(movers)}")
    return movers[0]


def _rebased(mech: Mechanism, witness: Witness, i: int, low: Fraction, high: Fraction) -> Witness:
    """Mover i honest at ``low`` moving to ``high``; everybody else as in A."""
    bids = _bids_with(witness.setting_a.bids, i, low)
    contract = SideContract.build(witness.contract.coalition, {i: high})
    return Witness.from_contract(mech, Setting.honest(bids), contract)


def _move_width(witness: Witness, i: int) -> Fraction:
    return abs(witness.contract.new_bid_map()[i] - witness.setting_a.bids[i])


def epsilon_bound(witness: Witness) -> Fraction:
    """``delta / (2|C| + 1)``: below this move width some member other than
    the mover gains at least twice the width."""
    return witness.delta / (2 * witness.order + 1)


def _jump_lead(
    mech: Mechanism, witness: Witness, i: int, brackets: Sequence[Tuple[Fraction, Fraction]]
) -> Dict[str, Any]:
    """Every bracket where g moves, with the first small contract found at one
    of them."""
    lead: Dict[str, Any] = {
        "brackets": [format_money_list(b) for b in brackets],
        "witness": None,
    }
    for x, y in brackets:
        candidate = _rebased(mech, witness, i, x, y)
        if not verify_witness(mech, candidate):
            continue
        found, _ = _beneficiary_pair(mech, candidate)
        if found is not None:
            lead["witness"] = found.to_dict()
            break
    logger.info("localize: g moves in %d brackets, small-collusion lead recorded", len(brackets))
    return lead


def localize_jump(
    mech: Mechanism,
    witness: Witness,
    mode: LocalizeMode = LocalizeMode.GRID,
    grid: Optional[Sequence[Fraction]] = None,
    max_iters: int = DEFAULT_BISECT_ITERS,
    budget: Optional[Fraction] = None,
) -> Tuple[Witness, Dict[str, Any]]:
    """
    Narrow a single mover's move to where the coalition value jumps.

    ``g(x)`` is the miner's utility plus the coalition's utility at A's
    values when the mover bids ``x``; the input's delta is ``g(b') - g(b)``.
    When g moves more than once along the move the notes carry a ``lead``:
    the brackets where it moves and, when one exists, a verified contract
    of at most two bidders at one of them.

    Args:
        mech: Mechanism.
        witness: Verified single-mover witness.
        mode: ``grid`` scans the grid points between the two bids;
            ``bisect`` halves the interval on exact rationals.
        grid: Grid for ``grid`` mode.
        max_iters: Bisection cap.
        budget: Bisection stops once the bracket is narrower than this.

    Returns:
        The narrowed witness (the input when no narrower one verifies) and
        notes with the bracket, its width and the number of jumps seen.
    """
    mode = LocalizeMode(mode)
    i = _single_mover(witness)
    setting_a = witness.setting_a
    coalition = witness.contract.coalition
    start = setting_a.bids[i]
    end = witness.contract.new_bid_map()[i]
    target = witness.delta

    def g(x: Fraction) -> Fraction:
        moved = Setting(_bids_with(setting_a.bids, i, x), setting_a.values)
        return joint_utility(mech, moved, setting_a, coalition)

    if mode == LocalizeMode.BISECT:
        if mech.domain is not None:
            raise ConfigError(f"bisect mode needs a mechanism defined off its grid ({mech.name})")
        lo, hi = start, end
        g_lo, g_hi = g(lo), g(hi)
        iters = 0
        split = None
        while iters < max_iters and (budget is None or abs(hi - lo) >= budget):
            mid = (lo + hi) / 2
            g_mid = g(mid)
            iters += 1
            if g_mid - g_lo >= target:
                hi, g_hi = mid, g_mid
            elif g_hi - g_mid >= target:
                lo, g_lo = mid, g_mid
            else:
                split = [(lo, mid), (mid, hi)]
                break
        notes: Dict[str, Any] = {
            "mode": mode.value,
            "bracket": format_money_list((lo, hi)),
            "epsilon": format_money(abs(hi - lo)),
            "iterations": iters,
            "split_jump": split is not None,
        }
        if split is not None:
            notes["lead"] = _jump_lead(mech, witness, i, split)
        candidate = _rebased(mech, witness, i, lo, hi)
        if (lo, hi) != (start, end) and verify_witness(mech, candidate):
            return candidate, notes
        return witness, notes

    if grid is None:
        raise PreconditionError("grid mode needs a grid")
    low, high = min(start, end), max(start, end)
    points = sorted({x for x in grid if low < x < high} | {start, end}, reverse=end < start)
    values = [g(x) for x in points]
    pairs = list(zip(points, points[1:]))
    moving = [p for p, (gx, gy) in zip(pairs, zip(values, values[1:])) if gx != gy]
    notes = {"mode": mode.value, "points": len(points), "jumps": len(moving)}
    if len(moving) > 1:
        notes["lead"] = _jump_lead(mech, witness, i, moving)

    preferred = [
        (x, y) for (x, y), (gx, gy) in zip(pairs, zip(values, values[1:])) if gy - gx >= target
    ]
    for x, y in preferred + [p for p in pairs if p not in preferred]:
        candidate = _rebased(mech, witness, i, x, y)
        if verify_witness(mech, candidate):
            notes["bracket"] = format_money_list((x, y))
            notes["epsilon"] = format_money(abs(y - x))
            return candidate, notes
    notes.update(
        {"bracket": format_money_list((start, end)), "epsilon": format_money(abs(end - start))}
    )
    return witness, notes


def coalition_gains(mech: Mechanism, witness: Witness) -> Dict[int, Fraction]:
    """``u_j(B; A) - u_j(A; A)`` for every coalition member."""
    setting_a, setting_b = witness.setting_a, witness.setting_b
    return {
        j: bidder_utility(mech, setting_b, j, setting_a.values[j])
        - bidder_utility(mech, setting_a, j)
        for j in witness.contract.coalition
    }


def _beneficiary_pair(
    mech: Mechanism, witness: Witness
) -> Tuple[Optional[Witness], Dict[int, Fraction]]:
    gains = coalition_gains(mech, witness)
    if witness.order <= 2:
        return witness, gains
    i = _single_mover(witness)
    others = sorted((j for j in gains if j != i), key=lambda j: (-gains[j], j))
    new_bid = {i: witness.contract.new_bid_map()[i]}
    for group in [(i, j) for j in others] + [(i,)]:
        candidate = Witness.from_contract(
            mech, witness.setting_a, SideContract.build(group, new_bid)
        )
        if verify_witness(mech, candidate):
            return candidate, gains
    return None, gains


def isolate_beneficiary(
    mech: Mechanism, witness: Witness, epsilon_budget: Optional[Fraction] = None
) -> Witness:
    """
    Shrink a single-mover coalition to the mover and one beneficiary.

    Candidates are tried by decreasing gain, lowest index first on ties;
    the mover alone is tried last. With ``epsilon_budget`` set, a move at
    least that wide is first narrowed again by bisection when the mechanism
    is defined off its grid; the wide move is searched when the narrow one
    yields nothing.

    Raises:
        StageFailure: No pair and not the mover alone is beneficial.
        InternalConsistencyError: No member gains from the move, so the
            mover alone should have been beneficial.
    """
    if witness.order <= 2:
        return witness
    i = _single_mover(witness)
    candidates = [witness]
    if epsilon_budget is not None and _move_width(witness, i) >= epsilon_budget:
        if mech.domain is None:
            narrowed, notes = localize_jump(
                mech, witness, LocalizeMode.BISECT, budget=epsilon_budget
            )
            logger.debug("isolate-beneficiary: move narrowed to %s", notes["bracket"])
            if narrowed != witness:
                candidates.insert(0, narrowed)
        else:
            logger.info(
                "isolate-beneficiary: move wider than %s on a grid mechanism",
                format_money(epsilon_budget),
            )

    gains: Dict[int, Fraction] = {}
    for candidate in candidates:
        found, gains = _beneficiary_pair(mech, candidate)
        if found is not None:
            return found
    details = {"gains": {str(j): format_money(g) for j, g in sorted(gains.items())}}
    if not any(g > 0 for g in gains.values()):
        raise InternalConsistencyError("no coalition member gains from the move", details)
    raise StageFailure(
        "isolate-beneficiary",
        "consistent-tie-breaking",
        "no coalition of the mover and one other bidder is beneficial",
        format_money_list(witness.setting_a.bids),
        details,
    )


def reduce_pair_to_single(mech: Mechanism, witness: Witness) -> Witness:
    """
    Turn a two-bidder, single-mover witness of a single-item mechanism into
    a one-bidder witness.

    A partner that is unconfirmed in B is dropped. A confirmed partner
    keeps the contract alone while the miner omits the mover's bid and
    injects it as a fake bid.

    Raises:
        PreconditionError: More than one confirmed bid or the wrong shape.
        StageFailure: The one-bidder contract is not beneficial.
    """
    if witness.order != 2:
        raise PreconditionError("expected a two-bidder witness")
    for setting in (witness.setting_a, witness.setting_b):
        if len(mech.evaluate(setting.bids).winners) > 1:
            raise PreconditionError("pair-to-single needs a single-item mechanism")
    i = _single_mover(witness)
    j = next(k for k in witness.contract.coalition if k != i)
    new_bid = witness.contract.new_bid_map()[i]

    if not mech.evaluate(witness.setting_b.bids).confirmed[j]:
        contract = SideContract.build({i}, {i: new_bid})
    else:
        contract = SideContract.build({j}, {}, {i}, [new_bid], MinerModel.ACTIVE)
    candidate = Witness.from_contract(mech, witness.setting_a, contract)
    if verify_witness(mech, candidate):
        return candidate
    raise StageFailure(
        "pair-to-single",
        "single-item",
        "the one-bidder contract is not beneficial",
        format_money_list(witness.setting_a.bids),
        {"delta": format_money(candidate.delta)},
    )


def derived_grid(mech: Mechanism, witness: Witness) -> Tuple[Fraction, ...]:
    """The mechanism's domain, or 0 together with every bid in the witness."""
    if mech.domain is not None:
        return mech.domain
    return normalize_grid(
        (ZERO,) + witness.setting_a.bids + witness.setting_b.bids[: witness.setting_a.n]
    )


def _run_stage(trace: ReductionTrace, name: str, work: Callable[[], Any]) -> Any:
    try:
        result = work()
    except StageFailure as failure:
        trace.stages.append(StageRecord(name, "failed", notes={"failure": failure.message}))
        raise
    except MechanismError as e:
        trace.stages.append(StageRecord(name, "failed", notes={"failure": e.message}))
        raise StageFailure(name, "mechanism-domain", e.message, details=e.details)
    witness = result[0] if isinstance(result, tuple) else result
    notes = result[1] if isinstance(result, tuple) else {}
    if isinstance(witness, Decomposition):
        trace.stages.append(StageRecord(name, "ok", notes=witness.to_dict()))
    else:
        trace.stages.append(StageRecord(name, "ok", witness, notes))
    logger.debug("reduce: stage %s ok", name)
    return result


def _fallback(
    mech: Mechanism,
    trace: ReductionTrace,
    failure: StageFailure,
    decomposition: Optional[Decomposition],
    grid: Sequence[Fraction],
    model: MinerModel,
    limits: SearchLimits,
    workers: int,
) -> None:
    n = trace.input.setting_a.n
    ctb = check_consistent_tie_breaking(mech, grid, n, workers)
    trace.stages.append(
        StageRecord("tie-breaking-check", ctb.status, notes={"violation": ctb.violation})
    )
    if not ctb.passed:
        trace.failure = FailureDiagnostic(
            failure.stage,
            "consistent-tie-breaking",
            f"{failure.message}; the mechanism breaks ties inconsistently",
            ctb.violation.get("profile") if ctb.violation else None,
            {
                "stage_failure": failure.message,
                "stage_details": failure.details,
                "violation": ctb.violation,
            },
        )
        return

    if decomposition is not None:
        for prev, nxt, (i, _, _) in zip(
            decomposition.steps, decomposition.steps[1:], decomposition.movers
        ):
            local = bossy_move_witness(mech, prev.bids, nxt.bids, i)
            if local is not None:
                trace.stages.append(StageRecord("local-pairs", "ok", local))
                trace.output = local
                trace.produced_by = "local-pairs"
                return
        trace.stages.append(StageRecord("local-pairs", "none"))

    result = find_c_sc(mech, grid, n, 2, model, limits, workers)
    trace.stages.append(StageRecord("exhaustive-2sc", result.verdict.value, result.witness))
    if result.witness is not None:
        trace.output = result.witness
        trace.produced_by = "exhaustive-2sc"
        return
    trace.failure = FailureDiagnostic.from_failure(failure)
    trace.failure.details = dict(failure.details, exhaustive_2sc=result.verdict.value)


def _pair_to_single(mech: Mechanism, trace: ReductionTrace, witness: Witness) -> Witness:
    try:
        return _run_stage(trace, "pair-to-single", lambda: reduce_pair_to_single(mech, witness))
    except StageFailure:
        return witness
    except PreconditionError as e:
        trace.stages.append(StageRecord("pair-to-single", "skipped", notes={"reason": e.message}))
        return witness


def reduce_to_2sc(
    mech: Mechanism,
    witness: Witness,
    mode: LocalizeMode = LocalizeMode.GRID,
    grid: Optional[Sequence[Fraction]] = None,
    max_iters: int = DEFAULT_BISECT_ITERS,
    limits: SearchLimits = SearchLimits(),
    workers: int = 1,
    single_item: bool = False,
) -> ReductionTrace:
    """
    Reduce a beneficial contract of any order to one with at most two bidders.

    Args:
        mech: Mechanism the witness refutes.
        witness: Verified witness, passive or active.
        mode: Localization mode.
        grid: Grid for localization and fallback; defaults to the
            mechanism's domain or to 0 plus the witness's bids.
        max_iters: Bisection cap.
        limits: Limits for the exhaustive fallback search.
        workers: Thread count for the fallback checks.
        single_item: Also turn a two-bidder pipeline result into a
            one-bidder contract when the mechanism confirms at most one bid.

    Raises:
        PreconditionError: The input witness does not verify.
    """
    problems = witness_problems(mech, witness)
    if problems:
        raise PreconditionError(f"input witness does not verify: {'; '.join(problems)}")
    grid = normalize_grid(grid) if grid is not None else derived_grid(mech, witness)
    trace = ReductionTrace(witness)
    decomposition: Optional[Decomposition] = None
    logger.info("reduce: %d-party %s witness on %s", witness.order, witness.model.value, mech.name)

    try:
        current = _run_stage(trace, "activize", lambda: activize_to_passive(mech, witness))
        if current.model == MinerModel.ACTIVE:
            if current.order > 2:
                raise StageFailure(
                    "activize",
                    "omission-split",
                    "only the whole coalition gains from the omissions",
                    format_money_list(current.setting_a.bids),
                    {"order": current.order, "omitted": list(current.contract.omitted)},
                )
            trace.output = current
            trace.produced_by = "activize"
            return trace
        current = _run_stage(trace, "canonicalize", lambda: canonicalize(mech, current))
        decomposition = _run_stage(trace, "decompose", lambda: salsa_decompose(mech, current))
        current = _run_stage(
            trace, "isolate-mover", lambda: isolate_single_mover(mech, decomposition)
        )
        current, _ = _run_stage(
            trace,
            "localize",
            lambda: localize_jump(mech, current, mode, grid, max_iters, epsilon_bound(current)),
        )
        current = _run_stage(
            trace,
            "isolate-beneficiary",
            lambda: isolate_beneficiary(mech, current, epsilon_bound(current)),
        )
    except StageFailure as failure:
        logger.info("reduce: stage %s failed (%s)", failure.stage, failure.message)
        _fallback(mech, trace, failure, decomposition, grid, witness.model, limits, workers)
        if trace.output is not None:
            _require_verified(mech, trace.output, trace.produced_by or "fallback")
        return trace

    if current.order > 2:
        raise InternalConsistencyError(
            f"pipeline ended with a {current.order}-party witness", current.to_dict()
        )
    if single_item and current.order == 2:
        current = _pair_to_single(mech, trace, current)
    trace.output = current
    trace.produced_by = "pipeline"
    return trace
