"""Table-driven mechanisms over a finite value grid.

File format (JSON)::

    {
      "name": "...",
      "values": ["0/1", "1/1", ...],      # sorted ascending
      "n": 2,
      "table": [
        {"profile": [0, 1], "confirm": [0, 1], "pay": ["0/1", "1/1"], "burn": [...]},
        ...
      ]
    }

Profiles are index tuples into ``values`` and the table must be total.
"""

import itertools
import json
import logging
import random
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .axioms import (
    check_anonymity,
    check_burn_balance,
    check_consistent_tie_breaking,
    check_individual_rationality,
    check_prefix_confirmation,
)
from .errors import GenerationError, MoneyError, OutOfGridError, SchemaError
from .mechanism import Bids, Mechanism, Outcome
from .money import ZERO, format_money, format_money_list, normalize_grid, to_money

logger = logging.getLogger(__name__)

Profile = Tuple[int, ...]

AXIOMS: FrozenSet[str] = frozenset(
    {"IR", "BB", "anonymous", "prefix-confirmation", "consistent-tie-breaking"}
)


class TabulatedMechanism(Mechanism):
    """A mechanism given by an explicit outcome per grid profile."""

    def __init__(
        self,
        name: str,
        values: Sequence[Fraction],
        n: int,
        table: Mapping[Profile, Outcome],
        debug: bool = False,
    ):
        self.values = tuple(values)
        self.n = n
        self.table = dict(table)
        self._index = {v: k for k, v in enumerate(self.values)}
        super().__init__(name, self._lookup, {"n": n}, self.values, n, debug)

    def _lookup(self, bids: Bids) -> Outcome:
        try:
            profile = tuple(self._index[b] for b in bids)
        except KeyError:
            off = [format_money(b) for b in bids if b not in self._index]
            raise OutOfGridError(
                f"{self.name}: bids {', '.join(off)} are outside the value grid",
                {"values": format_money_list(self.values)},
            )
        return self.table[profile]

    def to_dict(self) -> Dict[str, Any]:
        rows = []
        for profile in sorted(self.table):
            row = {"profile": list(profile)}
            row.update(self.table[profile].to_dict())
            rows.append(row)
        return {
            "name": self.name,
            "values": format_money_list(self.values),
            "n": self.n,
            "table": rows,
        }


def tabulate(
    mech: Mechanism, grid: Sequence[Fraction], n: int, name: Optional[str] = None
) -> TabulatedMechanism:
    """Materialize ``mech`` on every profile of ``grid``."""
    values = normalize_grid(grid)
    table = {
        profile: mech.evaluate(tuple(values[k] for k in profile))
        for profile in itertools.product(range(len(values)), repeat=n)
    }
    return TabulatedMechanism(name or mech.name, values, n, table, mech.debug)


def save_tabulated(mech: Mechanism, grid: Sequence[Fraction], n: int, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = tabulate(mech, grid, n).to_dict()
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _money_row(row: Mapping[str, Any], key: str, n: int) -> Tuple[Fraction, ...]:
    items = row.get(key)
    if not isinstance(items, list) or len(items) != n:
        raise SchemaError(f"table row {row.get('profile')}: {key!r} must list {n} amounts")
    try:
        return tuple(to_money(x) for x in items)
    except MoneyError as e:
        raise SchemaError(f"table row {row.get('profile')}: {e.message}")


def tabulated_from_dict(data: Mapping[str, Any], name: Optional[str] = None) -> TabulatedMechanism:
    try:
        raw_values = data["values"]
        n = data["n"]
        rows = data["table"]
    except (KeyError, TypeError) as e:
        raise SchemaError(f"tabulated mechanism is missing field {e}")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError(f"'n' must be a positive integer, got {n!r}")
    try:
        values = tuple(to_money(v) for v in raw_values)
    except (MoneyError, TypeError) as e:
        raise SchemaError(f"bad value list: {e}")
    if not values or any(a >= b for a, b in zip(values, values[1:])):
        raise SchemaError("'values' must be non-empty and strictly ascending")

    k = len(values)
    table: Dict[Profile, Outcome] = {}
    for row in rows:
        profile = row.get("profile") if isinstance(row, dict) else None
        if (
            not isinstance(profile, list)
            or len(profile) != n
            or not all(isinstance(x, int) and 0 <= x < k for x in profile)
        ):
            raise SchemaError(f"bad profile {profile!r}")
        key = tuple(profile)
        if key in table:
            raise SchemaError(f"duplicate profile {profile}")
        confirm = row.get("confirm")
        if (
            not isinstance(confirm, list)
            or len(confirm) != n
            or any(c not in (0, 1) for c in confirm)
        ):
            raise SchemaError(f"table row {profile}: 'confirm' must list {n} bits")
        table[key] = Outcome(
            tuple(bool(c) for c in confirm),
            _money_row(row, "pay", n),
            _money_row(row, "burn", n),
        )

    if len(table) != k ** n:
        missing = next(p for p in itertools.product(range(k), repeat=n) if p not in table)
        raise SchemaError(
            f"non-total table: {k ** n - len(table)} profiles missing, first {list(missing)}"
        )
    return TabulatedMechanism(name or str(data.get("name", "tabulated")), values, n, table)


def load_tabulated(path: Path) -> TabulatedMechanism:
    path = Path(path)
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e})")
    return tabulated_from_dict(data, name=data.get("name") or path.stem)


def _ranking(bids: Sequence[Fraction]) -> List[int]:
    return sorted(range(len(bids)), key=lambda i: (-bids[i], i))


class _TableDraw:
    """One random draw of a table honoring the requested axioms by
    construction."""

    def __init__(
        self, rng: random.Random, grid: Tuple[Fraction, ...], n: int, axioms: FrozenSet[str]
    ):
        self.rng = rng
        self.grid = grid
        self.n = n
        self.axioms = axioms
        self.money = tuple(sorted(set(grid) | {ZERO}))
        self.threshold = rng.choice(grid)
        self.cap = rng.choice([None] + list(range(1, n + 1)))

    def confirmed_ranks(self, sorted_bids: Sequence[Fraction]) -> List[bool]:
        """Confirmation per rank of a descending bid list."""
        n = self.n
        if "consistent-tie-breaking" in self.axioms:
            # confirmation never depends on unconfirmed bids
            ranks = [b >= self.threshold for b in sorted_bids]
            if self.cap is not None:
                kept = 0
                for r in range(n):
                    if ranks[r]:
                        kept += 1
                        ranks[r] = kept <= self.cap
            return ranks
        if "prefix-confirmation" in self.axioms:
            length = self.rng.randint(0, n)
            return [r < length for r in range(n)]
        return [self.rng.random() < 0.5 for _ in range(n)]

    def amounts(self, bid: Fraction, confirmed: bool) -> Tuple[Fraction, Fraction]:
        if confirmed or "IR" not in self.axioms:
            if "IR" in self.axioms:
                pay = self.rng.choice([m for m in self.money if m <= bid])
            else:
                pay = self.rng.choice(self.money)
        else:
            pay = ZERO
        if "BB" in self.axioms:
            burn = self.rng.choice([m for m in self.money if m <= pay])
        else:
            burn = self.rng.choice(self.money)
        return pay, burn

    def outcome_by_rank(
        self, sorted_bids: Sequence[Fraction]
    ) -> List[Tuple[bool, Fraction, Fraction]]:
        confirmed = self.confirmed_ranks(sorted_bids)
        drawn: Dict[Tuple[Fraction, bool], Tuple[Fraction, Fraction]] = {}
        ranked = []
        for b, a in zip(sorted_bids, confirmed):
            if "anonymous" not in self.axioms or (b, a) not in drawn:
                drawn[(b, a)] = self.amounts(b, a)
            ranked.append((a,) + drawn[(b, a)])
        return ranked

    def table(self) -> Dict[Profile, Outcome]:
        k = len(self.grid)
        by_multiset: Dict[Tuple[Fraction, ...], List[Tuple[bool, Fraction, Fraction]]] = {}
        table: Dict[Profile, Outcome] = {}
        for profile in itertools.product(range(k), repeat=self.n):
            bids = tuple(self.grid[x] for x in profile)
            ranking = _ranking(bids)
            sorted_bids = tuple(bids[i] for i in ranking)
            if "anonymous" in self.axioms:
                if sorted_bids not in by_multiset:
                    by_multiset[sorted_bids] = self.outcome_by_rank(sorted_bids)
                ranked = by_multiset[sorted_bids]
            else:
                ranked = self.outcome_by_rank(sorted_bids)
            confirmed = [False] * self.n
            pays = [ZERO] * self.n
            burns = [ZERO] * self.n
            for rank, i in enumerate(ranking):
                confirmed[i], pays[i], burns[i] = ranked[rank]
            table[profile] = Outcome(tuple(confirmed), tuple(pays), tuple(burns))
        return table


def _passes(mech: Mechanism, grid: Sequence[Fraction], n: int, axioms: Iterable[str]) -> bool:
    checks = {
        "IR": check_individual_rationality,
        "BB": check_burn_balance,
        "anonymous": check_anonymity,
        "prefix-confirmation": check_prefix_confirmation,
        "consistent-tie-breaking": check_consistent_tie_breaking,
    }
    return all(checks[a](mech, grid, n).passed for a in sorted(axioms))


def random_tabulated(
    grid: Sequence[Any],
    n: int,
    seed: int,
    axioms: Iterable[str] = AXIOMS,
    max_retries: int = 20,
) -> TabulatedMechanism:
    """
    Draw a random tabulated mechanism satisfying ``axioms``.

    Confirmation sets follow the descending bid order; with consistent
    tie-breaking requested they come from a threshold rule with an optional
    cap, so an unconfirmed bid never influences who else is confirmed.
    Payments are drawn at or below the bid and burns at or below the
    payment; for anonymous draws equal bids with equal confirmation share
    one draw. Every draw is checked and redrawn on failure.

    Args:
        grid: Bid values.
        n: Number of bidders.
        seed: Seed; equal seeds give identical tables.
        axioms: Subset of :data:`AXIOMS`.
        max_retries: Number of draws before giving up.

    Raises:
        GenerationError: No draw passed the checks.
    """
    values = normalize_grid(grid)
    wanted = frozenset(axioms)
    unknown = wanted - AXIOMS
    if unknown:
        raise GenerationError(f"unknown axioms: {', '.join(sorted(unknown))}")

    rng = random.Random(seed)
    for attempt in range(max_retries):
        draw = _TableDraw(rng, values, n, wanted)
        mech = TabulatedMechanism(f"random-{seed}", values, n, draw.table())
        if _passes(mech, values, n, wanted):
            return mech
        logger.debug("random_tabulated seed %s: draw %d rejected", seed, attempt)
    raise GenerationError(
        f"no mechanism satisfying {sorted(wanted)} after {max_retries} draws (seed {seed})"
    )
