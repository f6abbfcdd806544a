"""Side contracts between the miner and a coalition, and their witnesses."""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from .errors import ContractError, SchemaError, TfmError
from .mechanism import Mechanism, Setting, joint_utility
from .money import format_money, format_money_list, to_money


class MinerModel(str, Enum):
    """Passive miners only collude on bids; active miners may also omit
    real bids and inject fake ones."""

    PASSIVE = "passive"
    ACTIVE = "active"


@dataclass(frozen=True)
class SideContract:
    """A coordinated deviation from an honest setting.

    Use :meth:`build` to construct one from plain collections.
    """

    coalition: Tuple[int, ...]
    new_bids: Tuple[Tuple[int, Fraction], ...]
    omitted: Tuple[int, ...] = ()
    fakes: Tuple[Fraction, ...] = ()
    model: MinerModel = MinerModel.PASSIVE

    def __post_init__(self):
        members = set(self.coalition)
        if len(members) != len(self.coalition):
            raise ContractError(f"duplicate coalition members in {self.coalition}")
        for i, _ in self.new_bids:
            if i not in members:
                raise ContractError(f"new bid for bidder {i} outside the coalition")
        if self.model == MinerModel.PASSIVE and (self.omitted or self.fakes):
            raise ContractError("a passive contract cannot omit or inject bids")

    @classmethod
    def build(
        cls,
        coalition: Iterable[int],
        new_bids: Optional[Mapping[int, Any]] = None,
        omitted: Iterable[int] = (),
        fakes: Iterable[Any] = (),
        model: MinerModel = MinerModel.PASSIVE,
    ) -> "SideContract":
        bids = tuple(sorted((int(i), to_money(b)) for i, b in (new_bids or {}).items()))
        return cls(
            coalition=tuple(sorted(int(i) for i in coalition)),
            new_bids=bids,
            omitted=tuple(sorted(set(int(i) for i in omitted))),
            fakes=tuple(to_money(f) for f in fakes),
            model=MinerModel(model),
        )

    @property
    def order(self) -> int:
        return len(self.coalition)

    def new_bid_map(self) -> Dict[int, Fraction]:
        return dict(self.new_bids)

    def movers(self, setting_a: Setting) -> Tuple[int, ...]:
        """Coalition members whose bid actually changes."""
        return tuple(i for i, b in self.new_bids if setting_a.bids[i] != b)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coalition": list(self.coalition),
            "new_bids": {str(i): format_money(b) for i, b in self.new_bids},
            "omitted": list(self.omitted),
            "fakes": format_money_list(self.fakes),
            "model": self.model.value,
        }


def apply_contract(setting_a: Setting, contract: SideContract) -> Setting:
    """Setting B: coalition bids replaced, omitted bids zeroed and flagged,
    fakes appended."""
    for i in contract.coalition + contract.omitted:
        if not 0 <= i < setting_a.n:
            raise ContractError(
                f"contract references bidder {i} but the setting has {setting_a.n} real bidders"
            )
    bids = list(setting_a.bids[: setting_a.n])
    for i, b in contract.new_bids:
        bids[i] = b
    for i in contract.omitted:
        bids[i] = Fraction(0)
    bids.extend(contract.fakes)
    return Setting(tuple(bids), setting_a.values, frozenset(contract.omitted))


def joint_utility_delta(mech: Mechanism, setting_a: Setting, contract: SideContract) -> Fraction:
    """Joint miner + coalition gain of the contract, judged at A's values."""
    if not setting_a.is_honest:
        raise ContractError("the baseline setting must be honest (bids equal true values)")
    setting_b = apply_contract(setting_a, contract)
    before = joint_utility(mech, setting_a, setting_a, contract.coalition)
    after = joint_utility(mech, setting_b, setting_a, contract.coalition)
    return after - before


@dataclass(frozen=True)
class Witness:
    """A beneficial side contract together with its settings and gain."""

    contract: SideContract
    setting_a: Setting
    setting_b: Setting
    delta: Fraction

    @classmethod
    def from_contract(
        cls, mech: Mechanism, setting_a: Setting, contract: SideContract
    ) -> "Witness":
        setting_b = apply_contract(setting_a, contract)
        return cls(contract, setting_a, setting_b, joint_utility_delta(mech, setting_a, contract))

    @property
    def order(self) -> int:
        return self.contract.order

    @property
    def model(self) -> MinerModel:
        return self.contract.model

    def movers(self) -> Tuple[int, ...]:
        return self.contract.movers(self.setting_a)

    def to_dict(self) -> Dict[str, Any]:
        data = self.contract.to_dict()
        data.update(
            {
                "A": format_money_list(self.setting_a.bids),
                "B": format_money_list(self.setting_b.bids),
                "delta": format_money(self.delta),
            }
        )
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Witness":
        """Rebuild a witness from its JSON form.

        ``B`` is recomputed from the contract; the stored ``delta`` is kept
        as-is so that :func:`verify_witness` can judge it.
        """
        try:
            setting_a = Setting.honest(data["A"])
            contract = SideContract.build(
                coalition=data["coalition"],
                new_bids={int(k): v for k, v in dict(data.get("new_bids", {})).items()},
                omitted=data.get("omitted", ()),
                fakes=data.get("fakes", ()),
                model=MinerModel(data.get("model", "passive")),
            )
            delta = to_money(data["delta"], allow_negative=True)
        except KeyError as e:
            raise SchemaError(f"witness is missing field {e}")
        except (TypeError, ValueError, AttributeError, TfmError) as e:
            raise SchemaError(f"malformed witness: {e}")
        try:
            setting_b = apply_contract(setting_a, contract)
        except ContractError:
            setting_b = setting_a
        return cls(contract, setting_a, setting_b, delta)


def witness_problems(mech: Mechanism, witness: Witness) -> List[str]:
    """Structural and arithmetic problems of a witness; empty when valid."""
    problems: List[str] = []
    if not witness.setting_a.is_honest:
        problems.append("setting A is not honest")
        return problems
    try:
        setting_b = apply_contract(witness.setting_a, witness.contract)
    except ContractError as e:
        problems.append(f"structure: {e.message}")
        return problems
    if setting_b != witness.setting_b:
        problems.append("setting B does not match the contract applied to A")
    try:
        delta = joint_utility_delta(mech, witness.setting_a, witness.contract)
    except TfmError as e:
        problems.append(f"evaluation: {e.message}")
        return problems
    if delta != witness.delta:
        problems.append(
            f"recorded delta {format_money(witness.delta)} differs from recomputed "
            f"{format_money(delta)}"
        )
    if delta <= 0:
        problems.append(f"contract is not beneficial (delta {format_money(delta)})")
    return problems


def verify_witness(mech: Mechanism, witness: Witness) -> bool:
    return not witness_problems(mech, witness)
