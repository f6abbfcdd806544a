"""Boolean circuits and circuit-represented auctions.

A circuit is a topologically ordered gate list; gate ``k`` may only read
gates ``< k``. Gate ops are ``AND``/``OR`` (one or more operands), ``NOT``
(one operand), ``CONST0``/``CONST1`` and ``INPUT`` (one input index).

Circuit file (JSON)::

    {"inputs": 2,
     "gates": [{"op": "INPUT", "args": [0]}, {"op": "NOT", "args": [0]}, ...],
     "outputs": [5]}

A circuit auction over values ``v^1 < ... < v^k`` feeds every circuit the
bit encodings of all bids: ``w = max(1, ceil(log2 k))`` bits per bidder,
bidder ``i`` at positions ``[i*w, (i+1)*w)``, most significant bit first.
Confirmation circuits have one output; pay and burn circuits have ``w``
outputs encoding an index into the value list.
"""

import itertools
import json
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .axioms import check_burn_balance, check_individual_rationality
from .contracts import MinerModel, Witness
from .errors import CircuitError, MoneyError, PreconditionError, SchemaError
from .mechanism import Outcome
from .money import ZERO, format_money_list, to_money
from .search import SearchLimits, Verdict, find_c_sc
from .tabulated import TabulatedMechanism

logger = logging.getLogger(__name__)

BRUTEFORCE_MAX_INPUTS = 20

OPS = ("AND", "OR", "NOT", "CONST0", "CONST1", "INPUT")


@dataclass(frozen=True)
class Gate:
    op: str
    args: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {"op": self.op, "args": list(self.args)}


@dataclass(frozen=True)
class BoolCircuit:
    inputs: int
    gates: Tuple[Gate, ...]
    outputs: Tuple[int, ...]

    def __post_init__(self):
        if self.inputs < 0:
            raise CircuitError(f"negative input count {self.inputs}")
        for k, gate in enumerate(self.gates):
            if gate.op not in OPS:
                raise CircuitError(f"gate {k}: unknown op {gate.op!r}")
            if gate.op == "INPUT":
                if len(gate.args) != 1 or not 0 <= gate.args[0] < self.inputs:
                    raise CircuitError(f"gate {k}: INPUT index must lie in [0, {self.inputs})")
                continue
            if gate.op in ("CONST0", "CONST1") and gate.args:
                raise CircuitError(f"gate {k}: constants take no operands")
            if gate.op == "NOT" and len(gate.args) != 1:
                raise CircuitError(f"gate {k}: NOT takes one operand")
            if gate.op in ("AND", "OR") and not gate.args:
                raise CircuitError(f"gate {k}: {gate.op} needs operands")
            for a in gate.args:
                if not 0 <= a < k:
                    raise CircuitError(f"gate {k} reads gate {a}, which does not precede it")
        for out in self.outputs:
            if not 0 <= out < len(self.gates):
                raise CircuitError(f"output refers to missing gate {out}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "inputs": self.inputs,
            "gates": [g.to_dict() for g in self.gates],
            "outputs": list(self.outputs),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BoolCircuit":
        try:
            gates = tuple(
                Gate(str(g["op"]).upper(), tuple(int(a) for a in g.get("args", ())))
                for g in data["gates"]
            )
            return cls(int(data["inputs"]), gates, tuple(int(o) for o in data["outputs"]))
        except KeyError as e:
            raise SchemaError(f"circuit is missing field {e}")
        except (TypeError, ValueError, AttributeError) as e:
            raise SchemaError(f"malformed circuit: {e}")


def eval_circuit(circuit: BoolCircuit, bits: Sequence[int]) -> Tuple[int, ...]:
    """Evaluate gate by gate and return the output bits."""
    if len(bits) != circuit.inputs:
        raise CircuitError(f"circuit takes {circuit.inputs} input bits, got {len(bits)}")
    values: List[int] = []
    for gate in circuit.gates:
        if gate.op == "INPUT":
            values.append(1 if bits[gate.args[0]] else 0)
        elif gate.op == "CONST0":
            values.append(0)
        elif gate.op == "CONST1":
            values.append(1)
        elif gate.op == "NOT":
            values.append(1 - values[gate.args[0]])
        elif gate.op == "AND":
            values.append(int(all(values[a] for a in gate.args)))
        else:
            values.append(int(any(values[a] for a in gate.args)))
    return tuple(values[o] for o in circuit.outputs)


class CircuitBuilder:
    """Appends gates and shares input, constant and negation gates."""

    def __init__(self, inputs: int):
        self.inputs = inputs
        self.gates: List[Gate] = []
        self._shared: Dict[Gate, int] = {}

    def _add(self, gate: Gate, share: bool = False) -> int:
        if share and gate in self._shared:
            return self._shared[gate]
        self.gates.append(gate)
        ref = len(self.gates) - 1
        if share:
            self._shared[gate] = ref
        return ref

    def input(self, i: int) -> int:
        return self._add(Gate("INPUT", (i,)), share=True)

    def const(self, bit: int) -> int:
        return self._add(Gate("CONST1" if bit else "CONST0"), share=True)

    def not_(self, a: int) -> int:
        return self._add(Gate("NOT", (a,)), share=True)

    def and_(self, *args: int) -> int:
        return self._add(Gate("AND", tuple(args))) if args else self.const(1)

    def or_(self, *args: int) -> int:
        return self._add(Gate("OR", tuple(args))) if args else self.const(0)

    def literal(self, i: int, positive: bool) -> int:
        ref = self.input(i)
        return ref if positive else self.not_(ref)

    def embed(self, circuit: BoolCircuit, wiring: Sequence[int]) -> List[int]:
        """Copy ``circuit`` with its input ``k`` wired to gate ``wiring[k]``;
        returns the references of its outputs."""
        refs: List[int] = []
        for gate in circuit.gates:
            if gate.op == "INPUT":
                refs.append(wiring[gate.args[0]])
            elif gate.op in ("CONST0", "CONST1"):
                refs.append(self.const(1 if gate.op == "CONST1" else 0))
            elif gate.op == "NOT":
                refs.append(self.not_(refs[gate.args[0]]))
            else:
                refs.append(self._add(Gate(gate.op, tuple(refs[a] for a in gate.args))))
        return [refs[o] for o in circuit.outputs]

    def build(self, outputs: Sequence[int]) -> BoolCircuit:
        return BoolCircuit(self.inputs, tuple(self.gates), tuple(outputs))


def bits_per_value(k: int) -> int:
    return max(1, (k - 1).bit_length())


def int_to_bits(v: int, width: int) -> List[int]:
    return [(v >> (width - 1 - i)) & 1 for i in range(width)]


def bits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def encode_profile(profile: Sequence[int], width: int) -> List[int]:
    bits: List[int] = []
    for x in profile:
        bits.extend(int_to_bits(x, width))
    return bits


def minterm_circuit(
    inputs: int, true_rows: Sequence[Sequence[int]], outputs: int = 1
) -> BoolCircuit:
    """Sum-of-minterms circuit; ``true_rows[o]`` lists the input rows
    (as integers, first input most significant) where output ``o`` is 1."""
    builder = CircuitBuilder(inputs)
    refs = []
    for o in range(outputs):
        terms = []
        for row in sorted(true_rows[o]):
            bits = int_to_bits(row, inputs)
            terms.append(builder.and_(*(builder.literal(i, b == 1) for i, b in enumerate(bits))))
        refs.append(builder.or_(*terms))
    return builder.build(refs)


@dataclass(frozen=True)
class CircuitAuction:
    values: Tuple[Fraction, ...]
    n: int
    confirm: Tuple[BoolCircuit, ...]
    pay: Tuple[BoolCircuit, ...]
    burn: Tuple[BoolCircuit, ...]

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.values, self.values[1:])) or not self.values:
            raise CircuitError("auction values must be non-empty and strictly ascending")
        width = self.width
        for kind, circuits, outs in (
            ("confirm", self.confirm, 1),
            ("pay", self.pay, width),
            ("burn", self.burn, width),
        ):
            if len(circuits) != self.n:
                raise CircuitError(f"{kind}: expected {self.n} circuits, got {len(circuits)}")
            for i, c in enumerate(circuits):
                if c.inputs != self.n * width or len(c.outputs) != outs:
                    raise CircuitError(
                        f"{kind} circuit {i} must map {self.n * width} bits to {outs} bits"
                    )

    @property
    def width(self) -> int:
        return bits_per_value(len(self.values))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "values": format_money_list(self.values),
            "n": self.n,
            "confirm": [c.to_dict() for c in self.confirm],
            "pay": [c.to_dict() for c in self.pay],
            "burn": [c.to_dict() for c in self.burn],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CircuitAuction":
        try:
            values = tuple(to_money(v) for v in data["values"])
            return cls(
                values,
                int(data["n"]),
                tuple(BoolCircuit.from_dict(c) for c in data["confirm"]),
                tuple(BoolCircuit.from_dict(c) for c in data["pay"]),
                tuple(BoolCircuit.from_dict(c) for c in data["burn"]),
            )
        except KeyError as e:
            raise SchemaError(f"circuit auction is missing field {e}")
        except (TypeError, ValueError, AttributeError, MoneyError) as e:
            raise SchemaError(f"malformed circuit auction: {e}")


def load_json(path: Path) -> Any:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e})")


def circuit_auction_to_mechanism(
    auction: CircuitAuction, name: str = "circuit-auction"
) -> TabulatedMechanism:
    """Evaluate every circuit on every encoded profile of the value grid."""
    k = len(auction.values)
    width = auction.width
    table = {}
    for profile in itertools.product(range(k), repeat=auction.n):
        bits = encode_profile(profile, width)
        confirmed, pays, burns = [], [], []
        for i in range(auction.n):
            confirmed.append(bool(eval_circuit(auction.confirm[i], bits)[0]))
            for kind, circuits, sink in (("pay", auction.pay, pays), ("burn", auction.burn, burns)):
                index = bits_to_int(eval_circuit(circuits[i], bits))
                if index >= k:
                    raise CircuitError(
                        f"{kind} circuit {i} decodes to index {index} on profile {list(profile)}"
                    )
                sink.append(auction.values[index])
        table[profile] = Outcome(tuple(confirmed), tuple(pays), tuple(burns))
    return TabulatedMechanism(name, auction.values, auction.n, table)


def tabulated_to_circuit_auction(mech: TabulatedMechanism) -> CircuitAuction:
    """Lookup-table circuits reproducing ``mech`` on its grid.

    Every payment and burn must itself be one of the mechanism's values.
    """
    values = mech.values
    index = {v: x for x, v in enumerate(values)}
    width = bits_per_value(len(values))
    inputs = mech.n * width
    confirm_rows: List[List[int]] = [[] for _ in range(mech.n)]
    pay_rows = [[[] for _ in range(width)] for _ in range(mech.n)]
    burn_rows = [[[] for _ in range(width)] for _ in range(mech.n)]

    for profile, outcome in sorted(mech.table.items()):
        row = bits_to_int(encode_profile(profile, width))
        for i in range(mech.n):
            if outcome.confirmed[i]:
                confirm_rows[i].append(row)
            for amount, rows in ((outcome.pay[i], pay_rows[i]), (outcome.burn[i], burn_rows[i])):
                if amount not in index:
                    raise CircuitError(
                        f"amount {amount} at profile {list(profile)} is not one of the values"
                    )
                for b, bit in enumerate(int_to_bits(index[amount], width)):
                    if bit:
                        rows[b].append(row)

    return CircuitAuction(
        values,
        mech.n,
        tuple(minterm_circuit(inputs, [confirm_rows[i]]) for i in range(mech.n)),
        tuple(minterm_circuit(inputs, pay_rows[i], width) for i in range(mech.n)),
        tuple(minterm_circuit(inputs, burn_rows[i], width) for i in range(mech.n)),
    )


@dataclass
class ScpdpResult:
    answer: bool
    witness: Optional[Witness]
    model: MinerModel

    def to_dict(self) -> Dict[str, Any]:
        return {
            "answer": "yes" if self.answer else "no",
            "model": self.model.value,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def decide_2scpdp(
    auction: CircuitAuction, passive: bool = False, workers: int = 1
) -> ScpdpResult:
    """
    Decide whether a circuit auction resists every two-bidder side contract.

    The active model allows the miner to omit bids; fake bids do not apply
    to the fixed bidder count.

    Raises:
        PreconditionError: The auction is not individually rational or not
            burn-balanced.
    """
    mech = circuit_auction_to_mechanism(auction)
    for report in (
        check_individual_rationality(mech, mech.values, mech.n, workers),
        check_burn_balance(mech, mech.values, mech.n, workers),
    ):
        if not report.passed:
            raise PreconditionError(
                f"circuit auction fails {report.check}", {"violation": report.violation}
            )
    model = MinerModel.PASSIVE if passive else MinerModel.ACTIVE
    result = find_c_sc(mech, mech.values, mech.n, 2, model, SearchLimits(max_fakes=0), workers)
    if result.verdict == Verdict.TRUNCATED:
        raise PreconditionError("two-party search was truncated")
    return ScpdpResult(result.verdict == Verdict.HOLDS, result.witness, model)


def tautology_to_scpdp(circuit: BoolCircuit) -> CircuitAuction:
    """
    Auction over values {0, 1} that is 2-SCP iff ``circuit`` is a tautology.

    With bidder bits ``s1, s2, q_1..q_m`` and ``C = circuit(q)``:

    * bidder 1 is confirmed on ``(1, 0)`` iff C, on ``(0, 1)`` iff not C,
      always on ``(1, 1)`` and never on ``(0, 0)``;
    * bidder 2 is confirmed on ``(1, 0)`` iff not C and on ``(0, 1)`` iff C;
    * bidder ``j > 2`` is confirmed iff ``s1 = s2 = 0`` and ``q_{j-2}`` is
      the first set q bit.

    A confirmed bidder pays its bid and nothing is burned, so a tautology
    yields a first-price auction, while a falsifying ``q`` lets bidders 1
    and 2 gain by swapping bids.
    """
    if len(circuit.outputs) != 1:
        raise CircuitError("tautology reduction needs a single-output circuit")
    m = circuit.inputs
    n = m + 2

    def confirm_gates(builder: CircuitBuilder) -> List[int]:
        s1, s2 = builder.input(0), builder.input(1)
        ns1, ns2 = builder.not_(s1), builder.not_(s2)
        c_q = builder.embed(circuit, [builder.input(2 + k) for k in range(m)])[0]
        nc_q = builder.not_(c_q)
        gates = [
            builder.or_(
                builder.and_(s1, ns2, c_q), builder.and_(ns1, s2, nc_q), builder.and_(s1, s2)
            ),
            builder.or_(builder.and_(s1, ns2, nc_q), builder.and_(ns1, s2, c_q)),
        ]
        for j in range(m):
            earlier = [builder.not_(builder.input(2 + k)) for k in range(j)]
            gates.append(builder.and_(builder.input(2 + j), ns1, ns2, *earlier))
        return gates

    confirm, pay, burn = [], [], []
    for i in range(n):
        builder = CircuitBuilder(n)
        own = confirm_gates(builder)[i]
        confirm.append(builder.build([own]))

        builder = CircuitBuilder(n)
        own = confirm_gates(builder)[i]
        pay.append(builder.build([builder.and_(own, builder.input(i))]))

        builder = CircuitBuilder(n)
        burn.append(builder.build([builder.const(0)]))

    logger.debug("tautology reduction: %d inputs -> %d bidders", m, n)
    return CircuitAuction((ZERO, Fraction(1)), n, tuple(confirm), tuple(pay), tuple(burn))


def is_tautology_bruteforce(circuit: BoolCircuit) -> bool:
    if circuit.inputs > BRUTEFORCE_MAX_INPUTS:
        raise CircuitError(
            f"{circuit.inputs} inputs exceed the enumeration bound of {BRUTEFORCE_MAX_INPUTS}"
        )
    return all(
        all(eval_circuit(circuit, bits))
        for bits in itertools.product((0, 1), repeat=circuit.inputs)
    )


def truth_table_circuit(inputs: int, table: int) -> BoolCircuit:
    """Circuit whose output on row ``r`` is bit ``r`` of ``table``."""
    rows = [r for r in range(2 ** inputs) if (table >> r) & 1]
    return minterm_circuit(inputs, [rows])


def all_circuits(max_inputs: int) -> Iterator[BoolCircuit]:
    """One lookup-table circuit per Boolean function on up to ``max_inputs``
    inputs."""
    for inputs in range(max_inputs + 1):
        for table in range(2 ** (2 ** inputs)):
            yield truth_table_circuit(inputs, table)


def random_circuit(inputs: int, gates: int, seed: int) -> BoolCircuit:
    """Random single-output AND/OR/NOT circuit; equal seeds give equal circuits."""
    rng = random.Random(seed)
    builder = CircuitBuilder(inputs)
    pool = [builder.input(i) for i in range(inputs)] or [builder.const(rng.randint(0, 1))]
    for _ in range(gates):
        op = rng.choice(("AND", "OR", "NOT"))
        if op == "NOT":
            pool.append(builder.not_(rng.choice(pool)))
        else:
            picks = rng.sample(pool, min(len(pool), 2)) if len(pool) > 1 else pool * 2
            pool.append(builder.and_(*picks) if op == "AND" else builder.or_(*picks))
    return builder.build([pool[-1]])
