"""Tests for Boolean circuits, circuit auctions and the tautology reduction."""

from fractions import Fraction

import pytest

from src.circuits import (
    BoolCircuit,
    CircuitAuction,
    CircuitBuilder,
    Gate,
    all_circuits,
    bits_per_value,
    bits_to_int,
    circuit_auction_to_mechanism,
    decide_2scpdp,
    eval_circuit,
    int_to_bits,
    is_tautology_bruteforce,
    random_circuit,
    tabulated_to_circuit_auction,
    tautology_to_scpdp,
    truth_table_circuit,
)
from src.errors import CircuitError, PreconditionError, SchemaError
from src.money import normalize_grid
from src.tabulated import tabulate
from src.zoo import first_price_burned_reserve


def _identity_circuit() -> BoolCircuit:
    builder = CircuitBuilder(1)
    return builder.build([builder.input(0)])


def _xor_circuit() -> BoolCircuit:
    builder = CircuitBuilder(2)
    a, b = builder.input(0), builder.input(1)
    either = builder.or_(a, b)
    both = builder.and_(a, b)
    return builder.build([builder.and_(either, builder.not_(both))])


def test_eval_xor():
    circuit = _xor_circuit()
    table = {bits: eval_circuit(circuit, bits)[0] for bits in [(0, 0), (0, 1), (1, 0), (1, 1)]}
    assert table == {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0}


def test_eval_checks_input_width():
    with pytest.raises(CircuitError):
        eval_circuit(_xor_circuit(), [1])


def test_builder_shares_inputs_and_negations():
    builder = CircuitBuilder(1)
    assert builder.input(0) == builder.input(0)
    ref = builder.input(0)
    assert builder.not_(ref) == builder.not_(ref)
    assert len(builder.gates) == 2


@pytest.mark.parametrize(
    "gates, outputs",
    [
        ([Gate("INPUT", (1,))], [0]),
        ([Gate("NOT", (0,))], [0]),
        ([Gate("CONST1"), Gate("AND", ())], [1]),
        ([Gate("XOR", (0,))], [0]),
        ([Gate("CONST0")], [3]),
    ],
)
def test_malformed_circuits_are_rejected(gates, outputs):
    with pytest.raises(CircuitError):
        BoolCircuit(1, tuple(gates), tuple(outputs))


def test_from_dict_maps_missing_fields_to_schema_error():
    with pytest.raises(SchemaError):
        BoolCircuit.from_dict({"inputs": 1, "outputs": [0]})
    with pytest.raises(SchemaError):
        BoolCircuit.from_dict({"inputs": "two", "gates": [], "outputs": []})


def test_from_dict_reads_lowercase_ops():
    circuit = BoolCircuit.from_dict(
        {
            "inputs": 1,
            "gates": [{"op": "input", "args": [0]}, {"op": "not", "args": [0]}],
            "outputs": [1],
        }
    )
    assert eval_circuit(circuit, [0]) == (1,)


@pytest.mark.parametrize("k, width", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3)])
def test_bits_per_value(k, width):
    assert bits_per_value(k) == width


def test_bit_encoding_is_big_endian():
    assert int_to_bits(5, 3) == [1, 0, 1]
    assert int_to_bits(1, 3) == [0, 0, 1]
    assert bits_to_int([1, 1, 0]) == 6


def test_truth_table_circuit():
    circuit = truth_table_circuit(2, 0b1000)
    outputs = [eval_circuit(circuit, bits)[0] for bits in [(0, 0), (0, 1), (1, 0), (1, 1)]]
    assert outputs == [0, 0, 0, 1]


def test_all_circuits_covers_every_function():
    assert len(list(all_circuits(1))) == 2 + 4
    assert len(list(all_circuits(2))) == 2 + 4 + 16


def test_random_circuit_is_seeded():
    assert random_circuit(3, 6, 11) == random_circuit(3, 6, 11)
    assert len(random_circuit(3, 6, 11).outputs) == 1


def test_tabulated_round_trip_through_circuits():
    grid = normalize_grid([0, 1, 2])
    table = tabulate(first_price_burned_reserve(1), grid, 2)
    auction = tabulated_to_circuit_auction(table)
    assert auction.width == 2
    assert circuit_auction_to_mechanism(auction).table == table.table


def test_auction_rejects_wrong_circuit_shapes():
    with pytest.raises(CircuitError):
        CircuitAuction((Fraction(0), Fraction(1)), 1, (_xor_circuit(),), (), ())


def test_auction_from_dict_reports_bad_values():
    with pytest.raises(SchemaError):
        CircuitAuction.from_dict({"values": ["x"], "n": 1, "confirm": [], "pay": [], "burn": []})


def test_tautology_gives_a_collusion_proof_auction():
    builder = CircuitBuilder(1)
    ref = builder.input(0)
    tautology = builder.build([builder.or_(ref, builder.not_(ref))])
    assert is_tautology_bruteforce(tautology)
    auction = tautology_to_scpdp(tautology)
    assert auction.n == 3
    result = decide_2scpdp(auction)
    assert result.answer
    assert result.witness is None
    assert result.to_dict()["answer"] == "yes"


def test_falsifiable_circuit_gives_swap_witness():
    circuit = _identity_circuit()
    assert not is_tautology_bruteforce(circuit)
    result = decide_2scpdp(tautology_to_scpdp(circuit))
    assert not result.answer
    data = result.witness.to_dict()
    assert data["A"] == ["0/1", "1/1", "0/1"]
    assert data["coalition"] == [0, 1]
    assert data["new_bids"] == {"0": "1/1", "1": "0/1"}
    assert data["delta"] == "1/1"


@pytest.mark.parametrize("table", range(4))
def test_reduction_agrees_with_brute_force(table):
    circuit = truth_table_circuit(1, table)
    result = decide_2scpdp(tautology_to_scpdp(circuit))
    assert result.answer == is_tautology_bruteforce(circuit)


def test_tautology_reduction_needs_one_output():
    builder = CircuitBuilder(1)
    ref = builder.input(0)
    with pytest.raises(CircuitError):
        tautology_to_scpdp(builder.build([ref, ref]))


def test_brute_force_bound():
    builder = CircuitBuilder(21)
    with pytest.raises(CircuitError):
        is_tautology_bruteforce(builder.build([builder.const(1)]))


def test_decision_requires_individual_rationality():
    builder = CircuitBuilder(1)
    never = builder.build([builder.const(0)])
    builder = CircuitBuilder(1)
    always = builder.build([builder.const(1)])
    auction = CircuitAuction((Fraction(0), Fraction(1)), 1, (never,), (always,), (never,))
    with pytest.raises(PreconditionError):
        decide_2scpdp(auction)
