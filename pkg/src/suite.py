"""Acceptance battery behind ``tfm suite``.

Every check returns a :class:`CheckResult` whose ``detail`` is plain data,
so two runs with the same seed produce identical reports whatever the
worker count.
"""

import logging
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from .axioms import check_uic
from .circuits import (
    all_circuits,
    decide_2scpdp,
    is_tautology_bruteforce,
    random_circuit,
    tautology_to_scpdp,
)
from .contracts import MinerModel, SideContract, Witness, verify_witness
from .errors import GenerationError, MechanismError, StageFailure
from .lemma_checks import Direction, check_monotonicity, check_nonbossiness
from .mechanism import Mechanism, Setting, joint_utility
from .money import format_money, format_money_list, normalize_grid
from .reduction import (
    ReductionTrace,
    activize_to_passive,
    canonicalize,
    reduce_to_2sc,
    salsa_decompose,
    telescoping_residual,
)
from .report import dumps_report
from .search import SearchLimits, Verdict, find_c_sc
from .tabulated import random_tabulated
from .workers import map_ordered
from .zoo import (
    crowding_out_auction,
    discount_auction,
    discount_auction_witness,
    first_price_burned_reserve,
    first_price_shaded_payment,
    fully_burned_posted_price,
    fully_burned_second_price,
    salsa_counterexample,
    surge_threshold_auction,
)

logger = logging.getLogger(__name__)

# Grids spanning each reserve, with a bidder pair whose shaded payment is
# undercut by a lower bid.
SINGLE_ITEM_GRIDS: Dict[int, Tuple[Fraction, ...]] = {
    0: normalize_grid(["0", "1/2", "1", "5/4", "2"]),
    1: normalize_grid(["0", "1", "3/2", "7/4", "2"]),
    2: normalize_grid(["0", "1", "2", "5/2", "11/4"]),
}
POSTED_GRID = normalize_grid(["0", "1/2", "1", "2"])
SECOND_PRICE_GRID = normalize_grid([0, 1, 2, 3])
LEMMA_GRID = normalize_grid(["0", "1/2", "1", "3/2", "2"])

SALSA_SETTINGS = {
    "A": (10, 1),
    "X": (9, 1),
    "Y": (10, 8),
    "B": (9, 8),
}
SALSA_MOVES = {
    "A->B": ("0/1", "1/1"),
    "A->Y": ("0/1", "-2/1"),
    "A->X": ("0/1", "0/1"),
    "X->B": ("0/1", "0/1"),
    "Y->B": ("5/1", "1/1"),
}

DETERMINISM_WORKERS = (1, 8)

# Reduction outputs that count as complete; fallback outputs are failures.
PIPELINE_SOURCES = ("pipeline", "activize")


@dataclass(frozen=True)
class SuiteScale:
    name: str
    random_mechanisms: int
    random_max_n: int
    random_max_values: int
    single_item_max_n: int
    posted_max_n: int
    lemma_max_n: int
    structured_inputs: int
    random_circuits: int
    random_circuit_max_inputs: int


SCALES: Dict[str, SuiteScale] = {
    "quick": SuiteScale("quick", 40, 3, 3, 2, 3, 2, 2, 20, 3),
    "full": SuiteScale("full", 500, 4, 5, 3, 4, 3, 3, 200, 5),
}


@dataclass
class CheckResult:
    check: str
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)
    seconds: Optional[float] = None

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self, timings: bool = False) -> Dict[str, Any]:
        data = {"check": self.check, "status": self.status, "detail": self.detail}
        if timings and self.seconds is not None:
            data["seconds"] = round(self.seconds, 3)
        return data


def residual_of(mech: Mechanism, witness: Witness) -> Optional[Fraction]:
    """Telescoping residual of the witness's decomposition, or None when the
    pipeline never reaches a decomposition."""
    try:
        passive = activize_to_passive(mech, witness)
        if passive.model != MinerModel.PASSIVE or passive.order < 2:
            return None
        return telescoping_residual(mech, salsa_decompose(mech, canonicalize(mech, passive)))
    except (StageFailure, MechanismError):
        return None


def reduction_failure(mech: Mechanism, trace: ReductionTrace) -> Optional[str]:
    """Why a reduction does not count as complete, or None when it does."""
    out = trace.output
    if out is None or out.order > 2 or not verify_witness(mech, out):
        return "reduction failed"
    if trace.produced_by not in PIPELINE_SOURCES:
        return "fallback"
    return None


def salsa_move_values() -> Dict[str, Tuple[str, str]]:
    """Coalition {0, 1} value before and after each move, judged at the
    source setting's bids."""
    mech = salsa_counterexample()
    found = {}
    for move in SALSA_MOVES:
        src, dst = move.split("->")
        value = Setting.honest(SALSA_SETTINGS[src])
        moved = Setting(SALSA_SETTINGS[dst], value.values)
        found[move] = (
            format_money(joint_utility(mech, value, value, (0, 1))),
            format_money(joint_utility(mech, moved, value, (0, 1))),
        )
    return found


def salsa_witness() -> Witness:
    bids_b = SALSA_SETTINGS["B"]
    return Witness.from_contract(
        salsa_counterexample(),
        Setting.honest(SALSA_SETTINGS["A"]),
        SideContract.build({0, 1}, {0: bids_b[0], 1: bids_b[1]}),
    )


def _moves_from_orders(orders: Sequence[Dict[str, Any]]) -> Dict[Tuple, Tuple[str, str]]:
    moves = {}
    for path in orders:
        for step in path["steps"]:
            moves[(tuple(step["from"]), tuple(step["to"]))] = (step["before"], step["after"])
    return moves


class Suite:
    """Runs the acceptance checks at one scale."""

    def __init__(
        self,
        scale: SuiteScale,
        seed: int = 0,
        workers: int = 1,
        limits: SearchLimits = SearchLimits(),
        quiet: bool = False,
    ):
        self.scale = scale
        self.seed = seed
        self.workers = workers
        self.limits = limits
        self.quiet = quiet
        self.residuals: List[Dict[str, Any]] = []

    def _progress(self, total: int, desc: str) -> tqdm:
        return tqdm(
            total=total,
            desc=desc,
            file=sys.stderr,
            disable=self.quiet or not sys.stderr.isatty(),
            leave=False,
        )

    def _record_residual(self, source: str, mech: Mechanism, witness: Witness):
        residual = residual_of(mech, witness)
        if residual is not None:
            self.residuals.append({"source": source, "residual": format_money(residual)})

    def salsa_example(self) -> CheckResult:
        found = salsa_move_values()
        mismatched = {k: v for k, v in found.items() if v != SALSA_MOVES[k]}
        witness = salsa_witness()
        mech = salsa_counterexample()
        self._record_residual("salsa", mech, witness)
        trace = reduce_to_2sc(mech, witness, workers=self.workers)

        detail: Dict[str, Any] = {
            "moves": {k: list(v) for k, v in sorted(found.items())},
            "mismatched": sorted(mismatched),
            "trace_status": "reduced" if trace.succeeded else "failed",
        }
        steps_match = False
        if trace.failure is not None:
            detail["assumption"] = trace.failure.assumption
            orders = trace.failure.details.get("stage_details", {}).get("orders", [])
            observed = _moves_from_orders(orders)
            bids = {k: tuple(format_money_list(v)) for k, v in SALSA_SETTINGS.items()}
            expected = {
                (bids[m.split("->")[0]], bids[m.split("->")[1]]): v
                for m, v in SALSA_MOVES.items()
                if m != "A->B"
            }
            steps_match = all(observed.get(k) == v for k, v in expected.items())
        detail["trace_steps_match"] = steps_match
        return CheckResult(
            "salsa-example", not mismatched and not trace.succeeded and steps_match, detail
        )

    def _random_case(self, case: int) -> Tuple[Tuple[Fraction, ...], int]:
        rng = random.Random(self.seed * 1_000_003 + case)
        n = rng.randint(2, self.scale.random_max_n)
        size = rng.randint(2, self.scale.random_max_values)
        picks = rng.sample(range(1, self.scale.random_max_values + 1), size - 1)
        grid = normalize_grid([0] + picks)
        return grid, n

    def reduction_completeness(self) -> CheckResult:
        target = self.scale.random_mechanisms
        generated = skipped = refuted = 0
        failures: List[Dict[str, Any]] = []
        refutations: List[Tuple[Dict[str, Any], Mechanism, Tuple[Fraction, ...], Witness]] = []
        case = 0
        with self._progress(target, "random mechanisms") as bar:
            while generated < target and case < 4 * target:
                grid, n = self._random_case(case)
                seed = self.seed + case
                case += 1
                try:
                    mech = random_tabulated(grid, n, seed)
                except GenerationError:
                    skipped += 1
                    continue
                generated += 1
                bar.update(1)

                label = {"seed": seed, "grid": format_money_list(grid), "n": n}
                full = find_c_sc(mech, grid, n, n, limits=self.limits, workers=self.workers)
                pair = find_c_sc(mech, grid, n, 2, limits=self.limits, workers=self.workers)
                if Verdict.TRUNCATED in (full.verdict, pair.verdict):
                    failures.append(dict(label, reason="truncated search"))
                    continue
                if full.witness is None:
                    continue
                refuted += 1
                self._record_residual(f"random-{seed}", mech, full.witness)
                refutations.append((label, mech, grid, full.witness))
                if pair.witness is None:
                    failures.append(dict(label, reason="no two-party witness"))

        def reduce(item) -> ReductionTrace:
            _, mech, grid, witness = item
            return reduce_to_2sc(mech, witness, grid=grid, limits=self.limits)

        produced_by: Dict[str, int] = {}
        for (label, mech, _, _), trace in zip(
            refutations, map_ordered(refutations, reduce, self.workers)
        ):
            source = trace.produced_by or "none"
            produced_by[source] = produced_by.get(source, 0) + 1
            reason = reduction_failure(mech, trace)
            if reason is not None:
                failures.append(dict(label, reason=reason, produced_by=source))

        detail = {
            "generated": generated,
            "skipped": skipped,
            "refuted": refuted,
            "produced_by": dict(sorted(produced_by.items())),
            "failures": sorted(failures, key=lambda f: (f["seed"], f["reason"])),
        }
        return CheckResult(
            "reduction-completeness", generated == target and not failures, detail
        )

    def single_item(self) -> CheckResult:
        rows = []
        for r, grid in sorted(SINGLE_ITEM_GRIDS.items()):
            mech = first_price_burned_reserve(r)
            for n in range(1, self.scale.single_item_max_n + 1):
                for model in (MinerModel.PASSIVE, MinerModel.ACTIVE):
                    result = find_c_sc(mech, grid, n, n, model, self.limits, self.workers)
                    rows.append(
                        {
                            "mechanism": "first-price-burned-reserve",
                            "r": r,
                            "n": n,
                            "model": model.value,
                            "status": result.verdict.value,
                            "expected": Verdict.HOLDS.value,
                        }
                    )
            shaded = find_c_sc(first_price_shaded_payment(r), grid, 2, 1, workers=self.workers)
            rows.append(
                {
                    "mechanism": "first-price-shaded-payment",
                    "r": r,
                    "n": 2,
                    "model": MinerModel.PASSIVE.value,
                    "status": shaded.verdict.value,
                    "expected": Verdict.REFUTED.value,
                    "witness": shaded.witness.to_dict() if shaded.witness else None,
                }
            )
        passed = all(row["status"] == row["expected"] for row in rows)
        return CheckResult("single-item-characterization", passed, {"runs": rows})

    def posted_price(self) -> CheckResult:
        mech = fully_burned_posted_price(1)
        rows = []
        for n in range(1, self.scale.posted_max_n + 1):
            uic = check_uic(mech, POSTED_GRID, n, self.workers)
            scp = find_c_sc(mech, POSTED_GRID, n, n, limits=self.limits, workers=self.workers)
            rows.append({"n": n, "uic": uic.status, "scp": scp.verdict.value})
        passed = all(row["uic"] == "pass" and row["scp"] == "holds" for row in rows)
        return CheckResult("posted-price", passed, {"runs": rows, "grid": POSTED_GRID})

    def active_passive_separation(self) -> CheckResult:
        mech = fully_burned_second_price()
        rows = []
        passed = True
        for n in (2, 3):
            passive, active = (
                find_c_sc(mech, SECOND_PRICE_GRID, n, 1, model, self.limits, self.workers)
                for model in (MinerModel.PASSIVE, MinerModel.ACTIVE)
            )
            omits_second = False
            if active.witness is not None:
                bids = active.witness.setting_a.bids
                second = sorted(range(n), key=lambda i: (-bids[i], i))[1]
                omits_second = second in active.witness.contract.omitted
            rows.append(
                {
                    "n": n,
                    "passive": passive.verdict.value,
                    "active": active.verdict.value,
                    "omits_second_highest": omits_second,
                    "witness": active.witness.to_dict() if active.witness else None,
                }
            )
            passed = passed and (
                passive.verdict == Verdict.HOLDS
                and active.verdict == Verdict.REFUTED
                and omits_second
            )
        return CheckResult("active-passive-separation", passed, {"runs": rows})

    def lemma_checks(self) -> CheckResult:
        def run_all(mech: Mechanism, grid: Sequence[Fraction], n: int) -> Dict[str, str]:
            return {
                report.check: report.status
                for report in (
                    check_nonbossiness(mech, grid, n, self.workers),
                    check_monotonicity(mech, grid, n, Direction.INCREASE, self.workers),
                    check_monotonicity(mech, grid, n, Direction.DECREASE, self.workers),
                )
            }

        clean = []
        for mech in (first_price_burned_reserve(1), fully_burned_posted_price(1)):
            for n in range(1, self.scale.lemma_max_n + 1):
                reports = run_all(mech, LEMMA_GRID, n)
                clean.append({"mechanism": mech.name, "n": n, "reports": reports})

        violators: List[Tuple[Mechanism, Sequence[Any], str]] = [
            (fully_burned_second_price(), [0, 1, 2], "non-bossiness"),
            (crowding_out_auction(), [0, 1, 2], "increase-monotonicity"),
            (surge_threshold_auction(), ["0", "1", "3/2", "2"], "decrease-monotonicity"),
        ]
        violations = []
        for mech, grid, check in violators:
            reports = run_all(mech, normalize_grid(grid), 2)
            violations.append({"mechanism": mech.name, "check": check, "status": reports[check]})

        salsa = run_all(salsa_counterexample(), normalize_grid([0, 1, 8, 9, 10]), 2)
        passed = all(
            status == "pass" for row in clean for status in row["reports"].values()
        ) and all(row["status"] == "violation" for row in violations)
        return CheckResult(
            "lemma-checks",
            passed,
            {"clean": clean, "violations": violations, "salsa": salsa},
        )

    def tautology_round_trip(self) -> CheckResult:
        rng = random.Random(self.seed)
        circuits = [("structured", c) for c in all_circuits(self.scale.structured_inputs)]
        for k in range(self.scale.random_circuits):
            inputs = rng.randint(1, self.scale.random_circuit_max_inputs)
            gates = rng.randint(1, 2 * inputs + 2)
            circuits.append(("random", random_circuit(inputs, gates, self.seed + k)))

        mismatches = []
        tautologies = 0
        with self._progress(len(circuits), "circuits") as bar:
            for index, (kind, circuit) in enumerate(circuits):
                truth = is_tautology_bruteforce(circuit)
                tautologies += truth
                result = decide_2scpdp(tautology_to_scpdp(circuit), workers=self.workers)
                if result.answer != truth:
                    mismatches.append({"index": index, "kind": kind, "tautology": truth})
                bar.update(1)

        detail = {
            "circuits": len(circuits),
            "tautologies": tautologies,
            "mismatches": mismatches,
        }
        return CheckResult("tautology-round-trip", not mismatches, detail)

    def telescoping_identity(self) -> CheckResult:
        nonzero = [r for r in self.residuals if r["residual"] != "0/1"]
        return CheckResult(
            "telescoping-identity",
            bool(self.residuals) and not nonzero,
            {"decompositions": len(self.residuals), "nonzero": nonzero},
        )

    def discount_witness(self) -> CheckResult:
        witness = discount_auction_witness(2, Fraction(1, 4))
        ok = verify_witness(discount_auction(2), witness)
        return CheckResult("discount-auction-witness", ok, {"witness": witness.to_dict()})

    def determinism(self, reference: Dict[str, CheckResult]) -> CheckResult:
        """Rerun the worker-sensitive checks and compare their reports."""
        runs = {}
        for workers in DETERMINISM_WORKERS:
            if workers == self.workers:
                results = reference
            else:
                other = Suite(self.scale, self.seed, workers, self.limits, quiet=True)
                results = {
                    "reduction-completeness": other.reduction_completeness(),
                    "single-item-characterization": other.single_item(),
                    "tautology-round-trip": other.tautology_round_trip(),
                }
            runs[workers] = {k: dumps_report(results[k].to_dict()) for k in sorted(results)}
        first, second = (runs[w] for w in DETERMINISM_WORKERS)
        differing = sorted(k for k in first if first[k] != second[k])
        return CheckResult(
            "determinism",
            not differing,
            {"workers": list(DETERMINISM_WORKERS), "differing": differing},
        )

    def run(self) -> List[CheckResult]:
        logger.info(
            "suite: %s scale, seed %d, %d workers", self.scale.name, self.seed, self.workers
        )
        results: List[CheckResult] = []

        def timed(work: Callable[[], CheckResult]) -> CheckResult:
            start = time.perf_counter()
            result = work()
            result.seconds = time.perf_counter() - start
            logger.info("suite: %s %s", result.check, result.status)
            results.append(result)
            return result

        timed(self.salsa_example)
        completeness = timed(self.reduction_completeness)
        single = timed(self.single_item)
        timed(self.posted_price)
        timed(self.active_passive_separation)
        timed(self.lemma_checks)
        taut = timed(self.tautology_round_trip)
        timed(self.telescoping_identity)
        reference = {r.check: r for r in (completeness, single, taut)}
        timed(lambda: self.determinism(reference))
        timed(self.discount_witness)
        return results


def run_suite(
    scale: str = "quick",
    seed: int = 0,
    workers: int = 1,
    limits: SearchLimits = SearchLimits(),
    quiet: bool = False,
) -> List[CheckResult]:
    return Suite(SCALES[scale], seed, workers, limits, quiet).run()
