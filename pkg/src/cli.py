"""Command line interface for tfm."""

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .axioms import check_core_axioms, check_uic
from .circuits import (
    BoolCircuit,
    CircuitAuction,
    decide_2scpdp,
    is_tautology_bruteforce,
    load_json,
    tautology_to_scpdp,
)
from .config import Config, ConfigManager, get_config, init_config, resolve_workers
from .contracts import MinerModel, Witness
from .display import Colors, Formatter, TableFormatter, echo
from .errors import (
    CircuitError,
    ConfigError,
    MoneyError,
    PreconditionError,
    SchemaError,
    TfmError,
)
from .lemma_checks import Direction, check_monotonicity, check_nonbossiness
from .mechanism import Mechanism
from .money import format_money_list, parse_grid, parse_money_list
from .reduction import DEFAULT_BISECT_ITERS, LocalizeMode, reduce_to_2sc
from .report import GRID_SCOPE, build_report, dumps_report, emit_csv, emit_report, summary_rows
from .search import SearchLimits, Verdict, find_c_sc
from .suite import SCALES, run_suite
from .tabulated import load_tabulated
from .zoo import ZOO, get_entry

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_FILE = 3
EXIT_TRUNCATED = 4


@dataclass
class RunConfig:
    """Validated inputs of one ``tfm`` invocation."""

    command: str
    mech: Optional[str] = None
    params: Dict[str, Fraction] = field(default_factory=dict)
    grid: Optional[Tuple[Fraction, ...]] = None
    n: Optional[int] = None
    c: Optional[int] = None
    model: MinerModel = MinerModel.PASSIVE
    mode: LocalizeMode = LocalizeMode.GRID
    profile: Optional[Tuple[Fraction, ...]] = None
    bids: Optional[Tuple[Fraction, ...]] = None
    witness: Optional[Path] = None
    circuits: Optional[Path] = None
    circuit: Optional[Path] = None
    passive: bool = False
    decide: bool = False
    extended: bool = False
    scale: str = "quick"
    seed: int = 0
    out: Optional[Path] = None
    csv: Optional[Path] = None
    json: bool = False
    quiet: bool = False
    timings: bool = False
    workers: int = 1
    init: bool = False
    show: bool = False
    set_values: List[str] = field(default_factory=list)
    single_item: bool = False
    config_path: Optional[Path] = None
    settings: Config = field(default_factory=Config)

    @classmethod
    def from_args(cls, args: argparse.Namespace, config: Config) -> "RunConfig":
        """
        Build and validate a run configuration before any computation.

        Raises:
            ConfigError: A flag is missing, malformed or out of range.
        """
        run = cls(
            command=args.command,
            mech=_opt(args, "mech"),
            params=parse_params(_opt(args, "params")),
            grid=_parse_or_none(parse_grid, _opt(args, "grid"), "--grid"),
            n=_opt(args, "n"),
            c=_opt(args, "c"),
            model=MinerModel(_opt(args, "model") or MinerModel.PASSIVE.value),
            mode=LocalizeMode(_opt(args, "mode") or LocalizeMode.GRID.value),
            profile=_parse_or_none(parse_money_list, _opt(args, "profile"), "--profile"),
            bids=_parse_or_none(parse_money_list, _opt(args, "bids"), "--bids"),
            witness=Path(args.witness) if _opt(args, "witness") else None,
            circuits=Path(args.circuits) if _opt(args, "circuits") else None,
            circuit=Path(args.circuit) if _opt(args, "circuit") else None,
            passive=bool(_opt(args, "passive")),
            decide=bool(_opt(args, "decide")),
            extended=bool(_opt(args, "extended")),
            scale=_opt(args, "scale") or "quick",
            seed=args.seed if args.seed is not None else config.seed,
            out=Path(args.out) if args.out else None,
            csv=Path(args.csv) if args.csv else None,
            json=args.json,
            quiet=args.quiet,
            timings=args.timings or config.timings,
            workers=resolve_workers(args.workers, config),
            init=bool(_opt(args, "init")),
            show=bool(_opt(args, "show")),
            set_values=_opt(args, "set") or [],
            single_item=bool(_opt(args, "single_item")),
            config_path=Path(args.config) if args.config else None,
            settings=config,
        )
        run.validate()
        return run

    def validate(self):
        for name in ("n", "c"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"--{name} must be at least 1, got {value}")
        if self.command in ("check-axioms", "find-sc", "reduce") and not self.mech:
            raise ConfigError(f"{self.command} needs --mech NAME or --mech FILE.json")
        if self.command in ("check-axioms", "find-sc") and self.table_path() is None:
            if self.grid is None or self.n is None:
                raise ConfigError(f"{self.command} needs --grid and --n")
        if self.command == "find-sc":
            if self.c is None:
                raise ConfigError("find-sc needs --c")
            if self.profile is not None and self.n is not None and len(self.profile) != self.n:
                raise ConfigError(f"--profile has {len(self.profile)} bids but --n is {self.n}")
        if self.command == "reduce" and self.witness is None:
            raise ConfigError("reduce needs --witness FILE")
        if self.command == "scpdp" and self.circuits is None:
            raise ConfigError("scpdp needs --circuits FILE")
        if self.command == "taut-reduce" and self.circuit is None:
            raise ConfigError("taut-reduce needs --circuit FILE")
        if self.scale not in SCALES:
            raise ConfigError(f"unknown scale {self.scale!r}; known: {', '.join(SCALES)}")

    def table_path(self) -> Optional[Path]:
        """The tabulated mechanism file named by ``--mech``, if it names one."""
        if self.mech is None or self.mech in ZOO:
            return None
        path = Path(self.mech)
        if path.suffix == ".json" or path.exists():
            return path
        return None

    def limits(self) -> SearchLimits:
        return SearchLimits.from_config(self.settings)

    def report_path(self) -> Path:
        if self.out and self.command != "taut-reduce":
            return self.out
        return Path(self.settings.report_dir) / f"{self.command}.json"


@dataclass
class CommandResult:
    report: Optional[Dict[str, Any]]
    rendered: List[str] = field(default_factory=list)
    csv_rows: Optional[List[List[str]]] = None
    exit_code: int = EXIT_OK


def _opt(args: argparse.Namespace, name: str) -> Any:
    """A subcommand flag, None when the subcommand does not define it."""
    return getattr(args, name, None)


def _parse_or_none(parse: Callable[[str], Any], text: Optional[str], flag: str) -> Any:
    if text is None:
        return None
    try:
        return parse(text)
    except MoneyError as e:
        raise ConfigError(f"{flag}: {e.message}")


def parse_params(text: Optional[str]) -> Dict[str, Fraction]:
    """Parse ``k=v,...`` into exact rationals."""
    params: Dict[str, Fraction] = {}
    if not text:
        return params
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--params: expected key=value, got {item!r}")
        try:
            params[key.strip()] = parse_money_list(value)[0]
        except MoneyError as e:
            raise ConfigError(f"--params {key.strip()}: {e.message}")
    return params


def load_mechanism(run: RunConfig) -> Mechanism:
    table = run.table_path()
    if table is not None:
        mech = load_tabulated(table)
    else:
        mech = get_entry(run.mech).build(run.params)
    mech.debug = run.settings.debug
    return mech


def _grid_and_n(run: RunConfig, mech: Mechanism) -> Tuple[Tuple[Fraction, ...], int]:
    grid = run.grid if run.grid is not None else mech.domain
    n = run.n if run.n is not None else getattr(mech, "n", None)
    if grid is None or n is None:
        raise ConfigError("--grid and --n are required for this mechanism")
    return grid, n


def _mechanism_inputs(run: RunConfig, mech: Mechanism) -> Dict[str, Any]:
    inputs: Dict[str, Any] = {"mechanism": mech.describe()}
    if run.table_path() is not None:
        inputs["table"] = str(run.table_path())
    return inputs


def cmd_zoo(run: RunConfig) -> CommandResult:
    if run.mech is None:
        rows = [
            [e.name, ", ".join(f"{k}={v}" for k, v in sorted(e.params.items())), e.description]
            for e in ZOO.values()
        ]
        rendered = [
            Formatter.format_header("Mechanism zoo", len(rows)),
            TableFormatter.format_table(["name", "params", "rule"], sorted(rows)),
        ]
        return CommandResult(None, rendered)

    entry = get_entry(run.mech)
    mech = entry.build(run.params)
    if run.bids is not None:
        outcome = mech.evaluate(run.bids)
        report = {"mechanism": mech.describe(), "bids": run.bids, "outcome": outcome.to_dict()}
        return CommandResult(None, [dumps_report(report).rstrip("\n")])

    rows = [
        [prop, "yes" if claim.holds else "no", claim.provenance]
        for prop, claim in sorted(entry.expected.items())
    ]
    rendered = [
        Formatter.format_header(entry.name),
        f"  {entry.description}",
        f"  {Colors.DIM}params:{Colors.RESET} "
        + (", ".join(f"{k}={v}" for k, v in sorted(mech.params.items())) or "none"),
        "",
        TableFormatter.format_table(["property", "expected", "provenance"], rows),
    ]
    return CommandResult(None, rendered)


def cmd_check_axioms(run: RunConfig) -> CommandResult:
    mech = load_mechanism(run)
    grid, n = _grid_and_n(run, mech)
    reports = check_core_axioms(
        mech,
        grid,
        n,
        sample_cap=run.settings.anonymity_sample_cap,
        seed=run.seed,
        workers=run.workers,
    )
    if run.extended:
        reports += [
            check_uic(mech, grid, n, run.workers),
            check_nonbossiness(mech, grid, n, run.workers),
            check_monotonicity(mech, grid, n, Direction.INCREASE, run.workers),
            check_monotonicity(mech, grid, n, Direction.DECREASE, run.workers),
        ]
    inputs = dict(_mechanism_inputs(run, mech), grid=grid, n=n, extended=run.extended)
    report = build_report(
        "check-axioms",
        inputs,
        {r.check: r.status for r in reports},
        GRID_SCOPE,
        checks=[r.to_dict() for r in reports],
    )
    rendered = [Formatter.format_header(f"Axioms of {mech.name}", len(reports))]
    rendered += [Formatter.format_axiom(r) for r in reports]
    rendered.append("")
    rendered.append(Formatter.format_info(f"{GRID_SCOPE}: grid {format_money_list(grid)}, n={n}"))
    rows = summary_rows(
        {"check": r.check, "status": r.status, "detail": r.violation} for r in reports
    )
    return CommandResult(report, rendered, rows)


def cmd_find_sc(run: RunConfig) -> CommandResult:
    mech = load_mechanism(run)
    grid, n = _grid_and_n(run, mech)
    if run.profile is not None and len(run.profile) != n:
        raise ConfigError(f"--profile has {len(run.profile)} bids but n is {n}")
    limits = run.limits()
    result = find_c_sc(
        mech,
        grid,
        n,
        run.c,
        run.model,
        limits,
        run.workers,
        profiles=[run.profile] if run.profile is not None else None,
    )
    label = f"{run.c}-SCP ({run.model.value})"
    inputs = dict(
        _mechanism_inputs(run, mech),
        grid=grid,
        n=n,
        c=run.c,
        model=run.model,
        profile=run.profile,
        limits=limits.to_dict(),
    )
    scope = GRID_SCOPE if result.verdict == Verdict.HOLDS else None
    report = build_report("find-sc", inputs, {label: result.verdict}, scope, result=result)

    rendered = [
        Formatter.format_header(f"Side-contract search on {mech.name}"),
        Formatter.format_verdict(label, result.verdict.value, scope),
    ]
    if result.witness is not None:
        rendered.append(Formatter.format_witness(result.witness))
    if result.verdict == Verdict.TRUNCATED:
        rendered.append(
            Formatter.format_warning(
                f"contract budget exhausted at {format_money_list(result.truncated_at)}"
            )
        )
    code = EXIT_TRUNCATED if result.verdict == Verdict.TRUNCATED else EXIT_OK
    rows = [[label, result.verdict.value, ""]]
    return CommandResult(report, rendered, rows, code)


def _extract_witness(data: Any) -> Dict[str, Any]:
    """A witness dict, or the witness inside a ``find-sc`` or ``reduce`` report."""
    if isinstance(data, dict):
        if "A" in data and "coalition" in data:
            return data
        for key in ("witness", "result", "output"):
            inner = data.get(key)
            if isinstance(inner, dict):
                try:
                    return _extract_witness(inner)
                except SchemaError:
                    continue
    raise SchemaError("no witness found in the input file")


def cmd_reduce(run: RunConfig) -> CommandResult:
    mech = load_mechanism(run)
    witness = Witness.from_dict(_extract_witness(load_json(run.witness)))
    trace = reduce_to_2sc(
        mech,
        witness,
        run.mode,
        run.grid,
        run.settings.bisect_max_iters or DEFAULT_BISECT_ITERS,
        run.limits(),
        run.workers,
        single_item=run.single_item,
    )
    status = "reduced" if trace.succeeded else "failed"
    inputs = dict(
        _mechanism_inputs(run, mech), witness=witness.to_dict(), mode=run.mode, grid=run.grid
    )
    report = build_report("reduce", inputs, {"reduction": status}, None, trace=trace)

    rendered = [
        Formatter.format_header(f"Reduction on {mech.name}"),
        Formatter.format_witness(witness),
        "",
        Formatter.format_stages([s.to_dict() for s in trace.stages]),
        "",
        Formatter.format_verdict("reduction", status),
    ]
    if trace.output is not None:
        rendered.append(Formatter.format_info(f"produced by {trace.produced_by}"))
        rendered.append(Formatter.format_witness(trace.output))
    elif trace.failure is not None:
        rendered.append(
            Formatter.format_warning(
                f"{trace.failure.stage}: {trace.failure.message} "
                f"(assumption: {trace.failure.assumption})"
            )
        )
    return CommandResult(report, rendered, [["reduction", status, trace.produced_by or ""]])


def cmd_scpdp(run: RunConfig) -> CommandResult:
    auction = CircuitAuction.from_dict(load_json(run.circuits))
    result = decide_2scpdp(auction, passive=run.passive, workers=run.workers)
    inputs = {"circuits": str(run.circuits), "n": auction.n, "values": auction.values}
    report = build_report(
        "scpdp", inputs, {"2-SCP": result.to_dict()["answer"]}, None, result=result
    )
    rendered = [
        Formatter.format_header("2-SCP decision"),
        Formatter.format_verdict(f"2-SCP ({result.model.value})", "yes" if result.answer else "no"),
    ]
    if result.witness is not None:
        rendered.append(Formatter.format_witness(result.witness))
    return CommandResult(report, rendered, [["2-SCP", result.to_dict()["answer"], ""]])


def cmd_taut_reduce(run: RunConfig) -> CommandResult:
    circuit = BoolCircuit.from_dict(load_json(run.circuit))
    auction = tautology_to_scpdp(circuit)
    inputs: Dict[str, Any] = {"circuit": str(run.circuit), "inputs": circuit.inputs}
    verdicts: Dict[str, Any] = {}
    sections: Dict[str, Any] = {"bidders": auction.n}
    rendered = [
        Formatter.format_header("Tautology reduction"),
        Formatter.format_info(
            f"{circuit.inputs} inputs -> {auction.n} bidders over values {{0, 1}}"
        ),
    ]
    if run.out is not None:
        emit_report(auction.to_dict(), run.out)
        sections["auction_file"] = str(run.out)
        rendered.append(Formatter.format_success(f"auction written to {run.out}"))
    if run.decide:
        result = decide_2scpdp(auction, workers=run.workers)
        tautology = is_tautology_bruteforce(circuit)
        verdicts = {"2-SCP": result.to_dict()["answer"], "tautology": tautology}
        sections["result"] = result
        rendered.append(Formatter.format_verdict("2-SCP", "yes" if result.answer else "no"))
        rendered.append(Formatter.format_verdict("tautology", "yes" if tautology else "no"))
        if result.answer != tautology:
            raise CircuitError("decision and brute force disagree", verdicts)
    report = build_report("taut-reduce", inputs, verdicts, None, **sections)
    return CommandResult(report, rendered)


def cmd_suite(run: RunConfig) -> CommandResult:
    results = run_suite(run.scale, run.seed, run.workers, run.limits(), run.quiet)
    checks = [r.to_dict(run.timings) for r in results]
    report = build_report(
        "suite",
        {"scale": run.scale, "seed": run.seed},
        {r.check: r.status for r in results},
        None,
        checks=checks,
    )
    table = [[r.check, Formatter.format_status(r.status)] for r in results]
    rendered = [
        Formatter.format_header(f"Acceptance suite ({run.scale})", len(results)),
        TableFormatter.format_table(["check", "status"], table),
    ]
    failed = [r.check for r in results if not r.passed]
    rendered.append("")
    if failed:
        rendered.append(Formatter.format_warning(f"failed: {', '.join(failed)}"))
    else:
        rendered.append(Formatter.format_success("all checks passed"))
    rows = summary_rows({"check": r.check, "status": r.status, "detail": r.detail} for r in results)
    return CommandResult(report, rendered, rows)


def _config_value(text: str) -> Any:
    """A ``--set`` value as the config file would hold it."""
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        return text


def cmd_config(run: RunConfig) -> CommandResult:
    if run.init:
        path = init_config(run.config_path)
        return CommandResult(None, [Formatter.format_success(f"config file created: {path}")])
    if run.set_values:
        manager = ConfigManager(run.config_path)
        for item in run.set_values:
            key, sep, value = item.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"--set: expected KEY=VALUE, got {item!r}")
            manager.set(key.strip(), _config_value(value.strip()))
        path = manager.save()
        return CommandResult(None, [Formatter.format_success(f"config file updated: {path}")])
    rows = [[key, str(value)] for key, value in asdict(run.settings).items()]
    rows.append(["workers (effective)", str(run.workers)])
    rendered = [
        Formatter.format_header("Configuration"),
        TableFormatter.format_table(["key", "value"], rows),
    ]
    return CommandResult(None, rendered)


HANDLERS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "zoo": cmd_zoo,
    "check-axioms": cmd_check_axioms,
    "find-sc": cmd_find_sc,
    "reduce": cmd_reduce,
    "scpdp": cmd_scpdp,
    "taut-reduce": cmd_taut_reduce,
    "suite": cmd_suite,
    "config": cmd_config,
}


def run(config: RunConfig) -> int:
    """
    Execute one command and emit its report.

    The JSON report is written for every command that produces one; the
    exit code reflects operational success only.

    Returns:
        Exit code (0 completed, 4 truncated search).
    """
    start = time.perf_counter()
    result = HANDLERS[config.command](config)
    if result.report is not None:
        if config.timings:
            result.report["wall_time"] = round(time.perf_counter() - start, 3)
        emit_report(result.report, config.report_path())
    if config.csv is not None and result.csv_rows is not None:
        emit_csv(result.csv_rows, config.csv)

    if config.json and result.report is not None:
        sys.stdout.write(dumps_report(result.report))
    elif not config.quiet or result.report is None:
        for block in result.rendered:
            echo(block)
    return result.exit_code


def exit_code_for(error: Exception) -> int:
    if isinstance(error, (ConfigError, MoneyError)):
        return EXIT_CONFIG
    if isinstance(error, (SchemaError, PreconditionError, OSError)):
        return EXIT_FILE
    return EXIT_INTERNAL


def setup_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="Report file (taut-reduce: auction file)")
    common.add_argument("--csv", help="Write a check,status,detail summary")
    common.add_argument("--json", action="store_true", help="Print the report JSON")
    common.add_argument("--workers", type=int, help="Worker threads (default: TFM_WORKERS)")
    common.add_argument("--seed", type=int, help="Seed for sampling and generators")
    common.add_argument("--config", help="Config file instead of the standard locations")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logs"
    )
    common.add_argument("--quiet", action="store_true", help="No progress bars or summaries")
    common.add_argument("--timings", action="store_true", help="Record wall-time in reports")
    return common


def _mechanism_args(parser: argparse.ArgumentParser):
    parser.add_argument("--mech", help="Zoo mechanism name or tabulated mechanism JSON file")
    parser.add_argument("--params", help="Mechanism parameters, k=v,...")
    parser.add_argument("--grid", help="Comma separated bid values, e.g. 0,1/2,1")
    parser.add_argument("--n", type=int, help="Number of bidders")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="tfm",
        description="Collusion analysis of transaction fee mechanisms",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  tfm zoo                                            # List mechanisms
  tfm zoo salsa-counterexample --bids 9,8            # Outcome of one bid vector
  tfm check-axioms --mech first-price-burned-reserve --params r=1 --grid 0,1,2 --n 3
  tfm find-sc --mech salsa-counterexample --grid 1,8,9,10 --n 2 --c 2
  tfm reduce --mech salsa-counterexample --witness reports/find-sc.json
  tfm scpdp --circuits auction.json
  tfm taut-reduce --circuit circuit.json --out auction.json --decide
  tfm suite --scale quick
  tfm config --init
  tfm config --set workers=4

Exit codes:
  0 completed run, 1 internal error, 2 config error, 3 input file error,
  4 truncated search
        """,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    zoo = sub.add_parser("zoo", parents=[common], help="List or evaluate zoo mechanisms")
    zoo.add_argument("mech", nargs="?", help="Mechanism name")
    zoo.add_argument("--params", help="Mechanism parameters, k=v,...")
    zoo.add_argument("--bids", help="Bid vector to evaluate")

    axioms = sub.add_parser("check-axioms", parents=[common], help="Run the axiom checkers")
    _mechanism_args(axioms)
    axioms.add_argument(
        "--extended", action="store_true", help="Also check UIC, non-bossiness, monotonicity"
    )

    find = sub.add_parser("find-sc", parents=[common], help="Search for side contracts")
    _mechanism_args(find)
    find.add_argument("--c", type=int, help="Largest coalition size")
    find.add_argument("--model", choices=[m.value for m in MinerModel], default="passive")
    find.add_argument("--profile", help="Search a single honest bid vector")

    reduce = sub.add_parser("reduce", parents=[common], help="Reduce a witness to two bidders")
    _mechanism_args(reduce)
    reduce.add_argument("--witness", help="Witness JSON or a find-sc report")
    reduce.add_argument("--mode", choices=[m.value for m in LocalizeMode], default="grid")
    reduce.add_argument(
        "--single-item", action="store_true", help="Shrink a two-bidder result to one bidder"
    )

    scpdp = sub.add_parser("scpdp", parents=[common], help="Decide 2-SCP of a circuit auction")
    scpdp.add_argument("--circuits", help="Circuit auction JSON file")
    scpdp.add_argument("--passive", action="store_true", help="Passive miner model")

    taut = sub.add_parser("taut-reduce", parents=[common], help="Circuit to circuit auction")
    taut.add_argument("--circuit", help="Boolean circuit JSON file")
    taut.add_argument("--decide", action="store_true", help="Decide and compare to brute force")

    suite = sub.add_parser("suite", parents=[common], help="Run the acceptance battery")
    suite.add_argument("--scale", choices=sorted(SCALES), default="quick")

    config = sub.add_parser("config", parents=[common], help="Show or create the config file")
    group = config.add_mutually_exclusive_group()
    group.add_argument("--init", action="store_true", help="Write the default config file")
    group.add_argument("--show", action="store_true", help="Print the effective configuration")
    group.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help="Change one key of the config file"
    )

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        if args.command == "config" and _opt(args, "init"):
            # --init may target a file that does not exist yet
            config = Config()
        else:
            config = get_config(Path(args.config) if args.config else None)
        run_config = RunConfig.from_args(args, config)
        logger.debug("run config: %s", run_config)
        return run(run_config)
    except TfmError as e:
        print(f"error[{e.code}]: {e.message}", file=sys.stderr)
        if e.details:
            logger.info("details: %s", json.dumps(e.details, sort_keys=True, default=str))
        return exit_code_for(e)
    except OSError as e:
        print(f"error[E_IO]: {e}", file=sys.stderr)
        return EXIT_FILE


if __name__ == "__main__":
    sys.exit(main())
