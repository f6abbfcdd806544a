"""Deterministic JSON and CSV report files."""

import csv
import json
import logging
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from .money import format_money

logger = logging.getLogger(__name__)

GRID_SCOPE = "grid certificate only"

CSV_COLUMNS = ("check", "status", "detail")


def to_jsonable(value: Any) -> Any:
    """Convert results into plain JSON values with canonical rational strings."""
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return format_money(value)
    if isinstance(value, float):
        return format_money(Fraction(value))
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (frozenset, set)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, (list, tuple, range)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def dumps_report(report: Mapping[str, Any]) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def emit_report(report: Mapping[str, Any], path: Path) -> Path:
    """
    Write ``report`` as JSON with sorted keys and a trailing newline.

    Args:
        report: Report mapping; rationals may be Fractions.
        path: Output file, parent directories are created.

    Returns:
        The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(dumps_report(report))
    logger.info("report written to %s", path)
    return path


def _detail(detail: Any) -> str:
    if detail is None or detail == "":
        return ""
    if isinstance(detail, str):
        return detail
    return json.dumps(to_jsonable(detail), sort_keys=True, separators=(",", ":"))


def summary_rows(checks: Iterable[Mapping[str, Any]]) -> List[List[str]]:
    """``check,status,detail`` rows from check dicts with those keys."""
    return [
        [str(c["check"]), str(c["status"]), _detail(c.get("detail"))] for c in checks
    ]


def emit_csv(rows: Sequence[Sequence[str]], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
    logger.info("csv summary written to %s", path)
    return path


def build_report(
    command: str,
    inputs: Mapping[str, Any],
    verdicts: Mapping[str, Any],
    scope: Optional[str] = None,
    **sections: Any,
) -> Dict[str, Any]:
    """Common report shape: command, inputs, verdicts, scope and extra sections."""
    report: Dict[str, Any] = {
        "command": command,
        "inputs": dict(inputs),
        "verdicts": dict(verdicts),
        "scope": scope,
    }
    report.update(sections)
    return report
