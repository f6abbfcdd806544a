"""Terminal formatting for tfm reports."""

import sys
from typing import Any, Dict, List, Optional

from prompt_toolkit import print_formatted_text
from prompt_toolkit.formatted_text import ANSI

from .axioms import AxiomReport
from .contracts import Witness
from .money import format_money, format_money_list


class Colors:
    """ANSI color codes for terminal output."""

    RESET = "\033[0m"
    BOLD = "\033[1m"
    DIM = "\033[2m"

    RED = "\033[31m"
    GREEN = "\033[32m"
    YELLOW = "\033[33m"
    BLUE = "\033[34m"
    MAGENTA = "\033[35m"
    CYAN = "\033[36m"
    WHITE = "\033[37m"

    BRIGHT_RED = "\033[91m"
    BRIGHT_GREEN = "\033[92m"
    BRIGHT_YELLOW = "\033[93m"
    BRIGHT_BLUE = "\033[94m"
    BRIGHT_MAGENTA = "\033[95m"
    BRIGHT_CYAN = "\033[96m"
    BRIGHT_WHITE = "\033[97m"


_STATUS_COLORS = {
    "pass": Colors.BRIGHT_GREEN,
    "holds": Colors.BRIGHT_GREEN,
    "reduced": Colors.BRIGHT_GREEN,
    "yes": Colors.BRIGHT_GREEN,
    "ok": Colors.BRIGHT_GREEN,
    "violation": Colors.BRIGHT_RED,
    "refuted": Colors.BRIGHT_RED,
    "failed": Colors.BRIGHT_RED,
    "no": Colors.BRIGHT_RED,
    "truncated": Colors.BRIGHT_YELLOW,
}


class Formatter:
    """Formatting for verdicts, witnesses and status lines."""

    @staticmethod
    def format_header(title: str, count: Optional[int] = None) -> str:
        """
        Format a section header.

        Args:
            title: Header title
            count: Optional count to display

        Returns:
            Formatted header string
        """
        if count is not None:
            title = f"{title} ({count} checks)"

        lines = [
            "",
            f"{Colors.BRIGHT_CYAN}{Colors.BOLD}{'═' * 70}{Colors.RESET}",
            f"{Colors.BRIGHT_CYAN}{Colors.BOLD}  {title}{Colors.RESET}",
            f"{Colors.BRIGHT_CYAN}{Colors.BOLD}{'═' * 70}{Colors.RESET}",
            "",
        ]

        return "\n".join(lines)

    @staticmethod
    def format_status(status: str) -> str:
        color = _STATUS_COLORS.get(status, Colors.WHITE)
        return f"{color}{Colors.BOLD}{status}{Colors.RESET}"

    @staticmethod
    def format_verdict(label: str, status: str, scope: Optional[str] = None) -> str:
        """One verdict line, e.g. ``2-SCP (passive): holds  [grid certificate only]``."""
        line = f"{Colors.BRIGHT_WHITE}{label}:{Colors.RESET} {Formatter.format_status(status)}"
        if scope:
            line += f"  {Colors.DIM}[{scope}]{Colors.RESET}"
        return line

    @staticmethod
    def format_witness(witness: Witness) -> str:
        """
        Format a side-contract witness as an indented block.

        Args:
            witness: The witness to format

        Returns:
            Multi-line string with settings, coalition and gain
        """
        a, b = witness.setting_a, witness.setting_b
        lines = [
            f"  {Colors.BRIGHT_MAGENTA}coalition:{Colors.RESET} "
            f"{{{', '.join(str(i) for i in witness.contract.coalition)}}}  "
            f"{Colors.DIM}({witness.model.value} miner){Colors.RESET}",
            f"  {Colors.BRIGHT_BLUE}A:{Colors.RESET} ({', '.join(format_money_list(a.bids))})",
            f"  {Colors.BRIGHT_BLUE}B:{Colors.RESET} ({', '.join(format_money_list(b.bids))})",
        ]
        if b.omitted:
            lines.append(f"  {Colors.DIM}omitted:{Colors.RESET} {sorted(b.omitted)}")
        if b.fake_indices:
            fakes = [format_money(b.bids[i]) for i in b.fake_indices]
            lines.append(f"  {Colors.DIM}fakes:{Colors.RESET} {fakes}")
        lines.append(
            f"  {Colors.BRIGHT_GREEN}delta:{Colors.RESET} {format_money(witness.delta)}"
        )
        return "\n".join(lines)

    @staticmethod
    def format_axiom(report: AxiomReport) -> str:
        line = Formatter.format_verdict(report.check, report.status)
        if report.violation:
            detail = ", ".join(f"{k}={v}" for k, v in sorted(report.violation.items()))
            line += f"\n  {Colors.DIM}{detail}{Colors.RESET}"
        return line

    @staticmethod
    def format_stages(stages: List[Dict[str, Any]]) -> str:
        """Format reduction stage records as ``stage  status  notes`` lines."""
        rows = []
        for record in stages:
            notes = record.get("notes") or {}
            detail = ", ".join(f"{k}={v}" for k, v in sorted(notes.items()))
            rows.append(
                f"  {record['stage']:<24} {Formatter.format_status(record['status'])}"
                + (f"  {Colors.DIM}{detail}{Colors.RESET}" if detail else "")
            )
        return "\n".join(rows)

    @staticmethod
    def format_warning(message: str) -> str:
        """Format warning message."""
        return f"{Colors.BRIGHT_YELLOW}⚠️  Warning:{Colors.RESET} {message}"

    @staticmethod
    def format_success(message: str) -> str:
        """Format success message."""
        return f"{Colors.BRIGHT_GREEN}✓ Success:{Colors.RESET} {message}"

    @staticmethod
    def format_info(message: str) -> str:
        """Format info message."""
        return f"{Colors.BRIGHT_BLUE}ℹ Info:{Colors.RESET} {message}"


class TableFormatter:
    """Format data as tables."""

    @staticmethod
    def format_table(headers: List[str], rows: List[List[str]]) -> str:
        """
        Format data as a table.

        Args:
            headers: Column headers
            rows: Data rows

        Returns:
            Formatted table string
        """
        if not rows:
            return ""

        widths = [len(h) for h in headers]
        for row in rows:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], len(str(cell)))

        header_line = " │ ".join(
            f"{Colors.BOLD}{h:<{w}}{Colors.RESET}" for h, w in zip(headers, widths)
        )

        separator = "─┼─".join("─" * w for w in widths)

        row_lines = []
        for row in rows:
            row_lines.append(" │ ".join(f"{str(cell):<{w}}" for cell, w in zip(row, widths)))

        return "\n".join([header_line, f"{Colors.DIM}{separator}{Colors.RESET}", *row_lines])


def echo(text: str, err: bool = False):
    """Print ANSI text; styling is dropped when the stream is not a terminal."""
    print_formatted_text(ANSI(text), file=sys.stderr if err else sys.stdout)
