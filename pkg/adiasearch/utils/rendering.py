"""
Rich tables summarizing runs on the shared stderr console.
"""
from typing import Any, Iterable, Mapping, Optional, Tuple

from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ..config import console


def _format(value: Any) -> Text:
    if isinstance(value, bool):
        return Text("yes" if value else "no", style="green" if value else "dim")
    if isinstance(value, float):
        return Text(f"{value:.6g}")
    if value is None:
        return Text("--", style="dim")
    return Text(str(value))


def summary_panel(
    title: str, rows: Iterable[Tuple[str, Any]], border_style: str = "cyan"
) -> Panel:
    """Two-column key/value table in a titled panel."""
    table = Table(expand=False, box=None, padding=(0, 1, 0, 1), show_header=False)
    table.add_column("Field", style="cyan", justify="right")
    table.add_column("Value", style="white")
    for key, value in rows:
        table.add_row(key, _format(value))
    return Panel(table, title=title, border_style=border_style, expand=False)


def render_search(summary: Mapping[str, Any]) -> None:
    style = "yellow" if summary.get("best_match") else "cyan"
    if not summary.get("accurate", True):
        style = "red"
    rows = [
        ("n", summary["n"]),
        ("target", summary["target"]),
        ("solution index", summary["solution_index"]),
        ("T", summary["T"]),
        ("success probability", summary["success_probability"]),
        ("norm drift", summary["norm_drift"]),
        ("steps (rejected)", f"{summary['steps_taken']} ({summary['rejected_steps']})"),
        ("best match", summary["best_match"]),
    ]
    console.print(summary_panel("Search", rows, style))


def render_gap(summary: Mapping[str, Any]) -> None:
    rows = [
        ("minimum gap", summary["min_gap"]),
        ("s*", summary["s_star"]),
        ("grid points", summary["grid_points"]),
        ("refined", summary["refined"]),
    ]
    console.print(summary_panel("Gap", rows))


def render_fits(fits: Iterable[Mapping[str, Any]], failed: int = 0) -> None:
    table = Table(title="Scaling fits", expand=False, padding=(0, 1, 0, 1))
    table.add_column("Algorithm", style="cyan")
    table.add_column("alpha", justify="right", style="bold white")
    table.add_column("stderr", justify="right", style="dim")
    table.add_column("n", justify="right", style="green")
    for fit in fits:
        n_values = fit["n_values"]
        table.add_row(
            fit["algorithm"],
            f"{fit['alpha']:.4f}",
            f"{fit['stderr']:.2g}",
            f"{n_values[0]}..{n_values[-1]}",
        )
    console.print(table)
    if failed:
        console.print(f"[yellow]{failed} instance(s) failed and were excluded from the fits[/yellow]")


def render_perturbative(summary: Mapping[str, Any], title: Optional[str] = None) -> None:
    rows = [
        ("n", summary["n"]),
        ("|S+|", summary["s_plus"]),
        ("|S-|", summary["s_minus"]),
        ("alpha estimate", summary["alpha_estimate"]),
        ("T global ~", summary["t_global"]),
        ("T local ~", summary["t_local"]),
    ]
    console.print(summary_panel(title or "Perturbative estimate", rows))
