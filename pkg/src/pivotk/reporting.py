"""Display formatting shared by the CLI tables.

Probabilities print to three decimals, or two significant figures in
scientific notation below 1e-2; values beyond 1 - 1e-4 print as ~1.
Fee-unit amounts print to two decimals below 1 and as integers above.
"""

from __future__ import annotations

import io
from typing import Sequence

__all__ = [
    "format_probability",
    "format_fee_units",
    "displayed_fee_units",
    "format_usd",
    "format_usd_small",
    "format_usd_whole",
    "format_percent",
    "render_table",
    "render_csv",
]


def format_probability(p: float) -> str:
    if p < 0:
        raise ValueError("negative probability")
    if p > 1.0 - 1e-4:
        return "~1"
    if p == 0.0:
        return "0"
    if p >= 1e-2:
        return f"{p:.3f}"
    return f"{p:.1e}"


def format_fee_units(v: float) -> str:
    if abs(v) < 1.0:
        return f"{v:.2f}"
    return str(round(v))


def displayed_fee_units(v: float) -> float:
    """The numeric value the fee-unit formatter would show."""
    return float(format_fee_units(v))


def format_usd(v: float) -> str:
    """Two-decimal dollars; negligible amounts collapse to ~$0."""
    if abs(v) < 0.005:
        return "~$0"
    return f"${v:.2f}"


def format_usd_small(v: float) -> str:
    """Dollar format keeping sub-cent resolution for tiny bounties."""
    if v == 0:
        return "$0"
    if abs(v) < 0.01:
        return f"${v:.3f}"
    if abs(v) < 10:
        return f"${v:.2f}"
    return f"${round(v)}"


def format_usd_whole(v: float) -> str:
    """Whole dollars when integral, two decimals otherwise."""
    if float(v).is_integer():
        return f"${int(v)}"
    return f"${v:.2f}"


def format_percent(x: float) -> str:
    return f"{x * 100:.2f}%"


def render_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    out = io.StringIO()
    out.write("  ".join(h.rjust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    out.write("  ".join("-" * w for w in widths) + "\n")
    for row in rows:
        out.write("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() + "\n")
    return out.getvalue()


def render_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"
