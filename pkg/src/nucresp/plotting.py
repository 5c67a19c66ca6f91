"""Figures for command reports, written next to the tabular output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps repeated renders byte-identical
_META = {"Software": None}


def line_plot(
    rows: Sequence[dict],
    x: str,
    ys: Sequence[str],
    path: str | Path,
    *,
    title: str = "",
    ylabel: str = "",
    logy: bool = False,
    errors: dict[str, str] | None = None,
) -> Path:
    """One line per column in ``ys``; ``errors`` maps a column to its sigma column."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r[x] for r in rows]
    for y in ys:
        vals = [r.get(y) for r in rows]
        if all(v is None for v in vals):
            continue
        vals = [float("nan") if v is None else v for v in vals]
        err_col = (errors or {}).get(y)
        if err_col:
            errs = [r.get(err_col) or 0.0 for r in rows]
            ax.errorbar(xs, vals, yerr=errs, marker="o", ms=3, capsize=2, label=y)
        else:
            ax.plot(xs, vals, marker="o" if len(xs) < 30 else None, ms=3, label=y)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path
