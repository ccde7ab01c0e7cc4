"""Budget-vs-return charts, one SVG per environment, with byte-stable output."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .stats import SummaryRow, read_summary  # noqa: E402

_STYLE = {
    "svg.hashsalt": "wmcts",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
    "path.simplify": False,
}


@dataclass(frozen=True)
class PlotSpec:
    """Where to write and how to size the charts."""

    out_dir: Path
    width: float = 5.0
    height: float = 3.5
    band_alpha: float = 0.25


def _draw(env: str, rows: list[SummaryRow], spec: PlotSpec, path: Path) -> Path:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(spec.width, spec.height))
        for algo in sorted({r.algorithm for r in rows}):
            series = sorted((r for r in rows if r.algorithm == algo), key=lambda r: r.budget)
            x = [r.budget for r in series]
            y = [r.mean for r in series]
            se = [r.stderr or 0.0 for r in series]
            (line,) = ax.plot(x, y, marker="o", linewidth=2, label=algo)
            ax.fill_between(x, [m - s for m, s in zip(y, se)], [m + s for m, s in zip(y, se)],
                            color=line.get_color(), alpha=spec.band_alpha, linewidth=0)
        if rows:
            ax.set_xscale("log", base=2)
            ax.legend(loc="best", fontsize="small")
        ax.set_xlabel("simulations per step")
        ax.set_ylabel("discounted return")
        ax.set_title(env)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def emit_plot(summary_csv, spec: PlotSpec) -> list[Path]:
    """Render every environment in ``summary_csv``; an empty summary gives one empty chart ``empty.svg``."""
    rows = read_summary(summary_csv)
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not rows:
        return [_draw("", [], spec, out_dir / "empty.svg")]
    return [_draw(env, [r for r in rows if r.env == env], spec, out_dir / f"{env}.svg")
            for env in sorted({r.env for r in rows})]
