"""Figure rendering for suite results.

One vector-graphic file per (scenario, threshold) pair, with one panel per
metric: the estimated decisive-and-correct probability, the cumulative log
Bayes factor, and the posterior of the true hypothesis.  Each strategy is a
solid mean line with a +/- one standard deviation band over seeds.

Figures are drawn directly on matplotlib Figure objects (no pyplot, no global
backend state), so rendering is safe from worker threads and headless boxes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from matplotlib.figure import Figure

from .harness import AggregateRow

_PANELS = (
    ("pdc_est", "P(decisive and correct)"),
    ("log_bf01", "cumulative log BF01"),
    ("posterior_gt", "posterior of true hypothesis"),
)

_STRATEGY_LABELS = {
    "pdc": "decisive-evidence max",
    "infogain": "information gain",
    "random": "random",
}

_STRATEGY_COLORS = {"pdc": "C0", "infogain": "C1", "random": "C2"}


def render_suite_figures(
    aggregates: Sequence[AggregateRow],
    out_dir: str | Path,
    stem: str = "results",
    fmt: str = "pdf",
) -> list[Path]:
    """Write one figure per (scenario, k0) group; returns the created paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for scenario, k0 in sorted({(row.scenario, row.k0) for row in aggregates}):
        rows = [r for r in aggregates if r.scenario == scenario and r.k0 == k0]
        fig = _scenario_figure(rows, scenario, k0)
        path = out_dir / f"{stem}_{scenario}_k0_{k0:g}.{fmt}"
        try:
            fig.savefig(path)
        except OSError as exc:
            raise OSError(f"could not write figure to {path}: {exc}") from exc
        paths.append(path)
    return paths


def _scenario_figure(rows: Iterable[AggregateRow], scenario: str, k0: float) -> Figure:
    fig = Figure(figsize=(12.0, 3.6))
    axes = fig.subplots(1, len(_PANELS))
    strategies = sorted({r.strategy for r in rows})
    for ax, (metric, ylabel) in zip(axes, _PANELS):
        for strategy in strategies:
            series = sorted(
                (r for r in rows if r.strategy == strategy), key=lambda r: r.step
            )
            steps = [r.step for r in series]
            mean = [getattr(r, f"mean_{metric}") for r in series]
            std = [getattr(r, f"std_{metric}") for r in series]
            color = _STRATEGY_COLORS.get(strategy)
            ax.plot(steps, mean, label=_STRATEGY_LABELS.get(strategy, strategy), color=color)
            ax.fill_between(
                steps,
                [m - s for m, s in zip(mean, std)],
                [m + s for m, s in zip(mean, std)],
                alpha=0.2,
                color=color,
                linewidth=0,
            )
        ax.set_xlabel("interventions")
        ax.set_ylabel(ylabel)
    axes[0].legend(loc="best", fontsize="small")
    fig.suptitle(f"scenario {scenario}, k0 = {k0:g}")
    fig.tight_layout()
    return fig
