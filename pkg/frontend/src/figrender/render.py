"""Batch rendering of the three comparison figures from sweep CSVs.

Each figure kind fixes the x-axis, the metric, and the axis labels; the
line style is keyed by scheme so reruns are pixel-identical. The
renderer never writes anything when the input holds no matching data.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .schema import SweepRow, read_sweep_csv  # noqa: E402

KINDS = {
    "fig4": dict(
        metric="sum_rate",
        sweep_name="snr_db",
        xlabel="SNR (dB)",
        ylabel="Sum rate (bits/s/Hz)",
        title="Sum rate vs SNR",
    ),
    "fig5": dict(
        metric="power_efficiency",
        sweep_name="n_users",
        xlabel="Number of users",
        ylabel="Power efficiency (bits/s/Hz/W)",
        title="Power efficiency vs number of users",
    ),
    "fig6": dict(
        metric="sum_rate",
        sweep_name="snr_db",
        xlabel="SNR (dB)",
        ylabel="Two-cell mean sum rate (bits/s/Hz)",
        title="Two-cell sum rate vs SNR",
    ),
}

_SCHEME_STYLE = {
    "fully_digital": dict(color="#1f77b4", marker="o", label="Fully digital"),
    "full_pahp": dict(color="#d62728", marker="s", label="Phased-array hybrid"),
    "lahp_adaptive": dict(color="#2ca02c", marker="^", label="Lens-array hybrid"),
}

_ESTIMATOR_LINESTYLE = {"perfect": "-"}  # everything else is dashed


class RenderError(ValueError):
    """Input cannot produce the requested figure."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str  # fig4 | fig5 | fig6
    output_path: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def _series(rows: list[SweepRow], kind: str) -> dict:
    settings = KINDS[kind]
    groups: dict[tuple, list[SweepRow]] = {}
    for row in rows:
        if row.metric != settings["metric"]:
            continue
        if row.sweep_name != settings["sweep_name"]:
            continue
        groups.setdefault((row.scheme, row.estimator), []).append(row)
    for key in groups:
        groups[key].sort(key=lambda r: r.sweep_value)
    return groups


def build_figure(rows: list[SweepRow], kind: str):
    """Matplotlib figure with one error-bar curve per (scheme, estimator)."""
    settings = KINDS[kind]
    groups = _series(rows, kind)
    if not groups:
        raise RenderError(
            f"no rows with metric {settings['metric']!r} over "
            f"{settings['sweep_name']!r}"
        )
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=120)
    for scheme, estimator in sorted(groups):
        series = groups[(scheme, estimator)]
        style = _SCHEME_STYLE[scheme]
        label = style["label"]
        if estimator != "perfect":
            label += f" ({estimator} CSI)"
        ax.errorbar(
            [r.sweep_value for r in series],
            [r.mean for r in series],
            yerr=[r.std_error for r in series],
            color=style["color"],
            marker=style["marker"],
            linestyle=_ESTIMATOR_LINESTYLE.get(estimator, "--"),
            markersize=4,
            capsize=2,
            label=label,
        )
    ax.set_xlabel(settings["xlabel"])
    ax.set_ylabel(settings["ylabel"])
    ax.set_title(settings["title"])
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> None:
    """Read the CSV, build the figure, and write the image file.

    Validation and figure construction both happen before the output
    path is touched, so a failing render leaves no partial file.
    """
    rows = read_sweep_csv(spec.input_csv)
    fig = build_figure(rows, spec.kind)
    try:
        fig.savefig(spec.output_path, format="png", metadata={"Software": None})
    finally:
        plt.close(fig)
