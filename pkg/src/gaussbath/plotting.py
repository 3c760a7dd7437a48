"""Render a trajectory to a PNG next to its CSV.

Temperature goes on a right-hand axis; every other column shares the left
axis. Uses the non-interactive Agg backend.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_ENTROPIC = {"S_S", "S_E", "S_SE", "zeta", "D"}


def plot_record(record, path, width: float = 7.0) -> None:
    t = record.times
    labels = record.labels
    left = [c for c in labels if c != "T_eff"]
    fig, ax = plt.subplots(figsize=(width, 0.62 * width))
    for label in left:
        ax.plot(t, record.column(label), lw=1.2, label=label)
    ax.set_xlabel("t")
    if left:
        ax.set_ylabel("nats" if all(c in _ENTROPIC or c.startswith("MI(") for c in left) else "value")
    handles, names = ax.get_legend_handles_labels()
    if "T_eff" in labels:
        ax_t = ax.twinx() if left else ax
        (line,) = ax_t.plot(t, record.column("T_eff"), color="tab:green", lw=1.2, label="T_eff")
        ax_t.set_ylabel("T_eff")
        if ax_t is not ax:
            handles.append(line)
            names.append("T_eff")
    ax.legend(handles, names, loc="best", fontsize="small", frameon=False)
    spec = record.config.model
    ax.set_title(f"{record.config.name}: {spec.kind}, N={spec.n_modes}", fontsize="medium")
    ax.set_xlim(t[0], t[-1])
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
