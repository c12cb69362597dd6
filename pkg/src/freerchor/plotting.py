"""Figures and tables for the static endpoint analysis report."""
from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .network import Broadcast, LocalStep, Received, Sent, collect, epp  # noqa: E402

EVENT_KINDS = (
    ("LocalStep", LocalStep, "#4c72b0"),
    ("Sent", Sent, "#dd8452"),
    ("Received", Received, "#55a868"),
    ("Broadcast", Broadcast, "#c44e52"),
)


def endpoint_events(choreography, locations) -> dict:
    return {loc: collect(epp(choreography, loc)) for loc in sorted(locations)}


def write_event_table(events: dict, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["role", "index", "event"])
        for loc, evs in events.items():
            for i, ev in enumerate(evs):
                writer.writerow([str(loc), i, str(ev)])
    return path


def plot_endpoint_events(events: dict, path, title: str | None = None) -> Path:
    """Stacked bar chart of static event kinds per endpoint."""
    path = Path(path)
    roles = [str(loc) for loc in events]
    counts = [Counter(type(ev) for ev in evs) for evs in events.values()]

    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(roles), 3.2))
    bottom = [0] * len(roles)
    for label, kind, color in EVENT_KINDS:
        heights = [c[kind] for c in counts]
        if any(heights):
            ax.bar(roles, heights, bottom=bottom, label=label, color=color, width=0.6)
            bottom = [b + h for b, h in zip(bottom, heights)]
    ax.set_ylabel("static events")
    ax.yaxis.get_major_locator().set_params(integer=True)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8, loc="upper left", bbox_to_anchor=(1.0, 1.0))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
