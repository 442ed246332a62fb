"""Figure rendering for run reports.

Figures are drawn on bare ``Figure`` objects (no pyplot state), so rendering
works headless and from worker threads.
"""

from __future__ import annotations

import math

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from matplotlib.patches import Circle

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "savefig.dpi": 150,
}


def _new_figure(width=6.0, height=None):
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    fig = Figure(figsize=(width, height or width * golden))
    FigureCanvasAgg(fig)
    return fig


def render_scene(plotdata, path):
    """Obstacles (raw and inflated), blocked nodes, planned path and arm snapshots."""
    with matplotlib.rc_context(STYLE):
        fig = _new_figure(6.0, 5.0)
        ax = fig.add_subplot(1, 1, 1)
        g = plotdata["grid"]

        for o in plotdata["obstacles"]:
            ax.add_patch(Circle((o["cx"], o["cy"]), o["r_inflated"], fill=False,
                                ls="--", lw=0.8, ec="0.45"))
            ax.add_patch(Circle((o["cx"], o["cy"]), o["r"], fc="0.75", ec="0.3"))

        if plotdata["blocked"]:
            xs = [g["xmin"] + g["dx"] * j for _, j in plotdata["blocked"]]
            ys = [g["ymin"] + g["dy"] * i for i, _ in plotdata["blocked"]]
            ax.plot(xs, ys, ls="none", marker="s", ms=2, color="tab:red", alpha=0.35,
                    label="blocked nodes")
        ax.plot([g["xmin"], g["xmax"], g["xmax"], g["xmin"], g["xmin"]],
                [g["ymin"], g["ymin"], g["ymax"], g["ymax"], g["ymin"]],
                color="0.6", lw=0.6, label="grid")

        snaps = plotdata["snapshots"]
        cmap = matplotlib.colormaps["viridis"]
        for k, snap in enumerate(snaps):
            xs, ys = zip(*snap["points"])
            shade = cmap(k / max(1, len(snaps) - 1))
            ax.plot(xs, ys, "-o", ms=2.5, color=shade, alpha=0.8,
                    label="arm" if k == 0 else None)

        if plotdata["path"]:
            px, py = zip(*plotdata["path"])
            ax.plot(px, py, color="tab:orange", lw=1.6, label="end-effector path")
        ax.plot(*plotdata["goal"], marker="*", ms=9, color="tab:orange", ls="none")

        ax.set_aspect("equal")
        ax.autoscale_view()
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        fig.savefig(path)
    return path


def render_clearance(step_rows, path):
    """Per-step joint increment norm and minimum clearance margin."""
    with matplotlib.rc_context(STYLE):
        fig = _new_figure(6.0)
        ax1 = fig.add_subplot(2, 1, 1)
        ax2 = fig.add_subplot(2, 1, 2, sharex=ax1)
        steps = [r[0] for r in step_rows]
        ax1.plot(steps, [r[3] for r in step_rows], color="tab:blue")
        ax1.set_ylabel(r"$\|\Delta q\|$")
        margins = [r[5] for r in step_rows]
        if margins and all(math.isfinite(m) for m in margins):
            ax2.plot(steps, margins, color="tab:green")
            ax2.axhline(0.0, color="0.4", lw=0.8, ls=":")
        ax2.set_ylabel("min clearance margin")
        ax2.set_xlabel("step")
        fig.tight_layout()
        fig.savefig(path)
    return path
