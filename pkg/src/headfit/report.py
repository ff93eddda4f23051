"""Figure rendering for replay reports.

Renders per-frame error/IoU curves and a per-DOF summary chart next to the
CSV/JSON the replay produced.  Everything draws through the Agg backend so
reports work headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .evaluation import AggregateStats, MetricsRow  # noqa: E402


def render_report_figures(rows: list[MetricsRow], agg: AggregateStats,
                          out_dir) -> list[Path]:
    """Write errors.png, iou.png and per_dof.png under out_dir; returns the
    paths in that order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seq = np.array([r.seq for r in rows])
    written = []

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(seq, [r.e_w_pct for r in rows], label="width error [%]", lw=1.2)
    ax.plot(seq, [r.e_h_pct for r in rows], label="height error [%]", lw=1.2)
    ax.set_xlabel("frame")
    ax.set_ylabel("deviation [%]")
    ax.set_title("Overlay dimension error per frame")
    ax.legend()
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, out / "errors.png"))

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(seq, [r.iou for r in rows], color="tab:green", lw=1.2)
    ax.set_xlabel("frame")
    ax.set_ylabel("IoU")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Boundary IoU per frame")
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, out / "iou.png"))

    dofs = sorted(agg.per_dof)
    x = np.arange(len(dofs))
    fig, (ax_err, ax_iou) = plt.subplots(1, 2, figsize=(10, 4.5))
    width = 0.35
    ew = [agg.per_dof[d]["e_w_pct"] for d in dofs]
    eh = [agg.per_dof[d]["e_h_pct"] for d in dofs]
    ax_err.bar(x - width / 2, [s.mean for s in ew], width,
               yerr=[s.std for s in ew], capsize=3, label="e_w")
    ax_err.bar(x + width / 2, [s.mean for s in eh], width,
               yerr=[s.std for s in eh], capsize=3, label="e_h")
    ax_err.set_xticks(x, dofs)
    ax_err.set_ylabel("deviation [%]")
    ax_err.set_title("Dimension error by DOF")
    ax_err.legend()
    io = [agg.per_dof[d]["iou"] for d in dofs]
    ax_iou.bar(x, [s.mean for s in io], width * 2, yerr=[s.std for s in io],
               capsize=3, color="tab:green")
    ax_iou.set_xticks(x, dofs)
    ax_iou.set_ylim(0.0, 1.05)
    ax_iou.set_title("IoU by DOF")
    written.append(_save(fig, out / "per_dof.png"))

    return written


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
