"""Figure rendering for report paths (file output only, Agg backend)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import REFERENCE_RATIO_RANGE

__all__ = ["pipeline_figure", "bench_figure"]


def pipeline_figure(method_report, channel_names, path):
    """Two panels: per-trial decision values and class-mean mu ERD per channel."""
    outcomes = method_report.outcomes
    idx = np.array([o.trial_index for o in outcomes])
    decisions = np.array([o.decision_value for o in outcomes])
    true_left = np.array([o.true_label == "left" for o in outcomes])
    correct = np.array(
        [o.true_label == o.predicted_label for o in outcomes]
    )
    erd = np.array([o.mu_erd for o in outcomes])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    for mask, color, label in (
        (true_left, "tab:blue", "left"),
        (~true_left, "tab:red", "right"),
    ):
        ok = mask & correct
        bad = mask & ~correct
        ax1.scatter(idx[ok], decisions[ok], c=color, s=36, label=f"{label} (correct)")
        ax1.scatter(
            idx[bad], decisions[bad], facecolors="none", edgecolors=color,
            s=48, label=f"{label} (missed)",
        )
    ax1.axhline(0.0, color="gray", lw=0.8)
    ax1.set_xlabel("trial")
    ax1.set_ylabel("decision value")
    ax1.set_title(
        f"{method_report.method}: accuracy {method_report.accuracy:.2f}"
    )
    ax1.legend(fontsize=8, loc="best")

    x = np.arange(len(channel_names))
    width = 0.4
    ax2.bar(
        x - width / 2, erd[true_left].mean(axis=0), width, label="left trials",
        color="tab:blue",
    )
    ax2.bar(
        x + width / 2, erd[~true_left].mean(axis=0), width, label="right trials",
        color="tab:red",
    )
    ax2.axhline(0.0, color="gray", lw=0.8)
    ax2.set_xticks(x)
    ax2.set_xticklabels(channel_names, rotation=45, ha="right", fontsize=8)
    ax2.set_ylabel("mu ERD [%]")
    ax2.set_title("class-mean mu ERD per channel")
    ax2.legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def bench_figure(report, path):
    """Two panels: median times per dataset and the jacobi/schur ratio."""
    rows = report.rows
    x = np.arange(len(rows))
    jac = np.array([r.time_jacobi_s for r in rows])
    sch = np.array([r.time_schur_s for r in rows])
    ratio = np.array([r.ratio for r in rows])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    width = 0.4
    ax1.bar(x - width / 2, jac, width, label="jacobi", color="tab:orange")
    ax1.bar(x + width / 2, sch, width, label="schur", color="tab:green")
    ax1.set_xticks(x)
    ax1.set_xticklabels([str(r.dataset_id) for r in rows])
    ax1.set_xlabel("dataset")
    ax1.set_ylabel("median time [s]")
    ax1.set_title(f"separation time ({report.aggregation})")
    ax1.legend(fontsize=8)

    lo, hi = REFERENCE_RATIO_RANGE
    ax2.axhspan(lo, hi, color="tab:gray", alpha=0.25, label="reference range")
    ax2.plot(x, ratio, "o-", color="tab:purple", label="measured ratio")
    ax2.axhline(2.0, color="tab:red", ls="--", lw=1.0, label="acceptance floor")
    ax2.set_xticks(x)
    ax2.set_xticklabels([str(r.dataset_id) for r in rows])
    ax2.set_xlabel("dataset")
    ax2.set_ylabel("time ratio jacobi / schur")
    ax2.set_ylim(bottom=0.0)
    ax2.set_title("speedup of the Schur backend")
    ax2.legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
