"""Figures for sweep results.

matplotlib is an optional dependency (``pip install .[plot]``) and is only
imported here.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 200,
}

BER_CURVES = (
    ("ber_noma_perfect", "NOMA, perfect SIC", "C0", "o-"),
    ("ber_noma_imperfect", "NOMA, imperfect SIC", "C0", "s--"),
    ("ber_rlnc_perfect", "RLNC-NOMA, perfect SIC", "C3", "o-"),
    ("ber_rlnc_imperfect", "RLNC-NOMA, imperfect SIC", "C3", "s--"),
)


def _positive(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if y > 0 and not math.isnan(y)]
    return [p[0] for p in pts], [p[1] for p in pts]


def plot_ber(ax, rows):
    alphas = [r.alpha for r in rows]
    for attr, label, color, fmt in BER_CURVES:
        xs, ys = _positive(alphas, [getattr(r, attr) for r in rows])
        if xs:
            ax.semilogy(xs, ys, fmt, color=color, label=label)
    ax.set_xlabel(r"power allocation coefficient $\alpha$")
    ax.set_ylabel("average BER")
    ax.legend(loc="best")


def plot_rates(ax, rows):
    alphas = [r.alpha for r in rows]
    ax.plot(alphas, [r.rate_noma_sum for r in rows], "o-", label="NOMA")
    ax.plot(alphas, [r.rate_oma_sum for r in rows], "s--", label="OMA")
    infeasible = [r.alpha for r in rows if not r.feasible]
    if infeasible:
        ax.plot(infeasible, [r.rate_noma_sum for r in rows if not r.feasible], "x", color="k",
                label="below min. throughput")
    ax.set_xlabel(r"power allocation coefficient $\alpha$")
    ax.set_ylabel("ergodic sum rate (bit/s/Hz)")
    ax.legend(loc="best")


def plot_sweep(rows, path, kinds=("ber", "rate"), width=7.0):
    """Render the BER and/or rate panels for ``rows`` to ``path``."""
    panels = [k for k in ("ber", "rate") if k in kinds]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(panels), figsize=(width, width * GOLDEN / max(1, len(panels) - 0.6)),
                                 squeeze=False)
        for ax, kind in zip(axes[0], panels):
            (plot_ber if kind == "ber" else plot_rates)(ax, rows)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
