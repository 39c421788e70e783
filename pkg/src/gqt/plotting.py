"""Static figures written to files (Agg backend, never interactive)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_objective_trace(trace, path):
    """Objective value per outer iteration on a log scale."""
    it = [row.iter for row in trace]
    f = np.array([row.objective for row in trace], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    positive = f > 0
    if positive.all():
        ax.semilogy(it, f, marker="o", ms=3)
    else:
        ax.plot(it, f, marker="o", ms=3)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("objective")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_singular_values(profiles, path):
    """One panel per mode; each line is the spectrum of one transformed slice.

    ``profiles`` maps the mode number to an array ``(n_slices, k)``.
    """
    modes = sorted(profiles)
    fig, axes = plt.subplots(1, len(modes), figsize=(4 * len(modes), 3.5), squeeze=False)
    for ax, w in zip(axes[0], modes):
        prof = np.asarray(profiles[w])
        idx = np.arange(1, prof.shape[1] + 1)
        floor = max(prof.max(), 1.0) * 1e-16 if prof.size else 1e-16
        for row in prof:
            ax.semilogy(idx, np.maximum(row, floor), lw=0.8, alpha=0.6)
        ax.set_title(f"mode {w}")
        ax.set_xlabel("index")
        ax.grid(True, alpha=0.3)
    axes[0][0].set_ylabel("singular value")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
