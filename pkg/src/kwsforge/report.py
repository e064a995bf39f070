"""Figure rendering for training and prediction reports.

Figures are written next to their delimited outputs (history TSV, score
lines) so a run directory is self-describing.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_history(history, path) -> None:
    """Training loss and validation accuracy curves over epochs."""
    epochs = [h.epoch for h in history]
    losses = [h.train_loss for h in history]
    val = [h.val_accuracy for h in history]

    fig, ax_loss = plt.subplots(figsize=(7, 4))
    ax_loss.plot(epochs, losses, color="tab:blue", label="train loss")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss", color="tab:blue")
    ax_loss.tick_params(axis="y", labelcolor="tab:blue")

    if np.any(np.isfinite(val)):
        ax_acc = ax_loss.twinx()
        ax_acc.plot(epochs, val, color="tab:orange", label="val accuracy")
        ax_acc.set_ylabel("validation accuracy", color="tab:orange")
        ax_acc.tick_params(axis="y", labelcolor="tab:orange")
        ax_acc.set_ylim(0, 1)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_scores(labels, scores, path) -> None:
    """Horizontal bar chart of per-class softmax scores for one clip."""
    order = np.argsort(scores)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.barh(range(len(labels)), [scores[i] for i in order], color="tab:blue")
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels([labels[i] for i in order])
    ax.set_xlabel("probability")
    ax.set_xlim(0, 1)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
