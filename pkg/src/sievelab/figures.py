"""Optional figure rendering for report commands.

All functions write a PNG to a caller-supplied directory and return the
path.  matplotlib is forced onto the Agg backend so rendering works in
headless runs; nothing here ever opens a window.
"""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _finish(fig, out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_histogram(
    out_dir: str,
    name: str,
    values: Sequence[float],
    *,
    bins: int = 40,
    title: str = "",
    xlabel: str = "",
) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.hist(list(values), bins=bins, color="#3b6ea5", edgecolor="white")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    return _finish(fig, out_dir, name)


def save_series(
    out_dir: str,
    name: str,
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(list(xs), list(ys), marker="o", markersize=3, color="#3b6ea5")
    if logx:
        ax.set_xscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return _finish(fig, out_dir, name)


def save_convergence(
    out_dir: str,
    name: str,
    xs: Sequence[float],
    ys: Sequence[float],
    target: float,
    *,
    title: str = "",
    xlabel: str = "",
) -> str:
    """Series plus a horizontal reference line for the limiting value."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(list(xs), list(ys), marker="o", markersize=3, color="#3b6ea5")
    ax.axhline(target, color="#a53b3b", linestyle="--", linewidth=1.0)
    ax.set_xscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("partial product")
    ax.grid(True, alpha=0.3)
    return _finish(fig, out_dir, name)


def save_scatter(
    out_dir: str,
    name: str,
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.scatter(list(xs), list(ys), s=12, color="#3b6ea5", alpha=0.7)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return _finish(fig, out_dir, name)
