"""Figures and coordinate dumps for permutations built by the constructions."""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .perm import Permutation  # noqa: E402


def point_rows(pi: Permutation, groups: dict[int, str] | None = None, roles: dict[int, str] | None = None):
    """One row per point: position, value, group, role."""
    groups = groups or {}
    roles = roles or {}
    return [(i, v, groups.get(i, ""), roles.get(i, "")) for i, v in enumerate(pi.values, 1)]


def write_coords(path, pi: Permutation, groups=None, roles=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["position", "value", "group", "role"])
        w.writerows(point_rows(pi, groups, roles))


def plot_permutation(path, pi: Permutation, groups: dict[int, str] | None = None,
                     cuts=None, title: str | None = None, size: float = 6.0):
    """Scatter plot of the points (i, pi(i)), colored by group, with optional
    gridding lines from (column cuts, row cuts)."""
    fig, ax = plt.subplots(figsize=(size, size))
    groups = groups or {}
    names = sorted(set(groups.values()), key=_natural)
    cmap = plt.get_cmap("tab10" if len(names) <= 10 else "tab20")
    marker = 3 if pi.n > 60 else 8
    ungrouped = [(i, v) for i, v in enumerate(pi.values, 1) if i not in groups]
    if ungrouped:
        xs, ys = zip(*ungrouped)
        ax.plot(xs, ys, "o", ms=marker, color="0.3")
    for k, name in enumerate(names):
        pts = [(i, v) for i, v in enumerate(pi.values, 1) if groups.get(i) == name]
        xs, ys = zip(*pts)
        ax.plot(xs, ys, "o", ms=marker, color=cmap(k % cmap.N), label=name)
    if cuts is not None:
        cols, rows = cuts
        for c in cols[1:-1]:
            ax.axvline(c - 0.5, color="0.7", lw=0.6)
        for r in rows[1:-1]:
            ax.axhline(r - 0.5, color="0.7", lw=0.6)
    ax.set_xlim(0.5, pi.n + 0.5)
    ax.set_ylim(0.5, pi.n + 0.5)
    ax.set_aspect("equal")
    ax.set_xlabel("position")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    if names and len(names) <= 20:
        ax.legend(fontsize=7, loc="center left", bbox_to_anchor=(1.0, 0.5), frameon=False)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)


def plot_matrix(path, matrix, title: str | None = None):
    """Draw a gridding matrix: a rising or falling segment per non-empty cell."""
    from .constructions import Cell

    fig, ax = plt.subplots(figsize=(0.8 * matrix.width + 1, 0.8 * matrix.height + 1))
    for c in range(matrix.width):
        for r in range(matrix.height):
            cell = matrix.cells[c][r]
            if cell is Cell.INC:
                ax.plot([c + 0.15, c + 0.85], [r + 0.15, r + 0.85], "k-", lw=1.5)
            elif cell is Cell.DEC:
                ax.plot([c + 0.15, c + 0.85], [r + 0.85, r + 0.15], "k-", lw=1.5)
    ax.set_xticks(range(matrix.width + 1))
    ax.set_yticks(range(matrix.height + 1))
    ax.grid(True, color="0.8")
    ax.set_xlim(0, matrix.width)
    ax.set_ylim(0, matrix.height)
    ax.set_aspect("equal")
    ax.tick_params(labelbottom=False, labelleft=False)
    if title:
        ax.set_title(title)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)


def _natural(s: str):
    head = s.rstrip("0123456789")
    tail = s[len(head):]
    return head, int(tail) if tail else -1
