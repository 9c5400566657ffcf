"""Matplotlib renderings written next to delimited report outputs."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_stability_table(table, path):
    """Heatmap of dim H_l(BW_m) with the map verdicts overlaid."""
    ms = sorted({m for (m, _) in table.dims})
    ls = sorted({l for (_, l) in table.dims})
    grid = np.full((len(ls), len(ms)), np.nan)
    for (m, l), dim in table.dims.items():
        if dim is not None:
            grid[ls.index(l), ms.index(m)] = dim
    fig, ax = plt.subplots(figsize=(1.2 * len(ms) + 2, 1.0 * len(ls) + 2))
    im = ax.imshow(grid, origin="lower", cmap="Blues", aspect="auto")
    for (m, l), verdict in table.verdicts.items():
        mark = {"iso": "=", "injection-only": ">", "surjection-only": "<",
                "fail": "x", "untested": "?"}.get(verdict, "")
        style = "bold" if table.in_range(m, l) else "normal"
        ax.text(ms.index(m) - 0.38, ls.index(l) + 0.28, mark,
                fontsize=11, fontweight=style, color="darkred")
    for (m, l), dim in table.dims.items():
        if dim is not None:
            ax.text(ms.index(m), ls.index(l), str(dim), ha="center", va="center")
    ax.set_xticks(range(len(ms)), [str(m) for m in ms])
    ax.set_yticks(range(len(ls)), [str(l) for l in ls])
    ax.set_xlabel("m  (group index)")
    ax.set_ylabel("l  (homology degree)")
    ax.set_title(f"dim H_l(BW_m; F2), family {table.family} "
                 "(marks: map from m-1; bold = in stable range)")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_ss_page(page, path):
    """E^1 dimension grid with the d^1 ranks on the arrows."""
    ks = sorted({k for (k, _) in page.dims})
    ls = sorted({l for (_, l) in page.dims})
    grid = np.full((len(ls), len(ks)), np.nan)
    for (k, l), dim in page.dims.items():
        grid[ls.index(l), ks.index(k)] = dim
    fig, ax = plt.subplots(figsize=(1.4 * len(ks) + 2, 1.1 * len(ls) + 2))
    im = ax.imshow(grid, origin="lower", cmap="Greens", aspect="auto")
    for (k, l), dim in page.dims.items():
        ax.text(ks.index(k), ls.index(l), str(dim), ha="center", va="center")
    for (k, l), rank in page.d1_rank.items():
        if k - 1 in ks:
            ax.annotate(
                f"{rank}",
                xy=(ks.index(k) - 0.5, ls.index(l) + 0.18),
                fontsize=9,
                color="purple",
            )
            ax.annotate(
                "",
                xy=(ks.index(k) - 0.82, ls.index(l)),
                xytext=(ks.index(k) - 0.18, ls.index(l)),
                arrowprops={"arrowstyle": "->", "color": "purple", "lw": 0.9},
            )
    ax.set_xticks(range(len(ks)), [str(k) for k in ks])
    ax.set_yticks(range(len(ls)), [str(l) for l in ls])
    ax.set_xlabel("k")
    ax.set_ylabel("l")
    ax.set_title(f"E^1 page, family {page.family}, n = {page.n} (arrows: rank d^1)")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_filtration_trace(trace, n, path):
    """Chamber filtration profile: attachment size and type per step."""
    if not trace:
        return
    ms = [row["m"] for row in trace]
    sizes = [row["in_size"] for row in trace]
    colors = {"cone": "tab:blue", "boundary": "tab:red", "full-chamber": "tab:green"}
    fig, ax = plt.subplots(figsize=(max(6, len(ms) * 0.25), 4))
    ax.bar(ms, sizes, color=[colors.get(row["type"], "gray") for row in trace], width=0.8)
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in colors.values()]
    ax.legend(handles, list(colors), title="attachment", fontsize=8)
    ax.set_xlabel("filtration step m")
    ax.set_ylabel("|In(w_m)|")
    ax.set_title(f"chamber attachments, n = {n}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_campaign_summary(rows, path):
    """Pass/fail/skip counts per check kind."""
    if not rows:
        return
    kinds = sorted({row["kind"] for row in rows})
    statuses = ["pass", "fail", "budget-exceeded", "error"]
    colors = {"pass": "tab:green", "fail": "tab:red",
              "budget-exceeded": "tab:orange", "error": "black"}
    counts = {s: [sum(1 for r in rows if r["kind"] == k and r["status"] == s) for k in kinds]
              for s in statuses}
    fig, ax = plt.subplots(figsize=(max(6, len(kinds) * 0.9), 4))
    bottom = np.zeros(len(kinds))
    for s in statuses:
        ax.bar(kinds, counts[s], bottom=bottom, label=s, color=colors[s])
        bottom += np.array(counts[s], dtype=float)
    ax.set_ylabel("jobs")
    ax.set_title("campaign summary")
    ax.legend(fontsize=8)
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
