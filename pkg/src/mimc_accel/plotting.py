"""Figures for simulation reports. Everything renders off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _figure(width=6.4, ratio=0.55, **kw):
    with plt.rc_context(STYLE):
        return plt.subplots(figsize=(width, width * ratio), **kw)


def _save(fig, path):
    with plt.rc_context(STYLE):
        fig.savefig(path)
    plt.close(fig)
    return path


def plot_design_comparison(reports, path):
    """Amortized latency (log scale) and throughput per design."""
    fig, (ax_lat, ax_thr) = _figure(width=7.5, ratio=0.45, ncols=2)
    names = [r.variant for r in reports]
    x = np.arange(len(names))
    pipelined = ["C0" if r.batch_size > 1 else "C1" for r in reports]

    ax_lat.bar(x, [r.amortized_latency_us for r in reports], color=pipelined)
    ax_lat.set_yscale("log")
    ax_lat.set_ylabel("amortized latency (µs)")
    ax_thr.bar(x, [r.throughput_ops_per_s for r in reports], color=pipelined)
    ax_thr.set_yscale("log")
    ax_thr.set_ylabel("throughput (ops/s)")
    for ax in (ax_lat, ax_thr):
        ax.set_xticks(x)
        ax.set_xticklabels(names, rotation=30, ha="right")
    fig.legend(
        handles=[plt.Rectangle((0, 0), 1, 1, color="C0"), plt.Rectangle((0, 0), 1, 1, color="C1")],
        labels=["pipelined", "serial"],
        loc="upper center",
        ncol=2,
        frameon=False,
    )
    return _save(fig, path)


def plot_device_latency(rows, cpu_latency_us, path):
    """``rows`` are (device, mhz, latency_us); draws the CPU latency as a reference line."""
    fig, ax = _figure()
    labels = [f"{dev}\n{mhz:g} MHz" for dev, mhz, _ in rows]
    lat = [l for _, _, l in rows]
    bars = ax.bar(labels, lat, color="C0")
    ax.axhline(cpu_latency_us, color="C3", ls="--", lw=1)
    ax.text(len(rows) - 0.5, cpu_latency_us, f"CPU {cpu_latency_us:g} µs", color="C3", va="bottom", ha="right")
    for b, v in zip(bars, lat):
        ax.annotate(f"{cpu_latency_us / v:.1f}×", (b.get_x() + b.get_width() / 2, v), ha="center", va="bottom")
    ax.set_ylabel("amortized latency (µs)")
    return _save(fig, path)


def plot_occupancy(trace, path, max_cycles=120):
    """Unit-by-cycle map of which request holds each unit, first ``max_cycles`` cycles."""
    units = trace.units()
    index = {u: i for i, u in enumerate(units)}
    grid = np.full((len(units), max_cycles), np.nan)
    for cycle, unit, req, _ in trace.rows:
        if cycle < max_cycles:
            grid[index[unit], cycle] = req
    fig, ax = _figure(width=8.0, ratio=max(0.3, min(1.2, len(units) / 60)))
    ax.imshow(np.ma.masked_invalid(grid), aspect="auto", interpolation="nearest", cmap="tab20")
    ax.set_xlabel("cycle")
    ax.set_ylabel("unit")
    if len(units) <= 40:
        ax.set_yticks(range(len(units)))
        ax.set_yticklabels(units, fontsize=5)
    else:
        ax.set_yticks([])
    return _save(fig, path)
