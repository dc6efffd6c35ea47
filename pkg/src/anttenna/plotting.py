"""Figure rendering for sweep and pattern reports.

Figures are built on bare :class:`matplotlib.figure.Figure` objects (no
pyplot state) and saved as SVG with a fixed hash salt and no date stamp,
so identical data gives byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

# 800 x 500 viewBox: matplotlib's SVG unit is 1/72 inch.
SVG_SIZE_IN = (800 / 72, 500 / 72)
SVG_DPI = 72

RC = {
    "svg.hashsalt": "anttenna",
    "svg.fonttype": "path",
    "font.size": 11,
    "axes.grid": True,
    "grid.alpha": 0.4,
    "lines.linewidth": 1.6,
}


def _save(fig: Figure, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def line_chart(x, y, xlabel: str, ylabel: str, title: str, path) -> Path:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = np.isfinite(x) & np.isfinite(y)
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=SVG_SIZE_IN, dpi=SVG_DPI)
        ax = fig.add_subplot()
        ax.plot(x[ok], y[ok], marker="o", markersize=3)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.tight_layout()
        return _save(fig, Path(path))


def sweep_charts(rows, out_dir, stem: str = "sweep") -> dict[str, Path]:
    out = Path(out_dir)
    f_ghz = [r.freq / 1e9 for r in rows]
    specs = {
        "s11": ([r.s11_db for r in rows], "|S11| (dB)", "Reflection coefficient"),
        "vswr": ([r.vswr for r in rows], "VSWR", "Voltage standing wave ratio"),
        "radiated_power": ([r.radiated_power for r in rows], "Radiated power (W)",
                           "Radiated power"),
    }
    paths = {}
    for key, (y, ylabel, title) in specs.items():
        paths[f"svg_{key}"] = line_chart(f_ghz, y, "Frequency (GHz)", ylabel, title,
                                         out / f"{stem}_{key}.svg")
    return paths


def pattern_cut_chart(angles_deg, gain_dbi, title: str, path, floor_db: float = -40.0) -> Path:
    """Polar plot of a pattern cut, clipped at ``floor_db`` below the peak."""
    a = np.radians(np.asarray(angles_deg, float))
    g = np.asarray(gain_dbi, float)
    peak = float(np.max(g[np.isfinite(g)])) if np.any(np.isfinite(g)) else 0.0
    lo = peak + floor_db
    r = np.clip(np.nan_to_num(g, neginf=lo), lo, None)
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=SVG_SIZE_IN, dpi=SVG_DPI)
        ax = fig.add_subplot(projection="polar")
        ax.set_theta_zero_location("N")
        ax.set_theta_direction(-1)
        ax.plot(np.append(a, a[:1]), np.append(r, r[:1]))
        ax.set_rlim(lo, peak + 1 if math.isfinite(peak) else 1)
        ax.set_title(title)
        fig.tight_layout()
        return _save(fig, Path(path))
