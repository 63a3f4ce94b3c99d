"""SVG line plots with plain-text data companions."""

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .io import write_dat

LOGLOG = "loglog"
LINEAR = "linear"


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    kind: str = "data"


def series_from_estimate(est, m=1, alpha=None, label=None):
    from ..spectra import smooth_moving_average

    y = est.kappa_m(m)
    if alpha:
        y = smooth_moving_average(est.times, y, alpha)
    if label is None:
        label = f"N={est.N}, L={est.L}"
    return Series(label, est.tau, y)


def _slug(text):
    return re.sub(r"[^A-Za-z0-9.=-]+", "_", text).strip("_") or "series"


def emit_plot(series, overlays=(), style=LOGLOG, path="plot.svg", guides=(),
              xlabel=r"$\tau$", ylabel=r"$\kappa$", title=None):
    """Write ``path`` (SVG) plus one ``.dat`` file per series and overlay.

    ``guides`` are x positions drawn as dashed grey vertical lines, e.g.
    the subsystem and full Heisenberg times.  Returns the written paths.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = list(series)
    overlays = list(overlays)
    if not series and not overlays:
        raise ValueError("nothing to plot")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.6))
    written = []
    for i, s in enumerate(series):
        ax.plot(s.x, s.y, ".", ms=3, label=s.label, color=f"C{i % 10}")
        written.append(write_dat(path.with_name(f"{path.stem}.data.{i}.{_slug(s.label)}.dat"),
                                 [s.x, s.y], ["x", "y"]))
    for i, c in enumerate(overlays):
        ax.plot(c.x, c.values, "-", color="k", lw=1.2)
        written.append(write_dat(path.with_name(f"{path.stem}.theory.{i}.{_slug(c.tag)}.dat"),
                                 [c.x, c.values], [c.xname, "value"]))
    for g in guides:
        ax.axvline(g, ls="--", color="0.6", lw=0.9)
    if style == LOGLOG:
        ax.set_xscale("log")
        ax.set_yscale("log")
    elif style != LINEAR:
        raise ValueError(f"unknown style {style!r}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if series:
        ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    except OSError as exc:
        raise OSError(f"cannot write plot {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return [path] + written


def emit_histogram(samples_by_label, curves, path, bins=60, s_max=4.0, xlabel="s", ylabel="p(s)"):
    """Spacing histograms with reference densities ``curves`` (label -> f)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.6))
    written = []
    edges = np.linspace(0, s_max, bins + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    for i, (label, s) in enumerate(samples_by_label.items()):
        dens, _ = np.histogram(s, bins=edges, density=False)
        dens = dens / (len(s) * np.diff(edges))
        ax.step(centers, dens, where="mid", label=label, color=f"C{i % 10}")
        written.append(write_dat(path.with_name(f"{path.stem}.data.{i}.{_slug(label)}.dat"),
                                 [centers, dens], ["s", "density"]))
    s = np.linspace(0, s_max, 400)
    for (label, f), ls in zip(curves.items(), ("-", "--", ":")):
        ax.plot(s, f(s), ls, color="k", label=label)
        written.append(write_dat(path.with_name(f"{path.stem}.theory.{_slug(label)}.dat"),
                                 [s, f(s)], ["s", "density"]))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return [path] + written
