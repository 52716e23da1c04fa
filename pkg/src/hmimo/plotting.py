"""Figures rendered from the experiment CSVs.

Only the CSV is read, so any figure can be regenerated offline with
``hmimo replot``.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import OutputError  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.4),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "svg.hashsalt": "hmimo",
}
MARKERS = {"mrt": "s", "zf": "o", "mmse": "^"}


def read_csv(path) -> list:
    """Rows of an experiment CSV as dicts, skipping ``#`` comment lines."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def _save(fig, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, metadata={"Date": None} if path.suffix == ".svg" else None)
    except OSError as exc:
        raise OutputError(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path


def plot_eig_spectrum(csv_path, out_path):
    curves = defaultdict(list)
    for row in read_csv(csv_path):
        curves[row["variant"]].append((int(row["index"]), float(row["eigenvalue"])))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, pts in curves.items():
            x, y = zip(*sorted(pts))
            if label == "iid":
                ax.plot(x, y, "k:", label="i.i.d. Rayleigh")
            else:
                ax.plot(x, y, label=label)
        ax.set_xlabel("eigenvalue index")
        ax.set_ylabel("eigenvalue of R")
        ax.set_yscale("symlog", linthresh=1e-2)
        ax.legend()
        return _save(fig, out_path)


def plot_se_sweep(csv_path, out_path):
    curves = defaultdict(list)
    for row in read_csv(csv_path):
        curves[(row["variant"], row["scheme"])].append((float(row["snr_db"]), float(row["sum_rate"])))
    variants = sorted({v for v, _ in curves})
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for (variant, scheme), pts in sorted(curves.items()):
            x, y = zip(*sorted(pts))
            ls = ["-", "--", "-.", ":"][variants.index(variant) % 4]
            ax.plot(x, y, ls, marker=MARKERS.get(scheme, "."), label=f"{scheme.upper()}, {variant}")
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("SE [bit/s/Hz]")
        ax.legend()
        return _save(fig, out_path)


def plot_theory_vs_sim(csv_path, out_path):
    curves = defaultdict(list)
    for row in read_csv(csv_path):
        curves[row["variant"]].append(
            (float(row["snr_db"]), float(row["zf_sim"]), float(row["zf_theory"]), float(row["mmse"]))
        )
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k, (variant, pts) in enumerate(sorted(curves.items())):
            snr, zf, th, mmse = zip(*sorted(pts))
            color = f"C{k}"
            ax.plot(snr, zf, "o-", color=color, label=f"ZF, {variant}")
            ax.plot(snr, th, "x--", color=color, label=f"theoretical ZF, {variant}")
            ax.plot(snr, mmse, "^:", color=color, label=f"MMSE, {variant}")
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("SE [bit/s/Hz]")
        ax.legend()
        return _save(fig, out_path)


PLOTTERS = {
    "eig_spectrum": plot_eig_spectrum,
    "se_sweep": plot_se_sweep,
    "theory_vs_sim": plot_theory_vs_sim,
}


def replot(csv_path, out_path=None):
    """Render a figure for any experiment CSV, chosen by its file stem."""
    csv_path = Path(csv_path)
    try:
        plotter = PLOTTERS[csv_path.stem]
    except KeyError:
        raise OutputError(f"do not know how to plot {csv_path.name}; expected one of {sorted(PLOTTERS)}") from None
    return plotter(csv_path, out_path or csv_path.with_suffix(".svg"))
