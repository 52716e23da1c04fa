"""Experiment runners behind the CLI. Each writes a CSV (normative) and a figure rendered from it."""

from __future__ import annotations

import csv
import logging
import math
from pathlib import Path

import numpy as np

from . import plotting
from .plotting import read_csv  # noqa: F401
from .channel import Scenario, draw, iid_spectrum, receive_correlation_spectrum, write_hch1
from .errors import InfeasibleError, OutputError
from .precoding import random_phase
from .rates import collect_trial_rates, db_to_linear, summarize, theoretical_zf_rate

log = logging.getLogger(__name__)

SE_COLUMNS = ["scheme", "snr_db", "sum_rate", "std_error", "n_trials", "config_hash", "variant"]
EIG_COLUMNS = ["spacing", "index", "eigenvalue", "variant"]
THEORY_COLUMNS = [
    "variant", "snr_db", "zf_sim", "zf_std_error", "zf_theory", "relative_gap",
    "mmse", "mmse_std_error", "n_trials", "config_hash",
]


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return x


def write_csv(path: Path, columns, rows, header: str) -> Path:
    """Write rows under a ``#`` comment line carrying the config hash and seed."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(f"# {header}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(row[c]) for c in columns])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def _header(cfg, experiment):
    return f"experiment={experiment} seed={cfg.seed} config_hash={cfg.config_hash()} trials={cfg.n_trials}"


def _phase(cfg, scenario):
    if cfg.phase == "unit":
        return None
    return random_phase(scenario.tx.n_elements, np.random.default_rng([cfg.seed, 0x5048]))


def run_eig_spectrum(cfg) -> dict:
    """Receive-correlation eigenvalues per sweep variant plus the i.i.d. reference."""
    rows = []
    variants = cfg.variants()
    for v in variants:
        sc = Scenario(v.tx, v.rx, 1)
        spec = receive_correlation_spectrum(sc.variances[0], sc.rx_bases[0])
        for i, ev in enumerate(spec.eigenvalues, start=1):
            rows.append({"spacing": float(v.rx.spacing), "index": i, "eigenvalue": float(ev), "variant": v.label})
        log.info("%s: %d harmonics", v.label, sc.rx_bases[0].size)
    n_ref = variants[0].rx.n_elements
    for i, ev in enumerate(iid_spectrum(n_ref).eigenvalues, start=1):
        rows.append({"spacing": "iid", "index": i, "eigenvalue": float(ev), "variant": "iid"})
    out = Path(cfg.output_dir)
    csv_path = write_csv(out / "eig_spectrum.csv", EIG_COLUMNS, rows, _header(cfg, "eig-spectrum"))
    fig_path = plotting.plot_eig_spectrum(csv_path, out / "eig_spectrum.svg")
    return {"csv": csv_path, "figure": fig_path, "rows": rows}


def run_se_sweep(cfg) -> dict:
    """SE against SNR for every requested scheme and sweep variant.

    ZF and MMSE are skipped, with a warning, for variants that have more
    streams than transmit harmonics.
    """
    rows, skipped = [], []
    for v in cfg.variants():
        sc = Scenario(v.tx, v.rx, cfg.users)
        schemes = list(cfg.schemes)
        if sc.n_s < sc.n_streams:
            dropped = [s for s in schemes if s in ("zf", "mmse")]
            schemes = [s for s in schemes if s not in dropped]
            if dropped:
                msg = f"{v.label}: {sc.n_streams} streams > {sc.n_s} harmonics, skipping {dropped}"
                log.warning(msg)
                skipped.append(msg)
        if not schemes:
            continue
        rates = collect_trial_rates(sc, schemes, cfg.snr_grid_db, cfg.n_trials, cfg.seed,
                                    cfg.normalization_variant, cfg.workers, _phase(cfg, sc))
        h = cfg.variant_hash(v)
        for s in schemes:
            for r in summarize(rates[s], s, cfg.snr_grid_db, sc.stream_counts):
                rows.append({"scheme": s, "snr_db": r.snr_db, "sum_rate": r.sum_rate, "std_error": r.std_error,
                             "n_trials": r.n_trials, "config_hash": h, "variant": v.label})
    out = Path(cfg.output_dir)
    csv_path = write_csv(out / "se_sweep.csv", SE_COLUMNS, rows, _header(cfg, "se-sweep"))
    fig_path = plotting.plot_se_sweep(csv_path, out / "se_sweep.svg")
    return {"csv": csv_path, "figure": fig_path, "rows": rows, "skipped": skipped}


def run_theory_vs_sim(cfg) -> dict:
    """Monte Carlo ZF, closed-form ZF and the MMSE benchmark per sweep variant."""
    rows, skipped = [], []
    for v in cfg.variants():
        sc = Scenario(v.tx, v.rx, cfg.users)
        if sc.n_s < sc.n_streams:
            msg = f"{v.label}: {sc.n_streams} streams > {sc.n_s} harmonics, variant skipped"
            log.warning(msg)
            skipped.append(msg)
            continue
        rates = collect_trial_rates(sc, ["zf", "mmse"], cfg.snr_grid_db, cfg.n_trials, cfg.seed,
                                    cfg.normalization_variant, cfg.workers, _phase(cfg, sc))
        zf = summarize(rates["zf"], "zf", cfg.snr_grid_db, sc.stream_counts)
        mmse = summarize(rates["mmse"], "mmse", cfg.snr_grid_db, sc.stream_counts)
        h = cfg.variant_hash(v)
        for z, m in zip(zf, mmse):
            th = theoretical_zf_rate(sc.variances, float(db_to_linear(z.snr_db)),
                                     normalization=cfg.normalization_variant).sum_rate
            gap = abs(th - z.sum_rate) / z.sum_rate if z.sum_rate > 0 else math.nan
            rows.append({"variant": v.label, "snr_db": z.snr_db, "zf_sim": z.sum_rate, "zf_std_error": z.std_error,
                         "zf_theory": th, "relative_gap": gap, "mmse": m.sum_rate, "mmse_std_error": m.std_error,
                         "n_trials": z.n_trials, "config_hash": h})
    if not rows:
        raise InfeasibleError("no ZF-feasible variant in config: " + "; ".join(skipped))
    out = Path(cfg.output_dir)
    csv_path = write_csv(out / "theory_vs_sim.csv", THEORY_COLUMNS, rows, _header(cfg, "theory-vs-sim"))
    fig_path = plotting.plot_theory_vs_sim(csv_path, out / "theory_vs_sim.svg")
    return {"csv": csv_path, "figure": fig_path, "rows": rows, "skipped": skipped}


def channel_dump(cfg, n: int | None = None) -> Path:
    """Write ``n`` realizations of the first sweep variant, trials ``0..n-1``, to ``channels.hch1``."""
    n = cfg.dump_count if n is None else n
    v = cfg.variants()[0]
    sc = Scenario(v.tx, v.rx, cfg.users)
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc}") from exc
    return write_hch1(out / "channels.hch1", sc, [draw(sc, cfg.seed, t) for t in range(n)], cfg.seed)


RUNNERS = {
    "eig-spectrum": run_eig_spectrum,
    "se-sweep": run_se_sweep,
    "theory-vs-sim": run_theory_vs_sim,
}
