"""Per-stream SINR, Monte Carlo spectral efficiency and the closed-form ZF rate."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel as chn
from .errors import ConfigurationError, InfeasibleError, SingularityError
from .precoding import SCHEMES, build_precoder, effective_channel
from .spectral import SpectralVariance, average_tx_variance


@dataclass(frozen=True)
class SeResult:
    """Spectral efficiency of one (scheme, SNR) point, in bit/s/Hz."""

    per_stream_rate: np.ndarray = field(repr=False)  # (M, n_r), trial means
    sum_rate: float
    snr_db: float
    scheme: str
    n_trials: int
    std_error: float


@dataclass(frozen=True)
class TheoreticalZfRate:
    per_stream_rate: np.ndarray = field(repr=False)  # (M, n_r)
    n_s: int
    n_streams: int
    dof: int
    snr_db: float

    @property
    def sum_rate(self) -> float:
        return math.fsum(self.per_stream_rate.ravel())


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def per_stream_sinr(ch, precoder, p_u: float, noise_var: float = 1.0) -> np.ndarray:
    """SINR of every stream, shape ``(M, n_r)``.

    Interference counts every other stream, same user or not.
    """
    g = np.abs(ch.matrix @ precoder.matrix) ** 2
    signal = np.diag(g)
    interference = g.sum(axis=1) - signal
    sinr = p_u * signal / (p_u * interference + noise_var)
    return _by_user(sinr, ch.stream_counts)


def _by_user(values, counts):
    if len(set(counts)) != 1:
        raise ConfigurationError(f"rate tables need equal stream counts per user, got {counts}")
    return np.asarray(values).reshape(len(counts), counts[0])


def zf_beta(h_a: np.ndarray) -> np.ndarray:
    """ZF stream gains ``1 / [(H_a H_a^H)^{-1}]_ii``."""
    gram = h_a @ h_a.conj().T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularityError(f"{gram.shape[0]}x{gram.shape[0]} Gram matrix is singular (cond {cond:.3g})")
    return 1.0 / np.real(np.diag(np.linalg.inv(gram)))


def zf_beta_determinant(h_a: np.ndarray) -> np.ndarray:
    """Same gains as :func:`zf_beta` from the ratio ``det(G) / det(G with row and column i removed)``."""
    gram = h_a @ h_a.conj().T
    k = gram.shape[0]
    full = np.linalg.slogdet(gram)[1]
    out = np.empty(k)
    for i in range(k):
        keep = [j for j in range(k) if j != i]
        minor = np.linalg.slogdet(gram[np.ix_(keep, keep)])[1] if keep else 0.0
        out[i] = math.exp(full - minor)
    return out


def theoretical_zf_rate(variances, p_u: float, noise_var: float = 1.0,
                        normalization: str = "total") -> TheoreticalZfRate:
    """Closed-form ZF rate from the average transmit variance.

    ``log2(1 + p_u / (K noise_var) * (n_s - K + 1) * N_r N_s * rx_var[i] * mean(tx_var))``.
    With ``normalization="per-user"`` the stream count ``K`` is replaced by the
    user's own ``n_r`` in both places.
    """
    variances = tuple(variances)
    n_s = variances[0].n_s
    counts = tuple(sv.n_r for sv in variances)
    k_total = sum(counts)
    if n_s < k_total:
        raise InfeasibleError(f"ZF infeasible: {k_total} streams but only {n_s} transmit harmonics")
    rows = []
    for sv in variances:
        k = k_total if normalization == "total" else sv.n_r
        dof = n_s - k + 1
        gain = dof * sv.n_rx_elements * sv.n_tx_elements * sv.rx_var * average_tx_variance(sv)
        rows.append(np.log2(1.0 + p_u / (k * noise_var) * gain))
    dof = n_s - (k_total if normalization == "total" else counts[0]) + 1
    snr_db = 10.0 * math.log10(p_u / noise_var) if p_u > 0 else -math.inf
    return TheoreticalZfRate(_by_user(np.concatenate(rows), counts), n_s, k_total, dof, snr_db)


@dataclass(frozen=True)
class BetaCheck:
    empirical_mean: np.ndarray = field(repr=False)  # per stream
    closed_form: np.ndarray = field(repr=False)
    n_trials: int

    @property
    def relative_deviation(self) -> np.ndarray:
        return np.abs(self.empirical_mean - self.closed_form) / self.closed_form


def expected_beta_check(variances, n_trials: int, seed: int = 0, normalization: str = "total") -> BetaCheck:
    """Empirical mean of the ZF gains versus ``(n_s - K + 1) N_r N_s rx_var[i] mean(tx_var)``."""
    variances = tuple(variances)
    n_s = variances[0].n_s
    k_total = sum(sv.n_r for sv in variances)
    if n_s < k_total:
        raise InfeasibleError(f"{k_total} streams exceed {n_s} transmit harmonics")
    acc = np.zeros(k_total)
    for t in range(n_trials):
        h_a = np.vstack([
            chn.sample_wavenumber_channel(sv, chn.substream(seed, t, m)) for m, sv in enumerate(variances)
        ])
        acc += zf_beta(h_a)
    closed = []
    for sv in variances:
        k = k_total if normalization == "total" else sv.n_r
        closed.append((n_s - k + 1) * sv.n_rx_elements * sv.n_tx_elements * sv.rx_var * average_tx_variance(sv))
    return BetaCheck(acc / n_trials, np.concatenate(closed), n_trials)


def check_feasible(scenario, schemes):
    needs_inverse = [s for s in schemes if s in ("zf", "mmse")]
    if "zf" in needs_inverse and scenario.n_s < scenario.n_streams:
        raise InfeasibleError(
            f"{scenario.describe()}: {scenario.n_streams} streams exceed {scenario.n_s} transmit harmonics"
        )
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {s!r}; expected one of {SCHEMES}")


def trial_rates(scenario, schemes, snr_db, seed, trials, normalization="total", phase=None,
                noise_var=1.0) -> dict:
    """Per-stream rates for a block of trials.

    Returns ``{scheme: array (len(trials), len(snr_db), K)}``.
    """
    p_grid = db_to_linear(snr_db) * noise_var
    trials = list(trials)
    k = scenario.n_streams
    out = {s: np.empty((len(trials), len(p_grid), k)) for s in schemes}
    for row, t in enumerate(trials):
        ch = effective_channel(chn.draw(scenario, seed, t), scenario.tx_basis, phase)
        fixed = {s: build_precoder(s, ch, normalization=normalization) for s in schemes if s != "mmse"}
        for c, p_u in enumerate(p_grid):
            for s in schemes:
                v = fixed.get(s) or build_precoder(s, ch, p_u, noise_var, normalization)
                out[s][row, c] = np.log2(1.0 + per_stream_sinr(ch, v, p_u, noise_var).ravel())
    return out


def _chunks(n, parts):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i] < bounds[i + 1]]


def collect_trial_rates(scenario, schemes, snr_db, n_trials, seed, normalization="total", workers=1,
                        phase=None) -> dict:
    """Run ``n_trials`` draws, optionally across processes; result is independent of ``workers``."""
    check_feasible(scenario, schemes)
    if n_trials < 1:
        raise ConfigurationError("n_trials must be >= 1")
    schemes, snr_db = list(schemes), list(snr_db)
    if workers <= 1:
        return trial_rates(scenario, schemes, snr_db, seed, range(n_trials), normalization, phase)
    blocks = _chunks(n_trials, workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(
            trial_rates,
            [scenario] * len(blocks), [schemes] * len(blocks), [snr_db] * len(blocks),
            [seed] * len(blocks), blocks, [normalization] * len(blocks), [phase] * len(blocks),
        ))
    return {s: np.concatenate([p[s] for p in parts], axis=0) for s in schemes}


def summarize(rates: np.ndarray, scheme: str, snr_db, stream_counts) -> list:
    """Turn an ``(n_trials, n_snr, K)`` rate array into one :class:`SeResult` per SNR."""
    n = rates.shape[0]
    results = []
    for c, snr in enumerate(snr_db):
        per_trial = [math.fsum(row) for row in rates[:, c, :]]
        mean = math.fsum(per_trial) / n
        std = float(np.std(per_trial, ddof=1)) if n > 1 else 0.0
        per_stream = np.array([math.fsum(col) / n for col in rates[:, c, :].T])
        results.append(SeResult(_by_user(per_stream, stream_counts), mean, float(snr), scheme, n,
                                std / math.sqrt(n)))
    return results


def monte_carlo_se(scenario, scheme, snr_db, n_trials: int = 800, seed: int = 0,
                   normalization: str = "total", workers: int = 1, phase=None) -> list:
    """Average sum rate of ``scheme`` over ``n_trials`` draws for every SNR (dB) in ``snr_db``."""
    rates = collect_trial_rates(scenario, [scheme], snr_db, n_trials, seed, normalization, workers, phase)
    return summarize(rates[scheme], scheme, snr_db, scenario.stream_counts)
