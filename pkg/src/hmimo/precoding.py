"""Linear downlink precoders on the wavenumber-domain effective channel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DegenerateChannelError, SingularityError, ValidationError

COND_LIMIT = 1e12
SCHEMES = ("mrt", "zf", "mmse")
NORMALIZATIONS = ("total", "per-user")


@dataclass(frozen=True)
class EffectiveChannel:
    """``H_a U_s^H diag(phi)``, shape ``(K, N_s)`` with ``K = sum of n_r over users``."""

    matrix: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)
    stream_counts: tuple

    @property
    def n_streams(self) -> int:
        return self.matrix.shape[0]

    @property
    def users(self) -> int:
        return len(self.stream_counts)


@dataclass(frozen=True)
class Precoder:
    matrix: np.ndarray = field(repr=False)
    scheme: str
    normalization: str = "total"
    # squared norms of the unnormalized columns f_i; for ZF these are 1/beta_i
    column_norms_sq: np.ndarray = field(default=None, repr=False)


def unit_phase(n: int) -> np.ndarray:
    return np.ones(n, dtype=complex)


def random_phase(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))


def effective_channel(realization, tx_basis, phase=None, atol: float = 1e-9) -> EffectiveChannel:
    h_a = realization.stacked_wavenumber
    n_el = tx_basis.n_elements
    phase = unit_phase(n_el) if phase is None else np.asarray(phase, dtype=complex)
    if phase.shape != (n_el,):
        raise ValidationError(f"phase vector must have length {n_el}, got shape {phase.shape}")
    if np.max(np.abs(np.abs(phase) - 1.0)) > atol:
        raise ValidationError("phase vector entries must have unit modulus")
    mat = (h_a @ tx_basis.harmonic_matrix.conj().T) * phase
    counts = tuple(h.shape[0] for h in realization.per_user_wavenumber)
    return EffectiveChannel(mat, phase, counts)


def _stream_scale(ch: EffectiveChannel, normalization: str) -> np.ndarray:
    """Per-column power share: ``1/sqrt(K)`` or ``1/sqrt(n_r of the owning user)``."""
    if normalization == "total":
        return np.full(ch.n_streams, 1.0 / math.sqrt(ch.n_streams))
    if normalization == "per-user":
        return np.concatenate([np.full(n, 1.0 / math.sqrt(n)) for n in ch.stream_counts])
    raise ValidationError(f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}")


def _normalize(f: np.ndarray, ch, scheme, normalization) -> Precoder:
    norms_sq = np.einsum("ij,ij->j", f.conj(), f).real
    v = f / np.sqrt(norms_sq) * _stream_scale(ch, normalization)
    return Precoder(v, scheme, normalization, norms_sq)


def _gram_solve(h: np.ndarray, loading: float = 0.0) -> np.ndarray:
    """``H^H (H H^H + loading I)^{-1}`` via a Cholesky factorization of the Gram matrix."""
    k = h.shape[0]
    gram = h @ h.conj().T
    if loading:
        gram = gram + loading * np.eye(k)
    else:
        if h.shape[1] < k:
            raise SingularityError(
                f"zero-forcing needs at least {k} transmit dimensions, channel has {h.shape[1]}"
            )
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularityError(
                f"{k}x{k} stream Gram matrix is rank deficient (condition number {cond:.3g})"
            )
    c = linalg.cho_factor(gram, lower=True, check_finite=False)
    return linalg.cho_solve(c, h, check_finite=False).conj().T


def zf_precoder(ch: EffectiveChannel, normalization: str = "total") -> Precoder:
    """Zero-forcing ``F = H^H (H H^H)^{-1}`` with each column scaled to ``1/sqrt(K)`` norm."""
    return _normalize(_gram_solve(ch.matrix), ch, "zf", normalization)


def mrt_precoder(ch: EffectiveChannel, normalization: str = "total") -> Precoder:
    f = ch.matrix.conj().T
    if np.any(np.einsum("ij,ij->i", ch.matrix.conj(), ch.matrix).real == 0.0):
        raise DegenerateChannelError("matched filter undefined: channel has an all-zero stream row")
    return _normalize(f, ch, "mrt", normalization)


def mmse_precoder(ch: EffectiveChannel, p_u: float, noise_var: float = 1.0, normalization: str = "total") -> Precoder:
    """Regularized ZF with loading ``K noise_var / p_u``."""
    if not (p_u > 0 and noise_var > 0):
        raise ValidationError(f"MMSE needs positive power and noise variance, got {p_u}, {noise_var}")
    loading = ch.n_streams * noise_var / p_u
    return _normalize(_gram_solve(ch.matrix, loading), ch, "mmse", normalization)


def build_precoder(scheme: str, ch: EffectiveChannel, p_u: float = 1.0, noise_var: float = 1.0,
                   normalization: str = "total") -> Precoder:
    if scheme == "zf":
        return zf_precoder(ch, normalization)
    if scheme == "mrt":
        return mrt_precoder(ch, normalization)
    if scheme == "mmse":
        return mmse_precoder(ch, p_u, noise_var, normalization)
    raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
