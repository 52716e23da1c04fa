"""Monte Carlo channel draws in the wavenumber domain and their space-domain images."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, OutputError
from .geometry import ArrayGeometry, WavenumberBasis, build_harmonic_matrix
from .spectral import SpectralVariance, build_spectral_variance


def substream(seed: int, trial: int, user: int = 0) -> np.random.Generator:
    """Independent generator for one (trial, user) pair.

    Philox is counter-based and the key is derived from ``(seed, trial, user)``
    alone, so a trial draws the same numbers whatever order or process it
    runs in.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial), int(user)))
    return np.random.Generator(np.random.Philox(ss))


def sample_wavenumber_channel(sv: SpectralVariance, rng: np.random.Generator) -> np.ndarray:
    """``Sigma * W`` with ``W`` i.i.d. circularly-symmetric unit-variance Gaussian."""
    shape = (sv.n_r, sv.n_s)
    w = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)
    return sv.sigma_matrix * w


@dataclass(frozen=True)
class Scenario:
    """Downlink layout: one transmit surface serving ``users`` receive surfaces.

    ``rx`` is either one geometry shared by all users or a tuple with one
    geometry per user (e.g. different origin offsets).
    """

    tx: ArrayGeometry
    rx: object
    users: int = 1
    centered_cells: bool = True

    def __post_init__(self):
        if self.users < 1:
            raise ConfigurationError(f"users must be >= 1, got {self.users}")
        rx = self.rx if isinstance(self.rx, (tuple, list)) else (self.rx,) * self.users
        if len(rx) != self.users:
            raise ConfigurationError(f"{len(rx)} receive geometries given for {self.users} users")
        object.__setattr__(self, "rx", tuple(rx))

    @cached_property
    def tx_basis(self) -> WavenumberBasis:
        return build_harmonic_matrix(self.tx, "transmit")

    @cached_property
    def rx_bases(self) -> tuple:
        return tuple(build_harmonic_matrix(g, "receive") for g in self.rx)

    @cached_property
    def variances(self) -> tuple:
        return tuple(
            build_spectral_variance(self.tx_basis, b, self.centered_cells) for b in self.rx_bases
        )

    @property
    def n_s(self) -> int:
        return self.tx_basis.size

    @property
    def stream_counts(self) -> tuple:
        return tuple(b.size for b in self.rx_bases)

    @property
    def n_streams(self) -> int:
        return sum(self.stream_counts)

    def describe(self) -> str:
        rx = {g.describe() for g in self.rx}
        return f"tx {self.tx.describe()} / rx {','.join(sorted(rx))} / M={self.users}"


@dataclass(frozen=True)
class ChannelRealization:
    """One Monte Carlo draw for all users, stacked user-major."""

    per_user_wavenumber: tuple = field(repr=False)
    per_user_space: tuple = field(repr=False)
    seed: int
    trial_index: int

    @property
    def stacked_wavenumber(self) -> np.ndarray:
        return np.vstack(self.per_user_wavenumber)

    @property
    def stacked_space(self) -> np.ndarray:
        return np.vstack(self.per_user_space)

    @property
    def users(self) -> int:
        return len(self.per_user_wavenumber)


def assemble_multiuser_channel(
    variances, tx_basis: WavenumberBasis, rx_bases, seed: int, trial_index: int
) -> ChannelRealization:
    """Draw every user's wavenumber channel and map it to the space domain.

    User ``m`` draws from ``substream(seed, trial_index, m)``; its space-domain
    channel is ``U_r^(m) H_a^(m) U_s^H``.
    """
    variances, rx_bases = tuple(variances), tuple(rx_bases)
    if len(variances) != len(rx_bases):
        raise ConfigurationError(f"{len(variances)} variance sets for {len(rx_bases)} receive bases")
    us_h = tx_basis.harmonic_matrix.conj().T
    h_a, h = [], []
    for m, (sv, rb) in enumerate(zip(variances, rx_bases)):
        if sv.n_s != tx_basis.size or sv.n_r != rb.size:
            raise ConfigurationError(
                f"user {m}: variances are {sv.n_r}x{sv.n_s} but bases give {rb.size}x{tx_basis.size}"
            )
        ha = sample_wavenumber_channel(sv, substream(seed, trial_index, m))
        h_a.append(ha)
        h.append(rb.harmonic_matrix @ ha @ us_h)
    return ChannelRealization(tuple(h_a), tuple(h), int(seed), int(trial_index))


def draw(scenario: Scenario, seed: int, trial_index: int) -> ChannelRealization:
    return assemble_multiuser_channel(
        scenario.variances, scenario.tx_basis, scenario.rx_bases, seed, trial_index
    )


def numerical_rank(a: np.ndarray, rtol: float = 1e-8) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


@dataclass(frozen=True)
class CorrelationSpectrum:
    eigenvalues: np.ndarray = field(repr=False)
    geometry_tag: str


def receive_correlation_spectrum(sv: SpectralVariance, rx_basis: WavenumberBasis) -> CorrelationSpectrum:
    """Eigenvalues (descending) of ``R = U_r diag(c rx_var) U_r^H`` with ``trace(R) = N_r``.

    This is the transmit-averaged receive covariance of the model, a modeling
    choice for the single-sided correlation. ``R`` is formed explicitly, so
    aliased harmonics at half-wavelength spacing are handled correctly.
    """
    u = rx_basis.harmonic_matrix
    r = (u * sv.rx_var) @ u.conj().T
    r *= rx_basis.n_elements / np.trace(r).real
    ev = np.linalg.eigvalsh((r + r.conj().T) / 2)[::-1]
    return CorrelationSpectrum(ev, rx_basis.geometry.describe())


def iid_spectrum(n_elements: int) -> CorrelationSpectrum:
    return CorrelationSpectrum(np.ones(n_elements), "iid")


# HCH1 container: magic, then little-endian uint32 M, N_r, N_s, n_r, n_s and
# uint64 seed. Each realization follows as the stacked wavenumber matrix
# (M*n_r x n_s) and the stacked space matrix (M*N_r x N_s), row-major complex64.
HCH1_MAGIC = b"HCH1"
_HEADER = struct.Struct("<4s5IQ")
HCH1_HEADER_SIZE = _HEADER.size


@dataclass(frozen=True)
class ChannelDump:
    users: int
    n_rx_elements: int
    n_tx_elements: int
    n_r: int
    n_s: int
    seed: int
    wavenumber: np.ndarray = field(repr=False)  # (count, M*n_r, n_s)
    space: np.ndarray = field(repr=False)  # (count, M*N_r, N_s)

    @property
    def count(self) -> int:
        return self.wavenumber.shape[0]


def write_hch1(path, scenario: Scenario, realizations, seed: int) -> Path:
    """Write realizations of ``scenario`` to an HCH1 file."""
    if len(set(scenario.stream_counts)) != 1 or len({g.n_elements for g in scenario.rx}) != 1:
        raise ConfigurationError("HCH1 requires every user to share n_r and N_r")
    path = Path(path)
    header = _HEADER.pack(
        HCH1_MAGIC,
        scenario.users,
        scenario.rx[0].n_elements,
        scenario.tx.n_elements,
        scenario.stream_counts[0],
        scenario.n_s,
        int(seed),
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            for r in realizations:
                fh.write(np.ascontiguousarray(r.stacked_wavenumber, dtype="<c8").tobytes())
                fh.write(np.ascontiguousarray(r.stacked_space, dtype="<c8").tobytes())
    except OSError as exc:
        raise OutputError(f"cannot write channel dump {path}: {exc}") from exc
    return path


def read_hch1(path) -> ChannelDump:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OutputError(f"cannot read channel dump {path}: {exc}") from exc
    if len(data) < _HEADER.size or data[:4] != HCH1_MAGIC:
        raise ConfigurationError(f"{path} is not an HCH1 file")
    _, m, nr_el, ns_el, n_r, n_s, seed = _HEADER.unpack_from(data)
    wav_shape = (m * n_r, n_s)
    spc_shape = (m * nr_el, ns_el)
    per = wav_shape[0] * wav_shape[1] + spc_shape[0] * spc_shape[1]
    payload = np.frombuffer(data, dtype="<c8", offset=_HEADER.size)
    if per == 0 or payload.size % per:
        raise ConfigurationError(f"{path}: payload size does not match header")
    blocks = payload.reshape(-1, per)
    split = wav_shape[0] * wav_shape[1]
    return ChannelDump(
        users=m,
        n_rx_elements=nr_el,
        n_tx_elements=ns_el,
        n_r=n_r,
        n_s=n_s,
        seed=seed,
        wavenumber=blocks[:, :split].reshape(-1, *wav_shape),
        space=blocks[:, split:].reshape(-1, *spc_shape),
    )
