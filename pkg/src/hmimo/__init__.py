"""Wavenumber-domain channel model and linear precoding for multi-user holographic MIMO surfaces."""

from .channel import (
    ChannelRealization,
    CorrelationSpectrum,
    Scenario,
    assemble_multiuser_channel,
    read_hch1,
    receive_correlation_spectrum,
    sample_wavenumber_channel,
    substream,
    write_hch1,
)
from .geometry import ArrayGeometry, WavenumberBasis, build_harmonic_matrix, enumerate_lattice_ellipse, z_wavenumber
from .precoding import EffectiveChannel, Precoder, effective_channel, mmse_precoder, mrt_precoder, zf_precoder
from .rates import (
    SeResult,
    TheoreticalZfRate,
    expected_beta_check,
    monte_carlo_se,
    per_stream_sinr,
    theoretical_zf_rate,
    zf_beta,
)
from .spectral import SpectralVariance, average_tx_variance, build_spectral_variance, cell_variance

__version__ = "0.1.0"
