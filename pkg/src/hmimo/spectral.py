"""Per-harmonic variances of the isotropic wavenumber spectrum.

Wavenumbers are normalized by the free-space wavenumber, so the propagating
region is the unit disk and the isotropic density is ``(1 - u^2 - v^2)^(-1/2)``,
whose integral over the disk is ``2 pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .geometry import ArrayGeometry, WavenumberBasis, enumerate_lattice_ellipse

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-11


def _column_integral(u, v0, v1):
    """Integral over v in [v0, v1] of (1 - u^2 - v^2)^(-1/2), clipped to the disk."""
    c = math.sqrt(max(0.0, 1.0 - u * u))
    if c == 0.0:
        return 0.0
    a = min(1.0, max(-1.0, v0 / c))
    b = min(1.0, max(-1.0, v1 / c))
    return math.asin(b) - math.asin(a)


def rectangle_integral(u0: float, u1: float, v0: float, v1: float) -> float:
    """Isotropic density integrated over ``[u0,u1] x [v0,v1]`` intersected with the unit disk.

    The v-integral is done in closed form, leaving a bounded integrand in u
    with kinks where the rectangle's horizontal edges cross the rim.
    """
    lo, hi = max(u0, -1.0), min(u1, 1.0)
    if lo >= hi or v0 >= 1.0 or v1 <= -1.0:
        return 0.0
    if (hi - lo) * math.pi < QUAD_EPSABS:
        # rounding slivers; the integrand is bounded by pi so the midpoint rule is exact enough
        return (hi - lo) * _column_integral(0.5 * (lo + hi), v0, v1)
    kinks = sorted(
        s * math.sqrt(1.0 - v * v)
        for v in (v0, v1)
        if abs(v) < 1.0
        for s in (-1.0, 1.0)
    )
    points = [p for p in kinks if lo < p < hi] + ([0.0] if lo < 0.0 < hi else [])
    val, _ = integrate.quad(
        _column_integral,
        lo,
        hi,
        args=(v0, v1),
        points=sorted(set(points)) or None,
        epsabs=QUAD_EPSABS,
        epsrel=QUAD_EPSREL,
        limit=200,
    )
    return max(val, 0.0)


def cell_bounds(m_x: int, m_y: int, length_x: float, length_y: float, centered: bool = True):
    """Normalized wavenumber rectangle of cell ``(m_x, m_y)``.

    With ``centered=True`` the cell is centered on the lattice point,
    ``[(m - 1/2)/L, (m + 1/2)/L]``; otherwise it starts at the lattice point,
    ``[m/L, (m + 1)/L]``. Lengths are in wavelengths.
    """
    shift = 0.5 if centered else 0.0
    return (
        (m_x - shift) / length_x,
        (m_x + 1.0 - shift) / length_x,
        (m_y - shift) / length_y,
        (m_y + 1.0 - shift) / length_y,
    )


def cell_variance(m_x: int, m_y: int, length_x: float, length_y: float, centered: bool = True) -> float:
    """Fraction of isotropic power falling in wavenumber cell ``(m_x, m_y)``.

    Returns a value in ``[0, 1]``; exactly 0 when the cell misses the disk.
    """
    return rectangle_integral(*cell_bounds(m_x, m_y, length_x, length_y, centered)) / (2.0 * math.pi)


@dataclass(frozen=True)
class SpectralVariance:
    """Separable transmit/receive variances of one link.

    ``sigma_matrix[i, j] = sqrt(N_r N_s rx_var[i] tx_var[j])`` is the entrywise
    standard deviation of the wavenumber-domain channel.
    """

    tx_var: np.ndarray = field(compare=False)
    rx_var: np.ndarray = field(compare=False)
    n_tx_elements: int
    n_rx_elements: int

    @property
    def n_s(self) -> int:
        return self.tx_var.size

    @property
    def n_r(self) -> int:
        return self.rx_var.size

    @property
    def sigma_matrix(self) -> np.ndarray:
        scale = self.n_rx_elements * self.n_tx_elements
        return np.sqrt(scale * np.outer(self.rx_var, self.tx_var))


@lru_cache(maxsize=64)
def side_variances(geometry: ArrayGeometry, centered: bool = True) -> np.ndarray:
    """Cell variances over the lattice ellipse of ``geometry``, renormalized to sum to 1."""
    lx, ly = geometry.length_x, geometry.length_y
    raw = np.array(
        [cell_variance(mx, my, lx, ly, centered) for mx, my in enumerate_lattice_ellipse(geometry)]
    )
    total = math.fsum(raw)
    if total <= 0.0:
        raise ValueError(f"lattice cells of {geometry.describe()} carry no power")
    out = raw / total
    out.setflags(write=False)
    return out


def build_spectral_variance(
    tx_basis: WavenumberBasis, rx_basis: WavenumberBasis, centered: bool = True
) -> SpectralVariance:
    return SpectralVariance(
        tx_var=side_variances(tx_basis.geometry, centered),
        rx_var=side_variances(rx_basis.geometry, centered),
        n_tx_elements=tx_basis.n_elements,
        n_rx_elements=rx_basis.n_elements,
    )


def average_tx_variance(sv: SpectralVariance) -> float:
    """Mean transmit variance, the approximation used by the closed-form ZF rate."""
    return math.fsum(sv.tx_var) / sv.n_s

