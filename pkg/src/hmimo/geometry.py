"""Uniform planar arrays, the wavenumber lattice ellipse and plane-wave harmonics.

All lengths are expressed in wavelengths, so the free-space wavenumber is
``2*pi`` and ``L_x = n_h * spacing``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

KAPPA = 2.0 * math.pi  # free-space wavenumber with lengths in wavelengths

# Slack on the ellipse test so apertures such as 30 * (1/3) do not lose
# boundary indices to rounding.
_ELLIPSE_TOL = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar patch array.

    Parameters
    ----------
    n_h, n_v : int
        Horizontal and vertical element counts.
    spacing : float
        Element spacing in wavelengths.
    origin_offset : tuple of float
        Position of element 0 in wavelengths.
    """

    n_h: int
    n_v: int
    spacing: float
    origin_offset: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if int(self.n_h) != self.n_h or int(self.n_v) != self.n_v:
            raise ValueError("element counts must be integers")
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError(f"element counts must be >= 1, got {self.n_h}x{self.n_v}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        offset = tuple(float(c) for c in self.origin_offset)
        if len(offset) != 3:
            raise ValueError("origin_offset must have three components")
        object.__setattr__(self, "n_h", int(self.n_h))
        object.__setattr__(self, "n_v", int(self.n_v))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "origin_offset", offset)

    @property
    def n_elements(self) -> int:
        return self.n_h * self.n_v

    @property
    def length_x(self) -> float:
        return self.n_h * self.spacing

    @property
    def length_y(self) -> float:
        return self.n_v * self.spacing

    def positions(self) -> np.ndarray:
        """Element positions, shape ``(n_elements, 3)``, row-major (x fastest)."""
        j = np.arange(self.n_elements)
        pos = np.empty((self.n_elements, 3))
        pos[:, 0] = (j % self.n_h) * self.spacing
        pos[:, 1] = (j // self.n_h) * self.spacing
        pos[:, 2] = 0.0
        return pos + np.asarray(self.origin_offset)

    def describe(self) -> str:
        return f"{self.n_h}x{self.n_v}@{self.spacing:.6g}"


@dataclass(frozen=True)
class WavenumberBasis:
    """Lattice-ellipse index set and the matching harmonic matrix ``U``.

    ``harmonic_matrix`` has one unit-norm column per entry of ``indices``.
    """

    geometry: ArrayGeometry
    indices: tuple
    harmonic_matrix: np.ndarray = field(repr=False, compare=False)
    side: str = "transmit"

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def n_elements(self) -> int:
        return self.geometry.n_elements

    def aliased_pairs(self) -> list:
        """Index pairs whose sampled harmonics coincide on the element grid.

        Happens only when an aperture edge index reaches ``n/2`` exactly,
        i.e. half-wavelength spacing with an even element count.
        """
        seen = {}
        pairs = []
        for k, (mx, my) in enumerate(self.indices):
            key = (mx % self.geometry.n_h, my % self.geometry.n_v)
            if key in seen:
                pairs.append((self.indices[seen[key]], (mx, my)))
            else:
                seen[key] = k
        return pairs


def _in_ellipse(mx, my, lx, ly):
    return (mx / lx) ** 2 + (my / ly) ** 2 <= 1.0 + _ELLIPSE_TOL


def enumerate_lattice_ellipse(geometry: ArrayGeometry) -> list:
    """Integer pairs ``(m_x, m_y)`` with ``(m_x/L_x)^2 + (m_y/L_y)^2 <= 1``.

    Lengths are in wavelengths. The list is sorted lexicographically.
    """
    lx, ly = geometry.length_x, geometry.length_y
    mx_max = int(math.floor(lx * (1.0 + _ELLIPSE_TOL)))
    my_max = int(math.floor(ly * (1.0 + _ELLIPSE_TOL)))
    return [
        (mx, my)
        for mx in range(-mx_max, mx_max + 1)
        for my in range(-my_max, my_max + 1)
        if _in_ellipse(mx, my, lx, ly)
    ]


def z_wavenumber(m_x: int, m_y: int, geometry: ArrayGeometry) -> float:
    """Longitudinal wavenumber of harmonic ``(m_x, m_y)`` in rad per wavelength."""
    lx, ly = geometry.length_x, geometry.length_y
    if not _in_ellipse(m_x, m_y, lx, ly):
        raise DomainError(
            f"index ({m_x}, {m_y}) lies outside the lattice ellipse of {geometry.describe()}"
        )
    rho2 = (m_x / lx) ** 2 + (m_y / ly) ** 2
    return KAPPA * math.sqrt(max(0.0, 1.0 - rho2))


@lru_cache(maxsize=64)
def build_harmonic_matrix(geometry: ArrayGeometry, side: str = "transmit") -> WavenumberBasis:
    """Sampled plane-wave harmonics for every lattice-ellipse index.

    Entry ``(j, k)`` is ``exp(-+i (2 pi m_x x_j / L_x + 2 pi m_y y_j / L_y
    + gamma z_j)) / sqrt(N)``; the exponent sign is negative on the transmit
    side and positive on the receive side.
    """
    if side not in ("transmit", "receive"):
        raise ValueError(f"side must be 'transmit' or 'receive', got {side!r}")
    indices = enumerate_lattice_ellipse(geometry)
    idx = np.array(indices, dtype=float).reshape(-1, 2)
    gamma = np.array([z_wavenumber(mx, my, geometry) for mx, my in indices])
    pos = geometry.positions()
    phase = (
        np.outer(pos[:, 0], 2.0 * np.pi * idx[:, 0] / geometry.length_x)
        + np.outer(pos[:, 1], 2.0 * np.pi * idx[:, 1] / geometry.length_y)
        + np.outer(pos[:, 2], gamma)
    )
    sign = -1.0 if side == "transmit" else 1.0
    u = np.exp(sign * 1j * phase) / math.sqrt(geometry.n_elements)
    u.setflags(write=False)
    return WavenumberBasis(geometry=geometry, indices=tuple(indices), harmonic_matrix=u, side=side)
