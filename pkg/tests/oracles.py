"""Reference computations that share no code with the package."""

import itertools
from fractions import Fraction

import numpy as np


def brute_force_ellipse(n_h, n_v, spacing: Fraction):
    """Exact integer scan of the lattice ellipse with rational arithmetic."""
    lx, ly = n_h * spacing, n_v * spacing
    bound = int(max(lx, ly)) + 3
    return sorted(
        (mx, my)
        for mx, my in itertools.product(range(-bound, bound + 1), repeat=2)
        if mx * mx * ly * ly + my * my * lx * lx <= lx * lx * ly * ly
    )


def hemisphere_projection(n, rng, chunk=2_000_000):
    """Points with density proportional to (1 - r^2)^(-1/2) on the unit disk.

    Rejection step: cube samples outside the unit ball are discarded; the
    survivors, normalized, are uniform on the sphere, and dropping z projects
    them with exactly the isotropic density.
    """
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        p = rng.uniform(-1.0, 1.0, size=(chunk, 3))
        r = np.linalg.norm(p, axis=1)
        keep = (r <= 1.0) & (r > 1e-9)
        q = p[keep] / r[keep, None]
        take = min(n - filled, q.shape[0])
        out[filled:filled + take] = q[:take, :2]
        filled += take
    return out


def cell_fraction_mc(points, u0, u1, v0, v1):
    """Fraction of points in the rectangle and its binomial standard error."""
    inside = (points[:, 0] >= u0) & (points[:, 0] < u1) & (points[:, 1] >= v0) & (points[:, 1] < v1)
    p = inside.mean()
    return p, np.sqrt(p * (1 - p) / points.shape[0])


def beta_by_cofactors(h):
    """ZF gains as det(G) / det(G minus row and column i), with plain determinants."""
    g = h @ h.conj().T
    k = g.shape[0]
    full = np.linalg.det(g).real
    out = []
    for i in range(k):
        keep = [j for j in range(k) if j != i]
        out.append(full / (np.linalg.det(g[np.ix_(keep, keep)]).real if keep else 1.0))
    return np.array(out)


def pinv_columns(h):
    """Pseudo-inverse columns via SVD (numpy.linalg.pinv)."""
    return np.linalg.pinv(h)


def random_complex(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
