"""Deterministic direction lattices on the unit sphere.

The empirical-depth routines need quasi-uniform direction samples whose
prefixes are nested (so the depth estimate can only improve with a larger
budget) and which are reproducible without any RNG.  We use the Kronecker
("generalised golden ratio") low-discrepancy sequence mapped to the sphere
through the normal quantile, plus the classic spiral lattice for S^2 used
by the brute-force oracle.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

__all__ = ["kronecker_sphere", "fibonacci_sphere", "tangent_basis"]


def _kronecker_alphas(d: int) -> np.ndarray:
    # root of x**(d+1) = x + 1, the d-dimensional generalisation of the
    # golden ratio; alpha_j = phi^-(j+1) gives a well-spread lattice
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (d + 1))
    return np.array([phi ** -(j + 1) for j in range(d)]) % 1.0


def kronecker_sphere(count: int, dim: int, offset: int = 0) -> np.ndarray:
    """``count`` quasi-uniform unit vectors in R^dim, rows of a (count, dim)
    array.  Prefixes are nested: the first k rows do not depend on count.
    """
    if dim < 2:
        raise ValueError("dim >= 2 required")
    if count < 1:
        raise ValueError("count >= 1 required")
    alphas = _kronecker_alphas(dim)
    k = np.arange(offset + 1, offset + count + 1)[:, None]
    u = (0.5 + k * alphas[None, :]) % 1.0
    # keep quantiles away from 0/1 so norm.ppf stays finite
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    z = norm.ppf(u)
    nrm = np.linalg.norm(z, axis=1)
    nrm[nrm == 0.0] = 1.0
    return z / nrm[:, None]


def fibonacci_sphere(count: int) -> np.ndarray:
    """Spiral (Fibonacci) lattice of ``count`` points covering S^2."""
    if count < 1:
        raise ValueError("count >= 1 required")
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    th = golden * i
    return np.column_stack([r * np.cos(th), r * np.sin(th), z])


def tangent_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space at unit vector v, shape (dim-1, dim)."""
    dim = v.size
    # complete v to a basis and orthogonalise
    M = np.eye(dim)
    idx = int(np.argmax(np.abs(v)))
    M[:, [0, idx]] = M[:, [idx, 0]]
    M[:, 0] = v
    q, _ = np.linalg.qr(M)
    # first column of q is +/- v; the rest span the tangent space
    return q[:, 1:].T
