"""GOE sampling, dense symmetric eigendecomposition and semicircle-law utilities."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import linalg as sla
from scipy import optimize, stats
from scipy.sparse.linalg import eigsh

from .errors import DomainError, InvalidInputError
from .rng import SeedLike, as_generator

TIE_TOL = 1e-12


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues with eigenvectors stored column-wise."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def sample_goe(n: int, seed: SeedLike) -> np.ndarray:
    """Draw ``W ~ GOE(n)``: diagonal ``N(0, 2/n)``, off-diagonal ``N(0, 1/n)``.

    The returned matrix is exactly symmetric (``W[i, j] == W[j, i]`` bitwise).
    """
    if n < 1:
        raise DomainError(f"invalid dimension n={n}")
    rng = as_generator(seed, "goe")
    g = rng.standard_normal((n, n))
    return (g + g.T) / np.sqrt(2.0 * n)


def sample_goe_spectrum(n: int, seed: SeedLike) -> np.ndarray:
    """Ascending eigenvalues of a GOE(n) draw, in O(n^2) time.

    Uses the Householder-tridiagonal form of the GOE: diagonal ``N(0, 2/n)``
    and subdiagonal ``chi_{n-k} / sqrt(n)``, k = 1..n-1.  The law of the
    spectrum is identical to ``eigvalsh(sample_goe(n))``.
    """
    if n < 1:
        raise DomainError(f"invalid dimension n={n}")
    rng = as_generator(seed, "goe-spectrum")
    diag = rng.standard_normal(n) * np.sqrt(2.0 / n)
    if n == 1:
        return diag
    dof = np.arange(n - 1, 0, -1, dtype=float)
    off = np.sqrt(rng.chisquare(dof) / n)
    return sla.eigvalsh_tridiagonal(diag, off)


def check_symmetric(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if np.max(np.abs(w - w.T), initial=0.0) > 1e-12 * scale:
        raise InvalidInputError("matrix is not symmetric")
    return w


def _canonical_signs(q: np.ndarray) -> np.ndarray:
    # first component with |q_ij| > tol made positive, column by column
    tol = 1e-12
    big = np.abs(q) > tol
    first = np.argmax(big, axis=0)
    signs = np.sign(q[first, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return q * signs


def eigendecompose(w: np.ndarray) -> EigenDecomposition:
    """Symmetric eigendecomposition with a deterministic basis convention.

    Eigenvalues come back ascending.  Each eigenvector is flipped so its first
    nonzero component is positive; eigenvalues closer than 1e-12 are ordered
    by their eigenvectors in descending lexicographic order.
    """
    w = check_symmetric(w)
    vals, vecs = np.linalg.eigh(w)
    vecs = _canonical_signs(vecs)
    n = len(vals)
    order = list(range(n))
    i = 0
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] <= TIE_TOL:
            j += 1
        if j - i > 1:
            block = order[i:j]
            block.sort(key=lambda c: tuple(-np.round(vecs[:, c], 12)))
            order[i:j] = block
        i = j
    return EigenDecomposition(vals[order], vecs[:, order])


def top_eigenvalue(w: np.ndarray, dense_below: int = 500) -> float:
    """``lambda_max`` of a symmetric matrix; Lanczos from a fixed start vector for large ``n``."""
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    if n < dense_below:
        return float(np.linalg.eigvalsh(w)[-1])
    return float(eigsh(w, k=1, which="LA", v0=np.ones(n), tol=0.0)[0][0])


def semicircle_density(lam):
    lam = np.asarray(lam, dtype=float)
    inside = np.clip(4.0 - lam**2, 0.0, None)
    return np.sqrt(inside) / (2.0 * np.pi)


def semicircle_sf(lam):
    """Upper tail ``1 - F(lam)`` of the semicircle law on [-2, 2].

    Written with ``arccos`` so that the tail near the right edge is computed
    without cancellation.
    """
    lam = np.clip(np.asarray(lam, dtype=float), -2.0, 2.0)
    tail = np.arccos(lam / 2.0) / np.pi - lam * np.sqrt(4.0 - lam**2) / (4.0 * np.pi)
    tail = np.clip(tail, 0.0, 1.0)
    return float(tail) if tail.ndim == 0 else tail


def semicircle_cdf(lam):
    """CDF of the semicircle law, clamped to [0, 1] outside the support."""
    lam = np.clip(np.asarray(lam, dtype=float), -2.0, 2.0)
    cdf = 0.5 + lam * np.sqrt(4.0 - lam**2) / (4.0 * np.pi) + np.arcsin(lam / 2.0) / np.pi
    cdf = np.clip(cdf, 0.0, 1.0)
    return float(cdf) if cdf.ndim == 0 else cdf


def edge_gap(gamma: float) -> float:
    """Distance ``g`` from the right edge 2 to the ``1/gamma`` quantile of the semicircle.

    Solves ``1 - F(2 - g) = 1 - 1/gamma`` by bisection on ``[1e-12, 4]``, so
    that a fraction ``1/gamma`` of the spectrum lies below ``2 - g``.
    """
    if not gamma > 1.0:
        raise DomainError(f"edge_gap requires gamma > 1, got {gamma}")
    target = 1.0 - 1.0 / gamma

    def excess(g: float) -> float:
        return semicircle_sf(2.0 - g) - target

    lo, hi = 1e-12, 4.0
    if excess(lo) >= 0.0:
        return lo
    return float(optimize.bisect(excess, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200))


def spectral_ks_distance(eigenvalues: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between an empirical spectrum and the semicircle."""
    return float(stats.kstest(np.asarray(eigenvalues, dtype=float), semicircle_cdf).statistic)
