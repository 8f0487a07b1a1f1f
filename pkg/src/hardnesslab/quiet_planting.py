"""Quiet planting: turn Wishart samples into a GOE-looking matrix hiding the spike.

Given samples spanning ``V`` (dimension ``N < n``), the GOE spectrum is
re-attached to a random orthonormal frame whose first ``N`` vectors span
``V``: the smallest ``N`` eigenvalues go to ``V`` and the top ``n - N`` to
``V^perp``.  Under the null ``V`` is uniformly random, so the output is
exactly GOE.  A negative spike pushes ``x`` almost entirely into ``V^perp``,
where the large eigenvalues live, making ``x^T W x`` close to 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constrained_pca import Certifier, certified_bound
from .ensembles import edge_gap, sample_goe_spectrum
from .errors import DegenerateInputError, DomainError
from .rng import SeedLike, as_generator
from .wishart import Hypothesis, SampleSet


@dataclass(frozen=True)
class PlantParams:
    eps: float
    gamma: float
    beta: float

    @property
    def predicted_projection_bound(self) -> float:
        """Upper bound ``(1 + beta) / (1 - sqrt(gamma))^2`` on ``|x|_V^2``."""
        return (1.0 + self.beta) / (1.0 - math.sqrt(self.gamma)) ** 2

    @property
    def predicted_projection(self) -> float:
        """Large-n limit ``(1 + beta) / (gamma + beta)`` of ``|x|_V^2`` for ``|x| = 1``."""
        return (1.0 + self.beta) / (self.gamma + self.beta)

    def violations(self) -> list[str]:
        out = []
        if not self.gamma > 1.0:
            out.append("gamma <= 1")
        elif edge_gap(self.gamma) > self.eps / 8:
            out.append("edge_gap(gamma) > eps/8")
        if not -1.0 < self.beta < 0.0:
            out.append("beta outside (-1, 0)")
        elif self.gamma > 1.0 and self.predicted_projection_bound > self.eps / 32:
            out.append("(1+beta)/(1-sqrt(gamma))^2 > eps/32")
        if not self.beta**2 < self.gamma:
            out.append("beta^2 >= gamma")
        return out


def choose_parameters(eps: float, max_k: int = 60, safety: float = 0.5) -> PlantParams:
    """Hard-regime ``(gamma, beta)`` for a target certification gap ``eps``.

    ``gamma = 1 + 2^-k`` for the first ``k = 0, 1, ...`` with
    ``edge_gap(gamma) <= eps/8``; then
    ``beta = -1 + safety * (eps/32) * (1 - sqrt(gamma))^2``.
    """
    if not 0.0 < eps < 2.0:
        raise DomainError(f"eps must lie in (0, 2), got {eps}")
    for k in range(max_k + 1):
        gamma = 1.0 + 2.0 ** (-k)
        if edge_gap(gamma) <= eps / 8:
            break
    else:
        raise DomainError(f"no gamma = 1 + 2^-k with k <= {max_k} meets edge_gap <= eps/8")
    beta = -1.0 + safety * (eps / 32) * (1.0 - math.sqrt(gamma)) ** 2
    return PlantParams(eps, gamma, beta)


def haar_orthogonal(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``m x m`` orthogonal matrix (QR of a Gaussian, R-diagonal made positive)."""
    if m == 0:
        return np.zeros((0, 0))
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def subspace_bases(samples: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases ``(B_V, B_perp)`` of ``span(rows)`` and its complement."""
    y = np.asarray(samples, dtype=float)
    N, n = y.shape
    if N >= n:
        raise DegenerateInputError(f"need fewer samples than dimensions (N={N}, n={n})")
    q, r = np.linalg.qr(y.T, mode="complete")
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() <= tol * max(diag.max(), 1.0):
        raise DegenerateInputError("samples are linearly dependent")
    return q[:, :N], q[:, N:]


@dataclass
class PlantedMatrix:
    """Output of the planting construction with the pieces used to build it."""

    W: np.ndarray
    spectrum: np.ndarray  # ascending GOE eigenvalues attached to ``basis`` columns
    basis: np.ndarray  # orthonormal; first N columns span V
    N: int

    def projection_norm_sq(self, x: np.ndarray) -> float:
        coords = self.basis[:, : self.N].T @ x
        return float(coords @ coords)

    def eigen_coordinates(self, x: np.ndarray) -> np.ndarray:
        return self.basis.T @ x


def plant(s: SampleSet, seed: SeedLike) -> PlantedMatrix:
    """Build ``W = sum_i lambda_i v_i v_i^T`` with the low eigenvalues on ``span(samples)``."""
    y = s.samples if isinstance(s, SampleSet) else np.asarray(s)
    N, n = y.shape
    rng = as_generator(seed, "plant")
    b_v, b_perp = subspace_bases(y)
    basis = np.empty((n, n))
    basis[:, :N] = b_v @ haar_orthogonal(N, rng)
    basis[:, N:] = b_perp @ haar_orthogonal(n - N, rng)
    lam = sample_goe_spectrum(n, rng)
    w = (basis * lam) @ basis.T
    w = (w + w.T) / 2.0
    return PlantedMatrix(w, lam, basis, N)


def plant_from_samples(s: SampleSet, seed: SeedLike) -> np.ndarray:
    return plant(s, seed).W


def projection_norm_sq(x: np.ndarray, s: SampleSet) -> float:
    """``|P_V x|^2`` for ``V`` the span of the samples."""
    y = s.samples if isinstance(s, SampleSet) else np.asarray(s)
    q, _ = np.linalg.qr(np.asarray(y, dtype=float).T)
    coords = q.T @ x
    return float(coords @ coords)


def planted_quadratic_value(w: np.ndarray, x: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if w.shape != (len(x), len(x)):
        raise DomainError(f"dimension mismatch: W {w.shape}, x {x.shape}")
    return float(x @ w @ x)


def detect_via_certifier(s: SampleSet, certifier: Certifier, eps: float, seed: SeedLike) -> Hypothesis:
    """Plant the samples and report null iff the certified bound is at most ``2 - eps/2``."""
    w = plant_from_samples(s, seed)
    return Hypothesis.NULL if certified_bound(certifier, w) <= 2.0 - eps / 2.0 else Hypothesis.PLANTED
