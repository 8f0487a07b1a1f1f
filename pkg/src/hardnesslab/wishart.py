"""The spiked Wishart model: samplers, sample covariance, likelihood ratio, second moment."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DivergenceError, DomainError, MethodError, PreconditionError, SizeLimitError
from .rng import SeedLike, as_generator
from .spike_priors import RADEMACHER, SpikePrior, is_beta_good, overlap_pmf_rademacher, sample_spike, sample_spikes


class Hypothesis(IntEnum):
    NULL = 0
    PLANTED = 1


def sample_count(n: int, gamma: float) -> int:
    """``ceil(n / gamma)``, robust to round-off when ``n / gamma`` is an integer."""
    ratio = n / gamma
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio):
        return int(nearest)
    return math.ceil(ratio)


@dataclass(frozen=True)
class WishartParams:
    n: int
    gamma: float
    beta: float
    prior: SpikePrior = RADEMACHER

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"invalid dimension n={self.n}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if not self.beta > -1.0:
            raise DomainError(f"beta must exceed -1, got {self.beta}")

    @property
    def N(self) -> int:
        return sample_count(self.n, self.gamma)

    @property
    def aspect(self) -> float:
        """Realized aspect ratio ``n / N``."""
        return self.n / self.N

    def with_beta(self, beta: float) -> "WishartParams":
        return WishartParams(self.n, self.gamma, beta, self.prior)


@dataclass
class SampleSet:
    """``N`` samples stored as the rows of an ``(N, n)`` array."""

    samples: np.ndarray
    label: Hypothesis
    spike: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]


def sample_null(params: WishartParams, seed: SeedLike) -> SampleSet:
    rng = as_generator(seed, "wishart-null")
    return SampleSet(rng.standard_normal((params.N, params.n)), Hypothesis.NULL)


def planted_rows(x: np.ndarray, beta: float, g: np.ndarray) -> np.ndarray:
    """Map standard Gaussian rows ``g`` to rows with covariance ``I + beta x x^T``.

    Uses ``y = g + tau <xhat, g> xhat`` with ``tau = sqrt(1 + beta |x|^2) - 1``.
    Falls back to ``g`` itself when ``beta |x|^2 < -1`` or ``x = 0``.
    """
    sq = float(x @ x)
    if sq == 0.0 or beta * sq < -1.0:
        return g
    xhat = x / math.sqrt(sq)
    tau = math.sqrt(1.0 + beta * sq) - 1.0
    return g + tau * np.outer(g @ xhat, xhat)


def sample_planted(params: WishartParams, seed: SeedLike) -> SampleSet:
    rng = as_generator(seed, "wishart-planted")
    x = sample_spike(params.prior, params.n, rng)
    g = rng.standard_normal((params.N, params.n))
    return SampleSet(planted_rows(x, params.beta, g), Hypothesis.PLANTED, x)


def sample_covariance(s: SampleSet) -> np.ndarray:
    """``Y = (1/N) sum_i y_i y_i^T``, symmetrized exactly."""
    y = np.asarray(s.samples if isinstance(s, SampleSet) else s, dtype=float)
    if y.shape[0] == 0:
        raise DomainError("empty sample set")
    cov = y.T @ y / y.shape[0]
    return (cov + cov.T) / 2.0


MAX_ENUM_N = 20


def rademacher_half_cube(n: int) -> np.ndarray:
    """All ``2^(n-1)`` Rademacher spikes with first coordinate ``+1/sqrt(n)``.

    The likelihood depends on ``x`` only through ``<x, y>^2``, so ``x`` and
    ``-x`` contribute equally and half of the cube suffices.
    """
    if n > MAX_ENUM_N:
        raise SizeLimitError(f"spike enumeration limited to n <= {MAX_ENUM_N}, got {n}")
    if n == 1:
        return np.ones((1, 1))
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)))
    return np.hstack([np.ones((len(rest), 1)), rest]) / math.sqrt(n)


def log_likelihood_ratio_batch(
    samples: np.ndarray,
    params: WishartParams,
    *,
    spikes: Optional[np.ndarray] = None,
    chunk: int = 1 << 22,
) -> np.ndarray:
    """``log L`` for a batch of sample sets of shape ``(T, N, n)``.

    ``L = E_x[(1 + beta|x|^2)^(-N/2) prod_i exp(beta <x, y_i>^2 / (2(1 + beta|x|^2)))]``,
    averaged over the rows of ``spikes`` (the full Rademacher half-cube by
    default) with a log-sum-exp.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim == 2:
        y = y[None]
    t_count, n_samp, n = y.shape
    beta = params.beta
    if spikes is None:
        if not params.prior.is_rademacher:
            raise MethodError("pass explicit spikes for non-Rademacher priors")
        spikes = rademacher_half_cube(n)
    sq = np.einsum("ij,ij->i", spikes, spikes)
    denom = 1.0 + beta * sq
    if np.any(denom <= 0):
        raise PreconditionError("beta * |x|^2 <= -1 for some spike")
    const = -0.5 * n_samp * np.log(denom)
    coef = 0.5 * beta / denom
    out = np.empty(t_count)
    step = max(1, chunk // max(1, n_samp * len(spikes)))
    for start in range(0, t_count, step):
        block = y[start:start + step]
        proj = block @ spikes.T  # (b, N, m)
        expo = const + coef * np.einsum("bim,bim->bm", proj, proj)
        out[start:start + step] = logsumexp(expo, axis=1) - math.log(len(spikes))
    return out


def likelihood_ratio(
    s: SampleSet,
    params: WishartParams,
    *,
    inner_samples: int = 10_000,
    seed: SeedLike = 0,
    log: bool = False,
) -> float:
    """Likelihood ratio ``dP/dQ`` at one sample set.

    Rademacher priors are integrated exactly by enumerating every spike
    (``n <= 20``); other beta-good priors use ``inner_samples`` Monte Carlo
    spikes drawn from ``seed``.
    """
    if not is_beta_good(params.prior, params.beta):
        raise PreconditionError(f"prior {params.prior.label()} is not beta-good at beta={params.beta}")
    if params.beta == 0.0:
        return 0.0 if log else 1.0
    if params.prior.is_rademacher:
        spikes = rademacher_half_cube(params.n)
    else:
        spikes = sample_spikes(params.prior, params.n, inner_samples, as_generator(seed, "lr-inner"))
    value = float(log_likelihood_ratio_batch(s.samples, params, spikes=spikes)[0])
    return value if log else math.exp(value)


def second_moment_exact(params: WishartParams, *, trials: int = 200_000, seed: SeedLike = 0) -> float:
    """``E_Q[L^2] = E_{x1,x2}[(1 - beta^2 <x1,x2>^2)^(-N/2)]``.

    Exact over the Rademacher overlap law; for other priors with
    ``|x|^2 < 1/|beta|`` almost surely, a Monte Carlo average over
    ``trials`` spike pairs.
    """
    beta, N = params.beta, params.N
    if beta == 0.0:
        return 1.0
    b2 = beta * beta
    if params.prior.is_rademacher:
        if b2 >= 1.0:
            raise DivergenceError("|beta| >= 1: overlap atoms at +-1 make the second moment infinite")
        logs, weights = [], []
        for r, p in overlap_pmf_rademacher(params.n):
            logs.append(-0.5 * N * math.log1p(-b2 * float(r * r)))
            weights.append(float(p))
        return float(math.exp(logsumexp(logs, b=weights)))
    if not params.prior.sup_norm_sq * abs(beta) < 1.0:
        raise PreconditionError("second moment needs |x|^2 < 1/|beta| almost surely")
    rng = as_generator(seed, "second-moment")
    total = 0.0
    remaining = trials
    while remaining:
        m = min(remaining, 50_000)
        a = sample_spikes(params.prior, params.n, m, rng)
        b = sample_spikes(params.prior, params.n, m, rng)
        r2 = np.einsum("ij,ij->i", a, b) ** 2
        total += float(np.sum(np.exp(-0.5 * N * np.log1p(-b2 * r2))))
        remaining -= m
    return total / trials
