"""Normalized spike priors, truncation, overlap laws and local Chernoff fits.

A prior draws each coordinate of ``x`` independently from ``pi / sqrt(n)``
where ``pi`` has mean 0 and variance 1.  An optional truncation parameter
``beta_t`` replaces the draw by the zero vector unless
``beta_t * |x|^2 > -1`` and ``|x|^2 <= 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, FitFailure, MethodError
from .rng import SeedLike, as_generator

SQRT3 = math.sqrt(3.0)


class Base(str, Enum):
    RADEMACHER = "rademacher"
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"  # uniform on [-sqrt(3), sqrt(3)]


@dataclass(frozen=True)
class SpikePrior:
    base: Base = Base.RADEMACHER
    truncation: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "base", Base(self.base))
        if self.truncation is not None and not self.truncation > -1.0:
            raise DomainError(f"truncation parameter must exceed -1, got {self.truncation}")

    @property
    def is_rademacher(self) -> bool:
        return self.base is Base.RADEMACHER and self.truncation is None

    @property
    def sup_norm_sq(self) -> float:
        """Essential supremum of ``|x|^2`` (``inf`` if unbounded)."""
        bound = {Base.RADEMACHER: 1.0, Base.UNIFORM: 3.0, Base.GAUSSIAN: math.inf}[self.base]
        if self.truncation is not None:
            bound = min(bound, 2.0)
            if self.truncation < 0:
                bound = min(bound, -1.0 / self.truncation)
        return bound

    def label(self) -> str:
        if self.truncation is None:
            return self.base.value
        return f"{self.base.value}:trunc={self.truncation:g}"

    @classmethod
    def parse(cls, text: str) -> "SpikePrior":
        """Parse ``"rademacher"``, ``"gaussian"``, ``"gaussian:trunc=-0.9"`` and the like."""
        name, _, rest = text.strip().partition(":")
        trunc = None
        if rest:
            key, _, value = rest.partition("=")
            if key.strip() not in ("trunc", "truncation"):
                raise ValueError(f"unknown prior option {key!r}")
            trunc = float(value)
        return cls(Base(name.strip().lower()), trunc)


RADEMACHER = SpikePrior(Base.RADEMACHER)
GAUSSIAN = SpikePrior(Base.GAUSSIAN)
UNIFORM = SpikePrior(Base.UNIFORM)


def _draw_base(base: Base, shape, rng: np.random.Generator) -> np.ndarray:
    if base is Base.RADEMACHER:
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    if base is Base.GAUSSIAN:
        return rng.standard_normal(shape)
    return rng.uniform(-SQRT3, SQRT3, size=shape)


def sample_spikes(prior: SpikePrior, n: int, size: int, seed: SeedLike) -> np.ndarray:
    """Draw ``size`` independent spikes as the rows of a ``(size, n)`` array."""
    if n < 1:
        raise DomainError(f"invalid dimension n={n}")
    rng = as_generator(seed, "spike")
    x = _draw_base(prior.base, (size, n), rng) / math.sqrt(n)
    if prior.truncation is not None:
        x[~_kept(x, prior.truncation)] = 0.0
    return x


def _kept(x: np.ndarray, beta_t: float) -> np.ndarray:
    sq = np.einsum("ij,ij->i", x, x)
    return (beta_t * sq > -1.0) & (sq <= 2.0)


def truncation_alteration_rate(prior: SpikePrior, n: int, size: int, seed: SeedLike) -> float:
    """Fraction of base draws that truncation replaces by zero."""
    if prior.truncation is None:
        return 0.0
    rng = as_generator(seed, "spike")
    x = _draw_base(prior.base, (size, n), rng) / math.sqrt(n)
    return float(np.mean(~_kept(x, prior.truncation)))


def sample_spike(prior: SpikePrior, n: int, seed: SeedLike) -> np.ndarray:
    return sample_spikes(prior, n, 1, seed)[0]


def is_beta_good(prior: SpikePrior, beta: float) -> bool:
    """Whether ``beta * |x|^2 > -1`` holds almost surely under ``prior``."""
    if not beta > -1.0:
        raise DomainError(f"beta must exceed -1, got {beta}")
    if beta >= 0.0:
        return True
    bound = prior.sup_norm_sq
    if prior.truncation is not None and prior.truncation <= beta:
        return True
    if prior.base is Base.RADEMACHER or prior.truncation is not None:
        # |x|^2 <= bound with the bound attained, or x = 0
        return beta * bound > -1.0
    # continuous bases: |x|^2 < bound almost surely
    return beta * bound >= -1.0


def base_moment(base: Base, k: int) -> Fraction:
    """``E[pi^k]`` for the base distribution, exactly (uniform odd/even by symmetry)."""
    if k % 2:
        return Fraction(0)
    if base is Base.RADEMACHER:
        return Fraction(1)
    if base is Base.GAUSSIAN:
        return Fraction(math.prod(range(k - 1, 0, -2)))
    return Fraction(3 ** (k // 2), k + 1)


def spike_moment(prior: SpikePrior, exponents: Sequence[int]) -> Fraction:
    """Exact ``E[x^a]`` for an untruncated i.i.d. prior of dimension ``len(exponents)``."""
    if prior.truncation is not None:
        raise MethodError("exact spike moments are unavailable for truncated priors")
    n = len(exponents)
    total = sum(exponents)
    if total % 2:
        return Fraction(0)
    value = Fraction(1)
    for a in exponents:
        value *= base_moment(prior.base, a)
        if value == 0:
            return value
    return value / Fraction(n) ** (total // 2)


def overlap_pmf_rademacher(n: int) -> list[tuple[Fraction, Fraction]]:
    """Exact law of ``<x1, x2>`` for two independent Rademacher spikes.

    Atoms are ``(n - 2k)/n`` with probability ``C(n, k) / 2^n``, listed in
    increasing order of the value.
    """
    if n < 1:
        raise DomainError(f"invalid dimension n={n}")
    denom = 2**n
    return [(Fraction(n - 2 * k, n), Fraction(math.comb(n, k), denom)) for k in range(n, -1, -1)]


def sample_overlaps(prior: SpikePrior, n: int, trials: int, seed: SeedLike, chunk: int = 20_000) -> np.ndarray:
    """Monte Carlo draws of ``<x1, x2>`` for independent spikes."""
    rng = as_generator(seed, "overlap")
    out = np.empty(trials)
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        a = sample_spikes(prior, n, m, rng)
        b = sample_spikes(prior, n, m, rng)
        out[start:start + m] = np.einsum("ij,ij->i", a, b)
    return out


ETA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 11))


@dataclass
class ChernoffFit:
    eta: float
    delta: float
    C: float
    n: int
    trials: int
    t: np.ndarray = field(repr=False)
    tail: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)

    def bound(self, t) -> np.ndarray:
        return self.C * np.exp(-0.5 * (1.0 - self.eta) * self.n * np.asarray(t) ** 2)

    def table(self) -> list[tuple[float, float, float]]:
        return [(float(t), float(p), float(b)) for t, p, b in zip(self.t, self.tail, self.bound(self.t))]


def fit_local_chernoff(
    prior: SpikePrior,
    n: int,
    trials: int,
    seed: SeedLike,
    *,
    C: float = 2.0,
    t_points: int = 51,
    t_max_sd: float = 5.0,
    min_delta_sd: float = 1.0,
    z: float = 3.0,
) -> ChernoffFit:
    """Fit a local Chernoff bound ``P{|<x1,x2>| >= t} <= C exp(-(1-eta) n t^2 / 2)``.

    The tail is tabulated on ``t_points`` equally spaced points of
    ``[0, t_max_sd / sqrt(n)]``.  A point passes when the empirical tail minus
    ``z`` standard errors sits below the bound.  For each ``eta`` in
    {0.05, ..., 0.5} the radius ``delta`` is the largest grid point such that
    every point up to it passes; the smallest ``eta`` whose radius reaches
    ``min_delta_sd / sqrt(n)`` is returned.
    """
    if trials < 10_000:
        raise DomainError(f"need at least 10^4 trials, got {trials}")
    overlaps = np.abs(sample_overlaps(prior, n, trials, seed))
    t = np.linspace(0.0, t_max_sd / math.sqrt(n), t_points)
    srt = np.sort(overlaps)
    # P{|r| >= t} = 1 - (# strictly below t) / trials
    tail = 1.0 - np.searchsorted(srt, t, side="left") / trials
    se = np.sqrt(tail * (1.0 - tail) / trials)
    min_delta = min_delta_sd / math.sqrt(n)
    for eta in ETA_GRID:
        bound = C * np.exp(-0.5 * (1.0 - eta) * n * t**2)
        ok = tail - z * se <= bound
        failing = np.flatnonzero(~ok)
        last = (failing[0] - 1) if failing.size else len(t) - 1
        if last >= 0 and t[last] >= min_delta:
            return ChernoffFit(eta, float(t[last]), C, n, trials, t, tail, se)
    raise FitFailure(f"no eta in {ETA_GRID} admits a local Chernoff bound with C={C} (n={n})")
