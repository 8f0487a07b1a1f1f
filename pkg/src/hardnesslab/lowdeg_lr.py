"""Norm of the low-degree likelihood ratio for the spiked Wishart model.

Expanding ``L`` in the normalized Hermite basis gives squared components

    beta^|alpha| * prod_i ((|alpha_i| - 1)!!^2 / alpha_i!) * (E x^(sum_i alpha_i))^2

(zero unless every block degree ``|alpha_i|`` is even), and summing them up
to degree ``D`` collapses to ``E phi_{N, floor(D/2)}(beta^2 <x1, x2>^2 / 4)``
where ``phi_{N,k}`` is the degree-``k`` Taylor polynomial of
``phi_N(x) = (1 - 4x)^(-N/2)``.

The Taylor coefficients are integers, so for Rademacher spikes the whole norm
is evaluated in exact rational arithmetic over the overlap law and rounded
once at the end.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, MethodError, PreconditionError
from .hermite import double_factorial, evaluate_multi, multi_factorial
from .rng import SeedLike, as_generator, substream
from .spike_priors import RADEMACHER, SpikePrior, is_beta_good, overlap_pmf_rademacher, sample_overlaps, spike_moment
from .wishart import WishartParams, log_likelihood_ratio_batch, rademacher_half_cube, sample_count

EXACT = "exact-rademacher"
MONTE_CARLO = "monte-carlo"
METHODS = (EXACT, MONTE_CARLO)
MC_BATCHES = 20


@dataclass(frozen=True)
class LowDegreeQuery:
    params: WishartParams
    D: int
    method: str = EXACT
    trials: int = 200_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.D < 0:
            raise DomainError(f"degree bound must be nonnegative, got {self.D}")
        if self.method not in METHODS:
            raise MethodError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.method == EXACT:
            if not self.params.prior.is_rademacher:
                raise MethodError("exact evaluation requires the Rademacher prior")
            # Rademacher overlaps reach +-1
            if not self.params.beta**2 < 1.0:
                raise PreconditionError("exact evaluation requires beta^2 * max overlap^2 < 1")
        elif self.trials < MC_BATCHES:
            raise DomainError(f"monte-carlo needs at least {MC_BATCHES} trials")

    @property
    def k(self) -> int:
        return self.D // 2


class Estimate(NamedTuple):
    value: float
    stderr: float


# -- generating functions ---------------------------------------------------

def phi(x: float, N: int) -> float:
    """``(1 - 4x)^(-N/2)``, evaluated as ``exp(-N/2 * log1p(-4x))``."""
    if not x < 0.25:
        raise DomainError(f"phi requires x < 1/4, got {x}")
    return math.exp(-0.5 * N * math.log1p(-4.0 * x))


def taylor_coeffs(N: int, k: int) -> list[int]:
    """Coefficients ``c_0..c_k`` of ``(1 - 4x)^(-N/2)``: ``c_{d+1} = c_d * 2 (N + 2d) / (d + 1)``."""
    if N < 0 or k < 0:
        raise DomainError("N and k must be nonnegative")
    c = [1]
    for d in range(k):
        num = c[-1] * 2 * (N + 2 * d)
        c.append(num // (d + 1))  # always exact: c_d = 2^d (N)(N+2)...(N+2d-2) / d!
    return c


def taylor_coeffs_double_sum(N: int, k: int) -> list[int]:
    """Same coefficients as a sum over compositions ``d_1 + ... + d_N = d`` of ``prod C(2 d_i, d_i)``."""
    out = []
    for d in range(k + 1):
        total = 0
        for parts in itertools.product(range(d + 1), repeat=N):
            if sum(parts) == d:
                total += math.prod(math.comb(2 * p, p) for p in parts)
        out.append(total if N else int(d == 0))
    return out


def _poly_value(coeffs: Sequence, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def phi_truncated_exact(x, N: int, k: int) -> Fraction:
    return _poly_value(taylor_coeffs(N, k), Fraction(x))


def phi_truncated(x: float, N: int, k: int) -> float:
    """Degree-``k`` Taylor polynomial of ``phi_N`` at ``x``, summed exactly and rounded once."""
    return float(phi_truncated_exact(x, N, k))


def phi_truncated_double_sum(x: float, N: int, k: int) -> float:
    return float(_poly_value(taylor_coeffs_double_sum(N, k), Fraction(x)))


# -- components -------------------------------------------------------------

Blocks = Sequence[Sequence[int]]


def _check_blocks(blocks: Blocks, params: WishartParams) -> None:
    if len(blocks) != params.N:
        raise DomainError(f"expected {params.N} blocks, got {len(blocks)}")
    for b in blocks:
        if len(b) != params.n or any(a < 0 for a in b):
            raise DomainError(f"each block must be a nonnegative multi-index of length {params.n}")


def lr_component_sq_exact(blocks: Blocks, params: WishartParams) -> Fraction:
    _check_blocks(blocks, params)
    degrees = [sum(b) for b in blocks]
    if any(d % 2 for d in degrees):
        return Fraction(0)
    if not is_beta_good(params.prior, params.beta):
        raise PreconditionError(f"prior {params.prior.label()} is not beta-good at beta={params.beta}")
    total = [sum(col) for col in zip(*blocks)]
    moment = spike_moment(params.prior, total)
    if moment == 0:
        return Fraction(0)
    value = Fraction(params.beta) ** sum(degrees)  # Fraction(0) ** 0 == 1
    for b, d in zip(blocks, degrees):
        value *= Fraction(double_factorial(d - 1) ** 2, multi_factorial(b))
    return value * moment * moment


def lr_component_sq(blocks: Blocks, params: WishartParams) -> float:
    """Squared Hermite component ``<L, H^_alpha>^2`` for ``alpha = (alpha_1, ..., alpha_N)``."""
    return float(lr_component_sq_exact(blocks, params))


def even_block_indices(n: int, N: int, D: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All ``N``-tuples of multi-indices in ``N^n`` with even block degrees and total degree ``<= D``."""
    by_degree: dict[int, list[tuple[int, ...]]] = {}
    for alpha in itertools.product(range(D + 1), repeat=n):
        d = sum(alpha)
        if d <= D and d % 2 == 0:
            by_degree.setdefault(d, []).append(alpha)

    def rec(remaining: int, budget: int):
        if remaining == 0:
            yield ()
            return
        for d, group in by_degree.items():
            if d <= budget:
                for alpha in group:
                    for rest in rec(remaining - 1, budget - d):
                        yield (alpha,) + rest

    yield from rec(N, D)


def component_sum(params: WishartParams, D: int) -> float:
    """``sum_{|alpha| <= D} <L, H^_alpha>^2`` by explicit enumeration (small ``n``, ``N``, ``D`` only)."""
    total = sum((lr_component_sq_exact(b, params) for b in even_block_indices(params.n, params.N, D)), Fraction(0))
    return float(total)


@dataclass(frozen=True)
class ComponentEstimate:
    estimate: float  # squared mean of L * H^_alpha
    stderr: float  # delta method
    mean: float
    mean_stderr: float

    def covers(self, value: float, z: float = 3.0) -> bool:
        """Whether ``value`` is the square of a point in ``mean +- z * mean_stderr``.

        The interval is mapped from the unsquared scale, where the estimate is
        close to Gaussian.  The delta ``stderr`` understates the spread of the
        squared mean when ``|mean| / mean_stderr`` is small.
        """
        root = math.sqrt(max(value, 0.0))
        return min(abs(self.mean - root), abs(self.mean + root)) <= z * self.mean_stderr + 1e-15


def _check_oracle(blocks: Blocks, params: WishartParams) -> None:
    if not params.prior.is_rademacher:
        raise MethodError("the oracle enumerates Rademacher spikes only")
    if params.n > 6 or params.N > 3 or sum(map(sum, blocks)) > 4:
        raise DomainError("the oracle is limited to n <= 6, N <= 3, |alpha| <= 4")
    _check_blocks(blocks, params)


def lr_component_oracle_many(
    blocks_list: Sequence[Blocks],
    params: WishartParams,
    trials: int,
    seed: SeedLike,
    *,
    chunk: int = 50_000,
) -> list[ComponentEstimate]:
    """Monte Carlo ``<L, H^_alpha>^2`` for several ``alpha`` from one stream of null draws.

    ``L`` is evaluated by exact spike enumeration; the squared mean's standard
    error comes from the delta method, ``2 |mean| se(mean)``.
    """
    blocks_list = [tuple(tuple(b) for b in blocks) for blocks in blocks_list]
    for blocks in blocks_list:
        _check_oracle(blocks, params)
    rng = as_generator(seed, "component-oracle")
    spikes = rademacher_half_cube(params.n)
    s1 = np.zeros(len(blocks_list))
    s2 = np.zeros(len(blocks_list))
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        y = rng.standard_normal((m, params.N, params.n))
        lr = np.exp(log_likelihood_ratio_batch(y, params, spikes=spikes))
        cache: dict = {}
        for j, blocks in enumerate(blocks_list):
            z = lr.copy()
            for i, b in enumerate(blocks):
                if any(b):
                    if (i, b) not in cache:
                        cache[i, b] = evaluate_multi(b, y[:, i, :], normalized=True)
                    z *= cache[i, b]
            s1[j] += z.sum()
            s2[j] += z @ z
    out = []
    for a, b in zip(s1, s2):
        mean = float(a) / trials
        se = math.sqrt(max(float(b) / trials - mean * mean, 0.0) / trials)
        out.append(ComponentEstimate(mean * mean, 2.0 * abs(mean) * se, mean, se))
    return out


def lr_component_oracle(blocks: Blocks, params: WishartParams, trials: int, seed: SeedLike) -> ComponentEstimate:
    """Monte Carlo oracle for one ``alpha``: ``(mean of L(y) H^_alpha(y) over null y)^2``."""
    return lr_component_oracle_many([blocks], params, trials, seed)[0]


# -- the norm ---------------------------------------------------------------

def _exact_terms(q: LowDegreeQuery) -> list[tuple[Fraction, Fraction]]:
    """``(r, p * phi_{N,k}(beta^2 r^2 / 4))`` for each overlap atom ``r``."""
    coeffs = taylor_coeffs(q.params.N, q.k)
    b2 = Fraction(q.params.beta) ** 2
    return [(r, p * _poly_value(coeffs, b2 * r * r / 4)) for r, p in overlap_pmf_rademacher(q.params.n)]


def _mc_batches(q: LowDegreeQuery, split: float | None = None) -> np.ndarray:
    """Per-batch means of ``phi_{N,k}`` over spike-pair overlaps; columns (all, |r| <= split)."""
    coeffs = np.array([float(c) for c in taylor_coeffs(q.params.N, q.k)])
    b2 = q.params.beta**2
    sizes = [q.trials // MC_BATCHES + (b < q.trials % MC_BATCHES) for b in range(MC_BATCHES)]

    def batch(b: int) -> tuple[float, float]:
        r = sample_overlaps(q.params.prior, q.params.n, sizes[b], substream(q.seed, "lowdeg-mc", b))
        vals = _poly_value(coeffs, b2 * r * r / 4.0)
        inner = vals[np.abs(r) <= split].sum() if split is not None else 0.0
        return float(vals.mean()), float(inner) / sizes[b]

    if q.workers > 1:
        with ThreadPoolExecutor(max_workers=q.workers) as pool:
            out = list(pool.map(batch, range(MC_BATCHES)))
    else:
        out = [batch(b) for b in range(MC_BATCHES)]
    return np.array(out)


def lr_norm_estimate(q: LowDegreeQuery) -> Estimate:
    """``|L^{<=D}|^2`` with a standard error (zero for exact evaluation, batch means otherwise)."""
    if q.method == EXACT:
        return Estimate(float(sum((t for _, t in _exact_terms(q)), Fraction(0))), 0.0)
    means = _mc_batches(q)[:, 0]
    return Estimate(float(means.mean()), float(means.std(ddof=1) / math.sqrt(MC_BATCHES)))


def lr_norm_lowdeg(q: LowDegreeQuery) -> float:
    """``E phi_{N, floor(D/2)}(beta^2 <x1, x2>^2 / 4)``."""
    return lr_norm_estimate(q).value


def deviations_split(q: LowDegreeQuery, eps: float) -> tuple[float, float]:
    """``(R1, R2)``: the norm restricted to overlaps ``|r| <= eps`` and to the rest."""
    if q.method == EXACT:
        e = Fraction(eps)
        terms = _exact_terms(q)
        r1 = sum((t for r, t in terms if abs(r) <= e), Fraction(0))
        r2 = sum((t for r, t in terms if abs(r) > e), Fraction(0))
        return float(r1), float(r2)
    batches = _mc_batches(q, split=eps)
    total, inner = batches.mean(axis=0)
    return float(inner), float(total - inner)


def log_growth_lower_bound(n: int, N: int, beta: float, d: int) -> float:
    if not 1 <= d <= min(n, N):
        raise DomainError(f"d must satisfy 1 <= d <= min(n, N) = {min(n, N)}, got {d}")
    base = beta * beta * (n - d) * (N - d) / (n * n)
    if base == 0.0:
        return -math.inf
    return -math.log(2.0 * math.sqrt(d)) + d * math.log(base)


def growth_lower_bound(n: int, N: int, beta: float, d: int) -> float:
    """``(1 / (2 sqrt(d))) * (beta^2 (n - d)(N - d) / n^2)^d``, a lower bound on the degree-``2d`` norm."""
    logv = log_growth_lower_bound(n, N, beta, d)
    try:
        return math.exp(logv)
    except OverflowError:
        return math.inf


SCAN_COLUMNS = ("n", "N", "gamma", "beta", "D", "method", "lr_norm_sq", "stderr", "seed")


def threshold_scan(
    gamma: float,
    betas: Sequence[float],
    D: int,
    ns: Sequence[int],
    prior: SpikePrior = RADEMACHER,
    *,
    method: str = EXACT,
    trials: int = 200_000,
    seed: int = 0,
    workers: int = 1,
) -> list[dict]:
    """One row per ``(beta, n)`` cell, with columns :data:`SCAN_COLUMNS`."""
    rows = []
    for beta in betas:
        for n in ns:
            params = WishartParams(n, gamma, beta, prior)
            est = lr_norm_estimate(LowDegreeQuery(params, D, method, trials, seed, workers))
            rows.append(
                {
                    "n": n,
                    "N": sample_count(n, gamma),
                    "gamma": gamma,
                    "beta": beta,
                    "D": D,
                    "method": method,
                    "lr_norm_sq": est.value,
                    "stderr": est.stderr,
                    "seed": seed,
                }
            )
    return rows
