"""Strong-detection harness and the spectral (BBP) detector."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .rng import substream
from .wishart import Hypothesis, SampleSet, WishartParams, sample_covariance, sample_null, sample_planted

Detector = Callable[[SampleSet, WishartParams], Hypothesis]

MARGIN_TW_UNITS = 5.0


def bbp_threshold(gamma: float) -> float:
    """Critical spike strength ``sqrt(gamma)``: spectral detection works iff ``beta^2 > gamma``."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    return math.sqrt(gamma)


def mp_edges(n: int, N: int) -> tuple[float, float]:
    """Marchenko-Pastur bulk edges ``(1 -+ sqrt(n/N))^2`` of the null sample covariance."""
    c = math.sqrt(n / N)
    return (1.0 - c) ** 2, (1.0 + c) ** 2


def tracy_widom_scales(n: int, N: int) -> tuple[float, float]:
    """Finite-size fluctuation scales of the lower and upper nonzero edges of ``Y``.

    For ``Y = G^T G / N`` with ``G`` an ``N x n`` Gaussian matrix, the extreme
    nonzero eigenvalues fluctuate on the scales
    ``(sqrt(N) -+ sqrt(n)) (1/sqrt(min) -+ 1/sqrt(max))^(1/3) / N``.
    """
    a, b = math.sqrt(min(n, N)), math.sqrt(max(n, N))
    upper = (a + b) * (1.0 / a + 1.0 / b) ** (1.0 / 3.0) / N
    lower = (b - a) * max(1.0 / a - 1.0 / b, 0.0) ** (1.0 / 3.0) / N
    return lower, upper


def spectral_statistic(s: SampleSet, negative: bool) -> float:
    """Largest eigenvalue of ``Y``, or its smallest nonzero one when ``negative``."""
    y = s.samples
    N, n = y.shape
    # the nonzero spectrum of Y = y^T y / N equals that of the smaller Gram matrix
    gram = (y @ y.T) / N if N <= n else sample_covariance(s)
    eig = np.linalg.eigvalsh(gram)
    return float(eig[0] if negative else eig[-1])


def spectral_thresholds(params: WishartParams, tw_units: float = MARGIN_TW_UNITS) -> tuple[float, float]:
    n, N = params.n, params.N
    lo, hi = mp_edges(n, N)
    s_lo, s_hi = tracy_widom_scales(n, N)
    return lo - tw_units * s_lo, hi + tw_units * s_hi


def spectral_detect(s: SampleSet, params: WishartParams, tw_units: float = MARGIN_TW_UNITS) -> Hypothesis:
    """Flag a planted spike when an eigenvalue of ``Y`` leaves the null bulk.

    For ``beta > 0`` the statistic is the top eigenvalue, compared with the
    upper Marchenko-Pastur edge plus ``tw_units`` edge-fluctuation scales; for
    ``beta < 0`` it is the smallest nonzero eigenvalue against the lower edge
    minus the same margin.
    """
    lower, upper = spectral_thresholds(params, tw_units)
    if params.beta >= 0:
        planted = spectral_statistic(s, negative=False) > upper
    else:
        planted = spectral_statistic(s, negative=True) < lower
    return Hypothesis.PLANTED if planted else Hypothesis.NULL


def oracle_detector(s: SampleSet, params: WishartParams) -> Hypothesis:
    """Reads the hidden label; only useful for checking the harness."""
    return s.label


def constant_detector(value: Hypothesis = Hypothesis.NULL) -> Detector:
    def detect(s: SampleSet, params: WishartParams) -> Hypothesis:
        return value

    detect.__name__ = f"constant_{int(value)}"
    return detect


@dataclass(frozen=True)
class DetectionReport:
    detector: str
    params: WishartParams
    trials: int
    type_i: float
    type_ii: float

    @property
    def total_error(self) -> float:
        """Misclassified fraction over the balanced set of trials."""
        return 0.5 * (self.type_i + self.type_ii)


def _run_trial(args):
    detector, params, seed, label, t = args
    if label is Hypothesis.NULL:
        s = sample_null(params, substream(seed, "detect-null", t))
    else:
        s = sample_planted(params, substream(seed, "detect-planted", t))
    return int(detector(s, params)) != int(label)


def run_detection_experiment(
    params: WishartParams,
    detector: Detector,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> DetectionReport:
    """Run ``trials // 2`` null and ``trials // 2`` planted instances.

    Trial ``t`` of each hypothesis draws from its own substream, so the report
    does not depend on ``workers``.
    """
    if trials < 2:
        raise DomainError(f"need at least 2 trials, got {trials}")
    half = trials // 2
    jobs = [(detector, params, seed, Hypothesis.NULL, t) for t in range(half)]
    jobs += [(detector, params, seed, Hypothesis.PLANTED, t) for t in range(half)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(_run_trial, jobs))
    else:
        errors = [_run_trial(j) for j in jobs]
    name = getattr(detector, "__name__", type(detector).__name__)
    return DetectionReport(
        detector=name,
        params=params,
        trials=2 * half,
        type_i=sum(errors[:half]) / half,
        type_ii=sum(errors[half:]) / half,
    )
