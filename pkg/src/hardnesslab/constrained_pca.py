"""SK-problem baselines on the hypercube ``{+-1/sqrt(n)}^n``.

Exhaustive search gives the true optimum for ``n <= 20``; the top eigenvalue
certifies an upper bound and signs of the top eigenvector give a feasible
point.  Together they realize ``rounding <= optimum <= certificate``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import linalg as sla

from .ensembles import check_symmetric, sample_goe
from .errors import SizeLimitError
from .rng import substream

MAX_BRUTE_N = 20
_LOW_BITS = 12


@dataclass(frozen=True)
class CertificationResult:
    bound: float
    certifier: str
    wall_time: float


Certifier = Callable[[np.ndarray], Union[float, CertificationResult]]


def certified_bound(certifier: Certifier, w: np.ndarray) -> float:
    out = certifier(w)
    return float(out.bound if isinstance(out, CertificationResult) else out)


def hypercube_value(w: np.ndarray, x: np.ndarray) -> float:
    return float(x @ w @ x)


def _sign_patterns(b: int) -> np.ndarray:
    if b == 0:
        return np.ones((1, 0))
    return np.array(list(itertools.product((1.0, -1.0), repeat=b)))


def sk_bruteforce(w: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact ``max x^T W x`` over ``x in {+-1/sqrt(n)}^n`` and one maximizer.

    The first coordinate is pinned to ``+1`` (``x`` and ``-x`` tie).  The last
    ``min(n - 1, 12)`` coordinates are enumerated as a block; the remaining
    ones are walked in Gray-code order with O(n) updates per flip.
    """
    w = check_symmetric(w)
    n = w.shape[0]
    if n > MAX_BRUTE_N:
        raise SizeLimitError(f"brute force limited to n <= {MAX_BRUTE_N}, got {n}")
    b = min(n - 1, _LOW_BITS)
    hi = np.arange(0, n - b)
    lo = np.arange(n - b, n)
    w_hh = w[np.ix_(hi, hi)]
    w_lh = w[np.ix_(lo, hi)]
    s_lo = _sign_patterns(b)
    q_lo = np.einsum("ij,jk,ik->i", s_lo, w[np.ix_(lo, lo)], s_lo)

    s_hi = np.ones(len(hi))
    h_vec = w_hh @ s_hi
    a = float(s_hi @ h_vec)
    u = w_lh @ s_hi

    best, best_hi, best_lo = -math.inf, s_hi.copy(), 0
    free = len(hi) - 1  # coordinate 0 stays +1
    for step in range(1 << free):
        if step:
            j = 1 + ((step & -step).bit_length() - 1)
            sj = s_hi[j]
            a += -4.0 * sj * h_vec[j] + 4.0 * w_hh[j, j]
            h_vec -= 2.0 * sj * w_hh[:, j]
            u -= 2.0 * sj * w_lh[:, j]
            s_hi[j] = -sj
        vals = a + 2.0 * (s_lo @ u) + q_lo
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_hi, best_lo = float(vals[k]), s_hi.copy(), k
    s = np.concatenate([best_hi, s_lo[best_lo]])
    x = s / math.sqrt(n)
    return hypercube_value(w, x), x


def spectral_certificate(w: np.ndarray) -> CertificationResult:
    """``lambda_max(W)``: valid because ``x^T W x <= lambda_max |x|^2 = lambda_max``."""
    start = time.perf_counter()
    w = check_symmetric(w)
    lam = float(np.linalg.eigvalsh(w)[-1])
    return CertificationResult(lam, "spectral", time.perf_counter() - start)


def top_eigenvector(w: np.ndarray) -> np.ndarray:
    n = w.shape[0]
    _, vec = sla.eigh(w, subset_by_index=[n - 1, n - 1])
    v = vec[:, 0]
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


def spectral_rounding(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Round the top eigenvector to the hypercube: ``x = sgn(v_max)/sqrt(n)``, ``sgn(0) = +1``."""
    w = check_symmetric(w)
    v = top_eigenvector(w)
    x = np.where(v >= 0.0, 1.0, -1.0) / math.sqrt(w.shape[0])
    return x, hypercube_value(w, x)


@dataclass
class SurveySummary:
    n: int
    seed: int
    optimum: np.ndarray
    certificate: np.ndarray
    rounding: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.optimum))

    @property
    def spread(self) -> float:
        return float(np.std(self.optimum, ddof=1)) if len(self.optimum) > 1 else 0.0

    def rows(self) -> list[dict]:
        return [
            {"instance": i, "n": self.n, "optimum": float(o), "certificate": float(c), "rounding": float(r)}
            for i, (o, c, r) in enumerate(zip(self.optimum, self.certificate, self.rounding))
        ]


def sk_instance(n: int, seed: int, i: int) -> np.ndarray:
    return sample_goe(n, substream(seed, "sk-instance", i))


def sk_ground_state_survey(n: int, instances: int, seed: int) -> SurveySummary:
    """Brute-force optima of ``instances`` GOE draws, with both spectral baselines."""
    if n > MAX_BRUTE_N:
        raise SizeLimitError(f"brute force limited to n <= {MAX_BRUTE_N}, got {n}")
    opt, cert, rnd = [], [], []
    for i in range(instances):
        w = sk_instance(n, seed, i)
        opt.append(sk_bruteforce(w)[0])
        cert.append(spectral_certificate(w).bound)
        rnd.append(spectral_rounding(w)[1])
    return SurveySummary(n, seed, np.array(opt), np.array(cert), np.array(rnd))
