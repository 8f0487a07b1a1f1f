import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from hardnesslab.constrained_pca import spectral_certificate
from hardnesslab.ensembles import edge_gap, semicircle_cdf
from hardnesslab.errors import DegenerateInputError, DomainError
from hardnesslab.quiet_planting import (
    PlantParams,
    choose_parameters,
    detect_via_certifier,
    haar_orthogonal,
    plant,
    plant_from_samples,
    planted_quadratic_value,
    projection_norm_sq,
    subspace_bases,
)
from hardnesslab.rng import substream
from hardnesslab.wishart import Hypothesis, SampleSet, WishartParams, sample_null, sample_planted


@given(st.floats(0.01, 1.99))
def test_choose_parameters_invariants(eps):
    pp = choose_parameters(eps)
    assert pp.violations() == []
    assert pp.gamma > 1 and -1 < pp.beta < 0
    assert pp.beta**2 < pp.gamma
    assert edge_gap(pp.gamma) <= eps / 8
    assert pp.predicted_projection_bound <= eps / 32
    # the dyadic grid point just before the chosen one fails the edge condition
    k = round(-math.log2(pp.gamma - 1))
    if k > 0:
        assert edge_gap(1 + 2.0 ** -(k - 1)) > eps / 8


def test_choose_parameters_eps04():
    pp = choose_parameters(0.4)
    assert pp.predicted_projection_bound <= 0.0125
    assert pp.gamma == 1 + 2.0**-9


def test_choose_parameters_domain_and_violations():
    for bad in (0.0, 2.0, -1.0):
        with pytest.raises(DomainError):
            choose_parameters(bad)
    assert "gamma <= 1" in PlantParams(0.4, 0.9, -0.5).violations()
    assert any("eps/32" in v for v in PlantParams(0.4, 1.001953125, -0.5).violations())


def test_haar_orthogonal():
    q = haar_orthogonal(30, substream(0, "haar"))
    assert np.allclose(q.T @ q, np.eye(30), atol=1e-12)
    assert haar_orthogonal(0, substream(0, "haar")).shape == (0, 0)
    # first column is uniform on the sphere: its first coordinate has mean 0, variance 1/m
    m, draws = 5, 4000
    c = np.array([haar_orthogonal(m, substream(1, "haar", t))[0, 0] for t in range(draws)])
    assert abs(c.mean()) <= 3 * c.std(ddof=1) / math.sqrt(draws)
    assert abs(c.var() - 1 / m) <= 3 * 0.2 / math.sqrt(draws)


def test_plant_spectrum_and_subspaces():
    p = WishartParams(300, 1.2, -0.9)
    s = sample_planted(p, 1)
    pm = plant(s, 2)
    eig = np.linalg.eigvalsh(pm.W)
    assert np.max(np.abs(eig - pm.spectrum)) <= 1e-8
    assert np.array_equal(pm.W, pm.W.T)
    top = pm.basis[:, pm.N:]
    for y in s.samples:
        assert np.linalg.norm(top.T @ y) <= 1e-8 * np.linalg.norm(y)
    # the top n - N eigenvectors of W span the complement of the samples
    _, vecs = np.linalg.eigh(pm.W)
    span_top = vecs[:, pm.N:]
    assert np.allclose(span_top @ span_top.T, top @ top.T, atol=1e-8)


def test_plant_from_samples_deterministic():
    s = sample_null(WishartParams(50, 1.25, 0), 0)
    assert np.array_equal(plant_from_samples(s, 3), plant_from_samples(s, 3))


def test_null_input_edge():
    p = WishartParams(300, 1.2, 0)
    hits = 0
    for t in range(20):
        w = plant_from_samples(sample_null(p, substream(5, "null", t)), substream(5, "rot", t))
        hits += 1.85 <= np.linalg.eigvalsh(w)[-1] <= 2.15
    assert hits >= 19


def test_null_input_semicircle_law():
    p = WishartParams(200, 1.25, 0)
    eig = np.concatenate(
        [np.linalg.eigvalsh(plant_from_samples(sample_null(p, substream(6, "n", t)), substream(6, "r", t)))
         for t in range(200)]
    )
    assert stats.kstest(eig, semicircle_cdf).statistic <= 0.08


def test_null_output_entry_law():
    # the output is GOE: entry (0, 1) is N(0, 1/n)
    p = WishartParams(20, 1.25, 0)
    vals = np.array([plant_from_samples(sample_null(p, substream(7, "n", t)), substream(7, "r", t))[0, 1]
                     for t in range(5000)])
    assert stats.kstest(vals, stats.norm(scale=math.sqrt(1 / 20)).cdf).pvalue > 0.01


def test_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        subspace_bases(np.ones((5, 5)))
    y = np.ones((3, 10))
    with pytest.raises(DegenerateInputError):
        plant(SampleSet(y, Hypothesis.NULL), 0)


def test_projection_examples():
    s = sample_null(WishartParams(100, 1.5, 0), 0)
    x = s.samples[0] / np.linalg.norm(s.samples[0])
    assert abs(projection_norm_sq(x, s) - 1) <= 1e-10
    _, b_perp = subspace_bases(s.samples)
    assert abs(projection_norm_sq(b_perp[:, 0], s)) <= 1e-10


@pytest.mark.xfail(strict=True, reason="(1+beta)/(1-sqrt(gamma))^2 is an upper bound on |x|_V^2, not its limit")
def test_projection_matches_paper_formula_n2000():
    pp = PlantParams(0.4, 1.1, -0.98)
    s = sample_planted(WishartParams(2000, pp.gamma, pp.beta), 8)
    value = projection_norm_sq(s.spike, s)
    assert abs(value - pp.predicted_projection_bound) <= 0.25 * pp.predicted_projection_bound


def test_projection_limit_and_bound_n2000():
    pp = PlantParams(0.4, 1.1, -0.98)
    s = sample_planted(WishartParams(2000, pp.gamma, pp.beta), 8)
    value = projection_norm_sq(s.spike, s)
    assert abs(value - pp.predicted_projection) <= 0.25 * pp.predicted_projection
    assert value <= pp.predicted_projection_bound


def test_projection_limit_other_params():
    for gamma, beta in ((2.0, -0.5), (1.5, 0.0), (1.3, 0.8)):
        p = WishartParams(1500, gamma, beta)
        vals = [projection_norm_sq(s.spike, s) for s in (sample_planted(p, substream(9, "pl", t)) for t in range(3))]
        limit = PlantParams(0.4, gamma, beta).predicted_projection
        assert abs(np.mean(vals) - limit) <= 0.1 * limit


def test_quadratic_value_examples():
    x = np.ones(4) / 2
    assert planted_quadratic_value(np.eye(4), x) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        planted_quadratic_value(np.eye(3), x)


def test_planted_value_chain_and_rayleigh():
    pp = choose_parameters(0.4)
    p = WishartParams(1000, pp.gamma, pp.beta)
    for t in range(5):
        s = sample_planted(p, substream(10, "chain", t))
        pm = plant(s, substream(10, "rot", t))
        x = s.spike
        xv = pm.projection_norm_sq(x)
        value = planted_quadratic_value(pm.W, x)
        lam = pm.spectrum
        assert value >= lam[0] * xv + lam[pm.N] * (x @ x - xv) - 1e-8
        assert value <= lam[-1] * (x @ x) + 1e-10
        assert value >= 2 - 0.4 / 3


def test_detect_via_certifier():
    eps = 0.4
    p = WishartParams(500, 1.25, 0)
    spectral = lambda w: spectral_certificate(w)
    outs = [detect_via_certifier(sample_null(p, substream(11, "n", t)), spectral, eps, t) for t in range(10)]
    assert all(o is Hypothesis.PLANTED for o in outs)
    s = sample_null(p, 0)
    # the rule returns null iff the bound is at most 2 - eps/2
    assert detect_via_certifier(s, lambda w: 3.0, eps, 0) is Hypothesis.PLANTED
    assert detect_via_certifier(s, lambda w: 1.0, eps, 0) is Hypothesis.NULL
    assert detect_via_certifier(s, lambda w: 2 - eps / 2, eps, 0) is Hypothesis.NULL


def test_oracle_certifier_proxy_labels_planted():
    # x^T W x <= SK(W), so a certifier returning the true SK value exceeds 2 - eps/2
    eps = 0.4
    pp = choose_parameters(eps)
    p = WishartParams(1000, pp.gamma, pp.beta)
    labelled = 0
    for t in range(10):
        s = sample_planted(p, substream(12, "or", t))
        proxy = lambda w, x=s.spike: planted_quadratic_value(w, x)
        labelled += detect_via_certifier(s, proxy, eps, substream(12, "rot", t)) is Hypothesis.PLANTED
    assert labelled >= 9
