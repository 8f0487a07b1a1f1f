import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from hardnesslab import hermite as hm
from hardnesslab.errors import DomainError
from hardnesslab.rng import substream

F = Fraction
VARIANCES = [F(2), F(1), F(0), F(-1), F(-2), F(1, 2), F(-1, 2)]


def coeffs(k, v):
    return list(hm.hermite_coeffs(k, v).coeffs)


def test_hermite_examples():
    assert coeffs(2, F(7, 3)) == [F(-7, 3), 0, 1]
    assert coeffs(3, 1) == [0, -3, 0, 1]
    assert coeffs(4, -1) == [3, 0, 6, 0, 1]
    assert coeffs(0, 5) == [1]
    with pytest.raises(DomainError):
        hm.hermite_coeffs(-1, 1)


def test_matches_numpy_probabilists_hermite():
    for k in range(12):
        ref = np.polynomial.hermite_e.herme2poly([0] * k + [1])
        assert np.allclose(hm.hermite_coeffs(k, 1).as_array(), ref)


@pytest.mark.parametrize("v", VARIANCES)
def test_monic_parity_and_recursions_agree(v):
    table = hm.hermite_table(30, v)
    for k in range(31):
        h = hm.hermite_coeffs(k, v)
        assert h.is_monic or (v == 0 and h.coeffs[-1] == 1)
        assert all(c == 0 for j, c in enumerate(h.coeffs) if (j - k) % 2)
        assert list(hm.hermite_coeffs_by_derivative(k, v).coeffs) == table[k]


@pytest.mark.parametrize("v", VARIANCES)
def test_differentiation_identity(v):
    table = hm.hermite_table(30, v)
    for k in range(1, 31):
        assert hm.poly_deriv(table[k]) == hm.poly_scale(table[k - 1], k)


@pytest.mark.parametrize("w", [F(2), F(-3), F(1, 2)])
@pytest.mark.parametrize("v", [F(1), F(-1), F(1, 3)])
def test_scaling_identity(w, v):
    for k in range(21):
        lhs = hm.poly_substitute_scale(coeffs(k, v), w)
        rhs = hm.poly_scale(coeffs(k, v / w**2), w**k)
        assert lhs == rhs


def test_float_evaluation_matches_exact():
    x = np.linspace(-3, 3, 13)
    for k in range(15):
        for v in (1.0, -0.5):
            exact = [float(hm.hermite_coeffs(k, v)(F(t))) for t in x]
            assert np.allclose(hm.hermite_eval(k, x, v), exact, rtol=1e-12, atol=1e-9)


def test_evaluate_multi():
    x = np.array([0.3, -1.2, 2.0])
    assert hm.evaluate_multi((0, 0, 0), x) == 1.0
    assert hm.evaluate_multi((1, 0, 0), x) == pytest.approx(0.3)
    expected = (1.2**2 - 1) * (2.0**3 - 6.0) / math.sqrt(2 * 6)
    assert hm.evaluate_multi((0, 2, 3), x) == pytest.approx(expected)
    assert hm.evaluate_multi((0, 2, 3), x, normalized=False) == pytest.approx(expected * math.sqrt(12))
    assert hm.evaluate_multi((1, 1), np.ones((4, 2))).shape == (4,)
    with pytest.raises(DomainError):
        hm.evaluate_multi((1, 1), x)


def test_multi_index_helpers():
    assert hm.multi_abs((2, 0, 3)) == 5
    assert hm.multi_factorial((2, 0, 3)) == 12
    assert hm.multi_power((2, 3), (2, 1)) == 12
    idx = list(hm.multi_indices(3, 3))
    assert len(idx) == math.comb(6, 3) and len(set(idx)) == len(idx)
    assert hm.double_factorial(7) == 105 and hm.double_factorial(-1) == 1 and hm.double_factorial(0) == 1


def test_orthonormality_monte_carlo():
    g = substream(0, "ortho").standard_normal((1_000_000, 3))
    idx = list(hm.multi_indices(3, 3))
    values = {a: hm.evaluate_multi(a, g) for a in idx}
    pairs = len(idx) * (len(idx) + 1) // 2
    # 210 simultaneous comparisons: Bonferroni z for a family-wise level of 0.01
    z = stats.norm.isf(0.005 / pairs)
    for i, a in enumerate(idx):
        for b in idx[i:]:
            prod = values[a] * values[b]
            se = prod.std(ddof=1) / math.sqrt(len(prod))
            assert abs(prod.mean() - (a == b)) <= z * se + 1e-12, (a, b)


def test_mismatched_expectation_examples():
    assert hm.mismatched_expectation(1, 0.3, 4.0) == 0.0
    assert hm.mismatched_expectation(2, 0.5, 2) == pytest.approx(1.5)
    assert hm.mismatched_expectation(4, 3, 1) == 12
    for k in (2, 4, 6, 8):
        assert hm.mismatched_expectation(k, 0.7, 0.7) == 0.0


def test_mismatched_expectation_monte_carlo():
    g = substream(1, "mm").standard_normal(1_000_000)
    vals = hm.hermite_eval(4, g, 3.0)
    assert abs(vals.mean() - 12) <= 3 * vals.std(ddof=1) / math.sqrt(len(vals))


@given(st.integers(0, 12), st.fractions(-3, 3, max_denominator=7), st.fractions(0, 3, max_denominator=7))
def test_mismatched_expectation_exact_by_moments(k, v, sigma2):
    # independent route: E h_k(sigma g; v) from exact Gaussian moments
    h = coeffs(k, v)
    exact = sum(c * sigma2 ** (j // 2) * hm.gaussian_moment(j) for j, c in enumerate(h) if j % 2 == 0)
    assert hm.mismatched_expectation_exact(k, v, sigma2) == exact


def test_rodrigues():
    grid = [F(i, 10) for i in range(-30, 31)]
    assert hm.check_rodrigues(0, 1, grid) == 0.0
    for v in (1, -1, 0.5, -0.5):
        for k in range(11):
            assert hm.check_rodrigues(k, v, grid) <= 1e-8
    with pytest.raises(DomainError):
        hm.check_rodrigues(2, 0, grid)


def test_rodrigues_k1_at_zero():
    assert hm.check_rodrigues(1, 1, [0]) == 0.0
    assert hm.gaussian_derivative(1, 1) == [0, -1]


@pytest.mark.parametrize("v", [F(1), F(-1), F(1, 2), F(-1, 2)])
def test_gaussian_derivative_matches_sympy(v):
    x = sp.Symbol("x")
    g = sp.exp(-x**2 / (2 * sp.Rational(v.numerator, v.denominator)))
    for k in range(8):
        poly = sp.Poly(sp.simplify(sp.diff(g, x, k) / g), x)
        ref = [F(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
        assert hm.gaussian_derivative(k, v) == hm.poly_trim(ref)


def test_multidim_rodrigues():
    ygrid = [(F(i, 4), F(j, 4)) for i in range(-4, 5) for j in range(-4, 5)]
    assert hm.check_multidim_rodrigues((0, 0), (1, 2), 1, ygrid) == 0.0
    assert hm.ridge_gaussian_derivative((1, 1), (1, 0), 1) == {}
    assert hm.ridge_hermite_closed_form((1, 1), (1, 0), 1) == {}
    assert hm.check_multidim_rodrigues((2, 1), (1, 1), -0.5, ygrid) <= 1e-8
    with pytest.raises(DomainError):
        hm.check_multidim_rodrigues((1, 0), (1, 1), 0, ygrid)


def test_multidim_rodrigues_against_sympy():
    y1, y2, y3 = sp.symbols("y1 y2 y3")
    x = (2, -1, 1)
    v = sp.Rational(-1, 2)
    expo = -(x[0] * y1 + x[1] * y2 + x[2] * y3) ** 2 / (2 * v)
    alpha = (2, 1, 1)
    d = sp.diff(sp.exp(expo), y1, 2, y2, 1, y3, 1) / sp.exp(expo)
    poly = sp.Poly(sp.expand(sp.simplify(d)), y1, y2, y3)
    ref = {tuple(m): F(int(c.p), int(c.q)) for m, c in zip(poly.monoms(), poly.coeffs())}
    assert hm.ridge_gaussian_derivative(alpha, x, F(-1, 2)) == ref
    assert hm.ridge_hermite_closed_form(alpha, x, F(-1, 2)) == ref


def test_integration_by_parts():
    assert hm.check_integration_by_parts(0, [1, 2, 3]) == 0.0
    lhs = hm.gaussian_expectation(hm.poly_mul(coeffs(2, 1), [0, 0, 1]))
    assert lhs == 2
    lhs = hm.gaussian_expectation(hm.poly_mul(coeffs(3, 1), [0, 0, 0, 0, 0, 1]))
    assert lhs == 60
    assert hm.check_integration_by_parts(3, [0, 0, 0, 0, 0, 1]) == 0.0
    with pytest.raises(DomainError):
        hm.check_integration_by_parts(1, [0] * 9 + [1])


@given(st.integers(0, 8), st.lists(st.fractions(-5, 5, max_denominator=9), min_size=1, max_size=9))
def test_integration_by_parts_property(k, f):
    assert hm.check_integration_by_parts(k, f) == 0.0
