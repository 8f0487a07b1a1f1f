"""Hermite polynomials with arbitrary (including negative) variance.

``h_k(x; v)`` is defined by ``h_0 = 1`` and ``h_{k+1} = x h_k - v h_k'``,
equivalently ``h_{k+1} = x h_k - v k h_{k-1}``.  Negative ``v`` gives the
"umbral" family, which obeys the same identities as the classical one.

Coefficients are held as :class:`fractions.Fraction`; floats are converted
exactly, so every identity below is checked without rounding.  Polynomials
are coefficient lists indexed by power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError
from .rng import substream

Number = Union[int, float, Fraction]
Poly = list  # list[Fraction], index = power


def as_fraction(value: Number) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def double_factorial(k: int) -> int:
    """``k!!`` with the conventions ``0!! = (-1)!! = 1``."""
    if k < -1:
        raise DomainError(f"double factorial undefined for {k}")
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def gaussian_moment(k: int) -> int:
    """``E[g^k]`` for ``g ~ N(0, 1)``."""
    return 0 if k % 2 else double_factorial(k - 1)


# -- univariate polynomial helpers -------------------------------------------

def poly_trim(p: Poly) -> Poly:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_add(p: Poly, q: Poly) -> Poly:
    m = max(len(p), len(q))
    return poly_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(m)])


def poly_scale(p: Poly, c) -> Poly:
    return poly_trim([c * a for a in p])


def poly_shift(p: Poly) -> Poly:
    """Multiply by ``x``."""
    return poly_trim([Fraction(0)] + list(p))


def poly_deriv(p: Poly) -> Poly:
    if len(p) <= 1:
        return [Fraction(0)]
    return poly_trim([i * p[i] for i in range(1, len(p))])


def poly_mul(p: Poly, q: Poly) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return poly_trim(out)


def poly_eval(p: Poly, x):
    acc = 0
    for a in reversed(p):
        acc = acc * x + a
    return acc


def poly_substitute_scale(p: Poly, w) -> Poly:
    """Coefficients of ``p(w x)``."""
    w = as_fraction(w)
    return poly_trim([a * w**i for i, a in enumerate(p)])


# -- Hermite families -------------------------------------------------------

@dataclass(frozen=True)
class HermitePoly:
    degree: int
    variance: Fraction
    coeffs: tuple

    def __call__(self, x):
        return poly_eval(self.coeffs, x)

    def derivative(self) -> Poly:
        return poly_deriv(list(self.coeffs))

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    @property
    def is_monic(self) -> bool:
        return len(self.coeffs) == self.degree + 1 and self.coeffs[-1] == 1


def hermite_table(k: int, v: Number) -> list[Poly]:
    """``[h_0, ..., h_k]`` at variance ``v`` from the three-term recursion."""
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    v = as_fraction(v)
    table: list[Poly] = [[Fraction(1)]]
    if k >= 1:
        table.append([Fraction(0), Fraction(1)])
    for j in range(1, k):
        table.append(poly_add(poly_shift(table[j]), poly_scale(table[j - 1], -v * j)))
    return table


def hermite_coeffs(k: int, v: Number = 1) -> HermitePoly:
    """``h_k(.; v)`` via ``h_{k+1} = x h_k - v k h_{k-1}``."""
    return HermitePoly(k, as_fraction(v), tuple(hermite_table(k, v)[k]))


def hermite_coeffs_by_derivative(k: int, v: Number = 1) -> HermitePoly:
    """``h_k(.; v)`` via the defining recursion ``h_{k+1} = x h_k - v h_k'``."""
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    v = as_fraction(v)
    p: Poly = [Fraction(1)]
    for _ in range(k):
        p = poly_add(poly_shift(p), poly_scale(poly_deriv(p), -v))
    return HermitePoly(k, v, tuple(p))


def hermite_eval(k: int, x, v: float = 1.0) -> np.ndarray:
    """Floating-point ``h_k(x; v)`` by the three-term recursion, elementwise in ``x``."""
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if k == 0:
        return prev
    for j in range(1, k):
        prev, cur = cur, x * cur - v * j * prev
    return cur


def hermite_normalized_eval(k: int, x) -> np.ndarray:
    """``h_k(x; 1) / sqrt(k!)``, orthonormal under ``N(0, 1)``."""
    return hermite_eval(k, x) / math.sqrt(math.factorial(k))


# -- multi-indices ----------------------------------------------------------

def multi_abs(alpha: Sequence[int]) -> int:
    return int(sum(alpha))


def multi_factorial(alpha: Sequence[int]) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def multi_power(x: Sequence, alpha: Sequence[int]):
    return math.prod(xi**a for xi, a in zip(x, alpha))


def evaluate_multi(alpha: Sequence[int], x, normalized: bool = True) -> np.ndarray:
    """``H_alpha(x) = prod_i h_{alpha_i}(x_i)``, divided by ``sqrt(alpha!)`` if normalized.

    ``x`` has shape ``(..., n)``; the product runs over the last axis.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(alpha):
        raise DomainError(f"multi-index length {len(alpha)} does not match x of shape {x.shape}")
    out = np.ones(x.shape[:-1])
    for i, a in enumerate(alpha):
        if a:
            out = out * hermite_eval(a, x[..., i])
    if normalized:
        out = out / math.sqrt(multi_factorial(alpha))
    return out


def multi_indices(n: int, max_degree: int, min_degree: int = 0) -> Iterable[tuple[int, ...]]:
    """All ``alpha in N^n`` with ``min_degree <= |alpha| <= max_degree``, graded order."""
    def rec(prefix, remaining_len, budget):
        if remaining_len == 0:
            yield tuple(prefix)
            return
        for a in range(budget, -1, -1):
            yield from rec(prefix + [a], remaining_len - 1, budget - a)

    for d in range(min_degree, max_degree + 1):
        for alpha in rec([], n, d):
            if sum(alpha) == d:
                yield alpha


# -- identities -------------------------------------------------------------

def mismatched_expectation(k: int, v: Number, sigma2: Number) -> float:
    """``E_{g ~ N(0, sigma2)} h_k(g; v)``: zero for odd ``k``, ``(k-1)!! (sigma2 - v)^(k/2)`` for even."""
    return float(mismatched_expectation_exact(k, v, sigma2))


def mismatched_expectation_exact(k: int, v: Number, sigma2: Number) -> Fraction:
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    if k % 2:
        return Fraction(0)
    return double_factorial(k - 1) * (as_fraction(sigma2) - as_fraction(v)) ** (k // 2)


def gaussian_derivative(k: int, v: Number) -> Poly:
    """Polynomial ``p`` with ``d^k/dx^k exp(-x^2/(2v)) = p(x) exp(-x^2/(2v))``.

    Closed under differentiation: ``(p e^{a x^2})' = (p' + 2 a x p) e^{a x^2}``.
    """
    v = as_fraction(v)
    if v == 0:
        raise DomainError("variance must be nonzero")
    two_a = -1 / v
    p: Poly = [Fraction(1)]
    for _ in range(k):
        p = poly_add(poly_deriv(p), poly_scale(poly_shift(p), two_a))
    return p


def check_rodrigues(k: int, v: Number, grid: Iterable[Number]) -> float:
    """Max over ``grid`` of ``|LHS - RHS|`` in the Rodrigues formula.

    LHS is the symbolic ``k``-th derivative of ``exp(-x^2/(2v))``; RHS is
    ``(-v)^-k h_k(x; v) exp(-x^2/(2v))``.  Polynomial parts are evaluated
    exactly at the (rational) grid points, and only the common Gaussian
    factor is a float.
    """
    vf = as_fraction(v)
    if vf == 0:
        raise DomainError("variance must be nonzero")
    lhs = gaussian_derivative(k, vf)
    rhs = poly_scale(list(hermite_coeffs(k, vf).coeffs), (-vf) ** (-k))
    worst = 0.0
    for x in grid:
        xf = as_fraction(x)
        diff = poly_eval(lhs, xf) - poly_eval(rhs, xf)
        if diff:
            worst = max(worst, abs(float(diff)) * math.exp(-float(xf * xf) / (2 * float(vf))))
    return worst


# multivariate polynomials: dict {exponent tuple: Fraction}

def _mv_add(p: dict, q: dict, c=1) -> dict:
    out = dict(p)
    for e, a in q.items():
        out[e] = out.get(e, 0) + c * a
        if out[e] == 0:
            del out[e]
    return out


def _mv_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, a in p.items():
        for e2, b in q.items():
            e = tuple(i + j for i, j in zip(e1, e2))
            out[e] = out.get(e, 0) + a * b
    return {e: a for e, a in out.items() if a != 0}


def _mv_deriv(p: dict, i: int) -> dict:
    out: dict = {}
    for e, a in p.items():
        if e[i]:
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            out[e2] = out.get(e2, 0) + a * e[i]
    return out


def _mv_eval(p: dict, y: Sequence[Fraction]) -> Fraction:
    return sum((a * math.prod(yi**k for yi, k in zip(y, e)) for e, a in p.items()), Fraction(0))


def _linear_form(x: Sequence[Fraction]) -> dict:
    n = len(x)
    return {tuple(int(j == i) for j in range(n)): xi for i, xi in enumerate(x) if xi != 0}


def ridge_gaussian_derivative(alpha: Sequence[int], x: Sequence[Number], v: Number) -> dict:
    """Polynomial ``P(y)`` with ``d^alpha_y exp(-<x,y>^2/(2v)) = P(y) exp(-<x,y>^2/(2v))``."""
    vf = as_fraction(v)
    if vf == 0:
        raise DomainError("variance must be nonzero")
    xs = [as_fraction(t) for t in x]
    n = len(xs)
    lin = _linear_form(xs)
    p = {(0,) * n: Fraction(1)}
    for i, a in enumerate(alpha):
        for _ in range(a):
            # d_i q = 2 x_i <x, y>; multiplied by -1/(2v)
            p = _mv_add(_mv_deriv(p, i), _mv_mul(p, {e: -xs[i] * c / vf for e, c in lin.items()}))
    return p


def ridge_hermite_closed_form(alpha: Sequence[int], x: Sequence[Number], v: Number) -> dict:
    """``(-v)^-|alpha| x^alpha h_|alpha|(<x, y>; v)`` expanded as a polynomial in ``y``."""
    vf = as_fraction(v)
    xs = [as_fraction(t) for t in x]
    n = len(xs)
    k = multi_abs(alpha)
    scale = (-vf) ** (-k) * multi_power(xs, alpha)
    lin = _linear_form(xs)
    out: dict = {}
    power = {(0,) * n: Fraction(1)}
    for c in hermite_coeffs(k, vf).coeffs:
        if c:
            out = _mv_add(out, power, c * scale)
        power = _mv_mul(power, lin)
    return {e: a for e, a in out.items() if a != 0}


def check_multidim_rodrigues(
    alpha: Sequence[int], x: Sequence[Number], v: Number, y_grid: Iterable[Sequence[Number]]
) -> float:
    """Max residual of the multidimensional Rodrigues formula over ``y_grid``."""
    vf = as_fraction(v)
    if vf == 0:
        raise DomainError("variance must be nonzero")
    if len(alpha) != len(x):
        raise DomainError("alpha and x must have the same length")
    diff = _mv_add(ridge_gaussian_derivative(alpha, x, vf), ridge_hermite_closed_form(alpha, x, vf), -1)
    if not diff:
        return 0.0
    xs = [as_fraction(t) for t in x]
    worst = 0.0
    for y in y_grid:
        ys = [as_fraction(t) for t in y]
        ip = sum((a * b for a, b in zip(xs, ys)), Fraction(0))
        worst = max(worst, abs(float(_mv_eval(diff, ys))) * math.exp(-float(ip * ip) / (2 * float(vf))))
    return worst


def gaussian_expectation(p: Poly) -> Fraction:
    """``E[p(g)]`` for ``g ~ N(0, 1)``, exactly."""
    return sum((as_fraction(a) * gaussian_moment(i) for i, a in enumerate(p)), Fraction(0))


def check_integration_by_parts(k: int, f: Sequence[Number]) -> float:
    """``|E[h_k(g; 1) f(g)] - E[f^(k)(g)]|`` for a polynomial ``f`` (coefficients by power)."""
    if len(f) - 1 > 8:
        raise DomainError("test polynomials are limited to degree 8")
    fp = [as_fraction(a) for a in f]
    lhs = gaussian_expectation(poly_mul(list(hermite_coeffs(k, 1).coeffs), fp))
    deriv = fp
    for _ in range(k):
        deriv = poly_deriv(deriv)
    return float(abs(lhs - gaussian_expectation(deriv)))


def identity_suite(seed: int, mc_samples: int = 1_000_000, tol: float = 1e-8) -> list[dict]:
    """Run every identity check; one row per (identity, case)."""
    rows = []

    def add(identity, case, residual, tolerance=tol):
        residual = float(residual)
        rows.append({"identity": identity, "case": case, "residual": residual, "tolerance": tolerance,
                     "passed": bool(residual <= tolerance)})

    exact = ("2", "1", "0", "-1", "-2", "1/2", "-1/2")
    for vs in exact:
        v = Fraction(vs)
        table = hermite_table(30, v)
        bad = 0
        for k in range(31):
            by_deriv = list(hermite_coeffs_by_derivative(k, v).coeffs)
            bad += by_deriv != table[k]
            if k:
                bad += poly_deriv(table[k]) != poly_scale(table[k - 1], k)
        add("recursions and differentiation", f"v={vs}, k<=30", bad, 0.0)
    for w in ("2", "-3", "1/2"):
        wf = Fraction(w)
        for vs in ("1", "-1", "1/2"):
            v = Fraction(vs)
            bad = sum(
                poly_substitute_scale(list(hermite_coeffs(k, v).coeffs), wf)
                != poly_scale(list(hermite_coeffs(k, v / wf**2).coeffs), wf**k)
                for k in range(21)
            )
            add("scaling", f"w={w}, v={vs}, k<=20", bad, 0.0)
    grid = [Fraction(i, 10) for i in range(-30, 31)]
    for vs in ("1", "-1", "1/2", "-1/2"):
        worst = max(check_rodrigues(k, Fraction(vs), grid) for k in range(11))
        add("rodrigues", f"v={vs}, k<=10", worst)
    ygrid = [(Fraction(i, 4), Fraction(j, 4)) for i in range(-4, 5) for j in range(-4, 5)]
    for alpha, x, vs in (((2, 1), (1, 1), "-1/2"), ((1, 1), (1, 0), "1"), ((0, 0), (1, 2), "1"),
                         ((2, 2), (1, -1), "1/2"), ((3, 1), (2, 1), "-1")):
        add("multidim rodrigues", f"alpha={alpha}, x={x}, v={vs}",
            check_multidim_rodrigues(alpha, x, Fraction(vs), ygrid))
    for k in range(9):
        for f in ([0] * d + [1] for d in range(9)):
            add("integration by parts", f"k={k}, f=t^{len(f) - 1}", check_integration_by_parts(k, f), 0.0)
    rng = substream(seed, "hermite-mc")
    g = rng.standard_normal(mc_samples)
    for sigma2 in (0.5, 1.0, 2.0):
        x = math.sqrt(sigma2) * g
        for v in (1.0, -1.0, 0.5, -0.5):
            for k in range(9):
                vals = hermite_eval(k, x, v)
                se = float(vals.std(ddof=1) / math.sqrt(mc_samples))
                diff = abs(float(vals.mean()) - mismatched_expectation(k, v, sigma2))
                rows.append({"identity": "mismatched expectation", "case": f"k={k}, v={v:g}, sigma2={sigma2:g}",
                             "residual": diff, "tolerance": 3.0 * se, "passed": bool(diff <= 3.0 * se)})
    return rows
