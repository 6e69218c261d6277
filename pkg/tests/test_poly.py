"""Polynomial arithmetic, the weighted norm, and its analytic bound lemmas."""

import math

import numpy as np
import pytest

from conftest import (
    random_homogeneous_polynomial,
    random_nonzero_polynomial,
    random_polynomial,
    random_positive_degree_polynomial,
)
from poslab import (
    CapacityError,
    DimensionMismatchError,
    InputError,
    ParseError,
    Polynomial,
    format_polynomial,
    lipschitz_bound,
    multinomial,
    parse_polynomial,
    product_norm_bound,
    rescale,
    sup_bound,
    weighted_norm,
)

P = parse_polynomial


# ----------------------------------------------------------------------
# construction and arithmetic


def test_zero_polynomial_basics():
    z = Polynomial.zero(2)
    assert z.is_zero
    assert z.degree == 0
    assert weighted_norm(z) == 0.0


def test_stored_terms_never_zero():
    p = Polynomial(1, {(1,): 1.0, (2,): 0.0})
    assert list(p.terms()) == [((1,), 1.0)]


def test_mul_single_terms():
    x = P("x1")
    assert x * x == P("x1^2")


def test_add_cancellation_prunes():
    assert (P("x1") + P("-x1")).is_zero


def test_mul_hand_expansion():
    assert P("1 + x1") * P("1 - x1") == P("1 - x1^2")


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatchError):
        P("x1") + P("x2")
    with pytest.raises(DimensionMismatchError):
        P("x1").evaluate([1.0, 2.0])


def test_power_matches_repeated_mul():
    g = P("1 - x1^2")
    assert g.power(3) == g * g * g
    assert g.power(0) == P("1")


# ----------------------------------------------------------------------
# evaluation


def test_evaluate_constant():
    assert P("1", 2).evaluate([0.3, -0.7]) == 1.0


def test_evaluate_two_terms():
    assert P("x1^2 + 2*x1*x2").evaluate([1.0, 1.0]) == 3.0


def test_evaluate_hand_arithmetic():
    # 2^3 - 5 = 3
    assert P("x1^3 - x2").evaluate([2.0, 5.0]) == 3.0


def test_evaluate_many_matches_scalar():
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = random_polynomial(rng, 2, 4)
        pts = rng.uniform(-1, 1, size=(13, 2))
        vec = f.evaluate_many(pts)
        for i in range(pts.shape[0]):
            assert vec[i] == pytest.approx(f.evaluate(pts[i]), abs=1e-12)


# ----------------------------------------------------------------------
# weighted norm


def test_multinomial_values():
    assert multinomial((2, 0)) == 1.0
    assert multinomial((1, 1)) == 2.0
    assert multinomial((1, 1, 1)) == 6.0
    with pytest.raises(CapacityError):
        multinomial((61,))


def test_weighted_norm_zero():
    assert weighted_norm(Polynomial.zero(3)) == 0.0


def test_weighted_norm_enumerated():
    # binom(2,(2,0)) = 1 gives 1/1; binom(2,(1,1)) = 2 gives 2/2; max = 1
    assert weighted_norm(P("x1^2 + 2*x1*x2")) == 1.0


def test_weighted_norm_six_xyz():
    assert weighted_norm(P("6*x1*x2*x3")) == 1.0


# ----------------------------------------------------------------------
# sup bound


def test_sup_bound_formula():
    assert sup_bound(P("x1")) == 2.0
    assert sup_bound(P("x1^2 + 2*x1*x2")) == 16.0
    assert sup_bound(P("3*x1")) == 6.0


def test_sup_bound_rejects_constants():
    with pytest.raises(InputError):
        sup_bound(P("5"))


# ----------------------------------------------------------------------
# Lipschitz bound


def test_lipschitz_formula():
    assert lipschitz_bound(P("x1")) == 1.0
    assert lipschitz_bound(P("x1^2")) == 4.0
    # d^2 n^(d-1) sqrt(n) ||f||: ||x1*x2|| = 1/2, so 4 * 2 * sqrt(2) * 1/2
    assert lipschitz_bound(P("x1*x2")) == pytest.approx(4.0 * math.sqrt(2.0))
    assert lipschitz_bound(P("2*x1*x2")) == pytest.approx(8.0 * math.sqrt(2.0))


def test_lipschitz_rejects_zero():
    with pytest.raises(InputError):
        lipschitz_bound(Polynomial.zero(1))


# ----------------------------------------------------------------------
# rescale


def test_rescale_identity():
    assert rescale(P("x1^2"), 1.0) == P("x1^2")


def test_rescale_single_term():
    assert rescale(P("x1^2"), 2.0) == P("4*x1^2")


def test_rescale_per_term():
    assert rescale(P("x1 + x2^2"), 3.0) == P("3*x1 + 9*x2^2")


def test_rescale_rejects_nonpositive():
    with pytest.raises(InputError):
        rescale(P("x1"), 0.0)
    with pytest.raises(InputError):
        rescale(P("x1"), -1.0)


# ----------------------------------------------------------------------
# product norm bound


def test_product_norm_bound_values():
    assert product_norm_bound([P("x1")]) == 2.0
    assert product_norm_bound([P("x1"), P("x1")]) == 4.0
    assert weighted_norm(P("x1^2")) <= 4.0
    assert product_norm_bound([P("1 + x1"), P("1 - x1")]) == 4.0
    assert weighted_norm(P("1 - x1^2")) <= 4.0


def test_product_norm_bound_rejects_zero_factor():
    with pytest.raises(InputError):
        product_norm_bound([P("x1"), Polynomial.zero(1)])


# ----------------------------------------------------------------------
# parsing and printing


def test_parse_spec_example():
    p = P("2*x1^2*x2 - 3*x2 + 1")
    assert p.dimension == 2
    assert p.coefficient((2, 1)) == 2.0
    assert p.coefficient((0, 1)) == -3.0
    assert p.coefficient((0, 0)) == 1.0


def test_parse_whitespace_insensitive():
    assert P(" 2*x1 ^1+ 1 ".replace("^1", "")) == P("2*x1+1")


def test_parse_scientific_coefficients():
    p = P("1e-3*x1 - 2.5E+1")
    assert p.coefficient((1,)) == 1e-3
    assert p.coefficient((0,)) == -25.0


def test_parse_declared_dimension():
    p = P("x1", 3)
    assert p.dimension == 3


def test_parse_rejects_garbage():
    for bad in ("", "x0", "2**x1", "x1^", "y1", "1 + + 2"):
        with pytest.raises(ParseError):
            P(bad)
    with pytest.raises(ParseError):
        P("x3", 2)


def test_format_parse_roundtrip_random():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        f = random_polynomial(rng, n, 4)
        if f.is_zero:
            continue
        assert P(format_polynomial(f), n) == f


def test_format_zero():
    assert format_polynomial(Polynomial.zero(2)) == "0"


# ----------------------------------------------------------------------
# randomized property suites (the analytic lemmas; zero violations)

CASES = 1000


def test_norm_scaling_homogeneity():
    rng = np.random.default_rng(101)
    for _ in range(CASES):
        n = int(rng.integers(1, 4))
        f = random_nonzero_polynomial(rng, n, 4)
        lam = float(rng.uniform(-3.0, 3.0))
        lhs = weighted_norm(f.scale(lam))
        rhs = abs(lam) * weighted_norm(f)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)


def test_norm_triangle_inequality():
    rng = np.random.default_rng(102)
    for _ in range(CASES):
        n = int(rng.integers(1, 4))
        f = random_polynomial(rng, n, 4)
        g = random_polynomial(rng, n, 4)
        assert weighted_norm(f + g) <= weighted_norm(f) + weighted_norm(g) + 1e-12


def test_homogeneous_submultiplicativity():
    rng = np.random.default_rng(103)
    for _ in range(CASES):
        n = int(rng.integers(1, 4))
        p = random_homogeneous_polynomial(rng, n, int(rng.integers(0, 4)))
        q = random_homogeneous_polynomial(rng, n, int(rng.integers(0, 4)))
        if p.is_zero or q.is_zero:
            continue
        assert weighted_norm(p * q) <= weighted_norm(p) * weighted_norm(q) * (
            1.0 + 1e-12
        )


def test_general_product_norm_bound():
    rng = np.random.default_rng(104)
    for _ in range(CASES):
        n = int(rng.integers(1, 4))
        s = int(rng.integers(1, 4))
        factors = [random_nonzero_polynomial(rng, n, 3) for _ in range(s)]
        prod = factors[0]
        for p in factors[1:]:
            prod = prod * p
        assert weighted_norm(prod) <= product_norm_bound(factors) * (1.0 + 1e-12)


def test_sup_bound_on_box_samples():
    rng = np.random.default_rng(105)
    for _ in range(CASES):
        n = int(rng.integers(1, 4))
        f = random_positive_degree_polynomial(rng, n, 4)
        x = rng.uniform(-1.0, 1.0, size=n)
        assert abs(f.evaluate(x)) <= sup_bound(f)


def test_lipschitz_bound_on_box_samples():
    rng = np.random.default_rng(106)
    for _ in range(CASES):
        n = int(rng.integers(1, 4))
        f = random_nonzero_polynomial(rng, n, 4)
        x = rng.uniform(-1.0, 1.0, size=n)
        y = rng.uniform(-1.0, 1.0, size=n)
        lhs = abs(f.evaluate(x) - f.evaluate(y))
        rhs = float(np.linalg.norm(x - y)) * lipschitz_bound(f) + 1e-9
        assert lhs <= rhs


def test_shifted_power_calculus_inequality():
    # (y-1)^(2k) * y <= 1/(2k+1) on [0,1]
    rng = np.random.default_rng(107)
    ys = rng.uniform(0.0, 1.0, size=CASES)
    for k in range(0, 51):
        vals = (ys - 1.0) ** (2 * k) * ys
        assert float(np.max(vals)) <= 1.0 / (2 * k + 1) + 1e-12
