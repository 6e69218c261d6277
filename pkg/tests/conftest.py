"""Shared generators for randomized suites.

Everything random is driven by explicit numpy generators so suites are
reproducible and the acceptance determinism check can re-run them bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from poslab import Polynomial, SemialgebraicSystem


def random_polynomial(
    rng: np.random.Generator,
    dimension: int,
    max_degree: int,
    min_terms: int = 1,
    max_terms: int = 6,
    coeff_scale: float = 2.0,
) -> Polynomial:
    """Sparse polynomial with uniform coefficients in [-scale, scale]."""
    nterms = int(rng.integers(min_terms, max_terms + 1))
    terms = {}
    for _ in range(nterms):
        d = int(rng.integers(0, max_degree + 1))
        alpha = tuple(int(v) for v in rng.multinomial(d, np.ones(dimension) / dimension))
        terms[alpha] = terms.get(alpha, 0.0) + float(
            rng.uniform(-coeff_scale, coeff_scale)
        )
    return Polynomial(dimension, {a: c for a, c in terms.items() if c != 0.0})


def random_nonzero_polynomial(
    rng: np.random.Generator, dimension: int, max_degree: int, **kw
) -> Polynomial:
    while True:
        p = random_polynomial(rng, dimension, max_degree, **kw)
        if not p.is_zero:
            return p


def random_positive_degree_polynomial(
    rng: np.random.Generator, dimension: int, max_degree: int, **kw
) -> Polynomial:
    while True:
        p = random_polynomial(rng, dimension, max_degree, **kw)
        if p.degree >= 1:
            return p


def random_homogeneous_polynomial(
    rng: np.random.Generator, dimension: int, degree: int, max_terms: int = 4
) -> Polynomial:
    nterms = int(rng.integers(1, max_terms + 1))
    terms = {}
    for _ in range(nterms):
        alpha = tuple(
            int(v) for v in rng.multinomial(degree, np.ones(dimension) / dimension)
        )
        terms[alpha] = terms.get(alpha, 0.0) + float(rng.uniform(-2.0, 2.0))
    p = Polynomial(dimension, {a: c for a, c in terms.items() if c != 0.0})
    return p


def box_system(dimension: int) -> SemialgebraicSystem:
    """The unit box via 1 - x_i^2 >= 0 per axis."""
    constraints = []
    for i in range(dimension):
        alpha = [0] * dimension
        alpha[i] = 2
        constraints.append(
            Polynomial(dimension, {(0,) * dimension: 1.0, tuple(alpha): -1.0})
        )
    return SemialgebraicSystem(dimension, tuple(constraints))
