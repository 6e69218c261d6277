"""Sparse multivariate polynomial arithmetic and the weighted coefficient norm.

A polynomial in n variables is a finite map from exponent vectors
``alpha = (a_1, ..., a_n)`` to float coefficients.  The zero polynomial is the
empty map.  All iteration that can affect numerical results runs in graded
lexicographic order (ascending total degree, then x1 before x2 before ...),
so sums and downstream SDP constraint indexing are reproducible.

The size measure used throughout the package is the weighted coefficient norm

    ||f|| = max_alpha |a_alpha| / multinomial(|alpha|, alpha),

the natural norm for the sup/Lipschitz estimates on [-1,1]^n implemented
below (``sup_bound``, ``lipschitz_bound``, ``product_norm_bound``).
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import CapacityError, DimensionMismatchError, InputError, ParseError

Monomial = tuple[int, ...]

# Terms with |coefficient| <= DEFAULT_PRUNE_TOL are dropped after arithmetic,
# keeping the sparse maps free of float dust.
DEFAULT_PRUNE_TOL = 1e-14

# Multinomial coefficients are computed in exact integer arithmetic up to this
# total degree; beyond it the problem is out of desk scale.
MAX_NORM_DEGREE = 60


def grlex_key(alpha: Monomial) -> tuple:
    """Sort key realizing graded lex order with x1 > x2 > ... > xn."""
    return (sum(alpha), tuple(-a for a in alpha))


def multinomial(alpha: Monomial) -> float:
    """Multinomial coefficient |alpha|! / (a_1! ... a_n!) as a float.

    Computed exactly in integer arithmetic, then converted.  Degrees above
    MAX_NORM_DEGREE raise CapacityError.
    """
    total = sum(alpha)
    if total > MAX_NORM_DEGREE:
        raise CapacityError(
            f"multinomial coefficient of degree {total} exceeds the cap "
            f"{MAX_NORM_DEGREE}"
        )
    value = math.factorial(total)
    for a in alpha:
        value //= math.factorial(a)
    return float(value)


class Polynomial:
    """Immutable sparse polynomial over n >= 1 real variables.

    Construct via the classmethods (``zero``, ``constant``, ``variable``,
    ``from_terms``, ``parse``) or by arithmetic on existing polynomials.
    Stored coefficients are never zero; keys all have length ``dimension``.
    """

    __slots__ = ("dimension", "_terms")

    def __init__(self, dimension: int, terms: Mapping[Monomial, float]):
        if dimension < 1:
            raise InputError(f"dimension must be >= 1, got {dimension}")
        clean: dict[Monomial, float] = {}
        for alpha, coef in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dimension:
                raise DimensionMismatchError(
                    f"exponent vector {alpha} has length {len(alpha)}, "
                    f"expected {dimension}"
                )
            if any(a < 0 for a in alpha):
                raise InputError(f"negative exponent in {alpha}")
            coef = float(coef)
            if coef != 0.0:
                clean[alpha] = coef
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("Polynomial is immutable")

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zero(cls, dimension: int) -> "Polynomial":
        return cls(dimension, {})

    @classmethod
    def constant(cls, dimension: int, value: float) -> "Polynomial":
        return cls(dimension, {(0,) * dimension: float(value)})

    @classmethod
    def variable(cls, dimension: int, index: int) -> "Polynomial":
        """The monomial x_{index+1} (0-based index)."""
        if not 0 <= index < dimension:
            raise InputError(f"variable index {index} out of range for n={dimension}")
        alpha = [0] * dimension
        alpha[index] = 1
        return cls(dimension, {tuple(alpha): 1.0})

    @classmethod
    def from_terms(
        cls, dimension: int, terms: Mapping[Monomial, float]
    ) -> "Polynomial":
        return cls(dimension, terms)

    @classmethod
    def parse(cls, text: str, dimension: int | None = None) -> "Polynomial":
        return parse_polynomial(text, dimension)

    # ------------------------------------------------------------------
    # inspection

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; 0 for the zero polynomial."""
        if not self._terms:
            return 0
        return max(sum(alpha) for alpha in self._terms)

    def terms(self) -> Iterator[tuple[Monomial, float]]:
        """Terms in graded lex order."""
        for alpha in sorted(self._terms, key=grlex_key):
            yield alpha, self._terms[alpha]

    def coefficient(self, alpha: Monomial) -> float:
        return self._terms.get(tuple(alpha), 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dimension == other.dimension and self._terms == other._terms

    def __hash__(self):
        return hash((self.dimension, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({self.dimension}, {format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)

    # ------------------------------------------------------------------
    # arithmetic (exact sparse dict operations, pruned)

    def _check_same_dimension(self, other: "Polynomial") -> None:
        if self.dimension != other.dimension:
            raise DimensionMismatchError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}"
            )

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_dimension(other)
        out = dict(self._terms)
        for alpha, coef in other._terms.items():
            out[alpha] = out.get(alpha, 0.0) + coef
        return Polynomial(self.dimension, _pruned(out))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_dimension(other)
        out = dict(self._terms)
        for alpha, coef in other._terms.items():
            out[alpha] = out.get(alpha, 0.0) - coef
        return Polynomial(self.dimension, _pruned(out))

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.dimension, {a: -c for a, c in self._terms.items()})

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_dimension(other)
        out: dict[Monomial, float] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0.0) + ca * cb
        return Polynomial(self.dimension, _pruned(out))

    def scale(self, factor: float) -> "Polynomial":
        factor = float(factor)
        return Polynomial(
            self.dimension, _pruned({a: factor * c for a, c in self._terms.items()})
        )

    def power(self, exponent: int) -> "Polynomial":
        """Integer power by repeated multiplication."""
        if exponent < 0:
            raise InputError("negative polynomial power")
        result = Polynomial.constant(self.dimension, 1.0)
        for _ in range(exponent):
            result = result * self
        return result

    # ------------------------------------------------------------------
    # evaluation

    def evaluate(self, point: Iterable[float]) -> float:
        """Evaluate at a point, accumulating terms in graded lex order."""
        x = [float(v) for v in point]
        if len(x) != self.dimension:
            raise DimensionMismatchError(
                f"point has length {len(x)}, expected {self.dimension}"
            )
        total = 0.0
        for alpha, coef in self.terms():
            term = coef
            for xi, a in zip(x, alpha):
                if a:
                    term *= xi**a
            total += term
        return total

    def __call__(self, point: Iterable[float]) -> float:
        return self.evaluate(point)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an (N, n) array of points.

        Terms accumulate in the same graded lex order as ``evaluate``, so the
        result is bit-reproducible for identical inputs.
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"points must have shape (N, {self.dimension}), got {pts.shape}"
            )
        total = np.zeros(pts.shape[0])
        for alpha, coef in self.terms():
            term = np.full(pts.shape[0], coef)
            for i, a in enumerate(alpha):
                if a:
                    term *= pts[:, i] ** a
            total += term
        return total


def _pruned(
    terms: dict[Monomial, float], tol: float = DEFAULT_PRUNE_TOL
) -> dict[Monomial, float]:
    return {a: c for a, c in terms.items() if abs(c) > tol}


# ----------------------------------------------------------------------
# norm and analytic bounds


def weighted_norm(f: Polynomial) -> float:
    """max over terms of |coefficient| / multinomial(|alpha|, alpha); 0 for f = 0."""
    best = 0.0
    for alpha, coef in f._terms.items():
        best = max(best, abs(coef) / multinomial(alpha))
    return best


def sup_bound(f: Polynomial) -> float:
    """Upper bound 2 d n^d ||f|| for |f| on [-1,1]^n; requires deg f >= 1."""
    d = f.degree
    if d < 1:
        raise InputError("sup_bound requires degree >= 1")
    return 2.0 * d * float(f.dimension) ** d * weighted_norm(f)


def lipschitz_bound(f: Polynomial) -> float:
    """Lipschitz constant d^2 n^(d-1) sqrt(n) ||f|| for f on [-1,1]^n.

    Valid for any nonzero f; the zero polynomial is rejected.
    """
    if f.is_zero:
        raise InputError("lipschitz_bound requires a nonzero polynomial")
    d = f.degree
    n = f.dimension
    return d**2 * float(n) ** (d - 1) * math.sqrt(n) * weighted_norm(f)


def product_norm_bound(factors: list[Polynomial]) -> float:
    """Certified upper bound prod(1 + deg p_i) * prod ||p_i|| on ||p_1 ... p_s||."""
    bound = 1.0
    for p in factors:
        if p.is_zero:
            raise InputError("product_norm_bound requires nonzero factors")
        bound *= (1.0 + p.degree) * weighted_norm(p)
    return bound


def rescale(f: Polynomial, r: float) -> Polynomial:
    """Substitute x -> r x: coefficient a_alpha becomes a_alpha * r^|alpha|."""
    r = float(r)
    if r <= 0.0:
        raise InputError(f"rescale factor must be positive, got {r}")
    return Polynomial(
        f.dimension,
        _pruned({a: c * r ** sum(a) for a, c in f._terms.items()}),
    )


# ----------------------------------------------------------------------
# text grammar: terms joined by +/-, term = [coefficient *] x<i>[^<e>] factors

_VAR_RE = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def _split_signed_terms(text: str) -> list[tuple[float, str]]:
    """Split at top-level +/-, keeping signs; exponent signs of scientific
    notation (1e-3) are not separators."""
    terms: list[tuple[float, str]] = []
    sign = 1.0
    buf: list[str] = []
    prev = ""
    for ch in text:
        if ch in "+-" and prev not in ("e", "E"):
            if buf:
                terms.append((sign, "".join(buf)))
                buf = []
                sign = 1.0
            elif terms:
                raise ParseError(f"dangling sign in {text!r}")
            if ch == "-":
                sign = -sign
        else:
            buf.append(ch)
        prev = ch
    if not buf:
        raise ParseError(f"empty term in {text!r}")
    terms.append((sign, "".join(buf)))
    return terms


def parse_polynomial(text: str, dimension: int | None = None) -> Polynomial:
    """Parse strings like ``2*x1^2*x2 - 3*x2 + 1`` (whitespace insensitive).

    The dimension is inferred from the highest variable index unless given.
    """
    compact = "".join(text.split())
    if not compact:
        raise ParseError("empty polynomial string")
    raw_terms: list[tuple[float, dict[int, int]]] = []
    max_index = 0
    for sign, body in _split_signed_terms(compact):
        coef = sign
        exps: dict[int, int] = {}
        for factor in body.split("*"):
            if not factor:
                raise ParseError(f"empty factor in term {body!r}")
            m = _VAR_RE.match(factor)
            if m:
                idx = int(m.group(1))
                if idx < 1:
                    raise ParseError(f"variable indices start at x1, got {factor!r}")
                exp = int(m.group(2)) if m.group(2) else 1
                exps[idx - 1] = exps.get(idx - 1, 0) + exp
                max_index = max(max_index, idx)
            else:
                try:
                    coef *= float(factor)
                except ValueError:
                    raise ParseError(f"cannot parse factor {factor!r}") from None
        raw_terms.append((coef, exps))
    n = dimension if dimension is not None else max(max_index, 1)
    if n < max_index:
        raise ParseError(
            f"polynomial uses x{max_index} but declared dimension is {n}"
        )
    terms: dict[Monomial, float] = {}
    for coef, exps in raw_terms:
        alpha = tuple(exps.get(i, 0) for i in range(n))
        terms[alpha] = terms.get(alpha, 0.0) + coef
    return Polynomial(n, {a: c for a, c in terms.items() if c != 0.0})


def format_polynomial(f: Polynomial) -> str:
    """Deterministic rendering, highest graded-lex terms first.

    Coefficients print via ``repr`` so parse(format(f)) round-trips exactly.
    """
    if f.is_zero:
        return "0"
    parts: list[str] = []
    for alpha, coef in sorted(f._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True):
        factors = [
            f"x{i + 1}^{a}" if a > 1 else f"x{i + 1}"
            for i, a in enumerate(alpha)
            if a > 0
        ]
        mag = abs(coef)
        if factors and mag == 1.0:
            body = "*".join(factors)
        elif factors:
            body = "*".join([repr(mag)] + factors)
        else:
            body = repr(mag)
        if not parts:
            parts.append(body if coef > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if coef > 0 else f"- {body}")
    return " ".join(parts)
