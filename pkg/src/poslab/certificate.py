"""Nonnegativity certificates: Gram-matrix form, verification, re-expression.

A certificate asserts f = sum_i sigma_i * generator_i with every sigma_i a
sum of squares, written as sigma_i = z_i^T Q_i z_i for a monomial vector z_i
and a PSD Gram matrix Q_i.  For quadratic-module certificates the generators
are 1, g_1, ..., g_m indexed by i; for preordering certificates they are the
products g^delta indexed by delta in {0,1}^m.

Verification is independent of how a certificate was found: reconstruct the
right-hand side exactly in sparse arithmetic, measure the residual against f
in the weighted coefficient norm, and check the Gram spectra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import InputError, ParseError, RoundingError
from .poly import Polynomial, format_polynomial, parse_polynomial, weighted_norm
from .semialg import SemialgebraicSystem

if TYPE_CHECKING:  # pragma: no cover
    from .sos import MonomialBasis

QUADRATIC_MODULE = "quadratic_module"
PREORDERING = "preordering"

DEFAULT_RESIDUAL_TOL = 1e-6
DEFAULT_PSD_TOL = 1e-8


@dataclass(frozen=True)
class CertificateEntry:
    """One summand sigma * generator.

    ``index`` is the generator index i (quadratic module, 0 = the implicit 1)
    or the exponent tuple delta (preordering).
    """

    index: int | tuple[int, ...]
    basis: "MonomialBasis"
    gram: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        size = len(self.basis.monomials)
        if g.shape != (size, size):
            raise InputError(
                f"Gram matrix has shape {g.shape}, basis has {size} monomials"
            )
        if not np.allclose(g, g.T, atol=1e-10):
            raise InputError("Gram matrix is not symmetric")
        object.__setattr__(self, "gram", 0.5 * (g + g.T))

    def sos_part(self) -> Polynomial:
        """The polynomial z^T Q z over this entry's monomial basis."""
        n = self.basis.dimension
        monos = self.basis.monomials
        terms: dict[tuple[int, ...], float] = {}
        for r, beta in enumerate(monos):
            for s, gamma in enumerate(monos):
                q = self.gram[r, s]
                if q == 0.0:
                    continue
                key = tuple(b + c for b, c in zip(beta, gamma))
                terms[key] = terms.get(key, 0.0) + q
        return Polynomial(n, {a: c for a, c in terms.items() if c != 0.0})

    def min_eigenvalue(self) -> float:
        if self.gram.shape[0] == 0:
            return 0.0
        return float(np.linalg.eigvalsh(self.gram)[0])


@dataclass(frozen=True)
class Certificate:
    mode: str
    system: SemialgebraicSystem
    entries: tuple[CertificateEntry, ...]

    def __post_init__(self):
        if self.mode not in (QUADRATIC_MODULE, PREORDERING):
            raise InputError(f"unknown certificate mode {self.mode!r}")
        object.__setattr__(self, "entries", tuple(self.entries))
        for e in self.entries:
            self.generator(e)  # validates the index against the system

    def generator(self, entry: CertificateEntry) -> Polynomial:
        """The generator polynomial this entry multiplies."""
        m = self.system.num_constraints
        if self.mode == QUADRATIC_MODULE:
            if not isinstance(entry.index, int) or not 0 <= entry.index <= m:
                raise InputError(
                    f"generator index {entry.index!r} out of range for m={m}"
                )
            if entry.index == 0:
                return Polynomial.constant(self.system.dimension, 1.0)
            return self.system.constraints[entry.index - 1]
        delta = entry.index
        if not isinstance(delta, tuple) or len(delta) != m:
            raise InputError(f"delta {delta!r} must be a 0/1 tuple of length {m}")
        if any(d not in (0, 1) for d in delta):
            raise InputError(f"delta {delta!r} must be a 0/1 tuple")
        prod = Polynomial.constant(self.system.dimension, 1.0)
        for d, g in zip(delta, self.system.constraints):
            if d:
                prod = prod * g
        return prod

    @property
    def level(self) -> int:
        """Largest degree of any summand sigma * generator."""
        level = 0
        for e in self.entries:
            level = max(level, 2 * e.basis.max_degree + self.generator(e).degree)
        return level


@dataclass(frozen=True)
class VerificationReport:
    residual_norm: float
    min_gram_eigenvalue: float
    level: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "residual_norm": self.residual_norm,
            "min_gram_eigenvalue": self.min_gram_eigenvalue,
            "level": self.level,
            "pass": self.passed,
        }


def reconstruct(cert: Certificate) -> Polynomial:
    """sum_i (z_i^T Q_i z_i) * generator_i as an explicit polynomial."""
    total = Polynomial.zero(cert.system.dimension)
    for entry in cert.entries:
        total = total + entry.sos_part() * cert.generator(entry)
    return total


def verify(
    cert: Certificate,
    f: Polynomial,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    psd_tol: float = DEFAULT_PSD_TOL,
) -> VerificationReport:
    """Residual in the weighted norm plus the worst Gram eigenvalue.

    Always returns a report; ``passed`` is residual <= residual_tol and
    min eigenvalue >= -psd_tol.
    """
    if f.dimension != cert.system.dimension:
        raise InputError(
            f"target dimension {f.dimension} != certificate dimension "
            f"{cert.system.dimension}"
        )
    residual = weighted_norm(f - reconstruct(cert))
    min_eig = 0.0
    for entry in cert.entries:
        min_eig = min(min_eig, entry.min_eigenvalue())
    return VerificationReport(
        residual_norm=residual,
        min_gram_eigenvalue=min_eig,
        level=cert.level,
        passed=(residual <= residual_tol and min_eig >= -psd_tol),
    )


def round_psd(gram: np.ndarray, clip: float) -> np.ndarray:
    """Clip eigenvalues in [-clip, 0) to zero; error below -clip.

    The repaired matrix is exactly PSD up to eigendecomposition rounding.
    """
    if clip < 0:
        raise InputError("clip must be nonnegative")
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InputError(f"expected a square matrix, got shape {g.shape}")
    g = 0.5 * (g + g.T)
    w, v = np.linalg.eigh(g)
    if w[0] < -clip:
        raise RoundingError(
            f"eigenvalue {w[0]:.3e} below -{clip:.1e}: too indefinite to repair"
        )
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.T
    return 0.5 * (out + out.T)


def extract_squares(
    cert: Certificate, clip: float = DEFAULT_PSD_TOL
) -> list[tuple[Polynomial, list[Polynomial]]]:
    """Factor each sigma_i into an explicit sum of squares.

    Each Gram matrix is repaired by ``round_psd`` and eigendecomposed as
    Q = sum_j lambda_j v_j v_j^T; the squares are p_j = sqrt(lambda_j) v_j^T z.
    Returns one (generator, [p_j, ...]) pair per entry.
    """
    out: list[tuple[Polynomial, list[Polynomial]]] = []
    for entry in cert.entries:
        gram = round_psd(entry.gram, clip)
        w, v = np.linalg.eigh(gram)
        squares: list[Polynomial] = []
        n = entry.basis.dimension
        for j in range(w.size - 1, -1, -1):  # largest eigenvalue first
            if w[j] <= 0.0:
                continue
            scale = float(np.sqrt(w[j]))
            terms: dict[tuple[int, ...], float] = {}
            for r, beta in enumerate(entry.basis.monomials):
                coef = scale * float(v[r, j])
                if coef != 0.0:
                    terms[beta] = coef
            p = Polynomial(n, terms)
            if not p.is_zero:
                squares.append(p)
        out.append((cert.generator(entry), squares))
    return out


# ----------------------------------------------------------------------
# JSON schema (documented in the README):
# {
#   "mode": "quadratic_module" | "preordering",
#   "n": int,
#   "generators": [poly-string, ...],          # g_1..g_m, g_0 = 1 implicit
#   "entries": [
#     {"index": i} or {"delta": [0/1, ...]},
#     "basis": [[exponents], ...],
#     "gram": [[row], ...]                     # row-major, full precision
#   ]
# }


def certificate_to_dict(cert: Certificate) -> dict:
    entries = []
    for e in cert.entries:
        rec: dict = {
            "basis": [list(alpha) for alpha in e.basis.monomials],
            "gram": [[float(x) for x in row] for row in e.gram],
        }
        if cert.mode == QUADRATIC_MODULE:
            rec["index"] = int(e.index)
        else:
            rec["delta"] = [int(d) for d in e.index]
        entries.append(rec)
    return {
        "mode": cert.mode,
        "n": cert.system.dimension,
        "generators": [format_polynomial(g) for g in cert.system.constraints],
        "entries": entries,
    }


def certificate_from_dict(data: dict) -> Certificate:
    from .sos import MonomialBasis  # deferred: sos builds on this module

    try:
        mode = data["mode"]
        n = int(data["n"])
        generators = [parse_polynomial(s, n) for s in data["generators"]]
        system = SemialgebraicSystem(n, tuple(generators))
        entries = []
        for rec in data["entries"]:
            monos = tuple(tuple(int(a) for a in alpha) for alpha in rec["basis"])
            max_degree = max((sum(a) for a in monos), default=0)
            basis = MonomialBasis(dimension=n, max_degree=max_degree, monomials=monos)
            gram = np.asarray(rec["gram"], dtype=float)
            if "index" in rec:
                index: int | tuple[int, ...] = int(rec["index"])
            elif "delta" in rec:
                index = tuple(int(d) for d in rec["delta"])
            else:
                raise KeyError("entry needs 'index' or 'delta'")
            entries.append(CertificateEntry(index=index, basis=basis, gram=gram))
        return Certificate(mode=mode, system=system, entries=tuple(entries))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise ParseError(f"malformed certificate document: {exc}") from exc


def save_certificate(cert: Certificate, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(certificate_to_dict(cert), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_certificate(path: str) -> Certificate:
    with open(path, "r", encoding="utf-8") as fh:
        return certificate_from_dict(json.load(fh))
