"""Closed-form degree/gap bounds, the lifting transform, and empirical fits.

The degree bounds for preordering and quadratic-module representations of a
polynomial f positive on a set inside the open unit box both depend on an
existential constant c that no formula pins down; it is therefore a user
input here (default 1.0) and every report echoes it.  With degree d,
dimension n, coefficient norm ``norm_f`` and minimum ``f_star`` > 0:

    preordering (Schmuedgen-type):      c d^2 (1 + (d^2 n^d norm_f/f_star)^c)
    quadratic module (Putinar-type):    c exp((d^2 n^d norm_f/f_star)^c)

and the hierarchy gap at level k > c exp((2 d^2 n^d)^c) is at most

    6 d^3 n^(2d) norm_f / log(k/c)^(1/c).

The lifting transform h = f - lam * sum_i (g_i - 1)^(2k) g_i dominates f
nowhere above it on the feasible set (each subtracted term is nonnegative
where 0 <= g_i <= 1) yet is uniformly positive on the whole box once k is
large enough; this module computes the analytic parameters (L, lam, k) and
probes the smallest working k on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    DegenerateFitError,
    InfeasibleAtResolutionError,
    InputError,
)
from .poly import Polynomial, weighted_norm
from .semialg import (
    DEFAULT_FEASIBILITY_TOL,
    GridSpec,
    SemialgebraicSystem,
    feasible_mask,
    grid_min,
    grid_points,
)

EXP_SATURATION = 700.0  # exp argument beyond which float64 overflows
LIFT_DEGREE_CAP = 60
LIFT_TERM_CAP = 200_000


@dataclass(frozen=True)
class BoundInputs:
    """Inputs to the degree/gap bound formulas.

    ``c`` is the existential constant of the bound theorems (user supplied);
    ``k`` is only consulted by the gap bound.
    """

    c: float
    d: int
    n: int
    norm_f: float
    f_star: float
    k: int | None = None

    def __post_init__(self):
        if self.c <= 0:
            raise InputError(f"constant c must be positive, got {self.c}")
        if self.d < 1:
            raise InputError(f"degree must be >= 1, got {self.d}")
        if self.n < 1:
            raise InputError(f"dimension must be >= 1, got {self.n}")
        if self.norm_f <= 0:
            raise InputError(f"norm must be positive, got {self.norm_f}")
        if self.f_star <= 0:
            raise InputError(f"minimum must be positive, got {self.f_star}")

    def ratio(self) -> float:
        """d^2 n^d ||f|| / f*, the closeness-to-a-zero measure."""
        return self.d**2 * float(self.n) ** self.d * self.norm_f / self.f_star


@dataclass(frozen=True)
class DegreeBound:
    value: float
    saturated: bool = False

    def to_dict(self) -> dict:
        return {"value": self.value, "saturated": self.saturated}


@dataclass(frozen=True)
class GapBound:
    """Gap bound value, or not-applicable below the validity threshold."""

    value: float | None
    applicable: bool
    threshold: float
    threshold_saturated: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "applicable": self.applicable,
            "threshold": self.threshold,
            "threshold_saturated": self.threshold_saturated,
        }


def schmuedgen_degree_bound(inputs: BoundInputs) -> float:
    """c d^2 (1 + ratio^c); the preordering-side degree bound."""
    try:
        inner = inputs.ratio() ** inputs.c
    except OverflowError:
        return math.inf
    return inputs.c * inputs.d**2 * (1.0 + inner)


def putinar_degree_bound(inputs: BoundInputs) -> DegreeBound:
    """c exp(ratio^c); saturates to +inf when the exponent exceeds ~700."""
    try:
        arg = inputs.ratio() ** inputs.c
    except OverflowError:
        return DegreeBound(math.inf, saturated=True)
    if arg > EXP_SATURATION:
        return DegreeBound(math.inf, saturated=True)
    return DegreeBound(inputs.c * math.exp(arg), saturated=False)


def gap_bound(inputs: BoundInputs) -> GapBound:
    """6 d^3 n^(2d) ||f|| / log(k/c)^(1/c) for k above the validity threshold.

    Below the threshold k <= c exp((2 d^2 n^d)^c) nothing is asserted and a
    tagged not-applicable result is returned instead of an extrapolation.
    """
    if inputs.k is None:
        raise InputError("gap_bound requires the level k")
    try:
        arg = (2.0 * inputs.d**2 * float(inputs.n) ** inputs.d) ** inputs.c
    except OverflowError:
        return GapBound(None, False, math.inf, threshold_saturated=True)
    if arg > EXP_SATURATION:
        return GapBound(None, False, math.inf, threshold_saturated=True)
    threshold = inputs.c * math.exp(arg)
    if not inputs.k > threshold:
        return GapBound(None, False, threshold)
    numerator = 6.0 * inputs.d**3 * float(inputs.n) ** (2 * inputs.d) * inputs.norm_f
    value = numerator / math.log(inputs.k / inputs.c) ** (1.0 / inputs.c)
    return GapBound(value, True, threshold)


# ----------------------------------------------------------------------
# lifting transform


@dataclass(frozen=True)
class LiftingParameters:
    """Analytic lifting data L, lam, k plus the observed grid minimum of h."""

    L: float
    lam: float
    k: int
    c0: float
    c1: float
    c2: float
    empirical_min_h: float

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "lambda": self.lam,
            "k": self.k,
            "c0": self.c0,
            "c1": self.c1,
            "c2": self.c2,
            "empirical_min_h": self.empirical_min_h,
        }


def lifting_transform(
    f: Polynomial,
    system: SemialgebraicSystem,
    lam: float,
    k: int,
    degree_cap: int = LIFT_DEGREE_CAP,
    term_cap: int = LIFT_TERM_CAP,
) -> Polynomial:
    """h = f - lam * sum_i (g_i - 1)^(2k) g_i, expanded exactly."""
    if lam < 0:
        raise InputError(f"lam must be >= 0, got {lam}")
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if f.dimension != system.dimension:
        raise InputError("objective and system dimensions differ")
    h = f
    if lam == 0.0:
        return h  # nothing gets expanded
    worst = max(
        ((2 * k + 1) * g.degree for g in system.constraints), default=0
    )
    if max(worst, f.degree) > degree_cap:
        raise CapacityError(
            f"lifted polynomial would have degree {max(worst, f.degree)} "
            f"> cap {degree_cap}"
        )
    one = Polynomial.constant(f.dimension, 1.0)
    for g in system.constraints:
        term = (g - one).power(2 * k) * g
        h = h - term.scale(lam)
        if len(h) > term_cap:
            raise CapacityError(f"lifted polynomial exceeds {term_cap} terms")
    return h


def _check_constraints_at_most_one(
    system: SemialgebraicSystem, pts: np.ndarray, tol: float = 1e-12
) -> None:
    for i, g in enumerate(system.constraints):
        vals = g.evaluate_many(pts)
        worst = int(np.argmax(vals))
        if vals[worst] > 1.0 + tol:
            point = tuple(float(v) for v in pts[worst])
            raise InputError(
                f"constraint g{i + 1} = {g} exceeds 1 on the box: "
                f"value {vals[worst]} at {point}"
            )


def find_lifting_k(
    f: Polynomial,
    system: SemialgebraicSystem,
    lam: float,
    grid: GridSpec | None = None,
    k_max: int = 20,
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
) -> int | None:
    """Smallest k <= k_max with min h >= f*/2 (1 - 1e-6) over the grid box.

    f* comes from the grid oracle and must be positive; each g_i must stay
    <= 1 on the box (checked on the grid).  None when no k works.
    """
    spec = grid or GridSpec.default_for(system.dimension)
    box = spec.resolved_box(system.dimension)
    pts = grid_points(box, spec.points_per_axis)
    _check_constraints_at_most_one(system, pts)
    f_star = grid_min(f, system, spec, feasibility_tol).minimum_value
    if f_star <= 0:
        raise InputError(
            f"grid minimum {f_star} is not positive; the lifting lemma "
            "needs f > 0 on the feasible set"
        )
    target = 0.5 * f_star * (1.0 - 1e-6)
    for k in range(1, k_max + 1):
        h = lifting_transform(f, system, lam, k)
        h_min = float(np.min(h.evaluate_many(pts)))
        if h_min >= target:
            return k
    return None


def lifting_parameters(
    f: Polynomial,
    system: SemialgebraicSystem,
    c0: float = 1.0,
    c1: float = 1.0,
    c2: float = 1.0,
    grid: GridSpec | None = None,
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
) -> LiftingParameters:
    """L = d^2 n^(d-1) ||f||/f*, lam = c1 d^2 n^(d-1) ||f|| L^c2, and the
    smallest k with 2k+1 >= c0 (1 + L^c0), plus the observed min of h."""
    if min(c0, c1, c2) <= 0:
        raise InputError("lifting constants c0, c1, c2 must be positive")
    d = f.degree
    if d < 1:
        raise InputError("lifting parameters need a nonconstant objective")
    spec = grid or GridSpec.default_for(system.dimension)
    f_star = grid_min(f, system, spec, feasibility_tol).minimum_value
    if f_star <= 0:
        raise InputError(
            f"grid minimum {f_star} is not positive; the lifting lemma "
            "needs f > 0 on the feasible set"
        )
    n = float(f.dimension)
    norm_f = weighted_norm(f)
    big_l = d**2 * n ** (d - 1) * norm_f / f_star
    lam = c1 * d**2 * n ** (d - 1) * norm_f * big_l**c2
    k = max(1, math.ceil((c0 * (1.0 + big_l**c0) - 1.0) / 2.0 - 1e-9))
    box = spec.resolved_box(system.dimension)
    pts = grid_points(box, spec.points_per_axis)
    h = lifting_transform(f, system, lam, k)
    empirical = float(np.min(h.evaluate_many(pts)))
    return LiftingParameters(
        L=big_l, lam=lam, k=k, c0=c0, c1=c1, c2=c2, empirical_min_h=empirical
    )


# ----------------------------------------------------------------------
# constraint-violation exponent (Lojasiewicz-type fit)


@dataclass(frozen=True)
class LojasiewiczFit:
    """Fitted exponent/scale for dist(x, S)^c2 <= -c3 min{g_i(x), 0}.

    ``c3_scale`` is inflated so the inequality holds with max_violation = 0
    on the sample set; ``dist_error_bound`` records the grid approximation
    error of the distance (half a cell diagonal).
    """

    c2_exponent: float
    c3_scale: float
    sample_count: int
    max_violation: float
    dist_error_bound: float

    def to_dict(self) -> dict:
        return {
            "c2_exponent": self.c2_exponent,
            "c3_scale": self.c3_scale,
            "sample_count": self.sample_count,
            "max_violation": self.max_violation,
            "dist_error_bound": self.dist_error_bound,
        }


def lojasiewicz_estimate(
    system: SemialgebraicSystem,
    grid: GridSpec | None = None,
    samples: int = 2000,
    seed: int = 42,
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
    envelope_bins: int = 12,
) -> LojasiewiczFit:
    """Estimate the exponent relating constraint violation to distance.

    Draws infeasible points uniformly from the box, approximates dist(x, S)
    by the distance to the nearest feasible grid point, and fits
    log(-min g_i) >= c2 log dist - log c3 by least squares on the lower
    envelope of the log-log cloud (per-bin minima of the violation).  c3 is
    then inflated so every sample satisfies the inequality exactly.
    """
    spec = grid or GridSpec.default_for(system.dimension)
    box = spec.resolved_box(system.dimension)
    pts = grid_points(box, spec.points_per_axis)
    mask = feasible_mask(system, pts, feasibility_tol)
    if not mask.any():
        raise InfeasibleAtResolutionError(
            "no feasible grid point; cannot anchor distances"
        )
    if mask.all():
        raise DegenerateFitError(
            "every grid point is feasible: no infeasible region to sample"
        )
    feas_pts = pts[mask]
    widths = np.array([hi - lo for lo, hi in box])
    cell = widths / (spec.points_per_axis - 1)
    dist_error = 0.5 * float(np.linalg.norm(cell))

    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    collected_x: list[np.ndarray] = []
    collected_v: list[np.ndarray] = []
    total = 0
    attempts = 0
    while total < samples and attempts < 50 * samples:
        batch = rng.uniform(lo, hi, size=(min(1024, 50 * samples - attempts), len(box)))
        attempts += batch.shape[0]
        worst = np.full(batch.shape[0], np.inf)
        for g in system.constraints:
            worst = np.minimum(worst, g.evaluate_many(batch))
        infeasible = worst < 0.0
        if infeasible.any():
            collected_x.append(batch[infeasible])
            collected_v.append(-worst[infeasible])
            total += int(infeasible.sum())
    if total == 0:
        raise DegenerateFitError(
            "sampling found no infeasible points; the set fills the box "
            "at this tolerance"
        )
    xs = np.concatenate(collected_x)[:samples]
    violation = np.concatenate(collected_v)[:samples]

    dist = np.empty(xs.shape[0])
    chunk = 256
    for start in range(0, xs.shape[0], chunk):
        block = xs[start : start + chunk]
        d2 = np.sum((block[:, None, :] - feas_pts[None, :, :]) ** 2, axis=2)
        dist[start : start + chunk] = np.sqrt(d2.min(axis=1))
    keep = dist > 0.0
    dist = dist[keep]
    violation = violation[keep]
    if dist.size < 2:
        raise DegenerateFitError("not enough usable samples for the fit")

    log_d = np.log(dist)
    log_v = np.log(violation)
    edges = np.linspace(log_d.min(), log_d.max(), envelope_bins + 1)
    env_d: list[float] = []
    env_v: list[float] = []
    for bi in range(envelope_bins):
        if bi < envelope_bins - 1:
            in_bin = (log_d >= edges[bi]) & (log_d < edges[bi + 1])
        else:
            in_bin = (log_d >= edges[bi]) & (log_d <= edges[bi + 1])
        if not in_bin.any():
            continue
        sub = np.flatnonzero(in_bin)
        pick = sub[int(np.argmin(log_v[sub]))]
        env_d.append(float(log_d[pick]))
        env_v.append(float(log_v[pick]))
    if len(env_d) < 2:
        raise DegenerateFitError("log-log envelope has fewer than two points")

    slope, _intercept = np.polyfit(np.array(env_d), np.array(env_v), 1)
    c2 = float(slope)
    if c2 <= 0:
        raise DegenerateFitError(f"fitted exponent {c2} is not positive")
    # inflate c3 so dist^c2 <= c3 * violation holds on every sample
    c3 = float(np.max(dist**c2 / violation)) * (1.0 + 1e-12)
    max_violation = float(np.max(dist**c2 - c3 * violation))
    return LojasiewiczFit(
        c2_exponent=c2,
        c3_scale=c3,
        sample_count=int(dist.size),
        max_violation=max(0.0, max_violation),
        dist_error_bound=dist_error,
    )


# ----------------------------------------------------------------------
# rounded hypercube


@dataclass(frozen=True)
class RoundedCube:
    """Degree d and the witness 1 - 1/d - sum_i x_i^(2d), positive on S."""

    degree: int
    polynomial: Polynomial


def _cube_gap_polynomial(dimension: int, d: int) -> Polynomial:
    terms = {(0,) * dimension: 1.0 - 1.0 / d}
    for i in range(dimension):
        alpha = [0] * dimension
        alpha[i] = 2 * d
        terms[tuple(alpha)] = -1.0
    return Polynomial(dimension, terms)


def round_hypercube_degree(
    system: SemialgebraicSystem,
    grid: GridSpec | None = None,
    d_max: int = 30,
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
    containment_margin: float = 1e-9,
) -> RoundedCube | None:
    """Smallest d <= d_max with 1 - 1/d - sum x_i^(2d) > 0 at every feasible
    grid point; None when none works.

    Requires the feasible grid points to lie strictly inside the open unit
    box (checked with ``containment_margin``).
    """
    spec = grid or GridSpec.default_for(system.dimension)
    box = spec.resolved_box(system.dimension)
    pts = grid_points(box, spec.points_per_axis)
    mask = feasible_mask(system, pts, feasibility_tol)
    if not mask.any():
        raise InfeasibleAtResolutionError(
            "no feasible grid point at this resolution"
        )
    feas = pts[mask]
    worst = float(np.max(np.abs(feas)))
    if worst > 1.0 - containment_margin:
        raise InputError(
            f"feasible grid point with |x_i| = {worst} is not strictly "
            "inside the open unit box; rescale the system first"
        )
    for d in range(1, d_max + 1):
        values = (1.0 - 1.0 / d) - np.sum(feas ** (2 * d), axis=1)
        if float(values.min()) > 0.0:
            return RoundedCube(degree=d, polynomial=_cube_gap_polynomial(system.dimension, d))
    return None
