"""Basic closed semialgebraic sets and the brute-force grid oracles.

A system is a tuple of constraint polynomials (g_1, ..., g_m) in a common
number of variables; the set it carves out is
{x : g_1(x) >= 0, ..., g_m(x) >= 0} (the constant g_0 = 1 is implicit and
never stored).  The grid minimizer below is the independent oracle used
everywhere a "true" minimum is needed; it is exhaustive over feasible grid
points, optionally refined by re-gridding a shrunken box around the
incumbent, and fully deterministic (ties broken by graded order of the grid
index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InfeasibleAtResolutionError, InputError
from .poly import Polynomial, rescale

DEFAULT_FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class SemialgebraicSystem:
    dimension: int
    constraints: tuple[Polynomial, ...]

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError(f"dimension must be >= 1, got {self.dimension}")
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for g in self.constraints:
            if g.dimension != self.dimension:
                raise DimensionMismatchError(
                    f"constraint {g} has dimension {g.dimension}, "
                    f"expected {self.dimension}"
                )

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)


def default_points_per_axis(dimension: int) -> int:
    """Desk-scale default: ~10^4..10^6 evaluations per sweep."""
    if dimension <= 2:
        return 101
    if dimension == 3:
        return 21
    return 7


@dataclass(frozen=True)
class GridSpec:
    """Regular grid over a box, with optional refinement rounds.

    Each refinement round re-grids a box shrunk by factor
    2 / points_per_axis around the incumbent (clipped to the original box),
    i.e. roughly two grid cells wide.
    """

    points_per_axis: int
    box: tuple[tuple[float, float], ...] | None = None
    refinement_rounds: int = 3

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise InputError("points_per_axis must be >= 2")
        if self.refinement_rounds < 0:
            raise InputError("refinement_rounds must be >= 0")
        if self.box is not None:
            box = tuple((float(lo), float(hi)) for lo, hi in self.box)
            for lo, hi in box:
                if not lo < hi:
                    raise InputError(f"invalid box interval [{lo}, {hi}]")
            object.__setattr__(self, "box", box)

    @classmethod
    def default_for(cls, dimension: int) -> "GridSpec":
        return cls(points_per_axis=default_points_per_axis(dimension))

    def resolved_box(self, dimension: int) -> tuple[tuple[float, float], ...]:
        if self.box is None:
            return ((-1.0, 1.0),) * dimension
        if len(self.box) != dimension:
            raise DimensionMismatchError(
                f"box has {len(self.box)} axes, expected {dimension}"
            )
        return self.box


@dataclass(frozen=True)
class MinimizationResult:
    minimum_value: float
    argmin: tuple[float, ...]
    feasible_count: int


def contains(
    system: SemialgebraicSystem,
    point,
    tol: float = DEFAULT_FEASIBILITY_TOL,
) -> bool:
    """True iff every constraint satisfies g_i(point) >= -tol."""
    if tol < 0:
        raise InputError("tolerance must be nonnegative")
    x = [float(v) for v in point]
    if len(x) != system.dimension:
        raise DimensionMismatchError(
            f"point has length {len(x)}, expected {system.dimension}"
        )
    return all(g.evaluate(x) >= -tol for g in system.constraints)


def grid_points(
    box: tuple[tuple[float, float], ...], points_per_axis: int
) -> np.ndarray:
    """All grid points as an (N, n) array, rows in lexicographic index order."""
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def feasible_mask(
    system: SemialgebraicSystem, pts: np.ndarray, tol: float
) -> np.ndarray:
    mask = np.ones(pts.shape[0], dtype=bool)
    for g in system.constraints:
        mask &= g.evaluate_many(pts) >= -tol
    return mask


def _best_on_grid(
    values: np.ndarray, mask: np.ndarray, shape: tuple[int, ...]
) -> tuple[float, tuple[int, ...]] | None:
    """Minimum over masked entries; exact-value ties resolved by the graded
    order (sum of index coordinates, then the index tuple)."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    vals = values[idx]
    vmin = float(vals.min())
    ties = idx[vals == vmin]
    best_key = None
    best_flat = -1
    for flat in ties:
        multi = np.unravel_index(int(flat), shape)
        key = (int(sum(multi)), tuple(int(v) for v in multi))
        if best_key is None or key < best_key:
            best_key = key
            best_flat = int(flat)
    multi = np.unravel_index(best_flat, shape)
    return vmin, tuple(int(v) for v in multi)


def grid_min(
    f: Polynomial,
    system: SemialgebraicSystem,
    grid: GridSpec | None = None,
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
) -> MinimizationResult:
    """Exhaustive minimization of f over the feasible grid points.

    Raises InfeasibleAtResolutionError when the initial sweep finds no
    feasible point; that outcome says nothing about the set being empty.
    Refinement never loses the incumbent, so the reported minimum is
    monotone in the number of rounds.  ``feasible_count`` totals the
    feasible grid points seen across all rounds.
    """
    if f.dimension != system.dimension:
        raise DimensionMismatchError(
            f"objective dimension {f.dimension} != system dimension "
            f"{system.dimension}"
        )
    spec = grid or GridSpec.default_for(system.dimension)
    box = spec.resolved_box(system.dimension)
    ppa = spec.points_per_axis
    shape = (ppa,) * system.dimension

    best_value = np.inf
    best_point: tuple[float, ...] | None = None
    feasible_count = 0
    outer_box = box

    for _ in range(spec.refinement_rounds + 1):
        pts = grid_points(box, ppa)
        mask = feasible_mask(system, pts, feasibility_tol)
        feasible_count += int(mask.sum())
        if best_point is None and not mask.any():
            raise InfeasibleAtResolutionError(
                f"no feasible grid point at {ppa} points per axis "
                "(not a proof of emptiness)"
            )
        if mask.any():
            values = f.evaluate_many(pts)
            found = _best_on_grid(values, mask, shape)
            if found is not None:
                vmin, multi = found
                if vmin < best_value:
                    best_value = vmin
                    axes = [np.linspace(lo, hi, ppa) for lo, hi in box]
                    best_point = tuple(float(axes[i][multi[i]]) for i in range(len(axes)))
        # shrink around the incumbent, clipped to the original box
        assert best_point is not None
        new_box = []
        for i, (lo, hi) in enumerate(box):
            width = (hi - lo) * (2.0 / ppa)
            ctr = best_point[i]
            nlo = max(outer_box[i][0], ctr - width / 2.0)
            nhi = min(outer_box[i][1], ctr + width / 2.0)
            if not nlo < nhi:
                nlo, nhi = outer_box[i]
            new_box.append((nlo, nhi))
        box = tuple(new_box)

    assert best_point is not None
    return MinimizationResult(
        minimum_value=best_value,
        argmin=best_point,
        feasible_count=feasible_count,
    )


def rescale_system(system: SemialgebraicSystem, r: float) -> SemialgebraicSystem:
    """Substitute x -> r x in every constraint: x in S(g(rX)) iff r x in S(g)."""
    if r <= 0:
        raise InputError(f"rescale factor must be positive, got {r}")
    return SemialgebraicSystem(
        system.dimension, tuple(rescale(g, r) for g in system.constraints)
    )


def ball_gap_polynomial(dimension: int, bound: float) -> Polynomial:
    """bound - (x1^2 + ... + xn^2), the target of the archimedean search."""
    terms = {(0,) * dimension: float(bound)}
    for i in range(dimension):
        alpha = [0] * dimension
        alpha[i] = 2
        terms[tuple(alpha)] = -1.0
    return Polynomial(dimension, terms)


def archimedean_witness(system: SemialgebraicSystem, bound: float, level: int):
    """Search for a level-`level` quadratic-module certificate of
    bound - ||x||^2 >= 0, witnessing that the module is archimedean.

    This is the SDP-checkable normal form of the archimedean property.
    Equivalent characterizations exist but are not searched here: membership
    of some polynomial p with {p >= 0} compact, containment of the
    preordering of a tuple with compact feasible set, and the property that
    every polynomial is bounded above within the module.

    A not-found outcome is inconclusive: the witness may exist at a higher
    level.  Returns the MembershipResult of the underlying search.
    """
    if bound <= 0:
        raise InputError(f"bound must be positive, got {bound}")
    if level < 2 or level % 2 != 0:
        raise InputError(f"level must be an even integer >= 2, got {level}")
    from . import sos  # deferred: sos builds on this module

    problem = sos.MembershipProblem(
        target=ball_gap_polynomial(system.dimension, bound),
        system=system,
        level=level,
        mode=sos.QUADRATIC_MODULE,
    )
    return sos.module_membership(problem)
