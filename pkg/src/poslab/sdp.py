"""Dense small-scale semidefinite programming by operator splitting.

Solves

    minimize    sum_j <C_j, Q_j>
    subject to  sum_j <A_ij, Q_j> = b_i     (i = 1..m)
                Q_j PSD                      (j = 1..blocks)

with an over-relaxed ADMM scheme that alternates projection onto the affine
subspace (one dense pseudo-inverse, precomputed) and projection onto the PSD
cone (per-block eigendecomposition with negative eigenvalues clipped), the
linear objective entering the affine step as a constant drift.  Simple,
dependency-free, deterministic, and adequate for Gram matrices of side up to
a few tens.

The PSD-side iterate is exactly PSD at every step, so a run can stop as soon
as that iterate satisfies the equalities:

* feasibility problems (zero objective) stop when the equality residual of
  the PSD iterate reaches ``stop_tol``;
* optimization problems stop on the classic fixed-point test, or earlier on
  a certified primal-dual gap: the affine projection multiplier doubles as a
  dual candidate y, and once ``|<c,z> - <b,y>|`` and the dual slack spectrum
  of ``c - A^T y`` are small the objective cannot move further (degenerate
  instances reach this certificate long before the consensus gap dies).

Statuses
--------
``optimal`` / ``feasible``
    residual contract met (``feasible`` when the objective is zero).
``infeasible-detected``
    the projection residual stalled above ``stall_residual`` for
    ``stall_window`` consecutive iterations while the dual iterate kept
    growing (bounded duals mean a feasible problem that is merely slow, so
    the run continues).  Splitting methods produce no infeasibility
    certificates, so this is a documented heuristic, never a proof; an
    inconsistent equality system, however, is detected exactly up front.
``max-iterations``
    neither of the above within ``max_iterations``.

Returned block values always come from the cone projection (exactly PSD);
``primal_residual`` reports how well they satisfy the equality constraints.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InputError, SolverError

DEFAULT_MAX_TOTAL_DIM = 400
SDP_DIM_ENV_VAR = "POSLAB_MAX_SDP_DIM"


@dataclass(frozen=True)
class SdpConstraint:
    """One linear equality: sum over blocks of <matrices[j], Q_j> = rhs.

    ``matrices[j]`` may be None when block j does not appear.
    """

    matrices: tuple[np.ndarray | None, ...]
    rhs: float


@dataclass(frozen=True)
class SdpProblem:
    block_sizes: tuple[int, ...]
    constraints: tuple[SdpConstraint, ...]
    objective: tuple[np.ndarray | None, ...] | None = None

    @property
    def total_dim(self) -> int:
        return sum(self.block_sizes)


@dataclass(frozen=True)
class SdpOptions:
    eq_tol: float = 1e-8          # contract: ||A(Q) - b||_inf for ok output
    psd_tol: float = 1e-8         # contract: min eigenvalue of ok output
    stop_tol: float = 5e-10       # high-precision exit for all residuals
    cert_gap_tol: float = 3e-7    # certified exit: relative primal-dual gap
    cert_eig_tol: float = 5e-7    # certified exit: dual slack eigenvalue floor
    cert_check_every: int = 25
    max_iterations: int = 150_000
    over_relaxation: float = 1.6
    stall_window: int = 2_000
    stall_residual: float = 1e-5
    stall_improvement: float = 1e-3   # relative improvement that resets the window
    stall_dual_growth: float = 0.01   # required |u| growth per window, in units
                                      # of stall_window * residual
    unbounded_threshold: float = 1e12
    max_total_dim: int | None = None  # None: POSLAB_MAX_SDP_DIM env var, else 400

    def resolved_max_dim(self) -> int:
        if self.max_total_dim is not None:
            return self.max_total_dim
        env = os.environ.get(SDP_DIM_ENV_VAR)
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise InputError(f"{SDP_DIM_ENV_VAR} must be an integer, got {env!r}")
        return DEFAULT_MAX_TOTAL_DIM


@dataclass(frozen=True)
class SdpSolution:
    status: str  # optimal | feasible | infeasible-detected | max-iterations
    block_values: tuple[np.ndarray, ...]
    objective_value: float
    primal_residual: float
    min_eigenvalue: float
    iterations: int
    consensus_gap: float = 0.0
    dual_gap: float | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "feasible")

    def diagnostics(self) -> dict:
        return {
            "status": self.status,
            "objective_value": self.objective_value,
            "primal_residual": self.primal_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "iterations": self.iterations,
            "consensus_gap": self.consensus_gap,
            "dual_gap": self.dual_gap,
            "message": self.message,
        }


# ----------------------------------------------------------------------
# symmetric vectorization: <A, B>_F == svec(A) . svec(B)


def _svec_indices(size: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(size)
    return rows, cols


def _svec(mat: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    v = mat[rows, cols].astype(float).copy()
    off = rows != cols
    v[off] *= np.sqrt(2.0)
    return v


def _unsvec(vec: np.ndarray, size: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    mat = np.zeros((size, size))
    vals = vec.copy()
    off = rows != cols
    vals[off] /= np.sqrt(2.0)
    mat[rows, cols] = vals
    mat[cols, rows] = vals
    return mat


class _BlockLayout:
    """Offsets of each block inside the stacked svec coordinate vector."""

    def __init__(self, block_sizes: tuple[int, ...]):
        self.sizes = block_sizes
        self.index_pairs = [_svec_indices(s) for s in block_sizes]
        self.offsets = []
        off = 0
        for s in block_sizes:
            self.offsets.append(off)
            off += s * (s + 1) // 2
        self.total = off

    def pack(self, mats: tuple[np.ndarray | None, ...]) -> np.ndarray:
        vec = np.zeros(self.total)
        for j, m in enumerate(mats):
            if m is None:
                continue
            s = self.sizes[j]
            arr = np.asarray(m, dtype=float)
            if arr.shape != (s, s):
                raise InputError(
                    f"block {j} matrix has shape {arr.shape}, expected {(s, s)}"
                )
            if not np.allclose(arr, arr.T, atol=1e-12):
                raise InputError(f"block {j} matrix is not symmetric")
            rows, cols = self.index_pairs[j]
            o = self.offsets[j]
            vec[o : o + rows.size] = _svec(arr, rows, cols)
        return vec

    def unpack(self, vec: np.ndarray) -> tuple[np.ndarray, ...]:
        mats = []
        for j, s in enumerate(self.sizes):
            rows, cols = self.index_pairs[j]
            o = self.offsets[j]
            mats.append(_unsvec(vec[o : o + rows.size], s, rows, cols))
        return tuple(mats)

    def project_psd(self, vec: np.ndarray) -> np.ndarray:
        out = np.empty_like(vec)
        for j, s in enumerate(self.sizes):
            rows, cols = self.index_pairs[j]
            o = self.offsets[j]
            seg = vec[o : o + rows.size]
            if s == 1:
                out[o] = max(seg[0], 0.0)
                continue
            mat = _unsvec(seg, s, rows, cols)
            w, v = np.linalg.eigh(mat)
            w = np.clip(w, 0.0, None)
            proj = (v * w) @ v.T
            proj = 0.5 * (proj + proj.T)
            out[o : o + rows.size] = _svec(proj, rows, cols)
        return out

    def min_eigenvalue(self, vec: np.ndarray) -> float:
        worst = np.inf
        for j, s in enumerate(self.sizes):
            rows, cols = self.index_pairs[j]
            o = self.offsets[j]
            seg = vec[o : o + rows.size]
            if s == 1:
                worst = min(worst, float(seg[0]))
            else:
                mat = _unsvec(seg, s, rows, cols)
                worst = min(worst, float(np.linalg.eigvalsh(mat)[0]))
        return worst if np.isfinite(worst) else 0.0


def dump_problem(problem: SdpProblem) -> str:
    """Plain-text debug dump: block sizes, then one upper-triangle triplet
    line ``block row col value`` per nonzero entry of each constraint and of
    the objective."""

    def triplets(mats, indent="  "):
        lines = []
        for j, mat in enumerate(mats):
            if mat is None:
                continue
            arr = np.asarray(mat, dtype=float)
            for r in range(arr.shape[0]):
                for c in range(r, arr.shape[1]):
                    if arr[r, c] != 0.0:
                        lines.append(f"{indent}{j} {r} {c} {float(arr[r, c])!r}")
        return lines

    lines = ["blocks " + " ".join(str(s) for s in problem.block_sizes)]
    for i, con in enumerate(problem.constraints):
        lines.append(f"constraint {i} rhs {float(con.rhs)!r}")
        lines.extend(triplets(con.matrices))
    if problem.objective is not None:
        lines.append("objective")
        lines.extend(triplets(problem.objective))
    return "\n".join(lines) + "\n"


def solve(problem: SdpProblem, options: SdpOptions | None = None) -> SdpSolution:
    """Solve the block SDP; see module docstring for the status contract."""
    opts = options or SdpOptions()
    if problem.total_dim > opts.resolved_max_dim():
        raise CapacityError(
            f"total SDP dimension {problem.total_dim} exceeds cap "
            f"{opts.resolved_max_dim()} (override via {SDP_DIM_ENV_VAR})"
        )
    layout = _BlockLayout(problem.block_sizes)
    n = layout.total
    m = len(problem.constraints)

    a_mat = np.zeros((m, n))
    b = np.zeros(m)
    for i, con in enumerate(problem.constraints):
        a_mat[i] = layout.pack(con.matrices)
        b[i] = float(con.rhs)

    c_vec = np.zeros(n)
    has_objective = False
    if problem.objective is not None:
        c_vec = layout.pack(problem.objective)
        has_objective = bool(np.any(c_vec))

    # Row scaling; a zero row with nonzero rhs is an immediate contradiction.
    row_scale = np.linalg.norm(a_mat, axis=1) if m else np.zeros(0)
    for i in range(m):
        if row_scale[i] < 1e-12:
            if abs(b[i]) > 1e-12:
                zeros = layout.unpack(np.zeros(n))
                return SdpSolution(
                    status="infeasible-detected",
                    block_values=zeros,
                    objective_value=0.0,
                    primal_residual=abs(b[i]),
                    min_eigenvalue=0.0,
                    iterations=0,
                    message=f"constraint {i} reads 0 = {b[i]}",
                )
            row_scale[i] = 1.0
    a_hat = a_mat / row_scale[:, None] if m else a_mat
    b_hat = b / row_scale if m else b
    gram_pinv = (
        np.linalg.pinv(a_hat @ a_hat.T, rcond=1e-12, hermitian=True) if m else None
    )
    if m:
        # an inconsistent equality system is exactly detectable: the
        # least-squares point cannot satisfy the constraints
        ls_point = a_hat.T @ (gram_pinv @ b_hat)
        ls_residual = float(np.max(np.abs(a_hat @ ls_point - b_hat)))
        if ls_residual > 1e-8 * max(1.0, float(np.max(np.abs(b_hat)))):
            return SdpSolution(
                status="infeasible-detected",
                block_values=layout.unpack(np.zeros(n)),
                objective_value=0.0,
                primal_residual=float(np.max(np.abs(a_mat @ ls_point - b))),
                min_eigenvalue=0.0,
                iterations=0,
                message="equality constraints are mutually inconsistent",
            )

    rho_eff = max(1.0, float(np.linalg.norm(c_vec)))
    drift = c_vec / rho_eff
    c_scale = 1.0 + float(np.max(np.abs(c_vec))) if has_objective else 1.0
    alpha = opts.over_relaxation

    z = np.zeros(n)
    u = np.zeros(n)
    mu = np.zeros(m)
    best_res = np.inf
    last_improvement = 0
    status = "max-iterations"
    message = ""
    iterations = opts.max_iterations
    gap = 0.0
    aff = 0.0
    dual_gap: float | None = None
    u_norm_hist = np.zeros(opts.stall_window)  # trailing |u| ring buffer

    for it in range(1, opts.max_iterations + 1):
        w = z - u - drift
        if m:
            mu = gram_pinv @ (a_hat @ w - b_hat)
            x = w - a_hat.T @ mu
        else:
            x = w
        x_relaxed = alpha * x + (1.0 - alpha) * z
        z_new = layout.project_psd(x_relaxed + u)
        u = u + x_relaxed - z_new

        gap = float(np.max(np.abs(x - z_new))) if n else 0.0
        step = float(np.max(np.abs(z_new - z))) if n else 0.0
        z = z_new
        if m:
            aff = float(np.max(np.abs((a_hat @ z - b_hat) * row_scale)))
        else:
            aff = 0.0

        if not has_objective:
            # z is exactly PSD; meeting the equalities makes it a certificate.
            if aff <= opts.stop_tol:
                status = "feasible"
                iterations = it
                break
        else:
            if aff <= opts.stop_tol and gap <= opts.stop_tol and step <= opts.stop_tol:
                status = "optimal"
                iterations = it
                break
            if (
                m
                and aff <= opts.eq_tol
                and it % opts.cert_check_every == 0
            ):
                # The affine multiplier yields a dual candidate: at a fixed
                # point c - A^T y equals the (PSD) normal-cone element.
                # With the equality contract already met, a certified
                # primal-dual gap ends the slow tail that degenerate optimal
                # faces otherwise impose on the consensus residual.
                y = -rho_eff * mu
                primal = float(c_vec @ z)
                dual_val = float(b_hat @ y)
                pd_gap = abs(primal - dual_val)
                if pd_gap <= opts.cert_gap_tol * (1.0 + abs(primal) + abs(dual_val)):
                    slack_eig = layout.min_eigenvalue(c_vec - a_hat.T @ y)
                    if slack_eig >= -opts.cert_eig_tol * c_scale:
                        status = "optimal"
                        iterations = it
                        dual_gap = pd_gap
                        break

        res = max(gap, aff)
        if res < best_res * (1.0 - opts.stall_improvement):
            last_improvement = it
        if res < best_res:
            best_res = res
        u_norm = float(np.max(np.abs(u))) if n else 0.0
        window_ago = u_norm_hist[it % opts.stall_window]
        u_norm_hist[it % opts.stall_window] = u_norm
        if (
            it - last_improvement >= opts.stall_window
            and best_res > opts.stall_residual
            and it > opts.stall_window
            and u_norm - window_ago
            >= opts.stall_dual_growth * opts.stall_window * best_res
        ):
            # diverging duals over a stalled window are the splitting
            # method's infeasibility signature; bounded duals just mean slow
            status = "infeasible-detected"
            iterations = it
            message = (
                f"residual stalled at {best_res:.3e} for {opts.stall_window} "
                f"iterations with diverging duals"
            )
            break
        if not np.isfinite(res):
            raise SolverError(
                "numerical breakdown: nonfinite residual",
                {"iteration": it, "residual": res},
            )
        if has_objective and abs(float(c_vec @ z)) > opts.unbounded_threshold:
            status = "max-iterations"
            iterations = it
            message = "objective diverged; problem may be unbounded"
            break
    else:
        iterations = opts.max_iterations
        message = f"iteration cap reached with residual {best_res:.3e}"

    blocks = layout.unpack(z)
    min_eig = layout.min_eigenvalue(z)
    primal_residual = float(np.max(np.abs(a_mat @ z - b))) if m else 0.0
    objective_value = float(c_vec @ z)

    return SdpSolution(
        status=status,
        block_values=blocks,
        objective_value=objective_value,
        primal_residual=primal_residual,
        min_eigenvalue=min_eig,
        iterations=iterations,
        consensus_gap=gap,
        dual_gap=dual_gap,
        message=message,
    )
