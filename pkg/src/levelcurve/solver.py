"""Damped-Newton solver for ring problems in support-function coordinates.

The unknown is the support function h(theta, t) of the level sets on the
cylinder grid; the equation in all three modes is

    h_tt = sum_ij (c delta_ij + h_ti h_tj) b^ij,      c = c0 + lam h_t^2,

with (lam, c0) = (1/(p-1), 0) for the p-Laplace equation, (1, 1) for the
minimal-surface equation, and (1, 0) for the axisymmetric 3d harmonic case.
In the planar case the sum is the single term (c + h_ttheta^2)/(h + h'');
axisymmetric rings add c/b_parallel.

Newton starts from the linear-in-t interpolant of the boundary supports and
backtracks on the residual sup norm, rejecting any iterate that loses h_t < 0
or the strict convexity of a level set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import splu

from .errors import InvalidProblem, NewtonDiverged, NonConvexIterate
from .support import (
    EPS_B,
    CircleSupport,
    MeridianSupport,
    circle_d2_weights,
    meridian_d1_matrix,
    meridian_d2_matrix,
)

EQUATIONS = ("pLaplace", "minimalSurface", "harmonicAxisym3D")


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-11
    max_iter: int = 40
    damping: float = 0.5
    convexity_guard: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidProblem(f"newton tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidProblem(f"newton max_iter must be >= 1, got {self.max_iter}")
        if not 0.0 < self.damping < 1.0:
            raise InvalidProblem(f"newton damping must be in (0,1), got {self.damping}")


@dataclass(frozen=True)
class RingProblem:
    """Dirichlet ring problem: u = 0 on the outer body, u = 1 on the inner."""

    equation: str
    h_outer: CircleSupport | MeridianSupport
    h_inner: CircleSupport | MeridianSupport
    n_t: int
    p: float | None = None
    newton: NewtonOptions = field(default_factory=NewtonOptions)

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise InvalidProblem(f"unknown equation {self.equation!r}")
        if self.equation == "pLaplace":
            if self.p is None or not (1.0 < self.p < np.inf):
                raise InvalidProblem(f"pLaplace needs p in (1, inf), got {self.p}")
        axisym = self.equation == "harmonicAxisym3D"
        want = MeridianSupport if axisym else CircleSupport
        if not isinstance(self.h_outer, want) or not isinstance(self.h_inner, want):
            raise InvalidProblem(f"{self.equation} needs {want.__name__} boundaries")
        if self.h_outer.values.shape != self.h_inner.values.shape:
            raise InvalidProblem("inner and outer supports must share one theta grid")
        if self.n_t < 5:
            raise InvalidProblem(f"n_t must be at least 5, got {self.n_t}")
        if not np.all(self.h_inner.values < self.h_outer.values):
            raise InvalidProblem("inner body must be strictly inside the outer body")

    @property
    def axisym(self) -> bool:
        return self.equation == "harmonicAxisym3D"

    @property
    def coefficients(self) -> tuple[float, float]:
        """(lam, c0) of the transformed equation."""
        if self.equation == "pLaplace":
            return 1.0 / (self.p - 1.0), 0.0
        if self.equation == "minimalSurface":
            return 1.0, 1.0
        return 1.0, 0.0

    @property
    def theta(self) -> np.ndarray:
        return self.h_outer.theta


class _Discretization:
    """Theta operators and equation coefficients for one problem."""

    def __init__(self, problem: RingProblem):
        self.problem = problem
        self.lam, self.c0 = problem.coefficients
        self.n_t = problem.n_t
        self.dt = 1.0 / (problem.n_t - 1)
        nth = problem.h_outer.values.shape[0]
        self.n_nodes = nth
        if problem.axisym:
            m = nth - 1
            d1 = np.asarray(meridian_d1_matrix(m))
            bm = np.eye(nth) + np.asarray(meridian_d2_matrix(m))
            theta = problem.theta
            bp_mid = np.eye(nth)[1:-1, :] + (1.0 / np.tan(theta[1:-1]))[:, None] * d1[1:-1, :]
            bp = np.vstack([bm[:1, :], bp_mid, bm[-1:, :]])
        else:
            w2 = np.asarray(circle_d2_weights(nth))
            d = 2.0 * np.pi / nth
            w1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * d)
            d1 = _circulant(nth, w1, 2)
            bm = np.eye(nth) + _circulant(nth, w2, 3)
            bp = None
        self.d1 = d1
        self.bm = bm
        self.bp = bp
        self.d1_s = sparse.csr_matrix(d1)
        self.bm_s = sparse.csr_matrix(bm)
        self.bp_s = sparse.csr_matrix(bp) if bp is not None else None

    # fields at interior t-rows, vectorized over k = 1..n_t-2
    def fields(self, h: np.ndarray):
        dt = self.dt
        ht = (h[:, 2:] - h[:, :-2]) / (2.0 * dt)
        # symmetric association so the residual commutes bitwise with t-reversal
        htt = ((h[:, 2:] + h[:, :-2]) - 2.0 * h[:, 1:-1]) / dt**2
        w = self.d1 @ ht
        bm = self.bm @ h[:, 1:-1]
        bp = self.bp @ h[:, 1:-1] if self.bp is not None else None
        c = self.c0 + self.lam * ht**2
        return ht, htt, w, bm, bp, c

    def residual(self, h: np.ndarray, guard: bool = False) -> np.ndarray:
        ht, htt, w, bm, bp, c = self.fields(h)
        if guard and (bm.min() <= EPS_B or (bp is not None and bp.min() <= EPS_B)):
            raise NonConvexIterate("a level set of the supplied grid is not strictly convex")
        g = (c + w**2) / bm
        if bp is not None:
            g = g + c / bp
        return htt - g

    def jacobian(self, h: np.ndarray) -> sparse.csc_matrix:
        ht, htt, w, bm, bp, c = self.fields(h)
        dt = self.dt
        nth = self.n_nodes
        kq = self.n_t - 2
        eye = sparse.identity(nth, format="csr")
        g_bm = -(c + w**2) / bm**2
        g_ht = 2.0 * self.lam * ht / bm
        g_w = 2.0 * w / bm
        if bp is not None:
            g_bp = -c / bp**2
            g_ht = g_ht + 2.0 * self.lam * ht / bp
        blocks: list[list] = [[None] * kq for _ in range(kq)]
        for q in range(kq):
            diag = -2.0 / dt**2 * eye - sparse.diags(g_bm[:, q]) @ self.bm_s
            if bp is not None:
                diag = diag - sparse.diags(g_bp[:, q]) @ self.bp_s
            cross = (sparse.diags(g_ht[:, q]) + sparse.diags(g_w[:, q]) @ self.d1_s) / (2.0 * dt)
            blocks[q][q] = diag
            if q + 1 < kq:
                blocks[q][q + 1] = eye / dt**2 - cross
            if q - 1 >= 0:
                blocks[q][q - 1] = eye / dt**2 + cross
        return sparse.bmat(blocks, format="csc")

    def iterate_ok(self, h: np.ndarray, guard: bool) -> tuple[bool, str]:
        if not np.all(np.diff(h, axis=1) < 0.0):
            return False, "h_t"
        if guard:
            _, _, _, bm, bp, _ = self.fields(h)
            if bm.min() <= EPS_B or (bp is not None and bp.min() <= EPS_B):
                return False, "convexity"
        return True, ""


def _circulant(n: int, weights: np.ndarray, half: int) -> np.ndarray:
    mat = np.zeros((n, n))
    for off in range(-half, half + 1):
        w = weights[off + half]
        if w != 0.0:
            mat += w * np.eye(n, k=off)
            if off > 0:
                mat += w * np.eye(n, k=off - n)
            elif off < 0:
                mat += w * np.eye(n, k=off + n)
    return mat


@dataclass(frozen=True)
class SupportSolution:
    """Solved support field h(theta_j, t_k) with cached derivative arrays."""

    equation: str
    p: float | None
    theta: np.ndarray
    t: np.ndarray
    h: np.ndarray
    h_t: np.ndarray
    h_ttheta: np.ndarray
    h_tt: np.ndarray
    b_meridian: np.ndarray
    b_parallel: np.ndarray | None
    residual_norm: float
    iterations: int

    @property
    def radii_max(self) -> np.ndarray:
        if self.b_parallel is None:
            return self.b_meridian
        return np.maximum(self.b_meridian, self.b_parallel)

    @property
    def grad_norm(self) -> np.ndarray:
        return -1.0 / self.h_t

    def gradient_max_row(self) -> int:
        """t-row index holding the grid maximum of |grad u|."""
        flat = int(np.argmax(self.grad_norm))
        return flat % self.h.shape[1]

    def gradient_max_on_boundary(self) -> bool:
        return self.gradient_max_row() in (0, self.h.shape[1] - 1)


def residual(h_grid: np.ndarray, problem: RingProblem) -> np.ndarray:
    """Equation residual at the interior t-rows of an arbitrary grid.

    With the problem's convexity guard on, a grid whose level sets are not
    strictly convex raises NonConvexIterate instead of dividing by a
    vanishing radius.
    """
    h_grid = np.ascontiguousarray(h_grid, dtype=float)  # strides affect BLAS rounding paths
    disc = _Discretization(problem)
    if h_grid.shape != (disc.n_nodes, problem.n_t):
        raise InvalidProblem(
            f"grid shape {h_grid.shape} does not match problem ({disc.n_nodes}, {problem.n_t})"
        )
    return disc.residual(h_grid, guard=problem.newton.convexity_guard)


def initial_guess(problem: RingProblem) -> np.ndarray:
    t = np.linspace(0.0, 1.0, problem.n_t)
    return np.outer(problem.h_outer.values, 1.0 - t) + np.outer(problem.h_inner.values, t)


def solve(problem: RingProblem) -> SupportSolution:
    """Damped Newton from the linear interpolant of the boundary supports."""
    disc = _Discretization(problem)
    opts = problem.newton
    h = initial_guess(problem)
    ok, why = disc.iterate_ok(h, opts.convexity_guard)
    if not ok:
        raise NonConvexIterate(f"initial interpolant already violates the {why} guard")
    res = disc.residual(h)
    rn = float(np.abs(res).max())
    iterations = 0
    while rn > opts.tol:
        if iterations >= opts.max_iter:
            raise NewtonDiverged(
                f"no convergence in {opts.max_iter} Newton steps (residual {rn:.3e})",
                last_residual=rn,
            )
        jac = splu(disc.jacobian(h))
        delta = jac.solve(-res.ravel(order="F")).reshape(res.shape, order="F")
        step = 1.0
        accepted = False
        guard_trip = False
        while step >= 1e-8:
            h_try = h.copy()
            h_try[:, 1:-1] += step * delta
            ok, why = disc.iterate_ok(h_try, opts.convexity_guard)
            if ok:
                res_try = disc.residual(h_try)
                rn_try = float(np.abs(res_try).max())
                if rn_try < rn or rn_try <= opts.tol:
                    h, res, rn = h_try, res_try, rn_try
                    accepted = True
                    break
            else:
                guard_trip = True
            step *= opts.damping
        if not accepted:
            if guard_trip:
                raise NonConvexIterate(
                    f"line search exhausted against the convexity/h_t guard (residual {rn:.3e})"
                )
            raise NewtonDiverged(
                f"line search stalled (residual {rn:.3e})", last_residual=rn
            )
        iterations += 1
    return _package(problem, disc, h, rn, iterations)


def _package(problem, disc, h, rn, iterations) -> SupportSolution:
    dt = disc.dt
    h_t = np.empty_like(h)
    h_t[:, 1:-1] = (h[:, 2:] - h[:, :-2]) / (2.0 * dt)
    h_t[:, 0] = (-3.0 * h[:, 0] + 4.0 * h[:, 1] - h[:, 2]) / (2.0 * dt)
    h_t[:, -1] = (3.0 * h[:, -1] - 4.0 * h[:, -2] + h[:, -3]) / (2.0 * dt)
    h_tt = np.empty_like(h)
    h_tt[:, 1:-1] = (h[:, 2:] - 2.0 * h[:, 1:-1] + h[:, :-2]) / dt**2
    h_tt[:, 0] = (2.0 * h[:, 0] - 5.0 * h[:, 1] + 4.0 * h[:, 2] - h[:, 3]) / dt**2
    h_tt[:, -1] = (2.0 * h[:, -1] - 5.0 * h[:, -2] + 4.0 * h[:, -3] - h[:, -4]) / dt**2
    h_ttheta = disc.d1 @ h_t
    b_mer = disc.bm @ h
    b_par = disc.bp @ h if disc.bp is not None else None
    if np.any(h_t >= 0.0):
        raise NonConvexIterate("converged solution violates h_t < 0")
    if b_mer.min() <= EPS_B or (b_par is not None and b_par.min() <= EPS_B):
        raise NonConvexIterate("converged solution violates strict convexity")
    return SupportSolution(
        equation=problem.equation,
        p=problem.p,
        theta=problem.theta,
        t=np.linspace(0.0, 1.0, problem.n_t),
        h=h,
        h_t=h_t,
        h_ttheta=h_ttheta,
        h_tt=h_tt,
        b_meridian=b_mer,
        b_parallel=b_par,
        residual_norm=rn,
        iterations=iterations,
    )
