"""Per-level curvature profiles f(t) and their convexity/concavity/affineness checks.

A profile collects, for each interior level t, the extremum over the level set
of one of three quantities:

  maxGradOverK1  f(t) = max  |grad u| / k1      (k1 = smallest principal curvature)
  minLogK1       f(t) = min  log k1
  gauss2d        f(t) = min  |grad u|^(3-2p) k  (planar curvature k; p-Laplace only)

In support coordinates |grad u| = -1/h_t and k1 = 1/b_max, so the first kind is
-b_max/h_t on the grid.  Checks are discrete second differences against a stated
tolerance; every report records the tolerance it used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewSamples

KIND_MAX_GRAD_OVER_K1 = "maxGradOverK1"
KIND_MIN_LOG_K1 = "minLogK1"
KIND_GAUSS_2D = "gauss2d"
PROFILE_KINDS = (KIND_MAX_GRAD_OVER_K1, KIND_MIN_LOG_K1, KIND_GAUSS_2D)

# kinds whose theorem predicts a convex profile take max over the level set and
# the chord bound from above; the concave kinds mirror this.
_CONVEX_KINDS = {KIND_MAX_GRAD_OVER_K1}


@dataclass(frozen=True)
class HeightProfile:
    """Values f(t_k) on uniformly spaced interior levels t_k in (0,1)."""

    t: np.ndarray
    f: np.ndarray
    kind: str

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "f", f)
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if t.shape != f.shape or t.ndim != 1:
            raise ValueError("t and f must be 1d arrays of equal length")
        if not np.all(np.isfinite(f)):
            raise ValueError("profile values must be finite")
        if t.size >= 2:
            dt = np.diff(t)
            if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
                raise ValueError("levels must be strictly increasing and uniform")
        if t.size and (t[0] <= 0.0 or t[-1] >= 1.0):
            raise ValueError("levels must be interior to (0,1)")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one profile check.

    kind is one of convex/concave/affine/endpointBound; worst_value is the
    extremal second-difference quotient (or the largest residual/violation),
    location the index of the offending level.
    """

    kind: str
    worst_value: float
    location: int
    tol_used: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "worst_value": self.worst_value,
            "location": self.location,
            "tol_used": self.tol_used,
            "pass": self.passed,
        }


def interior_levels(n_levels: int) -> np.ndarray:
    """n_levels uniformly spaced levels strictly inside (0,1)."""
    return np.linspace(0.0, 1.0, n_levels + 2)[1:-1]


def is_convex_kind(kind: str) -> bool:
    return kind in _CONVEX_KINDS


def _pointwise_grid(sol, kind: str) -> np.ndarray:
    """The kind's integrand on the full (theta, t) grid of a solved ring."""
    if kind == KIND_MAX_GRAD_OVER_K1:
        return -sol.radii_max / sol.h_t
    if kind == KIND_MIN_LOG_K1:
        return -np.log(sol.radii_max)
    if kind == KIND_GAUSS_2D:
        if sol.equation != "pLaplace" or sol.b_parallel is not None:
            raise ValueError("gauss2d profiles are defined for planar p-Laplace solutions only")
        return (-1.0 / sol.h_t) ** (3.0 - 2.0 * sol.p) / sol.b_meridian
    raise ValueError(f"unknown profile kind {kind!r}")


def profile_from_solution(sol, kind: str) -> HeightProfile:
    """Extract f(t) on the interior t-rows of a converged SupportSolution."""
    grid = _pointwise_grid(sol, kind)
    if is_convex_kind(kind):
        f = grid.max(axis=0)
    else:
        f = grid.min(axis=0)
    return HeightProfile(t=sol.t[1:-1], f=f[1:-1], kind=kind)


def boundary_extrema(sol, kind: str) -> tuple[float, float]:
    """The kind's extremum on the two boundary rows (for the chord bound)."""
    grid = _pointwise_grid(sol, kind)
    red = np.max if is_convex_kind(kind) else np.min
    return float(red(grid[:, 0])), float(red(grid[:, -1]))


def second_difference_quotients(profile: HeightProfile) -> np.ndarray:
    f = profile.f
    return (f[2:] + f[:-2] - 2.0 * f[1:-1]) / profile.dt**2


def check_convex(profile: HeightProfile, tol: float) -> CheckReport:
    """Pass iff every second-difference quotient is >= -tol."""
    if profile.f.size < 3:
        raise TooFewSamples("convexity check needs at least 3 samples")
    q = second_difference_quotients(profile)
    k = int(np.argmin(q))
    worst = float(q[k])
    return CheckReport("convex", worst, k + 1, float(tol), worst >= -tol)


def check_concave(profile: HeightProfile, tol: float) -> CheckReport:
    """Pass iff every second-difference quotient is <= tol."""
    if profile.f.size < 3:
        raise TooFewSamples("concavity check needs at least 3 samples")
    q = second_difference_quotients(profile)
    k = int(np.argmax(q))
    worst = float(q[k])
    return CheckReport("concave", worst, k + 1, float(tol), worst <= tol)


def check_affine(profile: HeightProfile, tol: float) -> CheckReport:
    """Pass iff the profile deviates from its least-squares line by at most tol."""
    if profile.f.size < 3:
        raise TooFewSamples("affineness check needs at least 3 samples")
    slope, intercept = np.polyfit(profile.t, profile.f, 1)
    resid = np.abs(profile.f - (slope * profile.t + intercept))
    k = int(np.argmax(resid))
    worst = float(resid[k])
    return CheckReport("affine", worst, k, float(tol), worst <= tol)


def fitted_slope(profile: HeightProfile) -> float:
    slope, _ = np.polyfit(profile.t, profile.f, 1)
    return float(slope)


def check_endpoint_bound(profile: HeightProfile, f0: float, f1: float, tol: float) -> CheckReport:
    """Chord bound against the boundary values: f below the chord for convex
    kinds, above it for concave kinds, within tol."""
    chord = (1.0 - profile.t) * f0 + profile.t * f1
    if is_convex_kind(profile.kind):
        violation = profile.f - chord
    else:
        violation = chord - profile.f
    k = int(np.argmax(violation))
    worst = float(violation[k])
    return CheckReport("endpointBound", worst, k, float(tol), worst <= tol)


def default_tolerance(dt: float, dtheta: float, scale: float, c_disc: float = 10.0) -> float:
    """Discretization-aware default: max(1e-9, c_disc (dt^2 + dtheta^4)) * scale."""
    return max(1e-9, c_disc * (dt**2 + dtheta**4)) * max(abs(scale), 1e-30)
