"""Closed-form ring solutions used to cross-check the Newton solver.

Three families:

* radial p-harmonic rings between concentric circles/spheres (power law or
  log), valid for any p in (1, inf); the ball-Green variant additionally
  rejects p > n,
* the planar harmonic ring between eccentric circles, via the Mobius map that
  makes the two circles concentric (every level curve is again a circle),
* the radial minimal graph over an annulus (catenoid height function), with
  the catenoid parameter found by shooting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import GeometryNotNested, InvalidGeometry, NoRadialSolution, OutOfRange
from .profiles import (
    KIND_GAUSS_2D,
    KIND_MAX_GRAD_OVER_K1,
    KIND_MIN_LOG_K1,
    HeightProfile,
)


def _as_levels(t_levels) -> np.ndarray:
    t = np.asarray(t_levels, dtype=float)
    if t.ndim != 1 or t.size < 1 or t.min() < 0.0 or t.max() > 1.0:
        raise ValueError("levels must be a 1d array inside [0,1]")
    return t


@dataclass(frozen=True)
class RadialHarmonicHandle:
    """Radial p-harmonic ring solution, u = 0 at r_outer and 1 at r_inner."""

    n: int
    p: float
    r_outer: float
    r_inner: float

    @property
    def _log_case(self) -> bool:
        return abs(self.p - self.n) < 1e-14

    @property
    def _exponent(self) -> float:
        return (self.p - self.n) / (self.p - 1.0)

    def t_of_r(self, r):
        r = np.asarray(r, dtype=float)
        if self._log_case:
            return np.log(self.r_outer / r) / math.log(self.r_outer / self.r_inner)
        m = self._exponent
        return (r**m - self.r_outer**m) / (self.r_inner**m - self.r_outer**m)

    def r_of_t(self, t):
        t = np.asarray(t, dtype=float)
        if self._log_case:
            return self.r_outer * (self.r_inner / self.r_outer) ** t
        m = self._exponent
        return (self.r_outer**m + t * (self.r_inner**m - self.r_outer**m)) ** (1.0 / m)

    def grad_norm(self, r):
        r = np.asarray(r, dtype=float)
        if self._log_case:
            return 1.0 / (r * math.log(self.r_outer / self.r_inner))
        m = self._exponent
        return np.abs(m / (self.r_inner**m - self.r_outer**m)) * r ** (m - 1.0)

    def k1(self, r):
        return 1.0 / np.asarray(r, dtype=float)

    def value_of_kind(self, kind: str, t) -> np.ndarray:
        r = self.r_of_t(t)
        if kind == KIND_MAX_GRAD_OVER_K1:
            return self.grad_norm(r) * r
        if kind == KIND_MIN_LOG_K1:
            return -np.log(r)
        if kind == KIND_GAUSS_2D:
            if self.n != 2:
                raise ValueError("gauss2d is the planar specialization (n = 2)")
            return self.grad_norm(r) ** (3.0 - 2.0 * self.p) / r
        raise ValueError(f"unknown profile kind {kind!r}")

    def profile(self, kind: str, t_levels) -> HeightProfile:
        t = _as_levels(t_levels)
        return HeightProfile(t=t, f=self.value_of_kind(kind, t), kind=kind)

    def boundary_values(self, kind: str) -> tuple[float, float]:
        return (
            float(self.value_of_kind(kind, 0.0)),
            float(self.value_of_kind(kind, 1.0)),
        )

    def support_grid(self, n_theta: int, t_grid) -> np.ndarray:
        """h(theta_j, t_k) = r(t_k) of the level circles/spheres."""
        r = self.r_of_t(np.asarray(t_grid, dtype=float))
        return np.tile(r, (n_theta, 1))


def exact_radial_ring(n: int, p: float, r_outer: float, r_inner: float) -> RadialHarmonicHandle:
    """Radial p-harmonic ring solution for any p in (1, inf)."""
    if n < 2:
        raise InvalidGeometry(f"dimension must be at least 2, got {n}")
    if not (1.0 < p < np.inf):
        raise OutOfRange(f"p must lie in (1, inf), got {p}")
    if not 0.0 < r_inner < r_outer:
        raise InvalidGeometry(f"need 0 < r_inner < r_outer, got {r_inner}, {r_outer}")
    return RadialHarmonicHandle(n=n, p=float(p), r_outer=float(r_outer), r_inner=float(r_inner))


def exact_radial_green(n: int, p: float, r_outer: float, r_inner: float) -> RadialHarmonicHandle:
    """Ball-Green normalized family: additionally requires p <= n."""
    if p > n:
        raise OutOfRange(f"the ball Green family needs p <= n, got p={p}, n={n}")
    return exact_radial_ring(n, p, r_outer, r_inner)


@dataclass(frozen=True)
class Circle2D:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise InvalidGeometry(f"circle radius must be positive, got {self.r}")


@dataclass(frozen=True)
class EccentricHarmonicHandle:
    """Planar harmonic ring between eccentric circles via the Mobius map.

    Internally the outer circle is centered at the origin with the inner
    center at distance d on the +x axis; shift/rotation back to the caller's
    frame is stored.  Every level curve u = t is a circle.
    """

    outer: Circle2D
    inner: Circle2D
    d: float
    rot: float  # angle of the inner-center direction in the caller frame
    a: float    # Mobius limit point inside the inner circle (normalized frame)
    b: float    # Mobius limit point outside the outer circle
    rho0: float
    rho1: float
    radial: RadialHarmonicHandle | None  # concentric degeneration

    @property
    def _L(self) -> float:
        return math.log(self.rho0 / self.rho1)

    def level_circle(self, t: float) -> tuple[float, float]:
        """(center abscissa, radius) of the level circle in the normalized frame."""
        if self.radial is not None:
            return 0.0, float(self.radial.r_of_t(t))
        rho = self.rho0 ** (1.0 - t) * self.rho1**t
        center = (self.a - rho**2 * self.b) / (1.0 - rho**2)
        radius = rho * abs(self.a - self.b) / abs(1.0 - rho**2)
        return center, radius

    def _to_normalized(self, x, y):
        dx = np.asarray(x, dtype=float) - self.outer.cx
        dy = np.asarray(y, dtype=float) - self.outer.cy
        cos_r, sin_r = math.cos(-self.rot), math.sin(-self.rot)
        return cos_r * dx - sin_r * dy, sin_r * dx + cos_r * dy

    def u(self, x, y):
        xn, yn = self._to_normalized(x, y)
        if self.radial is not None:
            return self.radial.t_of_r(np.hypot(xn, yn))
        z = xn + 1j * yn
        rho = np.abs(z - self.a) / np.abs(z - self.b)
        return np.log(rho / self.rho0) / math.log(self.rho1 / self.rho0)

    def _grad_norm_normalized(self, xn, yn):
        if self.radial is not None:
            return self.radial.grad_norm(np.hypot(xn, yn))
        z = np.asarray(xn, dtype=float) + 1j * np.asarray(yn, dtype=float)
        return abs(self.a - self.b) / (np.abs(z - self.a) * np.abs(z - self.b) * self._L)

    def grad_norm(self, x, y):
        return self._grad_norm_normalized(*self._to_normalized(x, y))

    def curvature(self, t: float) -> float:
        return 1.0 / self.level_circle(t)[1]

    def value_of_kind(self, kind: str, t: float, n_phi: int = 4096) -> float:
        """Extremum of the kind's integrand over the level circle u = t."""
        center, radius = self.level_circle(t)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        gn = self._grad_norm_normalized(center + radius * np.cos(phi), radius * np.sin(phi))
        if kind == KIND_MAX_GRAD_OVER_K1:
            return float(np.max(gn) * radius)
        if kind == KIND_MIN_LOG_K1:
            return float(-math.log(radius))
        if kind == KIND_GAUSS_2D:
            return float(np.min(gn ** (3.0 - 2.0 * 2.0)) / radius)
        raise ValueError(f"unknown profile kind {kind!r}")

    def profile(self, kind: str, t_levels, n_phi: int = 4096) -> HeightProfile:
        t = _as_levels(t_levels)
        f = np.array([self.value_of_kind(kind, tk, n_phi) for tk in t])
        return HeightProfile(t=t, f=f, kind=kind)

    def boundary_values(self, kind: str, n_phi: int = 4096) -> tuple[float, float]:
        return (
            self.value_of_kind(kind, 0.0, n_phi),
            self.value_of_kind(kind, 1.0, n_phi),
        )

    def support_of_level(self, t: float, n_theta: int) -> np.ndarray:
        """Support samples of the level circle in the caller frame.

        Valid only while the caller-frame origin lies inside the level circle.
        """
        center, radius = self.level_circle(t)
        cx = self.outer.cx + math.cos(self.rot) * center
        cy = self.outer.cy + math.sin(self.rot) * center
        th = 2.0 * np.pi * np.arange(n_theta) / n_theta
        return radius + cx * np.cos(th) + cy * np.sin(th)


def exact_eccentric_harmonic(outer: Circle2D, inner: Circle2D) -> EccentricHarmonicHandle:
    """Harmonic ring between nested circles; p = 2, n = 2 only."""
    d = math.hypot(inner.cx - outer.cx, inner.cy - outer.cy)
    if d + inner.r >= outer.r:
        raise GeometryNotNested(
            f"inner circle (offset {d:.3g}, radius {inner.r:.3g}) is not strictly "
            f"inside the outer circle (radius {outer.r:.3g})"
        )
    rot = math.atan2(inner.cy - outer.cy, inner.cx - outer.cx) if d > 0 else 0.0
    if d < 1e-13 * outer.r:
        radial = exact_radial_ring(2, 2.0, outer.r, inner.r)
        return EccentricHarmonicHandle(
            outer=outer, inner=inner, d=d, rot=rot,
            a=0.0, b=np.inf, rho0=1.0, rho1=1.0, radial=radial,
        )
    big_r, small_r = outer.r, inner.r
    s = (big_r**2 + d**2 - small_r**2) / d
    root = math.sqrt(s**2 - 4.0 * big_r**2)
    a = (s - root) / 2.0
    b = (s + root) / 2.0
    rho0 = abs(big_r - a) / abs(big_r - b)
    rho1 = abs(d + small_r - a) / abs(d + small_r - b)
    return EccentricHarmonicHandle(
        outer=outer, inner=inner, d=d, rot=rot, a=a, b=b, rho0=rho0, rho1=rho1, radial=None
    )


@dataclass(frozen=True)
class RadialMinimalHandle:
    """Radial minimal graph over the annulus; u = 0 outside, 1 inside.

    u(r) = c [acosh(r_outer/c) - acosh(r/c)] with the catenoid parameter c
    solving u(r_inner) = 1.
    """

    r_outer: float
    r_inner: float
    c: float

    def u(self, r):
        r = np.asarray(r, dtype=float)
        return self.c * (math.acosh(self.r_outer / self.c) - np.arccosh(r / self.c))

    def grad_norm(self, r):
        r = np.asarray(r, dtype=float)
        return self.c / np.sqrt(r**2 - self.c**2)

    def r_of_t(self, t):
        t = np.asarray(t, dtype=float)
        return self.c * np.cosh(math.acosh(self.r_outer / self.c) - t / self.c)

    def k1(self, r):
        return 1.0 / np.asarray(r, dtype=float)

    def ode_residual(self, r) -> np.ndarray:
        """First integral r u' / sqrt(1 + u'^2) + c of the radial equation."""
        r = np.asarray(r, dtype=float)
        up = -self.grad_norm(r)
        return r * up / np.sqrt(1.0 + up**2) + self.c

    def value_of_kind(self, kind: str, t) -> np.ndarray:
        r = self.r_of_t(t)
        if kind == KIND_MAX_GRAD_OVER_K1:
            return self.grad_norm(r) * r
        if kind == KIND_MIN_LOG_K1:
            return -np.log(r)
        raise ValueError(f"profile kind {kind!r} is not defined for the minimal graph")

    def profile(self, kind: str, t_levels) -> HeightProfile:
        t = _as_levels(t_levels)
        return HeightProfile(t=t, f=self.value_of_kind(kind, t), kind=kind)

    def boundary_values(self, kind: str) -> tuple[float, float]:
        return float(self.value_of_kind(kind, 0.0)), float(self.value_of_kind(kind, 1.0))

    def support_grid(self, n_theta: int, t_grid) -> np.ndarray:
        r = self.r_of_t(np.asarray(t_grid, dtype=float))
        return np.tile(r, (n_theta, 1))


def _minimal_height(c: float, r_outer: float, r_inner: float) -> float:
    return c * (math.acosh(r_outer / c) - math.acosh(r_inner / c))


def exact_radial_minimal(r_outer: float, r_inner: float) -> RadialMinimalHandle:
    """Shoot on the catenoid parameter; raises NoRadialSolution when the ring
    cannot span a unit height."""
    if not 0.0 < r_inner < r_outer:
        raise InvalidGeometry(f"need 0 < r_inner < r_outer, got {r_inner}, {r_outer}")
    hi = r_inner * (1.0 - 1e-12)
    attainable = _minimal_height(hi, r_outer, r_inner)
    if attainable < 1.0:
        raise NoRadialSolution(
            f"max spannable height {attainable:.6g} < 1 for radii ({r_outer}, {r_inner})"
        )
    lo = r_inner * 1e-8
    while _minimal_height(lo, r_outer, r_inner) >= 1.0:
        lo *= 0.5
    c = brentq(lambda cc: _minimal_height(cc, r_outer, r_inner) - 1.0, lo, hi, xtol=1e-15, rtol=8.9e-16)
    return RadialMinimalHandle(r_outer=float(r_outer), r_inner=float(r_inner), c=float(c))
