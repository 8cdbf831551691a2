"""Discrete support functions on the circle and on the sphere meridian.

A convex body is carried purely by samples of its support function h.  The
curvature radii of the body are h + h'' on the circle and, for a surface of
revolution, (h + h'', h + h' cot(theta)) on the meridian.  All derivatives are
periodic (circle) or even-reflected (meridian) central differences.

The circle second-derivative stencil is a 7-point 4th-order operator with one
extra constraint: its symbol at wavenumber 1 is exactly -1, so translating the
body (which adds a first harmonic to h) leaves h + h'' unchanged to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidGeometry, NonConvexBody

EPS_B = 1e-10  # absolute positivity floor for curvature radii

_D1_WEIGHTS = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0  # offsets -2..2, * 1/dx


@lru_cache(maxsize=64)
def circle_d2_weights(n_theta: int) -> np.ndarray:
    """Symmetric 7-point weights (offsets -3..3) for d^2/dtheta^2 on the circle.

    Conditions: 4th-order consistency plus exact annihilation of the first
    harmonic by h + D2 h (symbol(k=1) = -1).
    """
    d = 2.0 * np.pi / n_theta
    # unknowns c1, c2, c3; c0 = -2 (c1 + c2 + c3)
    a = np.array(
        [
            [1.0, 4.0, 9.0],
            [1.0, 16.0, 81.0],
            [2.0 * (np.cos(d) - 1.0), 2.0 * (np.cos(2 * d) - 1.0), 2.0 * (np.cos(3 * d) - 1.0)],
        ]
    )
    rhs = np.array([1.0 / d**2, 0.0, -1.0])
    c1, c2, c3 = np.linalg.solve(a, rhs)
    c0 = -2.0 * (c1 + c2 + c3)
    out = np.array([c3, c2, c1, c0, c1, c2, c3])
    out.setflags(write=False)
    return out


def circle_d1(values: np.ndarray, n_theta: int | None = None) -> np.ndarray:
    """4th-order periodic first derivative in theta."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0] if n_theta is None else n_theta
    d = 2.0 * np.pi / n
    out = np.zeros_like(values)
    for m, w in zip((-2, -1, 1, 2), (_D1_WEIGHTS[0], _D1_WEIGHTS[1], _D1_WEIGHTS[3], _D1_WEIGHTS[4])):
        out += w * np.roll(values, -m, axis=0)
    return out / d


def circle_d2(values: np.ndarray, n_theta: int | None = None) -> np.ndarray:
    """4th-order periodic second derivative, exact on first harmonics."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0] if n_theta is None else n_theta
    w = circle_d2_weights(n)
    out = w[3] * values
    for m in (1, 2, 3):
        out = out + w[3 + m] * (np.roll(values, -m, axis=0) + np.roll(values, m, axis=0))
    return out


def _reflect_index(i: int, m: int) -> int:
    if i < 0:
        return -i
    if i > m:
        return 2 * m - i
    return i


@lru_cache(maxsize=64)
def meridian_d1_matrix(m_theta: int) -> np.ndarray:
    """4th-order first derivative on theta in [0, pi] with even-reflection ghosts."""
    d = np.pi / m_theta
    mat = np.zeros((m_theta + 1, m_theta + 1))
    for j in range(m_theta + 1):
        for off, w in zip((-2, -1, 1, 2), (_D1_WEIGHTS[0], _D1_WEIGHTS[1], _D1_WEIGHTS[3], _D1_WEIGHTS[4])):
            mat[j, _reflect_index(j + off, m_theta)] += w / d
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=64)
def meridian_d2_matrix(m_theta: int) -> np.ndarray:
    """4th-order second derivative with even-reflection ghosts."""
    d = np.pi / m_theta
    w = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * d**2)
    mat = np.zeros((m_theta + 1, m_theta + 1))
    for j in range(m_theta + 1):
        for off in range(-2, 3):
            mat[j, _reflect_index(j + off, m_theta)] += w[off + 2]
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True)
class CircleSupport:
    """Support function samples h(theta_j), theta_j = 2 pi j / N, on the circle."""

    values: np.ndarray
    n_theta: int = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "n_theta", vals.shape[0])
        if vals.ndim != 1 or self.n_theta < 16 or self.n_theta % 2 != 0:
            raise InvalidGeometry(
                f"circle support needs an even grid of at least 16 nodes, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            raise InvalidGeometry("support samples must be finite and positive (origin inside the body)")
        radii = vals + circle_d2(vals)
        if radii.min() <= EPS_B:
            raise NonConvexBody(
                f"body is not strictly convex: min curvature radius {radii.min():.3e}"
            )

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta


@dataclass(frozen=True)
class MeridianSupport:
    """Axisymmetric support samples h(theta_j), theta_j = pi j / M, j = 0..M."""

    values: np.ndarray
    m_theta: int = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "m_theta", vals.shape[0] - 1)
        if vals.ndim != 1 or self.m_theta < 8:
            raise InvalidGeometry(f"meridian support needs at least 9 nodes, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            raise InvalidGeometry("support samples must be finite and positive")
        d = np.pi / self.m_theta
        scale = np.abs(vals).max()
        d1_start = (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * d)
        d1_end = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * d)
        for name, slope in (("0", d1_start), ("pi", d1_end)):
            if abs(slope) > 50.0 * d**2 * scale:
                raise InvalidGeometry(f"meridian data is not pole-symmetric: h_theta({name}) ~ {slope:.3e}")
        radii = principal_radii_axisym_raw(vals)
        if min(radii[0].min(), radii[1].min()) <= EPS_B:
            raise NonConvexBody("surface of revolution is not strictly convex")

    @property
    def theta(self) -> np.ndarray:
        return np.pi * np.arange(self.m_theta + 1) / self.m_theta


@dataclass(frozen=True)
class PrincipalRadii:
    """Principal curvature radii of one level set, per support node.

    b_parallel is None in the planar case.  b_max is the largest radius per
    node (the reciprocal of the smallest principal curvature).
    """

    b_meridian: np.ndarray
    b_parallel: np.ndarray | None = None

    @property
    def b_max(self) -> np.ndarray:
        if self.b_parallel is None:
            return self.b_meridian
        return np.maximum(self.b_meridian, self.b_parallel)

    @property
    def b_min(self) -> np.ndarray:
        if self.b_parallel is None:
            return self.b_meridian
        return np.minimum(self.b_meridian, self.b_parallel)


def principal_radius_2d(h: CircleSupport) -> PrincipalRadii:
    """Curvature radius h + h'' of a planar convex body."""
    b = h.values + circle_d2(h.values)
    if b.min() <= EPS_B:
        raise NonConvexBody(f"min curvature radius {b.min():.3e} <= {EPS_B}")
    return PrincipalRadii(b_meridian=b)


def principal_radii_axisym_raw(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(meridian, parallel) radii from raw samples; poles get the umbilic limit."""
    m = values.shape[0] - 1
    theta = np.pi * np.arange(m + 1) / m
    b_mer = values + meridian_d2_matrix(m) @ values
    h1 = meridian_d1_matrix(m) @ values
    b_par = np.empty_like(b_mer)
    b_par[1:-1] = values[1:-1] + h1[1:-1] / np.tan(theta[1:-1])
    b_par[0] = b_mer[0]
    b_par[-1] = b_mer[-1]
    return b_mer, b_par


def principal_radii_axisym(h: MeridianSupport) -> PrincipalRadii:
    """Both principal radii of a convex surface of revolution."""
    b_mer, b_par = principal_radii_axisym_raw(h.values)
    if min(b_mer.min(), b_par.min()) <= EPS_B:
        raise NonConvexBody("surface of revolution is not strictly convex")
    return PrincipalRadii(b_meridian=b_mer, b_parallel=b_par)


def check_strict_convexity(b: PrincipalRadii) -> bool:
    """True iff every principal radius exceeds the positivity floor."""
    ok = b.b_meridian.min() > EPS_B
    if b.b_parallel is not None:
        ok = ok and b.b_parallel.min() > EPS_B
    return bool(ok)


def support_of_circle(r: float, n_theta: int) -> CircleSupport:
    if r <= 0:
        raise InvalidGeometry(f"circle radius must be positive, got {r}")
    return CircleSupport(np.full(n_theta, float(r)))


def support_of_ellipse(a: float, b: float, n_theta: int) -> CircleSupport:
    """Ellipse with semi-axes a (x) and b (y): h = sqrt(a^2 cos^2 + b^2 sin^2)."""
    if a <= 0 or b <= 0:
        raise InvalidGeometry(f"ellipse semi-axes must be positive, got a={a}, b={b}")
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    return CircleSupport(np.sqrt((a * np.cos(th)) ** 2 + (b * np.sin(th)) ** 2))


def support_of_offset_circle(r: float, cx: float, cy: float, n_theta: int) -> CircleSupport:
    """Circle of radius r centered at (cx, cy); origin must stay inside."""
    if r <= 0:
        raise InvalidGeometry(f"circle radius must be positive, got {r}")
    if np.hypot(cx, cy) >= r:
        raise InvalidGeometry("origin must lie strictly inside the offset circle")
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    return CircleSupport(r + cx * np.cos(th) + cy * np.sin(th))


def support_of_sphere(r: float, m_theta: int) -> MeridianSupport:
    if r <= 0:
        raise InvalidGeometry(f"sphere radius must be positive, got {r}")
    return MeridianSupport(np.full(m_theta + 1, float(r)))


def support_of_spheroid(a: float, c: float, m_theta: int) -> MeridianSupport:
    """Spheroid with equatorial semi-axis a and polar semi-axis c.

    theta is the polar angle of the outer normal, so h(0) = c, h(pi/2) = a.
    """
    if a <= 0 or c <= 0:
        raise InvalidGeometry(f"spheroid semi-axes must be positive, got a={a}, c={c}")
    th = np.pi * np.arange(m_theta + 1) / m_theta
    return MeridianSupport(np.sqrt((c * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2))
