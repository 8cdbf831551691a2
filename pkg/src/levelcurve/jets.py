"""Random constrained jets and the numerical verification of the proof-chain
algebra for the transformed p-Laplace and minimal-surface equations.

A jet is a finite list of point values of the support function and its
derivatives at one point of the cylinder, in a frame where the curvature-radius
matrix b is diagonal with b_11 the largest entry.  Free fields are drawn from
bounded ranges; everything the equation pins down (h_tt, the mixed third
derivatives, h_ttt, the twice-tangentially differentiated equation, and hence
b_11,tt) is computed, so every jet satisfies the equation, its differentiated
forms, and the sphere commutation relations by construction.

Both equations share the coefficient c = c_const + lam * h_t^2:
p-Laplace (c_const, lam) = (0, 1/(p-1)); minimal surface (1, 1).  Direct
evaluations of L(phi) etc. are written once against (c_const, lam); the
regrouped right-hand sides that the chain checks against are transcribed
verbatim per mode, so a cross-wiring of the two chains fails the checks.

Index 0 plays the role of the distinguished tangent direction (the one that
realizes the largest principal radius); "tail" sums run over indices >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from types import SimpleNamespace

import numpy as np

from .ddfloat import DD

MODES = ("pLaplace", "minimal")

TOL_IDENTITY = 1e-9
TOL_EXACT = 1e-12
GRAY_LO = 1e-9
GRAY_HI = 1e-6


# ---------------------------------------------------------------------------
# jet construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet:
    """Point values of one constrained jet; see module docstring.

    All tensor fields are nested tuples indexed by tangent directions
    0..n-2.  Derived fields (h_tt through b11_tt) are computed by the
    factory functions, never supplied.
    """

    n: int
    p: float
    mode: str
    alpha: float
    beta: float
    lam: float
    c_const: float
    h_t: float
    h_ti: tuple
    b_diag: tuple
    d3_b: tuple
    bt: tuple
    b11_ij: tuple
    b11_it: tuple
    b11_tt: float
    h_tt: float
    h_tij: tuple
    h_tti: tuple
    h_ttt: float
    h_tt11: float
    first_order_enforced: bool = False

    @property
    def m(self) -> int:
        return self.n - 1


def _derive(ns) -> None:
    """Fill the equation-pinned fields of a jet namespace in place.

    Works for float and DD entries alike.
    """
    m = ns.n - 1
    ht = ns.h_t
    hti = ns.h_ti
    bd = ns.b_diag
    lam, c_const = ns.lam, ns.c_const
    binv = tuple(1.0 / bd[i] for i in range(m))
    cu = c_const + lam * ht * ht
    sigma1 = _fsum(binv)
    sh = _fsum(hti[i] * hti[i] * binv[i] for i in range(m))

    def a_coef(i, j):
        out = hti[i] * hti[j]
        if i == j:
            out = out + cu
        return out

    htt = cu * sigma1 + sh
    htij = tuple(
        tuple(ns.bt[i][j] - ht if i == j else ns.bt[i][j] for j in range(m)) for i in range(m)
    )
    htti = tuple(
        2.0 * lam * ht * hti[i] * sigma1
        + 2.0 * _fsum(htij[k][i] * hti[k] * binv[k] for k in range(m))
        - _fsum(
            a_coef(k, kk) * binv[k] * binv[kk] * ns.d3_b[k][kk][i]
            for k in range(m) for kk in range(m)
        )
        for i in range(m)
    )
    httt = (
        2.0 * lam * ht * htt * sigma1
        + 2.0 * _fsum(htti[k] * hti[k] * binv[k] for k in range(m))
        - _fsum(
            a_coef(k, kk) * binv[k] * binv[kk] * ns.bt[k][kk]
            for k in range(m) for kk in range(m)
        )
    )

    # twice theta_0 differentiated equation, commutation rule applied
    ht11 = ns.bt[0][0] - ht
    c11 = 2.0 * lam * (hti[0] * hti[0] + ht * ht11)

    def htk1(k):
        return ns.bt[0][k] - ht if k == 0 else ns.bt[0][k]

    def htk11(k):
        return ns.b11_it[k] - hti[0] if k == 0 else ns.b11_it[k]

    j1 = (
        c11 * sigma1
        + 2.0 * _fsum(htk11(k) * hti[k] * binv[k] for k in range(m))
        + 2.0 * _fsum(htk1(k) * htk1(k) * binv[k] for k in range(m))
    )
    j2 = -2.0 * _fsum(
        (
            (2.0 * lam * ht * hti[0] if k == kk else 0.0)
            + htk1(k) * hti[kk]
            + hti[k] * htk1(kk)
        )
        * binv[k] * binv[kk] * ns.d3_b[k][kk][0]
        for k in range(m) for kk in range(m)
    )
    j3 = 2.0 * _fsum(
        a_coef(k, kk) * binv[k] * binv[kk] * binv[r] * ns.d3_b[k][r][0] * ns.d3_b[kk][r][0]
        for k in range(m) for kk in range(m) for r in range(m)
    )
    j4 = -_fsum(
        a_coef(k, kk) * binv[k] * binv[kk]
        * (ns.b11_ij[k][kk] + ((bd[k] - bd[0]) if k == kk else 0.0))
        for k in range(m) for kk in range(m)
    )
    ns.h_tt = htt
    ns.h_tij = htij
    ns.h_tti = htti
    ns.h_ttt = httt
    ns.h_tt11 = j1 + j2 + j3 + j4
    ns.b11_tt = htt + ns.h_tt11


def _fsum(terms) -> object:
    total = 0.0
    for t in terms:
        total = total + t
    return total


def _ssum(terms) -> tuple[object, float]:
    """Sum in working precision plus the float sum of magnitudes (the scale)."""
    total = 0.0
    scale = 0.0
    for t in terms:
        total = total + t
        scale += abs(float(t))
    return total, scale


def _mode_coefficients(mode: str, p: float) -> tuple[float, float]:
    if mode == "pLaplace":
        return 1.0 / (p - 1.0), 0.0
    if mode == "minimal":
        return 1.0, 1.0
    raise ValueError(f"unknown jet mode {mode!r}")


def _validate_fields(n, h_t, h_ti, b_diag, d3_b, bt, b11_ij, b11_it) -> None:
    m = n - 1
    if not h_t < 0.0:
        raise ValueError(f"h_t must be negative, got {h_t}")
    if min(b_diag) <= 0.0:
        raise ValueError("all principal radii must be positive")
    if b_diag[0] != max(b_diag):
        raise ValueError("slot 0 must carry the largest principal radius")
    if not (len(h_ti) == len(b_diag) == len(b11_it) == m):
        raise ValueError(f"field lengths must match n - 1 = {m}")
    for i in range(m):
        for j in range(m):
            if bt[i][j] != bt[j][i] or b11_ij[i][j] != b11_ij[j][i]:
                raise ValueError("bt and b11_ij must be symmetric")
            for k in range(m):
                if d3_b[i][j][k] != d3_b[j][i][k] or d3_b[i][j][k] != d3_b[i][k][j]:
                    raise ValueError("d3_b must be fully symmetric")


def make_jet(n, p, mode, alpha, beta, h_t, h_ti, b_diag, d3_b, bt, b11_ij, b11_it,
              enforced=False, lam=None, c_const=None) -> Jet:
    _validate_fields(n, h_t, h_ti, b_diag, d3_b, bt, b11_ij, b11_it)
    if lam is None or c_const is None:
        lam, c_const = _mode_coefficients(mode, p)
    ns = SimpleNamespace(
        n=n, lam=lam, c_const=c_const, h_t=h_t, h_ti=h_ti, b_diag=b_diag,
        d3_b=d3_b, bt=bt, b11_ij=b11_ij, b11_it=b11_it,
    )
    _derive(ns)
    return Jet(
        n=n, p=p, mode=mode, alpha=alpha, beta=beta, lam=lam, c_const=c_const,
        h_t=h_t, h_ti=h_ti, b_diag=b_diag, d3_b=d3_b, bt=bt, b11_ij=b11_ij,
        b11_it=b11_it, b11_tt=ns.b11_tt, h_tt=ns.h_tt, h_tij=ns.h_tij,
        h_tti=ns.h_tti, h_ttt=ns.h_ttt, h_tt11=ns.h_tt11,
        first_order_enforced=enforced,
    )


def _symmetrize3(arr: np.ndarray) -> np.ndarray:
    # one value per sorted index triple so the result is symmetric bitwise
    m = arr.shape[0]
    out = np.empty_like(arr)
    for i in range(m):
        for j in range(i, m):
            for k in range(j, m):
                v = (
                    arr[i, j, k] + arr[i, k, j] + arr[j, i, k]
                    + arr[j, k, i] + arr[k, i, j] + arr[k, j, i]
                ) / 6.0
                for a, b, c in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
                    out[a, b, c] = v
    return out


def _tup3(aa: np.ndarray) -> tuple:
    return tuple(tuple(tuple(float(x) for x in row) for row in mat) for mat in aa)


def _tup2(aa: np.ndarray) -> tuple:
    return tuple(tuple(float(x) for x in row) for row in aa)


def sample_jet(n: int, p: float, mode: str, alpha: float, beta: float, seed,
               radial: bool = False) -> Jet:
    """Draw one jet; same seed gives a bitwise-identical jet.

    Ranges keep condition numbers tame: h_t in [-3, -0.2], b_ii in [0.2, 5]
    with the largest entry swapped into slot 0, all other free entries in
    [-2, 2].  The radial flag zeroes the tangential data and equalizes the
    radii.
    """
    if n < 2:
        raise ValueError(f"jet dimension must be >= 2, got {n}")
    if mode == "pLaplace" and not 1.0 < p < np.inf:
        raise ValueError(f"pLaplace jets need p in (1, inf), got {p}")
    if mode not in MODES:
        raise ValueError(f"unknown jet mode {mode!r}")
    m = n - 1
    rng = np.random.default_rng(seed)
    h_t = -float(rng.uniform(0.2, 3.0))
    if radial:
        b0 = float(rng.uniform(0.2, 5.0))
        b_diag = (b0,) * m
        h_ti = (0.0,) * m
        d3 = tuple(tuple(tuple(0.0 for _ in range(m)) for _ in range(m)) for _ in range(m))
        bt = tuple(tuple(0.0 for _ in range(m)) for _ in range(m))
        b11_ij = bt
        b11_it = (0.0,) * m
    else:
        b_raw = rng.uniform(0.2, 5.0, size=m)
        imax = int(np.argmax(b_raw))
        b_raw[0], b_raw[imax] = b_raw[imax], b_raw[0]
        b_diag = tuple(float(x) for x in b_raw)
        h_ti = tuple(float(x) for x in rng.uniform(-2.0, 2.0, size=m))
        d3 = _tup3(_symmetrize3(rng.uniform(-2.0, 2.0, size=(m, m, m))))
        bt_raw = rng.uniform(-2.0, 2.0, size=(m, m))
        bt = _tup2((bt_raw + bt_raw.T) / 2.0)
        b11_raw = rng.uniform(-2.0, 2.0, size=(m, m))
        b11_ij = _tup2((b11_raw + b11_raw.T) / 2.0)
        b11_it = tuple(float(x) for x in rng.uniform(-2.0, 2.0, size=m))
    return make_jet(n, float(p), mode, float(alpha), float(beta),
                     h_t, h_ti, b_diag, d3, bt, b11_ij, b11_it)


def zero_tensor_jet(jet) -> Jet | SimpleNamespace:
    """Same jet with every third/fourth-order tensor replaced by zero."""
    m = jet.n - 1
    zero = jet.h_t * 0.0  # keeps the numeric type (float or DD)
    d3 = tuple(tuple(tuple(zero for _ in range(m)) for _ in range(m)) for _ in range(m))
    mat = tuple(tuple(zero for _ in range(m)) for _ in range(m))
    vec = tuple(zero for _ in range(m))
    return _rebuild(jet, d3_b=d3, bt=mat, b11_ij=mat, b11_it=vec)


def enforce_first_order_condition(jet) -> Jet | SimpleNamespace:
    """Override b_11,j so the tangential gradient of phi vanishes.

    Sets b_11,j = -alpha h_t^{-1} h_tj b_11 for every direction j (including
    j = 0) and recomputes the derived fields.  Idempotent.  The zero gradient
    is a defining constraint of the returned jet: theta_gradient honors it
    exactly, the stored field being its closest float representation.
    """
    m = jet.n - 1
    d3 = [list(list(row) for row in mat) for mat in jet.d3_b]
    b11 = jet.b_diag[0]
    for j in range(m):
        g = jet.alpha * (jet.h_ti[j] / jet.h_t)
        v = -(g * b11)
        for idx in {(0, 0, j), (0, j, 0), (j, 0, 0)}:
            d3[idx[0]][idx[1]][idx[2]] = v
    d3 = tuple(tuple(tuple(row) for row in mat) for mat in d3)
    return _rebuild(jet, d3_b=d3, enforced=True)


def _rebuild(jet, d3_b=None, bt=None, b11_ij=None, b11_it=None, enforced=None):
    """Re-derive a jet after replacing free fields; works on Jet and namespaces."""
    fields = dict(
        n=jet.n, lam=jet.lam, c_const=jet.c_const, h_t=jet.h_t,
        h_ti=jet.h_ti, b_diag=jet.b_diag,
        d3_b=jet.d3_b if d3_b is None else d3_b,
        bt=jet.bt if bt is None else bt,
        b11_ij=jet.b11_ij if b11_ij is None else b11_ij,
        b11_it=jet.b11_it if b11_it is None else b11_it,
    )
    flag = jet.first_order_enforced if enforced is None else enforced
    if isinstance(jet, Jet) and isinstance(fields["h_t"], float):
        return make_jet(jet.n, jet.p, jet.mode, jet.alpha, jet.beta,
                         fields["h_t"], fields["h_ti"], fields["b_diag"],
                         fields["d3_b"], fields["bt"], fields["b11_ij"],
                         fields["b11_it"], enforced=flag,
                         lam=jet.lam, c_const=jet.c_const)
    ns = SimpleNamespace(**fields)
    ns.p, ns.mode, ns.alpha, ns.beta = jet.p, jet.mode, jet.alpha, jet.beta
    ns.first_order_enforced = flag
    _derive(ns)
    return ns


def dd_jet(jet) -> SimpleNamespace:
    """The same jet with every free field lifted to double-double precision."""
    m = jet.n - 1
    ns = SimpleNamespace(
        n=jet.n, p=jet.p, mode=jet.mode, alpha=jet.alpha, beta=jet.beta,
        lam=jet.lam, c_const=jet.c_const,
        h_t=DD(jet.h_t),
        h_ti=tuple(DD(x) for x in jet.h_ti),
        b_diag=tuple(DD(x) for x in jet.b_diag),
        d3_b=tuple(tuple(tuple(DD(x) for x in row) for row in mat) for mat in jet.d3_b),
        bt=tuple(tuple(DD(x) for x in row) for row in jet.bt),
        b11_ij=tuple(tuple(DD(x) for x in row) for row in jet.b11_ij),
        b11_it=tuple(DD(x) for x in jet.b11_it),
        first_order_enforced=jet.first_order_enforced,
    )
    _derive(ns)
    return ns


# ---------------------------------------------------------------------------
# shared evaluation helpers
# ---------------------------------------------------------------------------

def _ctx(jet):
    """Common subexpressions used by every evaluator."""
    m = jet.n - 1
    binv = tuple(1.0 / jet.b_diag[i] for i in range(m))
    cu = jet.c_const + jet.lam * jet.h_t * jet.h_t
    sigma1 = _fsum(binv)
    sh = _fsum(jet.h_ti[i] * jet.h_ti[i] * binv[i] for i in range(m))
    shb2 = _fsum((jet.h_ti[i] * binv[i]) ** 2 for i in range(m))
    sb2 = _fsum(binv[i] ** 2 for i in range(m))
    return m, binv, cu, sigma1, sh, shb2, sb2


def _a_coef(jet, cu, i, j):
    out = jet.h_ti[i] * jet.h_ti[j]
    if i == j:
        out = out + cu
    return out


def theta_gradient(jet) -> tuple:
    """phi_j = alpha h_t^{-1} h_tj + b^{11} b_11,j.

    On first-order-enforced jets the gradient is zero by construction and is
    returned as exact zeros (the constraint, not its float shadow).
    """
    m = jet.n - 1
    if getattr(jet, "first_order_enforced", False):
        return (0.0,) * m
    return tuple(
        jet.alpha * (jet.h_ti[j] / jet.h_t) + jet.d3_b[0][0][j] / jet.b_diag[0]
        for j in range(m)
    )


def phi_t(jet):
    return jet.alpha * (jet.h_tt / jet.h_t) + jet.bt[0][0] / jet.b_diag[0]


# ---------------------------------------------------------------------------
# direct evaluations (chain rule at the point, diagonal frame)
# ---------------------------------------------------------------------------

def lphi_direct(jet) -> tuple:
    """L(phi) from the second derivatives of phi assembled by the chain rule."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a = jet.alpha
    ht = jet.h_t
    b0 = binv[0]

    def phi_ij(i, j):
        return (
            -a * (jet.h_ti[i] * jet.h_ti[j]) / (ht * ht)
            + a * jet.h_tij[i][j] / ht
            - b0 * b0 * jet.d3_b[0][0][i] * jet.d3_b[0][0][j]
            + b0 * jet.b11_ij[i][j]
        )

    def phi_it(i):
        return (
            -a * jet.h_ti[i] * jet.h_tt / (ht * ht)
            + a * jet.h_tti[i] / ht
            - b0 * b0 * jet.d3_b[0][0][i] * jet.bt[0][0]
            + b0 * jet.b11_it[i]
        )

    phi_tt = (
        -a * jet.h_tt * jet.h_tt / (ht * ht)
        + a * jet.h_ttt / ht
        - (b0 * jet.bt[0][0]) ** 2
        + b0 * jet.b11_tt
    )
    terms = [
        _a_coef(jet, cu, i, j) * binv[i] * binv[j] * phi_ij(i, j)
        for i in range(m) for j in range(m)
    ]
    terms += [-2.0 * jet.h_ti[i] * binv[i] * phi_it(i) for i in range(m)]
    terms.append(phi_tt)
    return _ssum(terms)


def i12_direct(jet) -> tuple:
    """The two alpha-weighted brackets of L(phi), evaluated as defined."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, ht = jet.alpha, jet.h_t
    quad = _fsum(
        _a_coef(jet, cu, i, j) * binv[i] * binv[j] * jet.h_ti[i] * jet.h_ti[j]
        for i in range(m) for j in range(m)
    )
    i1 = -a / (ht * ht) * (quad - 2.0 * sh * jet.h_tt + jet.h_tt * jet.h_tt)
    third = _fsum(
        _a_coef(jet, cu, i, j) * binv[i] * binv[j] * jet.h_tij[j][i]
        for i in range(m) for j in range(m)
    )
    i2 = a / ht * (third - 2.0 * _fsum(jet.h_ti[i] * binv[i] * jet.h_tti[i] for i in range(m)) + jet.h_ttt)
    return _ssum([i1, i2])


def i12_closed(jet) -> tuple:
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, ht, lam = jet.alpha, jet.h_t, jet.lam
    return _ssum([
        -a * (1.0 + cu / (ht * ht)) * shb2,
        -a * cu * sb2,
        a * cu * (2.0 * lam - cu / (ht * ht)) * sigma1 ** 2,
        2.0 * lam * a * sigma1 * sh,
    ])


def lb11_direct(jet) -> tuple:
    """The elliptic operator applied to b_11 via its stored second derivatives."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    terms = [
        _a_coef(jet, cu, i, j) * binv[i] * binv[j] * jet.b11_ij[i][j]
        for i in range(m) for j in range(m)
    ]
    terms += [-2.0 * jet.h_ti[i] * binv[i] * jet.b11_it[i] for i in range(m)]
    terms.append(jet.b11_tt)
    return _ssum(terms)


def lb11_closed(jet) -> tuple:
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    ht, lam = jet.h_t, jet.lam
    hti = jet.h_ti
    d3, bt = jet.d3_b, jet.bt
    return _ssum([
        2.0 * _fsum(binv[k] * bt[0][k] ** 2 for k in range(m)),
        2.0 * lam * ht * sigma1 * bt[0][0],
        -4.0 * ht * binv[0] * bt[0][0],
        2.0 * ht * ht * binv[0],
        -2.0 * lam * ht * ht * sigma1,
        (2.0 * lam * sigma1 - 2.0 * binv[0]) * hti[0] ** 2,
        -4.0 * lam * ht * hti[0] * _fsum(binv[k] ** 2 * d3[k][k][0] for k in range(m)),
        -4.0 * _fsum(
            hti[kk] * binv[k] * binv[kk] * d3[k][kk][0] * bt[0][k]
            for k in range(m) for kk in range(m)
        ),
        4.0 * ht * binv[0] * _fsum(hti[k] * binv[k] * d3[0][0][k] for k in range(m)),
        2.0 * _fsum(
            _a_coef(jet, cu, i, j) * binv[i] * binv[j] * binv[k] * d3[i][k][0] * d3[j][k][0]
            for i in range(m) for j in range(m) for k in range(m)
        ),
        cu * jet.b_diag[0] * sb2,
        jet.b_diag[0] * shb2,
    ])


def q_part_general(jet) -> tuple:
    """The polynomial part of the regrouped L(phi), by zeroing every tensor."""
    return lphi_direct(zero_tensor_jet(jet))


def q_part_printed(jet) -> tuple:
    """The polynomial part of the regrouped L(phi), transcribed per mode."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, ht = jet.alpha, jet.h_t
    b0 = binv[0]
    s2 = _fsum(binv[i] for i in range(1, m))
    s2sq = _fsum(binv[i] ** 2 for i in range(1, m))
    if jet.mode == "pLaplace":
        p = jet.p
        q1 = (
            (a / (p - 1.0) ** 2 + (2.0 * p - 3.0 - a) / (p - 1.0)) * b0 ** 2
            + (2.0 * a / (p - 1.0) ** 2 - 2.0 / (p - 1.0)) * b0 * s2
            + (1.0 - a) / (p - 1.0) * s2sq
            + a / (p - 1.0) ** 2 * s2 ** 2
        )
        q2 = ((2.0 - p) * a + 3.0 - p) / (p - 1.0) * b0 ** 2 + 2.0 * (1.0 + a) / (p - 1.0) * b0 * s2
        terms = [q1 * ht ** 2, q2 * jet.h_ti[0] ** 2]
        terms += [
            (2.0 * a / (p - 1.0) * sigma1 * binv[i] + (p - 1.0 - p * a) / (p - 1.0) * binv[i] ** 2)
            * jet.h_ti[i] ** 2
            for i in range(1, m)
        ]
        return _ssum(terms)
    q1 = b0 ** 2 - 2.0 * (1.0 - a) * b0 * s2 + (1.0 - a) * s2sq + a * s2 ** 2
    q2 = b0 ** 2 + 2.0 * (1.0 + a) * b0 * s2
    terms = [q1 * ht ** 2, q2 * jet.h_ti[0] ** 2]
    terms += [
        (2.0 * a * sigma1 * binv[i] + (1.0 - 2.0 * a) * binv[i] ** 2) * jet.h_ti[i] ** 2
        for i in range(1, m)
    ]
    terms += [-a / (ht * ht) * shb2, -a / (ht * ht) * sigma1 ** 2, (1.0 - a) * sb2]
    return _ssum(terms)


def lphi_regrouped(jet) -> tuple:
    """The regrouped right-hand side: two squared brackets, the mixed
    derivative terms, and the printed polynomial part."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    ht, lam = jet.h_t, jet.lam
    hti, d3, bt = jet.h_ti, jet.d3_b, jet.bt
    b0 = binv[0]

    def bracket(l):
        return (
            _fsum(
                _a_coef(jet, cu, i, j) * binv[i] * binv[j] * d3[0][l][i] * d3[0][l][j]
                for i in range(m) for j in range(m)
            )
            - 2.0 * _fsum(hti[i] * binv[i] * d3[0][l][i] * bt[0][l] for i in range(m))
            + bt[0][l] ** 2
        )

    qv, qs = q_part_printed(jet)
    terms = [
        b0 ** 2 * bracket(0),
        2.0 * b0 * _fsum(binv[l] * bracket(l) for l in range(1, m)),
        2.0 * lam * ht * sigma1 * b0 * bt[0][0],
        -4.0 * ht * b0 ** 2 * bt[0][0],
        -4.0 * lam * ht * hti[0] * b0 * _fsum(binv[i] ** 2 * d3[i][i][0] for i in range(m)),
        4.0 * ht * b0 ** 2 * _fsum(hti[i] * binv[i] * d3[0][0][i] for i in range(m)),
        qv,
    ]
    val, sc = _ssum(terms)
    return val, sc - abs(float(qv)) + qs


# ---------------------------------------------------------------------------
# step-2 decomposition
# ---------------------------------------------------------------------------

def step2_direct(jet) -> tuple:
    lv, ls = lphi_direct(jet)
    pt = phi_t(jet)
    extra = jet.beta * pt * pt
    return lv + extra, ls + abs(float(extra))


def p1_term(jet) -> tuple:
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    hti, d3, bt = jet.h_ti, jet.d3_b, jet.bt
    terms = [
        2.0 * binv[0] * binv[l] * (
            _fsum(
                hti[i] * hti[j] * binv[i] * binv[j] * d3[0][l][i] * d3[0][l][j]
                for i in range(m) for j in range(m)
            )
            - 2.0 * _fsum(hti[i] * binv[i] * d3[0][l][i] * bt[0][l] for i in range(m))
            + bt[0][l] ** 2
        )
        for l in range(1, m)
    ]
    return _ssum(terms)


def _p2_bracket_def(jet):
    """Coefficient of -2 b^11 b_11,t in P2, before the first-order substitution."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, b_, ht, lam = jet.alpha, jet.beta, jet.h_t, jet.lam
    return (
        _fsum(jet.h_ti[i] * binv[i] * binv[0] * jet.d3_b[0][0][i] for i in range(m))
        - lam * (1.0 + b_ * a) * ht * sigma1
        + 2.0 * ht * binv[0]
        - b_ * a * sh / ht
        - b_ * a * jet.c_const * sigma1 / ht
    )


def _p2_bracket_critical(jet):
    """The same bracket with the first-order condition substituted."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, b_, ht, lam = jet.alpha, jet.beta, jet.h_t, jet.lam
    return (
        -a * (1.0 + b_) * sh / ht
        - lam * (1.0 + b_ * a) * ht * sigma1
        + 2.0 * ht * binv[0]
        - b_ * a * jet.c_const * sigma1 / ht
    )


def p2_term(jet) -> tuple:
    x = jet.bt[0][0] / jet.b_diag[0]
    bracket = _p2_bracket_def(jet)
    return _ssum([(1.0 + jet.beta) * x * x, -2.0 * bracket * x])


def p2_bound(jet) -> tuple:
    aa = _p2_bracket_critical(jet)
    val = -(aa * aa) / (1.0 + jet.beta)
    return val, abs(float(val))


def r2_remainder(jet) -> tuple:
    m = jet.n - 1
    binv = tuple(1.0 / jet.b_diag[i] for i in range(m))
    grad = theta_gradient(jet)
    s_phi = _fsum(jet.h_ti[i] * binv[i] * grad[i] for i in range(m))
    aa = _p2_bracket_critical(jet)
    return _ssum([
        -(s_phi * s_phi) / (1.0 + jet.beta),
        -2.0 / (1.0 + jet.beta) * aa * s_phi,
    ])


def p3_term(jet) -> tuple:
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    ht, lam = jet.h_t, jet.lam
    hti, d3 = jet.h_ti, jet.d3_b
    b0 = binv[0]
    return _ssum([
        b0 ** 2 * _fsum(
            _a_coef(jet, cu, i, j) * binv[i] * binv[j] * d3[0][0][i] * d3[0][0][j]
            for i in range(m) for j in range(m)
        ),
        2.0 * cu * b0 * _fsum(
            binv[l] * binv[i] ** 2 * d3[0][l][i] ** 2 for l in range(1, m) for i in range(m)
        ),
        -4.0 * lam * ht * hti[0] * b0 * _fsum(binv[i] ** 2 * d3[i][i][0] for i in range(m)),
        4.0 * ht * b0 ** 2 * _fsum(hti[i] * binv[i] * d3[0][0][i] for i in range(m)),
    ])


def p30_rhs(jet) -> tuple:
    """P3 after the first-order substitution, remainder R3 kept explicit."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, ht, lam = jet.alpha, jet.h_t, jet.lam
    hti, d3 = jet.h_ti, jet.d3_b
    b0 = binv[0]
    r3v, r3s = r3_remainder(jet)
    val, sc = _ssum([
        a ** 2 * cu / (ht * ht) * shb2,
        a ** 2 / (ht * ht) * sh ** 2,
        2.0 * a ** 2 * cu / (ht * ht) * b0 * _fsum(hti[l] ** 2 * binv[l] for l in range(1, m)),
        2.0 * cu * b0 * _fsum(
            binv[l] * binv[i] ** 2 * d3[0][l][i] ** 2 for l in range(1, m) for i in range(1, m)
        ),
        4.0 * a * lam * hti[0] ** 2 * b0 ** 2,
        -4.0 * lam * ht * hti[0] * b0 * _fsum(binv[i] ** 2 * d3[i][i][0] for i in range(1, m)),
        -4.0 * a * b0 * sh,
        r3v,
    ])
    return val, sc - abs(float(r3v)) + r3s


def r3_remainder(jet) -> tuple:
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, ht, lam = jet.alpha, jet.h_t, jet.lam
    hti = jet.h_ti
    b0 = binv[0]
    grad = theta_gradient(jet)
    return _ssum([
        _fsum(
            _a_coef(jet, cu, i, j) * binv[i] * binv[j]
            * (grad[i] * grad[j] - 2.0 * a / ht * hti[j] * grad[i])
            for i in range(m) for j in range(m)
        ),
        2.0 * cu * b0 * _fsum(
            binv[l] * (grad[l] ** 2 - 2.0 * a / ht * hti[l] * grad[l]) for l in range(1, m)
        ),
        -4.0 * lam * ht * hti[0] * b0 ** 2 * grad[0],
        4.0 * ht * b0 * _fsum(hti[i] * binv[i] * grad[i] for i in range(m)),
    ])


def p31_lhs(jet) -> tuple:
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    ht, lam = jet.h_t, jet.lam
    b0 = binv[0]
    d3 = jet.d3_b
    return _ssum([
        2.0 * cu * b0 * _fsum(
            binv[l] * binv[i] ** 2 * d3[0][l][i] ** 2 for l in range(1, m) for i in range(1, m)
        ),
        -4.0 * lam * ht * jet.h_ti[0] * b0 * _fsum(binv[i] ** 2 * d3[i][i][0] for i in range(1, m)),
    ])


def p31_bound(jet) -> tuple:
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    val = -2.0 * jet.lam * jet.h_ti[0] ** 2 * binv[0] * _fsum(binv[i] for i in range(1, m))
    return val, abs(float(val))


def p33_nonphi(jet) -> tuple:
    """P3 lower bound after the diagonal-square step, remainder dropped."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, ht, lam = jet.alpha, jet.h_t, jet.lam
    b0 = binv[0]
    return _ssum([
        a ** 2 * cu / (ht * ht) * shb2,
        a ** 2 / (ht * ht) * sh ** 2,
        2.0 * a ** 2 * cu / (ht * ht) * b0 * _fsum(jet.h_ti[l] ** 2 * binv[l] for l in range(1, m)),
        -2.0 * lam * jet.h_ti[0] ** 2 * b0 * _fsum(binv[i] for i in range(1, m)),
        4.0 * a * lam * jet.h_ti[0] ** 2 * b0 ** 2,
        -4.0 * a * b0 * sh,
    ])


def p4_term(jet) -> tuple:
    qv, qs = q_part_general(jet)
    extra = jet.beta * jet.alpha ** 2 * (jet.h_tt / jet.h_t) ** 2
    return qv + extra, qs + abs(float(extra))


def degenerate_rhs(jet) -> tuple:
    """Assembled lower bound for L(phi) + beta phi_t^2 on critical jets."""
    v1, s1 = p2_bound(jet)
    v2, s2 = p33_nonphi(jet)
    v3, s3 = p4_term(jet)
    return v1 + v2 + v3, s1 + s2 + s3


def degenerate_display(jet) -> tuple:
    """The printed coefficient display of the same bound, transcribed per mode."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    a, b_, ht = jet.alpha, jet.beta, jet.h_t
    b0 = binv[0]
    s2 = _fsum(binv[i] for i in range(1, m))
    s2sq = _fsum(binv[i] ** 2 for i in range(1, m))
    if jet.mode == "pLaplace":
        p = jet.p
        d1 = (p - 1.0) ** 2 * (1.0 + b_)
        d2 = (p - 1.0) * (1.0 + b_)
        c_sq = (b_ * a ** 2 - b_ * a + a - 1.0) / d1
        terms = [
            ht ** 2 * (
                (c_sq + (3.0 * b_ * a - a + (2.0 * p - 3.0) * b_ - 2.0 * p + 5.0) / d2) * b0 ** 2
                + ((2.0 * b_ * a ** 2 - 2.0 * b_ * a + 2.0 * a - 2.0) / d1
                   + (4.0 * b_ * a - 2.0 * b_ + 2.0) / d2) * b0 * s2
                + c_sq * s2 ** 2
                + (1.0 - a) / (p - 1.0) * s2sq
            ),
            (a ** 2 + (4.0 - p) * a + 3.0 - p) / (p - 1.0) * (jet.h_ti[0] * b0) ** 2,
        ]
        terms += [
            jet.h_ti[i] ** 2 * (
                2.0 * a ** 2 / (p - 1.0) * b0 * binv[i]
                + (a ** 2 - p * a + p - 1.0) / (p - 1.0) * binv[i] ** 2
            )
            for i in range(1, m)
        ]
        return _ssum(terms)
    q_big = (
        ht ** 2 * (
            b_ * (1.0 + a) ** 2 / (1.0 + b_) * b0 ** 2
            + (2.0 * b_ * a ** 2 + 2.0 * b_ * a + 2.0 * a - 2.0 * b_) / (1.0 + b_) * b0 * s2
            + (1.0 - a) * s2sq
            + (1.0 + b_ * a) * (a - 1.0) / (1.0 + b_) * s2 ** 2
        )
        + (1.0 + a) ** 2 * (jet.h_ti[0] * b0) ** 2
    )
    terms = [q_big]
    terms += [
        jet.h_ti[i] ** 2 * (2.0 * a ** 2 * b0 * binv[i] + (1.0 - a) ** 2 * binv[i] ** 2)
        for i in range(1, m)
    ]
    terms += [
        a * (a - 1.0) / (ht * ht) * shb2,
        2.0 * a ** 2 / (ht * ht) * b0 * _fsum(jet.h_ti[i] ** 2 * binv[i] for i in range(1, m)),
        a * (b_ * a - b_ - 1.0) / (1.0 + b_) / (ht * ht) * sigma1 ** 2,
        2.0 * b_ * a * (a - 1.0) / (1.0 + b_) * sigma1 ** 2,
        (1.0 - a) * sb2,
        4.0 * b_ * a / (1.0 + b_) * sigma1 * b0,
    ]
    return _ssum(terms)


def final_closed_form(jet) -> tuple:
    """The fully reduced bound at (alpha, beta) = (-1, 1)."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    ht = jet.h_t
    b0 = binv[0]
    if jet.mode == "pLaplace":
        p = jet.p
        terms = [
            2.0 / (p - 1.0) * ht ** 2 * _fsum(binv[i] * (binv[i] - b0) for i in range(1, m)),
            2.0 / (p - 1.0) * _fsum(
                jet.h_ti[i] ** 2 * binv[i] * (b0 + p * binv[i]) for i in range(1, m)
            ),
        ]
        return _ssum(terms)
    terms = [
        2.0 * (1.0 + ht ** 2) * _fsum(binv[i] * (binv[i] - b0) for i in range(1, m)),
        2.0 * _fsum(jet.h_ti[i] ** 2 * binv[i] * (b0 + 2.0 * binv[i]) for i in range(1, m)),
        2.0 / (ht * ht) * shb2,
        2.0 / (ht * ht) * b0 * _fsum(jet.h_ti[i] ** 2 * binv[i] for i in range(1, m)),
        1.5 / (ht * ht) * sigma1 ** 2,
        2.0 * sigma1 ** 2,
    ]
    return _ssum(terms)


def case_ii_closed_form(jet) -> tuple:
    """The reduced bound at alpha = beta = 0 for n = 3."""
    m, binv, cu, sigma1, sh, shb2, sb2 = _ctx(jet)
    terms = [(jet.h_ti[0] * binv[0]) ** 2, (jet.h_ti[1] * binv[1]) ** 2]
    if jet.mode == "minimal":
        terms += [binv[0] ** 2, binv[1] ** 2]
    return _ssum(terms)


def eval_L_phi_direct(jet) -> float:
    """Chain-rule evaluation of L(phi) on a jet."""
    return float(lphi_direct(jet)[0])


def eval_L_phi_paper(jet) -> float:
    """Regrouped-display evaluation of L(phi) on a jet."""
    return float(lphi_regrouped(jet)[0])


# ---------------------------------------------------------------------------
# the chain report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepResult:
    name: str
    kind: str  # "identity" | "inequality"
    value: float  # relative error, or slack
    scale: float
    passed: bool
    used_dd: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "value": self.value,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ChainReport:
    mode: str
    n: int
    p: float
    alpha: float
    beta: float
    seed: object
    steps: tuple

    @property
    def all_pass(self) -> bool:
        return all(s.passed for s in self.steps)

    def worst_identity(self) -> float:
        vals = [s.value for s in self.steps if s.kind == "identity"]
        return max(vals) if vals else 0.0

    def worst_slack(self) -> float:
        vals = [s.value / max(s.scale, 1.0) for s in self.steps if s.kind == "inequality"]
        return min(vals) if vals else 0.0

    def step(self, name: str) -> StepResult:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "p": self.p,
            "alpha": self.alpha,
            "beta": self.beta,
            "seed": self.seed,
            "pass": self.all_pass,
            "steps": [s.to_dict() for s in self.steps],
        }


def _identity(name, pair_fn, jet, tol) -> StepResult:
    (av, asc), (bv, bsc) = pair_fn(jet)
    scale = max(asc, bsc)
    if scale == 0.0:
        scale = 1.0
    rel = abs(float(av) - float(bv)) / scale
    used_dd = False
    if GRAY_LO <= rel <= GRAY_HI:
        dj = dd_jet(jet)
        (av, asc), (bv, bsc) = pair_fn(dj)
        scale = max(asc, bsc) or 1.0
        rel = abs(float(av - bv)) / scale
        used_dd = True
    return StepResult(name, "identity", rel, scale, rel < tol, used_dd)


def _identity_pair(name, fn_a, fn_b, jet, tol, variant=None) -> StepResult:
    def pair(j):
        jj = variant(j) if variant is not None else j
        return fn_a(jj), fn_b(jj)

    return _identity(name, pair, jet, tol)


def _inequality(name, slack_fn, jet, tol) -> StepResult:
    val, sc = slack_fn(jet)
    sc = max(sc, 1.0)
    slack = float(val)
    used_dd = False
    if -GRAY_HI * sc <= slack < -GRAY_LO * sc:
        dj = dd_jet(jet)
        val2, sc2 = slack_fn(dj)
        slack, sc = float(val2), max(sc2, 1.0)
        used_dd = True
    return StepResult(name, "inequality", slack, sc, slack >= -tol * sc, used_dd)


def check_chain(jet: Jet, tol_identity: float = TOL_IDENTITY,
                tol_exact: float = TOL_EXACT) -> ChainReport:
    """Run every identity and inequality step of the jet's mode on one jet.

    Identity steps run on the jet as given; inequality steps run on the jet
    with the first-order condition enforced.  Steps that only exist at the
    canonical parameter pairs are included when (alpha, beta) match.
    """
    if jet.beta <= -1.0:
        raise ValueError("the completed square in step 2 needs beta > -1")
    steps: list[StepResult] = []
    crit = jet if jet.first_order_enforced else enforce_first_order_condition(jet)

    steps.append(_identity_pair("lphi_regroup", lphi_direct, lphi_regrouped, jet, tol_identity))
    steps.append(_identity_pair("i12_regroup", i12_direct, i12_closed, jet, tol_identity))
    steps.append(_identity_pair("lb11_regroup", lb11_direct, lb11_closed, jet, tol_identity))
    steps.append(
        _identity_pair("q_zero_tensor", lphi_direct, q_part_printed, jet, tol_identity,
                       variant=zero_tensor_jet)
    )

    def step2_rhs(j):
        vals = [p1_term(j), p2_term(j), p3_term(j), p4_term(j)]
        return _fsum(v for v, _ in vals), sum(s for _, s in vals)

    steps.append(_identity_pair("step2_split", step2_direct, step2_rhs, jet, tol_identity))
    steps.append(_identity_pair("p3_first_order", p3_term, p30_rhs, jet, tol_identity))
    steps.append(
        _identity_pair("degenerate_regroup", degenerate_rhs, degenerate_display, jet, tol_identity)
    )

    steps.append(_inequality("p1_nonneg", p1_term, crit, tol_identity))

    def p2_slack(j):
        v, s = p2_term(j)
        bv, bs = p2_bound(j)
        return v - bv, s + bs

    steps.append(_inequality("p2_bound", p2_slack, crit, tol_identity))

    def p31_slack(j):
        v, s = p31_lhs(j)
        bv, bs = p31_bound(j)
        return v - bv, s + bs

    steps.append(_inequality("p31_bound", p31_slack, crit, tol_identity))

    def degenerate_slack(j):
        v, s = step2_direct(j)
        bv, bs = degenerate_rhs(j)
        return v - bv, s + bs

    steps.append(_inequality("degenerate_bound", degenerate_slack, crit, tol_identity))

    for name, fn in (("r2_vanishes", r2_remainder), ("r3_vanishes", r3_remainder)):
        val, sc = fn(crit)
        resid = abs(float(val))
        steps.append(StepResult(name, "identity", resid / max(sc, 1.0), max(sc, 1.0),
                                resid <= tol_exact * max(sc, 1.0)))

    if jet.alpha == -1.0 and jet.beta == 1.0:
        steps.append(
            _identity_pair("final_identity", degenerate_rhs, final_closed_form, crit, tol_exact)
        )
        steps.append(_inequality("final_nonneg", final_closed_form, crit, tol_identity))
        if jet.n == 2 and jet.mode == "pLaplace":
            val, sc = degenerate_rhs(crit)
            resid = abs(float(val))
            steps.append(StepResult("final_vanishes_2d", "identity", resid / max(sc, 1.0),
                                    max(sc, 1.0), resid <= tol_exact * max(sc, 1.0)))
    if (jet.alpha == 0.0 and jet.beta == 0.0 and jet.n == 3
            and (jet.mode == "minimal" or jet.p == 2.0)):
        steps.append(
            _identity_pair("case_ii_identity", degenerate_rhs, case_ii_closed_form, crit, tol_exact)
        )
        steps.append(_inequality("case_ii_nonneg", case_ii_closed_form, crit, tol_identity))

    return ChainReport(mode=jet.mode, n=jet.n, p=jet.p, alpha=jet.alpha, beta=jet.beta,
                       seed=None, steps=tuple(steps))


def jet_with_coefficients(jet: Jet, lam: float, c_const: float) -> Jet:
    """Rebuild a jet with overridden equation coefficients (cross-wiring tests)."""
    return make_jet(jet.n, jet.p, jet.mode, jet.alpha, jet.beta, jet.h_t, jet.h_ti,
                     jet.b_diag, jet.d3_b, jet.bt, jet.b11_ij, jet.b11_it,
                     enforced=jet.first_order_enforced, lam=lam, c_const=c_const)


def run_chain_batch(mode: str, n: int, p: float, alpha: float, beta: float,
                    count: int, seed: int, tol_identity: float = TOL_IDENTITY) -> list[ChainReport]:
    """check_chain over `count` jets with per-jet seeds derived from `seed`."""
    reports = []
    for i in range(count):
        jet = sample_jet(n, p, mode, alpha, beta, seed=(seed, i))
        rep = check_chain(jet, tol_identity=tol_identity)
        reports.append(replace(rep, seed=[int(seed), i]))
    return reports
