"""Adaptive Gauss-Kronrod quadrature with endpoint-singular and semi-infinite variants.

Integrands are called with a 1-D array of abscissae and must return an
array whose leading axis matches it.  Trailing axes are allowed: the
integral is then computed component-wise on a shared panel partition,
which is how the nested rate integrals evaluate many thresholds at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, QuadratureError

# Gauss-Kronrod 10/21 rule on [-1, 1] (QUADPACK qk21 constants).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208005965600,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
# Gauss nodes are the odd-indexed Kronrod abscissae on each side.
GAUSS_WEIGHTS[[1, 3, 5, 7, 9]] = _WG
GAUSS_WEIGHTS[[19, 17, 15, 13, 11]] = _WG

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances shared by every quadrature routine.

    A result is accepted when its error estimate is at most
    ``max(abs_tol, rel_tol * |value|)``.  ``tail_epsilon`` controls where
    semi-infinite integrals are truncated, relative to the partial sum.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_epsilon: float = 1e-9

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError(
                f"max_subdivisions must be a positive integer, got {self.max_subdivisions}")
        if not self.tail_epsilon > 0:
            raise DomainError(f"tail_epsilon must be positive, got {self.tail_epsilon}")


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float | np.ndarray
    error: float | np.ndarray


def _gk21(f: Callable, lo: np.ndarray, hi: np.ndarray):
    """Apply the 21-point rule to each panel [lo[i], hi[i]]."""
    half = 0.5 * (hi - lo)
    centre = 0.5 * (hi + lo)
    x = centre[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float)
    fx = fx.reshape(x.shape + fx.shape[1:])
    if not np.all(np.isfinite(fx)):
        raise QuadratureError("integrand returned a non-finite value")
    hshape = (-1,) + (1,) * (fx.ndim - 2)
    h = half.reshape(hshape)
    resk = np.einsum("pn...,n->p...", fx, KRONROD_WEIGHTS)
    resg = np.einsum("pn...,n->p...", fx, GAUSS_WEIGHTS)
    mean = 0.5 * resk
    resasc = np.einsum("pn...,n->p...", np.abs(fx - mean[:, None]), KRONROD_WEIGHTS)
    resabs = np.einsum("pn...,n->p...", np.abs(fx), KRONROD_WEIGHTS)
    err = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.where(resabs > _UFLOW / (50 * _EPMACH), np.maximum(50 * _EPMACH * resabs, err), err)
    habs = np.abs(h)
    return resk * h, err * habs


def _refine(f, lo, hi, est, err, spec: QuadratureSpec) -> QuadResult:
    """Bisect the worst panels until the summed error meets the tolerance."""
    while True:
        total = est.sum(axis=0)
        total_err = err.sum(axis=0)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            return QuadResult(total, total_err)
        n = lo.size
        if n >= spec.max_subdivisions:
            raise QuadratureError(
                f"no convergence after {n} subdivisions "
                f"(error {np.max(total_err):.3g})", total, total_err)
        score = (err / tol).reshape(n, -1).max(axis=1)
        order = np.argsort(-score, kind="stable")
        remaining = score.sum() - np.cumsum(score[order])
        n_split = int(np.searchsorted(-remaining, -0.5)) + 1
        n_split = min(n_split, spec.max_subdivisions - n, n)
        pick = order[:n_split]
        mid = 0.5 * (lo[pick] + hi[pick])
        if np.any((mid <= lo[pick]) | (mid >= hi[pick])):
            raise QuadratureError("panel width reached machine resolution", total, total_err)
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        new_est, new_err = _gk21(f, new_lo, new_hi)
        keep = np.ones(n, dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        est = np.concatenate([est[keep], new_est])
        err = np.concatenate([err[keep], new_err])


def _as_scalar(res: QuadResult) -> QuadResult:
    v, e = res
    if np.ndim(v) == 0:
        return QuadResult(float(v), float(e))
    return res


def integrate_adaptive(f: Callable, a: float, b: float,
                       spec: QuadratureSpec = DEFAULT_SPEC,
                       points: Sequence[float] = ()) -> QuadResult:
    """Integrate ``f`` over [a, b] by global adaptive bisection.

    ``points`` are interior breakpoints (kinks, jumps) used as initial
    panel edges.  Raises :class:`QuadratureError` carrying the best
    estimate when ``spec.max_subdivisions`` panels do not suffice.
    """
    if not a <= b:
        raise DomainError(f"integration bounds must satisfy a <= b, got [{a}, {b}]")
    if a == b:
        probe = np.asarray(f(np.array([a])), dtype=float)
        zero = np.zeros(probe.shape[1:])
        return _as_scalar(QuadResult(zero, zero.copy()))
    edges = np.unique(np.clip(np.concatenate([[a], np.asarray(points, float), [b]]), a, b))
    lo, hi = edges[:-1], edges[1:]
    est, err = _gk21(f, lo, hi)
    return _as_scalar(_refine(f, lo, hi, est, err, spec))


def integrate_singular(f: Callable, a: float, b: float,
                       spec: QuadratureSpec = DEFAULT_SPEC,
                       offsets: bool = False) -> QuadResult:
    """Integrate ``f`` with inverse-square-root behaviour at either endpoint.

    Uses z = a + (b - a) sin^2(theta); the Jacobian (b - a) sin(2 theta)
    cancels (z - a)^(-1/2) and (b - z)^(-1/2) factors, leaving a smooth
    integrand on [0, pi/2].  With ``offsets`` the integrand is called as
    ``f(z, z - a, b - z)`` with both offsets computed without cancellation,
    which matters when singular factors are formed close to an endpoint.
    """
    if not a <= b:
        raise DomainError(f"integration bounds must satisfy a <= b, got [{a}, {b}]")
    width = b - a

    def g(theta):
        s = np.sin(theta)
        c = np.cos(theta)
        za = width * s * s
        z = a + za
        if offsets:
            fz = np.asarray(f(z, za, width * c * c), dtype=float)
        else:
            fz = np.asarray(f(z), dtype=float)
        jac = 2.0 * width * s * c
        return fz * jac.reshape((-1,) + (1,) * (fz.ndim - 1))

    return integrate_adaptive(g, 0.0, 0.5 * np.pi, spec)


def integrate_semi_infinite(f: Callable, a: float,
                            spec: QuadratureSpec = DEFAULT_SPEC,
                            scale: float = 1.0,
                            max_doublings: int = 80,
                            batch: int = 8) -> QuadResult:
    """Integrate ``f`` over [a, inf) for an eventually decreasing integrand.

    Panels [a, a+scale], [a+scale, a+2 scale], [a+2 scale, a+4 scale], ...
    are scanned until the geometric extrapolation of the remaining tail
    drops below ``tail_epsilon * |partial sum|`` (or ``abs_tol``).  The
    truncated range is then refined adaptively starting from the scanned
    partition.  The tail bound is added to the returned error.
    """
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    edges = [a, a + scale]
    lo_parts, hi_parts, est_parts, err_parts = [], [], [], []
    prev_abs = None
    partial = None
    k = 0
    while True:
        if k >= max_doublings:
            raise QuadratureError(
                f"tail bound not met below upper limit {edges[-1]:.6g}",
                None if partial is None else partial, None)
        while len(edges) < k + batch + 1:
            edges.append(a + scale * 2.0 ** (len(edges) - 1))
        lo = np.array(edges[k:k + batch])
        hi = np.array(edges[k + 1:k + batch + 1])
        est, err = _gk21(f, lo, hi)
        stop_at = None
        for j in range(lo.size):
            c = est[j]
            partial = c if partial is None else partial + c
            cur_abs = np.abs(c)
            if prev_abs is not None and k + j >= 2:
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = np.where(prev_abs > 0, cur_abs / prev_abs, np.where(cur_abs > 0, np.inf, 0.0))
                    bound = np.where(r < 1, cur_abs * r / (1 - r), np.inf)
                limit = np.maximum(spec.tail_epsilon * np.abs(partial), spec.abs_tol)
                if np.all(bound <= limit):
                    stop_at = j
                    tail = bound
                    break
            prev_abs = cur_abs
        if stop_at is None:
            lo_parts.append(lo); hi_parts.append(hi); est_parts.append(est); err_parts.append(err)
            k += lo.size
            continue
        n = stop_at + 1
        lo_parts.append(lo[:n]); hi_parts.append(hi[:n])
        est_parts.append(est[:n]); err_parts.append(err[:n])
        break
    res = _refine(f, np.concatenate(lo_parts), np.concatenate(hi_parts),
                  np.concatenate(est_parts), np.concatenate(err_parts), spec)
    return _as_scalar(QuadResult(res.value, res.error + tail))


def gauss_legendre_panels(a: float, b: float, n_panels: int, order: int,
                          singular_ends: bool = False):
    """Composite Gauss-Legendre nodes and weights on [a, b].

    With ``singular_ends`` the rule is built in theta after the sin^2
    substitution, so nodes cluster at both endpoints and the weights
    absorb the Jacobian.  Used where a fixed discrete measure is needed
    (tabulating a density once and reusing it across many integrals).
    """
    x, w = np.polynomial.legendre.leggauss(order)
    if singular_ends:
        lo_t, hi_t = 0.0, 0.5 * np.pi
    else:
        lo_t, hi_t = a, b
    edges = np.linspace(lo_t, hi_t, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    if not singular_ends:
        return t, wt
    s = np.sin(t)
    z = a + (b - a) * s * s
    return z, wt * (b - a) * np.sin(2.0 * t)
