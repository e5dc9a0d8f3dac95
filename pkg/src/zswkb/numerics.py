"""Shared numerical kernels.

Quadrature that tolerates square-root behaviour at the ends of the
interval, improper integrals over half-lines, bracketed root finding and
a few closed-form segment areas used by the Liouville map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

__all__ = [
    "QuadratureSpec",
    "QuadratureFailure",
    "DecayViolation",
    "NoBracket",
    "Algebraic",
    "Exponential",
    "adaptive_gauss",
    "integrate_sqrt_endpoints",
    "integrate_tail",
    "find_root_bracketed",
    "inner_segment",
    "outer_segment",
    "inverse_inner_segment",
    "inverse_outer_segment",
    "loglog_slope",
]


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class DecayViolation(ValueError):
    """The integrand is larger than its declared decay envelope."""


class NoBracket(ValueError):
    """The function has no sign change on the supplied interval."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_refinements: int = 40

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be at least 1")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class Algebraic:
    """Envelope |f(t)| <= const * t**(-p) for large t."""

    p: float
    const: float = 1.0

    def __call__(self, t):
        return self.const * np.abs(t) ** (-self.p)


@dataclass(frozen=True)
class Exponential:
    """Envelope |f(t)| <= const * exp(-rate * t) for large t."""

    rate: float
    const: float = 1.0

    def __call__(self, t):
        return self.const * np.exp(-self.rate * t)


Decay = Union[Algebraic, Exponential]

_GL_N = 20
_GL_X, _GL_W = leggauss(_GL_N)
_GL_X.setflags(write=False)
_GL_W.setflags(write=False)


def _panel_sums(fun, a, b):
    """Gauss-Legendre sums on panels [a, b] and on their two halves."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    q = 0.5 * half
    # whole panel, left half, right half in one call
    xs = np.concatenate([
        mid[:, None] + half[:, None] * _GL_X,
        (a + q)[:, None] + q[:, None] * _GL_X,
        (mid + q)[:, None] + q[:, None] * _GL_X,
    ], axis=1)
    vals = np.asarray(fun(xs.ravel()), dtype=float).reshape(xs.shape)
    n = _GL_N
    whole = half * (vals[:, :n] @ _GL_W)
    left = q * (vals[:, n:2 * n] @ _GL_W)
    right = q * (vals[:, 2 * n:] @ _GL_W)
    return whole, left, right


def adaptive_gauss(fun: Callable, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_SPEC,
                   breakpoints=None) -> tuple[float, float]:
    """Globally adaptive Gauss-Legendre quadrature of a vectorized integrand.

    Panels are refined level by level; a panel is accepted once its 20-point
    sum agrees with the sum over its two halves to a share of the tolerance
    proportional to its width.

    Returns:
        (integral, error estimate)
    """
    if hi == lo:
        return 0.0, 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    edges = [lo]
    if breakpoints is not None:
        edges += sorted(float(b) for b in breakpoints if lo < b < hi)
    edges.append(hi)
    a = np.array(edges[:-1], dtype=float)
    b = np.array(edges[1:], dtype=float)
    width = hi - lo
    done = 0.0
    done_err = 0.0
    for _ in range(spec.max_refinements):
        whole, left, right = _panel_sums(fun, a, b)
        refined = left + right
        err = np.abs(whole - refined)
        total = done + refined.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        ok = err <= tol * (b - a) / width
        if not np.all(np.isfinite(refined)):
            raise QuadratureFailure("non-finite integrand", float(total), math.inf)
        done += refined[ok].sum()
        done_err += err[ok].sum()
        if ok.all():
            return sign * done, done_err
        # global test: the unaccepted panels together are within tolerance
        if done_err + err[~ok].sum() <= 0.1 * tol:
            return sign * (done + refined[~ok].sum()), done_err + err[~ok].sum()
        a, b = a[~ok], b[~ok]
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    raise QuadratureFailure("adaptive quadrature did not converge",
                            float(sign * (done + refined[~ok].sum())), float(err[~ok].sum()))


def integrate_sqrt_endpoints(f: Callable, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_SPEC,
                             pass_distances: bool = False) -> float:
    """Integrate f over [lo, hi] when f behaves like a power of the distance to the ends.

    The substitution x = m + h sin(theta) turns square-root zeros (and
    inverse square-root poles) at either end into smooth behaviour, so the
    same kernel serves integrands singular at one or both endpoints.

    Args:
        f: vectorized integrand. With ``pass_distances`` it is called as
            ``f(x, x - lo, hi - x)`` where the distances are computed without
            cancellation.
    """
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate_sqrt_endpoints(f, hi, lo, spec, pass_distances)
    m = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)

    def g(theta):
        s = np.sin(theta)
        x = m + h * s
        if pass_distances:
            d_lo = 2.0 * h * np.sin(0.5 * (0.5 * np.pi + theta)) ** 2
            d_hi = 2.0 * h * np.sin(0.5 * (0.5 * np.pi - theta)) ** 2
            val = f(x, d_lo, d_hi)
        else:
            val = f(x)
        return val * h * np.cos(theta)

    val, _ = adaptive_gauss(g, -0.5 * np.pi, 0.5 * np.pi, spec)
    return val


def _truncation_point(lo: float, decay: Decay, abs_tol: float) -> float:
    if isinstance(decay, Algebraic):
        if decay.p <= 1:
            raise ValueError("algebraic decay needs p > 1 to be integrable")
        k = decay.const / (decay.p - 1.0)
        t = (k / abs_tol) ** (1.0 / (decay.p - 1.0))
        return max(min(t, 1e8), lo)
    if isinstance(decay, Exponential):
        t = math.log(max(decay.const / (decay.rate * abs_tol), 1.0)) / decay.rate
        return max(t, lo)
    raise TypeError(f"unknown decay envelope {decay!r}")


def integrate_tail(f: Callable, lo: float, decay: Decay, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integral of a vectorized f over [lo, inf).

    The range is truncated at the point T where the declared envelope bounds
    the remainder by ``spec.abs_tol``; [lo, T] is split into geometrically
    growing panels. For algebraic envelopes whose truncation point hits the
    1e8 cap, the remainder beyond T is integrated after the substitution
    t = u**(-1/(p-1)) instead of being dropped.

    Raises:
        DecayViolation: |f(T)| exceeds the envelope at T by more than 10x.
    """
    t_end = _truncation_point(lo, decay, spec.abs_tol)
    probe = abs(float(np.asarray(f(np.array([t_end])))[0]))
    env = float(decay(t_end))
    if probe > 10.0 * env:
        raise DecayViolation(f"|f({t_end:.6g})| = {probe:.3e} exceeds envelope {env:.3e}")
    edges = [lo]
    step = max(1.0, abs(lo) * 0.5)
    while edges[-1] < t_end:
        nxt = edges[-1] + step
        edges.append(min(nxt, t_end))
        step *= 2.0
    total, _ = adaptive_gauss(f, lo, t_end, spec, breakpoints=edges[1:-1])
    if isinstance(decay, Algebraic):
        q = decay.p - 1.0
        k = decay.const / q
        if k * t_end ** (-q) > spec.abs_tol:
            u_end = t_end ** (-q)
            m = 1.0 / q

            def h(u):
                u = np.maximum(u, 1e-300)
                t = u ** (-m)
                return np.asarray(f(t)) * m * u ** (-m - 1.0)

            rest, _ = adaptive_gauss(h, 0.0, u_end, spec)
            total += rest
    return total


def find_root_bracketed(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-13) -> float:
    """Root of a continuous scalar g with g(lo) * g(hi) <= 0 (Brent's method)."""
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise NoBracket(f"no sign change on [{lo!r}, {hi!r}]: g={glo!r}, {ghi!r}")
    x = brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return min(max(x, min(lo, hi)), max(lo, hi))


# Segment areas.  inner(v) = int_0^v sqrt(s(2-s)) ds, outer(u) = int_0^u sqrt(s(2+s)) ds.
# Power series near zero avoid the cancellation in the closed forms.

def _binom_half(k: int) -> float:
    return math.gamma(1.5) / (math.gamma(k + 1) * math.gamma(1.5 - k))


_SERIES_K = 30
_BINOM = np.array([_binom_half(k) for k in range(_SERIES_K)])
_EXPO = np.arange(_SERIES_K) + 1.5


def _segment_series(v, sgn):
    v = np.asarray(v, dtype=float)
    coef = _BINOM * (sgn * 0.5) ** np.arange(_SERIES_K) / _EXPO
    powers = v[..., None] ** np.arange(_SERIES_K)
    return math.sqrt(2.0) * v ** 1.5 * (powers @ coef)


def inner_segment(v):
    """int_0^v sqrt(s(2-s)) ds for 0 <= v <= 2."""
    v = np.clip(np.asarray(v, dtype=float), 0.0, 2.0)
    small = v < 0.25
    w = 1.0 - v
    closed = 0.5 * (np.arccos(np.clip(w, -1.0, 1.0)) - w * np.sqrt(np.maximum(v * (2.0 - v), 0.0)))
    out = np.where(small, _segment_series(np.where(small, v, 0.0), -1.0), closed)
    return out if out.ndim else float(out)


def outer_segment(u):
    """int_0^u sqrt(s(2+s)) ds for u >= 0."""
    u = np.maximum(np.asarray(u, dtype=float), 0.0)
    small = u < 0.25
    r = np.sqrt(u * (2.0 + u))
    closed = 0.5 * ((1.0 + u) * r - np.log1p(u + r))
    out = np.where(small, _segment_series(np.where(small, u, 0.0), 1.0), closed)
    return out if out.ndim else float(out)


def inverse_inner_segment(target):
    """Solve inner_segment(v) = target for v in [0, 2]; target in [0, pi/2]."""
    t = np.clip(np.asarray(target, dtype=float), 0.0, 0.5 * np.pi)
    # leading behaviour inner(v) ~ (2 sqrt 2 / 3) v^{3/2}
    v = np.minimum((1.5 * t / math.sqrt(2.0)) ** (2.0 / 3.0), 2.0)
    lo = np.zeros_like(t)
    hi = np.full_like(t, 2.0)
    for _ in range(100):
        r = inner_segment(v) - t
        lo = np.where(r < 0, v, lo)
        hi = np.where(r > 0, v, hi)
        d = np.sqrt(np.maximum(v * (2.0 - v), 0.0))
        step = np.where(d > 0, r / np.where(d > 0, d, 1.0), 0.0)
        nv = v - step
        bad = (nv <= lo) | (nv >= hi) | (d == 0)
        nv = np.where(bad, 0.5 * (lo + hi), nv)
        done = np.abs(nv - v) <= 1e-15 * np.maximum(v, 1e-300)
        v = nv
        if np.all(done | (t == 0)):
            break
    v = np.where(t == 0, 0.0, v)
    return v if v.ndim else float(v)


def inverse_outer_segment(target):
    """Solve outer_segment(u) = target for u >= 0."""
    t = np.maximum(np.asarray(target, dtype=float), 0.0)
    small = (1.5 * t / math.sqrt(2.0)) ** (2.0 / 3.0)
    large = np.sqrt(2.0 * t) + 0.5 * np.log1p(np.sqrt(2.0 * t)) - 1.0
    u = np.where(t < 0.5, small, np.maximum(large, small * 0 + 0.1))
    lo = np.zeros_like(t)
    hi = np.maximum(2.0 * np.sqrt(2.0 * t) + 2.0, 1.0)
    for _ in range(200):
        r = outer_segment(u) - t
        lo = np.where(r < 0, u, lo)
        hi = np.where(r > 0, u, hi)
        d = np.sqrt(u * (2.0 + u))
        step = np.where(d > 0, r / np.where(d > 0, d, 1.0), 0.0)
        nu = u - step
        bad = (nu <= lo) | (nu >= hi) | (d == 0)
        nu = np.where(bad, 0.5 * (lo + hi), nu)
        done = np.abs(nu - u) <= 1e-15 * np.maximum(u, 1e-300)
        u = nu
        if np.all(done | (t == 0)):
            break
    u = np.where(t == 0, 0.0, u)
    return u if u.ndim else float(u)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
