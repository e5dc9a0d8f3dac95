"""Liouville transformation around a pair of turning points.

For a turning point a (A(a) = mu) the map x -> zeta sends the equation
y'' = (f/h^2 + g) y with f = A(a)^2 - A(x)^2 to the comparison form
Y'' = ((zeta^2 - alpha^2)/h^2 + psi) Y. This module builds the map, its
inverse, the error term psi, the variation of the error-control function
and the auxiliary supremum l(b).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import (
    DEFAULT_SPEC,
    Algebraic,
    QuadratureSpec,
    adaptive_gauss,
    integrate_sqrt_endpoints,
    integrate_tail,
    inner_segment,
    inverse_inner_segment,
    inverse_outer_segment,
    outer_segment,
    _GL_W,
    _GL_X,
)
from .potentials import Potential, SpectralPoint

__all__ = [
    "AssumptionViolation",
    "EvaluationFailure",
    "InternalError",
    "f_value",
    "g_value",
    "p_value",
    "alpha_of_a",
    "action_phi",
    "action_phi_derivative",
    "LiouvilleMap",
    "ErrorTermEvaluator",
    "build_map",
    "psi",
    "omega",
    "variation_V",
    "balancing_l",
    "TURNING_GUARD_WIDTH",
]

TURNING_GUARD_WIDTH = 1e-3
_X_TABLE = 1e8


class AssumptionViolation(ValueError):
    """f(., a) is not negative between the turning points."""


class EvaluationFailure(ArithmeticError):
    """psi came out non-finite outside the guard band."""


class InternalError(RuntimeError):
    pass


# f, g, p ------------------------------------------------------------------

def f_value(p: Potential, x, a: float):
    """f(x, a) = A(a)^2 - A(x)^2, with the difference formed stably."""
    x = np.abs(np.asarray(x, dtype=float))
    Ax = p.eval_A(x)
    return -p.A_minus(x, a) * (Ax + float(p.eval_A(a)))


def f_derivatives(p: Potential, x):
    """(f', f'') in x; they do not depend on a."""
    x = np.asarray(x, dtype=float)
    A, A1, A2 = p.eval_A(x), p.eval_A1(x), p.eval_A2(x)
    return -2.0 * A * A1, -2.0 * (A1 * A1 + A * A2)


def g_value(p: Potential, x, a: float):
    x = np.asarray(x, dtype=float)
    s = p.eval_A(x) + float(p.eval_A(a))
    return 0.75 * (p.eval_A1(x) / s) ** 2 - 0.5 * p.eval_A2(x) / s


def p_value(p: Potential, x, a: float):
    """p(x, a) = f(x, a) / (x^2 - a^2), continued to x = +-a and to a = 0."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    den = (ax - a) * (ax + a)
    near = np.abs(ax - a) <= 1e-7 * (1.0 + a)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = f_value(p, ax, a) / np.where(near, 1.0, den)
    if a > 0:
        lim = -float(p.eval_A(a)) * float(p.eval_A1(a)) / a
    else:
        lim = -float(p.eval_A(0.0)) * float(p.eval_A2(0.0))
    return np.where(near, lim, val)


# actions ------------------------------------------------------------------

def _sq_gap(p: Potential, a: float, s, d):
    """A(s)^2 - A(a)^2 for 0 <= s = a - d <= a."""
    Aa = float(p.eval_A(a))
    gap = p.A_minus(s, a)
    small = d <= 1e-6 * (1.0 + a)
    taylor = -float(p.eval_A1(a)) * d + 0.5 * float(p.eval_A2(a)) * d * d
    gap = np.where(small, taylor, gap)
    return gap * (p.eval_A(s) + Aa)


def action_phi(p: Potential, a: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Phi(a) = int_{-a}^{a} sqrt(A^2 - A(a)^2), computed as twice the half-range integral."""
    a = float(a)
    if a <= 0:
        return 0.0

    def integrand(t, d_lo, d_hi):
        return np.sqrt(np.maximum(_sq_gap(p, a, t, d_hi), 0.0))

    return 2.0 * integrate_sqrt_endpoints(integrand, 0.0, a, spec, pass_distances=True)


def alpha_of_a(p: Potential, a: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """alpha = sqrt((2/pi) int_{-a}^{a} sqrt(-f)), integrated over the full symmetric range."""
    a = float(a)
    if a <= 0:
        return 0.0
    t = np.abs(np.linspace(-a, a, 41)[1:-1])
    probe = _sq_gap(p, a, t, a - t)
    if np.any(probe < 0):
        raise AssumptionViolation(f"f(x, {a!r}) > 0 somewhere in (-a, a)")

    def integrand(t, d_lo, d_hi):
        d = np.minimum(d_lo, d_hi)
        return np.sqrt(np.maximum(_sq_gap(p, a, np.abs(t), d), 0.0))

    total = integrate_sqrt_endpoints(integrand, -a, a, spec, pass_distances=True)
    return math.sqrt(2.0 / math.pi * total)


def action_phi_derivative(p: Potential, a: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Phi'(a) = -A(a) A'(a) int_{-a}^{a} (A^2 - A(a)^2)^(-1/2)."""
    a = float(a)
    if a <= 0:
        raise ValueError("Phi' is defined for a > 0")

    def integrand(t, d_lo, d_hi):
        return 1.0 / np.sqrt(_sq_gap(p, a, t, d_hi))

    inner = 2.0 * integrate_sqrt_endpoints(integrand, 0.0, a, spec, pass_distances=True)
    return -float(p.eval_A(a)) * float(p.eval_A1(a)) * inner


# cumulative tables ----------------------------------------------------------

class _CumulativeTable:
    """Cumulative integral of a smooth F on [0, W] with adaptive Gauss panels."""

    def __init__(self, F, edges, rel_tol=1e-14, max_panels=20000):
        self.F = F
        edges = np.asarray(edges, dtype=float)
        accepted = []
        a, b = edges[:-1], edges[1:]
        from .numerics import _panel_sums

        while a.size:
            whole, left, right = _panel_sums(F, a, b)
            ref = left + right
            ok = np.abs(whole - ref) <= rel_tol * np.abs(ref) + 1e-300 + 1e-17 * (b - a) * np.abs(ref).max()
            accepted.append(np.stack([a[ok], b[ok], ref[ok]], axis=1))
            a, b = a[~ok], b[~ok]
            m = 0.5 * (a + b)
            a, b = np.concatenate([a, m]), np.concatenate([m, b])
            if sum(len(x) for x in accepted) + a.size > max_panels:
                raise InternalError("cumulative table refinement did not converge")
        panels = np.concatenate(accepted)
        panels = panels[np.argsort(panels[:, 0])]
        self.edges = np.concatenate([panels[:, 0], panels[-1:, 1]])
        self.cum = np.concatenate([[0.0], np.cumsum(panels[:, 2])])

    @property
    def end(self):
        return self.edges[-1]

    @property
    def total(self):
        return self.cum[-1]

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        flat = np.clip(w.ravel(), 0.0, self.end)
        k = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.edges) - 2)
        lo = self.edges[k]
        half = 0.5 * (flat - lo)
        nodes = (lo + half)[:, None] + half[:, None] * _GL_X
        part = half * (np.asarray(self.F(nodes.ravel())).reshape(nodes.shape) @ _GL_W)
        return (self.cum[k] + part).reshape(w.shape)

    def inverse(self, target):
        """w with table(w) = target, for 0 <= target <= total."""
        t = np.asarray(target, dtype=float)
        flat = np.clip(t.ravel(), 0.0, self.total)
        k = np.clip(np.searchsorted(self.cum, flat, side="right") - 1, 0, len(self.edges) - 2)
        lo = self.edges[k].copy()
        hi = self.edges[k + 1].copy()
        span = self.cum[k + 1] - self.cum[k]
        frac = np.where(span > 0, (flat - self.cum[k]) / np.where(span > 0, span, 1.0), 0.0)
        w = lo + frac * (hi - lo)
        for _ in range(60):
            r = self(w) - flat
            lo = np.where(r < 0, w, lo)
            hi = np.where(r > 0, w, hi)
            d = np.asarray(self.F(w))
            with np.errstate(divide="ignore", invalid="ignore"):
                nw = w - r / d
            bad = ~np.isfinite(nw) | (nw <= lo) | (nw >= hi)
            nw = np.where(bad, 0.5 * (lo + hi), nw)
            nw = np.where(r == 0, w, nw)
            conv = np.abs(nw - w) <= 4e-16 * np.maximum(np.abs(w), 1e-300)
            w = nw
            if np.all(conv | (r == 0)):
                break
        return w.reshape(t.shape)


# the map ----------------------------------------------------------------------

class LiouvilleMap:
    """Monotone correspondence x <-> zeta for a fixed turning point a >= 0.

    Interior and exterior actions are tabulated in the variables
    w = sqrt(a - |x|) and u = sqrt(|x| - a), where the integrands are smooth;
    the closed-form right-hand sides are inverted through the stable
    segment-area functions.
    """

    def __init__(self, p: Potential, a: float, spec: QuadratureSpec = DEFAULT_SPEC):
        a = float(a)
        if a < 0:
            raise ValueError("turning point must be non-negative")
        self.potential = p
        self.a = a
        self.mu = float(p.eval_A(a))
        self.alpha = alpha_of_a(p, a, spec) if a > 0 else 0.0
        self.point = SpectralPoint(self.mu, a, self.alpha)
        self.valid_x_range = (-math.inf, math.inf)

        def f_out(u):
            u = np.asarray(u, dtype=float)
            x = a + u * u
            gap = -p.A_minus(x, a)
            return 2.0 * u * np.sqrt(np.maximum(gap * (p.eval_A(x) + self.mu), 0.0))

        u_end = math.sqrt(_X_TABLE)
        scale = max(1.0, math.sqrt(max(a, 1e-300)))
        edges = np.unique(np.concatenate([
            np.linspace(0.0, scale, 17),
            np.geomspace(scale * 1.25, u_end, 80),
        ]))
        self._out = _CumulativeTable(f_out, edges)
        self._x_end = a + self._out.end ** 2
        if a > 0:
            def f_in(w):
                w = np.asarray(w, dtype=float)
                d = w * w
                s = a - d
                return 2.0 * w * np.sqrt(np.maximum(_sq_gap(p, a, s, d), 0.0))

            self._in = _CumulativeTable(f_in, np.linspace(0.0, math.sqrt(a), 17))
            half = self._in.total
            ref = 0.25 * math.pi * self.alpha ** 2
            if abs(half - ref) > 1e-9 * max(ref, 1e-300):
                # keep alpha and the table on the same quadrature footing
                self.alpha = math.sqrt(4.0 * half / math.pi)
                self.point = SpectralPoint(self.mu, a, self.alpha)
        else:
            self._in = None

    # exterior action J(|x|) = int_a^|x| sqrt(f)
    def _J(self, ax):
        ax = np.asarray(ax, dtype=float)
        u = np.sqrt(np.maximum(ax - self.a, 0.0))
        J = self._out(np.minimum(u, self._out.end))
        beyond = ax > self._x_end
        return np.where(beyond, self._out.total + self.mu * (ax - self._x_end), J)

    def _J_inverse(self, J):
        J = np.asarray(J, dtype=float)
        inside = J <= self._out.total
        u = self._out.inverse(np.minimum(J, self._out.total))
        x_tab = self.a + u * u
        x_far = self._x_end + (J - self._out.total) / self.mu
        return np.where(inside, x_tab, x_far)

    def zeta_and_offset(self, x):
        """zeta(x) together with |zeta| - alpha computed without cancellation."""
        x = np.asarray(x, dtype=float)
        # zeta is odd, so x = 0 maps to exactly 0
        s = np.sign(x)
        ax = np.abs(x)
        al = self.alpha
        if self.a == 0:
            z = np.sqrt(2.0 * self._J(ax))
            return s * z, z
        inside = ax < self.a
        off = np.empty_like(ax)
        if inside.any():
            w = np.sqrt(self.a - ax[inside])
            K = self._in(w)
            off[inside] = -al * inverse_inner_segment(K / al ** 2)
        out = ~inside
        if out.any():
            J = self._J(ax[out])
            off[out] = al * inverse_outer_segment(J / al ** 2)
        return s * (al + off), off

    def zeta_of_x(self, x):
        z, _ = self.zeta_and_offset(x)
        return z if np.ndim(z) else float(z)

    def x_of_zeta(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        s = np.where(zeta < 0, -1.0, 1.0)
        az = np.abs(zeta)
        al = self.alpha
        if self.a == 0:
            x = self._J_inverse(0.5 * az * az)
            return s * x if np.ndim(x) else float(s * x)
        x = np.empty_like(az)
        inside = az < al
        if inside.any():
            K = al ** 2 * inner_segment(1.0 - az[inside] / al)
            w = self._in.inverse(K)
            x[inside] = self.a - w * w
        out = ~inside
        if out.any():
            J = al ** 2 * outer_segment(az[out] / al - 1.0)
            x[out] = self._J_inverse(J)
        x = s * x
        return x if x.ndim else float(x)

    def zeta_prime(self, x):
        """d zeta / dx = sqrt(f / (zeta^2 - alpha^2)), continued through the turning points."""
        x = np.asarray(x, dtype=float)
        z, off = self.zeta_and_offset(x)
        az = np.abs(z)
        f = f_value(self.potential, x, self.a)
        w2 = off * (az + self.alpha)
        p = self.potential
        if self.a > 0:
            f1a = -2.0 * self.mu * float(p.eval_A1(self.a))
            lim = (f1a / (2.0 * self.alpha)) ** (1.0 / 3.0)
            near = np.abs(np.abs(x) - self.a) <= 1e-9 * (1.0 + self.a)
        else:
            lim = (-float(p.eval_A(0.0)) * float(p.eval_A2(0.0))) ** 0.25
            near = np.abs(x) <= 1e-9
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sqrt(f / np.where(near, 1.0, w2))
        out = np.where(near, lim, val)
        return out if out.ndim else float(out)


def build_map(p: Potential, a: float, spec: QuadratureSpec = DEFAULT_SPEC) -> LiouvilleMap:
    return LiouvilleMap(p, a, spec)


# error term ------------------------------------------------------------------

class ErrorTermEvaluator:
    """psi(zeta, alpha) for one turning point, with interpolation across the turning band.

    Within the band around |zeta| = alpha the closed expression is a
    difference of large terms; there psi is replaced by the cubic through
    two points on each side of the band. The band half-width is
    ``guard * max(alpha, 1)``, so it stays meaningful as alpha -> 0; once it
    swallows zeta = 0 the band becomes |zeta| < alpha + width and the cubic
    is built from mirrored points (psi is even in zeta).
    """

    def __init__(self, lmap: LiouvilleMap, turning_guard_width: float = TURNING_GUARD_WIDTH):
        self.map = lmap
        self.turning_guard_width = float(turning_guard_width)
        al = lmap.alpha
        h = self.turning_guard_width * max(al, 1.0)
        self.band_halfwidth = h
        if al - h > 0:
            self.band = (al - h, al + h)
            nodes = np.array([al - 2 * h, al - h, al + h, al + 2 * h])
            vals = self._raw_at_zeta(nodes)
        else:
            self.band = (0.0, al + h)
            right = np.array([al + h, al + 2 * h])
            rv = self._raw_at_zeta(right)
            nodes = np.concatenate([-right[::-1], right])
            vals = np.concatenate([rv[::-1], rv])
        if not np.all(np.isfinite(vals)):
            raise EvaluationFailure("psi is not finite next to the turning band")
        self._nodes = nodes
        self._coef = np.polyfit(nodes - al, vals, 3)

    def f(self, x):
        return f_value(self.map.potential, x, self.map.a)

    def g(self, x):
        return g_value(self.map.potential, x, self.map.a)

    def p(self, x):
        return p_value(self.map.potential, x, self.map.a)

    def _raw(self, x, z, off):
        """Closed expression for psi given x, zeta and |zeta| - alpha."""
        pot = self.map.potential
        al = self.map.alpha
        ax = np.abs(np.asarray(x, dtype=float))
        az = np.abs(np.asarray(z, dtype=float))
        A, A1, A2 = pot.eval_A(ax), pot.eval_A1(ax), pot.eval_A2(ax)
        mu = self.map.mu
        f = -pot.A_minus(ax, self.map.a) * (A + mu)
        f1 = -2.0 * A * A1
        f2 = -2.0 * (A1 * A1 + A * A2)
        s = A + mu
        g = 0.75 * (A1 / s) ** 2 - 0.5 * A2 / s
        w2 = off * (az + al)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t1 = 0.25 * (3.0 * az * az + 2.0 * al * al) / (w2 * w2)
            t2 = w2 * (4.0 * f * f2 - 5.0 * f1 * f1) / (16.0 * f ** 3)
            t3 = w2 * g / f
        return t1 + t2 + t3

    def _raw_at_zeta(self, zeta):
        zeta = np.abs(np.asarray(zeta, dtype=float))
        x = self.map.x_of_zeta(zeta)
        return self._raw(x, zeta, zeta - self.map.alpha)

    def in_band(self, zeta):
        az = np.abs(np.asarray(zeta, dtype=float))
        lo, hi = self.band
        return (az > lo) & (az < hi) if lo > 0 else az < hi

    def _band_value(self, az):
        return np.polyval(self._coef, az - self.map.alpha)

    def psi_at_x(self, x):
        """psi at the zeta corresponding to x."""
        x = np.asarray(x, dtype=float)
        z, off = self.map.zeta_and_offset(x)
        band = self.in_band(z)
        out = np.empty_like(z)
        if (~band).any():
            out[~band] = self._raw(x[~band], z[~band], off[~band])
            if not np.all(np.isfinite(out[~band])):
                raise EvaluationFailure("non-finite psi outside the guard band")
        if band.any():
            out[band] = self._band_value(np.abs(z[band]))
        return out

    def psi(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        az = np.abs(zeta)
        band = self.in_band(az)
        out = np.empty_like(az)
        if (~band).any():
            out[~band] = self._raw_at_zeta(az[~band])
            if not np.all(np.isfinite(out[~band])):
                raise EvaluationFailure("non-finite psi outside the guard band")
        if band.any():
            out[band] = self._band_value(az[band])
        return out if out.ndim else float(out)


def psi(ev: ErrorTermEvaluator, zeta):
    return ev.psi(zeta)


def omega(x):
    """Balancing function 1 + |x|^(1/3)."""
    return 1.0 + np.abs(np.asarray(x, dtype=float)) ** (1.0 / 3.0)


def variation_V(ev: ErrorTermEvaluator, zeta1: float, zeta2: float, hbar: float,
                balancing: bool = True, spec: QuadratureSpec = QuadratureSpec(1e-10, 1e-8)) -> float:
    """int_{zeta1}^{zeta2} |psi(t)| / Omega(t sqrt(2/hbar)) dt, zeta2 may be inf.

    The integral is taken in x with the Jacobian d zeta/dx, which avoids
    inverting the map at every node. With ``balancing=False`` Omega = 1.
    """
    zeta1 = float(zeta1)
    zeta2 = float(zeta2)
    if zeta1 < 0 or zeta2 < zeta1:
        raise ValueError("need 0 <= zeta1 <= zeta2")
    if zeta2 == zeta1:
        return 0.0
    m = ev.map
    c = math.sqrt(2.0 / hbar)

    def integrand(x):
        x = np.asarray(x, dtype=float)
        z, _ = m.zeta_and_offset(x)
        val = np.abs(ev.psi_at_x(x)) * m.zeta_prime(x)
        if balancing:
            val = val / omega(z * c)
        return val

    x1 = float(m.x_of_zeta(zeta1))
    lo_b, hi_b = ev.band
    brk = sorted({float(m.x_of_zeta(v)) for v in (lo_b, hi_b, m.alpha) if v > 0})
    x_far = max(50.0 * (1.0 + m.a), 2.0 * x1)
    if math.isinf(zeta2):
        main, _ = adaptive_gauss(integrand, x1, x_far, spec, breakpoints=brk)
        # far field: psi ~ 3/(4 zeta^2) and zeta ~ sqrt(2 mu x), so the
        # integrand decays like x^(-3/2) (x^(-5/3) with balancing)
        pexp = 5.0 / 3.0 if balancing else 1.5
        f_far = abs(float(integrand(np.array([x_far]))[0]))
        tail = integrate_tail(integrand, x_far, Algebraic(pexp, 4.0 * f_far * x_far ** pexp), spec)
        return main + tail
    x2 = float(m.x_of_zeta(zeta2))
    val, _ = adaptive_gauss(integrand, x1, x2, spec, breakpoints=brk)
    return val


def balancing_l(b: float, n_scan: int = 400) -> float:
    """l(b) = sup_{x>0} Omega(x) M(x, b)^2 / Gamma(1/2 - b).

    Log-spaced scan on (0, 20 (1 + sqrt(-b))] followed by golden-section
    refinement around the best sample. M^2/Gamma is formed from the
    normalized PCF values, so nothing overflows for large -b.
    """
    from scipy.optimize import minimize_scalar

    from .specfun import pcf_modulus_sq_over_gamma

    b = float(b)
    if b > 0:
        raise ValueError("l(b) is defined for b <= 0")
    x_sup = 20.0 * (1.0 + math.sqrt(-b))
    xs = np.geomspace(1e-6, x_sup, n_scan)
    vals = omega(xs) * pcf_modulus_sq_over_gamma(xs, b)
    k = int(np.argmax(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, n_scan - 1)]
    res = minimize_scalar(lambda t: -float(omega(t) * pcf_modulus_sq_over_gamma(np.array([t]), b)[0]),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * hi})
    return max(float(vals[k]), -float(res.fun))
