"""Airy functions and the parabolic cylinder pair U, Ubar with their
weight/modulus/phase auxiliaries.

Weber's equation is w'' = (x^2/4 + b) w with b <= 0. U is the solution
recessive as x -> +inf; Ubar = Gamma(1/2 - b) V is the dominant companion,
W[U, Ubar] = sqrt(2/pi) Gamma(1/2 - b).

Values are carried internally as (mantissa, log-scale) pairs, because
Gamma(1/2 - b) and e^{+-x^2/4} leave double range quickly. The default
evaluator integrates the ODE from exact data at x = 0 (Ubar forward, U as
the recessive solution fixed by the Wronskian), switches to Riccati form
past the turning point and to the large-x expansion where that converges.
The hypergeometric series and the uniform Airy-type form are available as
explicit methods for cross-checking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import airy as _sp_airy
from scipy.special import airye as _sp_airye
from scipy.special import gammaln

from .numerics import inner_segment, outer_segment

__all__ = [
    "AiryBundle",
    "AiryOverflow",
    "C_STAR",
    "airy",
    "PcfBundle",
    "ScaledPcf",
    "RegimeUnavailable",
    "RootNotFound",
    "pcf",
    "pcf_scaled",
    "pcf_aux",
    "pcf_log_aux",
    "pcf_modulus_sq_over_gamma",
    "pcf_at_zero",
    "crossing_root_rho",
    "eta",
    "log_gamma",
]


class AiryOverflow(OverflowError):
    """Bi (or E) leaves double range. Carries scaled values and the exponent.

    Ai = ai_scaled * exp(-exponent), Bi = bi_scaled * exp(exponent), likewise
    for the derivatives.
    """

    def __init__(self, x, ai_scaled, ai1_scaled, bi_scaled, bi1_scaled, exponent):
        super().__init__(f"Bi({x}) overflows: exponent {exponent:.6g}")
        self.x = x
        self.ai_scaled = ai_scaled
        self.ai1_scaled = ai1_scaled
        self.bi_scaled = bi_scaled
        self.bi1_scaled = bi1_scaled
        self.exponent = exponent


class RegimeUnavailable(NotImplementedError):
    """No evaluation method covers (x, b)."""

    def __init__(self, x, b, method):
        super().__init__(f"no {method} evaluation available at x={x!r}, b={b!r}")
        self.x = x
        self.b = b
        self.method = method


class RootNotFound(ArithmeticError):
    pass


def log_gamma(z):
    return gammaln(z)


# Airy -----------------------------------------------------------------------

AIRY_OVERFLOW_X = 105.0


def _c_star() -> float:
    def d(t):
        ai, _, bi, _ = _sp_airy(t)
        return ai - bi

    return brentq(d, -1.0, 0.0, xtol=1e-15, rtol=1e-15)


C_STAR = _c_star()


@dataclass(frozen=True)
class AiryBundle:
    x: object
    ai: object
    bi: object
    ai1: object
    bi1: object
    e_weight: object
    m_mod: object
    theta_phase: object


def airy(x) -> AiryBundle:
    """Ai, Bi, their derivatives and the (E, M, theta) auxiliaries."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("airy needs finite arguments")
    if np.any(xa > AIRY_OVERFLOW_X):
        xs = float(np.max(xa))
        ai, ai1, bi, bi1 = _sp_airye(xs)
        raise AiryOverflow(xs, ai, ai1, bi, bi1, 2.0 / 3.0 * xs ** 1.5)
    ai, ai1, bi, bi1 = _sp_airy(xa)
    left = xa <= C_STAR
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(left, 1.0, np.sqrt(np.abs(bi / ai)))
        m = np.where(left, np.hypot(ai, bi), np.sqrt(np.abs(2.0 * ai * bi)))
    base = np.arctan2(ai, bi)
    approx = 2.0 / 3.0 * np.abs(xa) ** 1.5 + 0.25 * math.pi
    k = np.round((approx - base) / (2.0 * math.pi))
    theta = np.where(left, base + 2.0 * math.pi * k, 0.25 * math.pi)
    out = [ai, bi, ai1, bi1, e, m, theta]
    if xa.ndim == 0:
        out = [float(v) for v in out]
    return AiryBundle(x if xa.ndim else float(xa), *out)


# helpers ----------------------------------------------------------------------

def eta(y):
    """Airy-variable of the uniform expansion, via the stable segment areas."""
    y = np.asarray(y, dtype=float)
    inside = y <= 1.0
    with np.errstate(invalid="ignore"):
        v_in = -(1.5 * inner_segment(np.clip(1.0 - y, 0.0, 1.0))) ** (2.0 / 3.0)
        v_out = (1.5 * outer_segment(np.maximum(y - 1.0, 0.0))) ** (2.0 / 3.0)
    out = np.where(inside, v_in, v_out)
    return out if out.ndim else float(out)


def _sinpi(t):
    """sin(pi t) with exact argument reduction."""
    t = np.fmod(np.asarray(t, dtype=float), 2.0)
    return np.sin(math.pi * t)


def pcf_at_zero(b: float):
    """Closed-form (U, U', Ubar, Ubar') at x = 0, each as (mantissa, log-scale)."""
    b = float(b)
    l1 = -0.5 * math.log(math.pi) - 0.25 * (2 * b + 1) * math.log(2.0) + gammaln(0.25 - 0.5 * b)
    l2 = -0.5 * math.log(math.pi) - 0.25 * (2 * b - 1) * math.log(2.0) + gammaln(0.75 - 0.5 * b)
    u = float(_sinpi(0.25 - 0.5 * b))
    u1 = -float(_sinpi(0.75 - 0.5 * b))
    ub = float(_sinpi(0.75 - 0.5 * b))
    ub1 = -float(_sinpi(1.25 - 0.5 * b))
    return (u, l1), (u1, l2), (ub, l1), (ub1, l2)


@dataclass(frozen=True)
class ScaledPcf:
    """U = u exp(log_u), U' = u1 exp(log_u); same for Ubar with log_ubar."""

    x: np.ndarray
    b: float
    u: np.ndarray
    u1: np.ndarray
    log_u: np.ndarray
    ubar: np.ndarray
    ubar1: np.ndarray
    log_ubar: np.ndarray

    @property
    def log_gamma(self) -> float:
        return float(gammaln(0.5 - self.b))

    def unscaled(self):
        with np.errstate(over="ignore", under="ignore"):
            eu = np.exp(self.log_u)
            eb = np.exp(self.log_ubar)
            return self.u * eu, self.u1 * eu, self.ubar * eb, self.ubar1 * eb

    def wronskian_ratio(self):
        """W[U, Ubar] / (sqrt(2/pi) Gamma(1/2 - b)), formed without overflow."""
        lg = self.log_gamma
        lw = self.log_u + self.log_ubar - lg
        with np.errstate(over="ignore", under="ignore"):
            return (self.u * self.ubar1 - self.u1 * self.ubar) * np.exp(lw) / math.sqrt(2.0 / math.pi)


# regime: hypergeometric series ---------------------------------------------

SERIES_LIMIT = 30.0


def _hyp1f1(a, c, z):
    terms = [1.0]
    t = 1.0
    k = 0
    while True:
        t *= (a + k) / (c + k) * z / (k + 1)
        terms.append(t)
        k += 1
        s = math.fsum(terms)
        if k > abs(a) + 2 * z + 5 and abs(t) < 1e-18 * max(abs(s), 1e-300):
            return s
        if k > 5000:
            return s


def _series_point(x: float, b: float):
    z = 0.5 * x * x
    (u0, l1), (u10, l2), (ub0, _), (ub10, _) = pcf_at_zero(b)
    a1, a2 = 0.25 + 0.5 * b, 0.75 + 0.5 * b
    F1 = _hyp1f1(a1, 0.5, z)
    F1p = a1 / 0.5 * _hyp1f1(a1 + 1, 1.5, z)
    F2 = _hyp1f1(a2, 1.5, z)
    F2p = a2 / 1.5 * _hyp1f1(a2 + 1, 2.5, z)
    e = math.exp(-0.25 * x * x)
    g1 = e * F1
    g1p = e * (-0.5 * x * F1 + x * F1p)
    g2 = e * x * F2
    g2p = e * (F2 - 0.5 * x * x * F2 + x * x * F2p)
    P1, P2 = math.exp(l1), math.exp(l2)
    U = P1 * u0 * g1 + P2 * u10 * g2
    U1 = P1 * u0 * g1p + P2 * u10 * g2p
    Ub = P1 * ub0 * g1 + P2 * ub10 * g2
    Ub1 = P1 * ub0 * g1p + P2 * ub10 * g2p
    return U, U1, Ub, Ub1


def _series(x, b):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(0.25 * x * x + abs(b) > SERIES_LIMIT):
        bad = x[0.25 * x * x + abs(b) > SERIES_LIMIT][0]
        raise RegimeUnavailable(float(bad), b, "series")
    vals = np.array([_series_point(float(t), b) for t in x]).T
    zeros = np.zeros_like(x)
    return ScaledPcf(x, b, vals[0], vals[1], zeros, vals[2], vals[3], zeros.copy())


# regime: large-x expansion ---------------------------------------------------

def _asymptotic_sums(x, b, sign):
    """Sum_s (-sign)^s (1/2 + sign*b)_{2s} / (s! (2x^2)^s) and its x-derivative."""
    a0 = 0.5 + sign * b
    z = 2.0 * x * x
    S = np.ones_like(x)
    dS = np.zeros_like(x)
    t = np.ones_like(x)
    last = np.full_like(x, np.inf)
    ok = np.zeros(x.shape, dtype=bool)
    for s in range(200):
        t = t * (-sign * (a0 + 2 * s) * (a0 + 2 * s + 1) / ((s + 1) * z))
        S = S + t
        dS = dS - 2.0 * (s + 1) * t / x
        at = np.abs(t)
        growing = at > last
        ok = ok | (at < 1e-17 * np.abs(S))
        if np.all(ok | growing):
            break
        last = at
    return S, dS, ok


def _asymptotic(x, b, strict=True):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise RegimeUnavailable(0.0, b, "asymptotic")
    S, dS, ok1 = _asymptotic_sums(x, b, 1.0)
    T, dT, ok2 = _asymptotic_sums(x, b, -1.0)
    ok = ok1 & ok2
    if strict and not np.all(ok):
        raise RegimeUnavailable(float(x[~ok][0]), b, "asymptotic")
    lx = np.log(x)
    lu = -0.25 * x * x + (-b - 0.5) * lx
    u1 = S * (-0.5 * x + (-b - 0.5) / x) + dS
    lub = gammaln(0.5 - b) + 0.5 * math.log(2.0 / math.pi) + 0.25 * x * x + (b - 0.5) * lx
    ub1 = T * (0.5 * x + (b - 0.5) / x) + dT
    res = ScaledPcf(x, b, S, u1, lu, T, ub1, lub)
    return (res, ok) if not strict else res


# regime: uniform Airy-type leading term --------------------------------------

def _uniform(x, b):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if b >= 0:
        raise RegimeUnavailable(float(x[0]), b, "uniform")
    nu = math.sqrt(-2.0 * b)
    y = x / (nu * math.sqrt(2.0))
    h = 1e-3

    def phi(yy):
        e = np.asarray(eta(yy))
        return (e / (yy * yy - 1.0)) ** 0.25

    near = np.abs(y - 1.0) < h
    with np.errstate(invalid="ignore", divide="ignore"):
        ph = phi(np.where(near, 2.0, y))
        # phi'/phi from the logarithmic derivative; eta' = phi^-2
        et = np.asarray(eta(np.where(near, 2.0, y)))
        dlog = 0.25 * (ph ** -2 / et - 2.0 * y / (y * y - 1.0))
    if near.any():
        pl, pr = phi(np.array([1.0 - h])), phi(np.array([1.0 + h]))
        w = (y[near] - (1.0 - h)) / (2 * h)
        ph[near] = (1 - w) * pl + w * pr
        dlog[near] = (np.log(pr) - np.log(pl)) / (2 * h)
    arg = nu ** (4.0 / 3.0) * np.asarray(eta(y))
    pos = arg > 0
    ai, ai1, bi, bi1 = (np.where(pos, s, p) for s, p in zip(_sp_airye(np.where(pos, arg, 1.0)),
                                                         _sp_airy(np.where(pos, 0.0, arg))))
    expo = np.where(pos, 2.0 / 3.0 * np.abs(arg) ** 1.5, 0.0)
    lk = 0.5 * math.log(2.0) + 0.25 * math.log(math.pi) + 0.5 * gammaln(0.5 - b) - math.log(nu) / 6.0
    dy = 1.0 / (nu * math.sqrt(2.0))
    k43 = nu ** (4.0 / 3.0) / ph ** 2
    u = ph * ai
    u1 = dy * (ph * dlog * ai + ph * k43 * ai1)
    ub = ph * bi
    ub1 = dy * (ph * dlog * bi + ph * k43 * bi1)
    return ScaledPcf(x, b, u, u1, lk - expo, ub, ub1, lk + expo)


# default evaluator: ODE continuation ------------------------------------------

_RTOL = 1e-13
# values are scaled to O(1); a zero start component must not zero the error scale
_ATOL_LIN = 1e-20


def _wkb_area(x, c):
    """int_{2 sqrt c}^{x} sqrt(t^2/4 - c) dt for x >= 2 sqrt c."""
    if c == 0:
        return 0.25 * x * x
    r = math.sqrt(max(x * x - 4 * c, 0.0))
    return 0.25 * x * r - c * math.log((x + r) / (2.0 * math.sqrt(c)))


def _x_of_area(target, c):
    xt = 2.0 * math.sqrt(c)
    hi = xt + 1.0
    while _wkb_area(hi, c) < target:
        hi = xt + 2.0 * (hi - xt)
    return brentq(lambda t: _wkb_area(t, c) - target, xt, hi, xtol=1e-12)


class _PcfSolver:
    """Continuation data for one value of b; immutable after construction."""

    def __init__(self, b: float):
        b = float(b)
        c = -b
        self.b = b
        self.c = c
        self.lg = float(gammaln(0.5 - b))
        self.half_lg = 0.5 * self.lg
        self.xt = 2.0 * math.sqrt(c)
        Q = lambda t: 0.25 * t * t + b  # noqa: E731

        (u0, l1), (u10, l2), (ub0, _), (ub10, _) = pcf_at_zero(b)
        # scale data by sqrt(Gamma(1/2 - b)) so that oscillatory values are O(1)
        s1 = math.exp(l1 - self.half_lg)
        s2 = math.exp(l2 - self.half_lg)
        self.ubar0 = (ub0 * s1, ub10 * s2)
        self.u0_closed = (u0 * s1, u10 * s2)

        def lin(t, w):
            return np.array([w[1], Q(t) * w[0]])

        x_r = _x_of_area(3.0, c) if c > 0 else math.sqrt(12.0)
        while True:
            fwd = solve_ivp(lin, (0.0, x_r), np.array(self.ubar0), method="DOP853",
                            rtol=_RTOL, atol=_ATOL_LIN, dense_output=True)
            ubr, ubr1 = fwd.y[:, -1]
            if ubr > 0 and ubr1 > 0:
                break
            x_r += max(1.0, 0.5 * x_r)
        self.x_r = x_r
        self.x_hi = max(x_r + 5.0, 25.0 * (1.0 + math.sqrt(c)), 30.0)
        x_end = self.x_hi + 25.0 / math.sqrt(Q(self.x_hi))

        def ric(t, z):
            return np.array([Q(t) - z[0] * z[0], z[0]])

        def ric_jac(t, z):
            return np.array([[-2.0 * z[0], 0.0], [1.0, 0.0]])

        # recessive solution: start anywhere far right, contamination dies leftwards
        q_end = math.sqrt(Q(x_end))
        y_end = -q_end - 0.25 * (0.5 * x_end) / Q(x_end)
        back = solve_ivp(ric, (x_end, x_r), np.array([y_end, 0.0]), method="Radau",
                         rtol=_RTOL, atol=1e-14, jac=ric_jac, dense_output=True)
        y_r, L_r = back.y[:, -1]
        rec = solve_ivp(lin, (x_r, 0.0), np.array([1.0, y_r]), method="DOP853",
                        rtol=_RTOL, atol=_ATOL_LIN, dense_output=True)
        r0, r10 = rec.y[:, -1]
        w0 = r0 * self.ubar0[1] - r10 * self.ubar0[0]
        self.kappa = math.sqrt(2.0 / math.pi) / w0
        self._L_r = L_r
        self._fwd = fwd.sol
        self._rec = rec.sol
        self._back = back.sol
        fore = solve_ivp(ric, (x_r, self.x_hi), np.array([ubr1 / ubr, 0.0]), method="Radau",
                         rtol=_RTOL, atol=1e-14, jac=ric_jac, dense_output=True)
        self._fore = fore.sol
        self._ubr_log = math.log(ubr)

        self.rho = self._find_rho()
        self._build_phase_tables()

    # raw evaluation, scale sqrt(Gamma) removed
    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        u = np.empty_like(x)
        u1 = np.empty_like(x)
        lu = np.zeros_like(x)
        ub = np.empty_like(x)
        ub1 = np.empty_like(x)
        lub = np.zeros_like(x)
        lin = x <= self.x_r
        if lin.any():
            xl = x[lin]
            fw = self._fwd(xl)
            rc = self._rec(xl)
            ub[lin], ub1[lin] = fw[0], fw[1]
            u[lin], u1[lin] = self.kappa * rc[0], self.kappa * rc[1]
        ex = ~lin
        if ex.any():
            xe = x[ex]
            bk = self._back(xe)
            fo = self._fore(xe)
            u[ex] = self.kappa
            u1[ex] = self.kappa * bk[0]
            lu[ex] = bk[1] - self._L_r
            ub[ex] = 1.0
            ub1[ex] = fo[0]
            lub[ex] = self._ubr_log + fo[1]
        return u, u1, lu, ub, ub1, lub

    def scaled(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x > self.x_hi):
            raise RegimeUnavailable(float(x.max()), self.b, "ode")
        u, u1, lu, ub, ub1, lub = self._eval(x)
        return ScaledPcf(x, self.b, u, u1, lu + self.half_lg, ub, ub1, lub + self.half_lg)

    def _diff(self, t):
        u, _, lu, ub, _, lub = self._eval(np.array([t]))
        m = max(lu[0], lub[0])
        return u[0] * math.exp(lu[0] - m) - ub[0] * math.exp(lub[0] - m)

    def _find_rho(self) -> float:
        if self.c == 0:
            return 0.0
        lo = max(0.0, self.xt - 2.0)
        hi = self.xt + 2.0
        for _ in range(4):
            grid = np.linspace(lo, hi, 400)
            d = np.array([self._diff(t) for t in grid])
            idx = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)[0]
            if idx.size:
                k = idx[-1]
                if d[k + 1] == 0:
                    return float(grid[k + 1])
                return brentq(self._diff, grid[k], grid[k + 1], xtol=1e-14, rtol=1e-15)
            if self.c < 1e-8 and np.all(d <= 0):
                # the crossing sits at O(-b) from the origin, below rounding of U(0) - Ubar(0)
                return 0.0
            lo, hi = max(0.0, lo - 2.0), min(hi + 2.0, self.x_hi)
        raise RootNotFound(f"U = Ubar has no root near the turning point for b={self.b}")

    def _build_phase_tables(self):
        step = min(0.02, 0.2 / max(math.sqrt(self.c), 1.0))
        n = int(math.ceil(self.x_hi / step)) + 1
        grid = np.linspace(0.0, self.x_hi, n)
        u, u1, lu, ub, ub1, lub = self._eval(grid)
        right = grid > self.rho
        # theta: continuous, pi/4 at rho, anchored from the right end of [0, rho]
        th = np.arctan2(u * np.exp(lu - lub), ub)
        left = ~right
        tl = np.unwrap(th[left][::-1])[::-1]
        k0 = np.round((0.25 * math.pi - tl[-1]) / (2 * math.pi)) if tl.size else 0.0
        self._th_grid = grid[left]
        self._th_vals = tl + 2 * math.pi * k0
        # omega: continuous, -> -pi/4 at the far end
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            om_l = np.arctan2(u1 * np.exp(lu - lub), ub1)
            om_r = np.arctan2(u1 * ub / u, ub1)
        om = np.where(right, om_r, om_l)
        ou = np.unwrap(om[::-1])[::-1]
        ou += 2 * math.pi * np.round((-0.25 * math.pi - ou[-1]) / (2 * math.pi))
        # the last value sits near -pi/4 but not exactly on it
        self._om_grid = grid
        self._om_vals = ou


@lru_cache(maxsize=256)
def _solver(b: float) -> _PcfSolver:
    # lru_cache is safe for concurrent readers; solvers are never mutated
    return _PcfSolver(b)


def _check_domain(x, b):
    b = float(b)
    if not math.isfinite(b) or b > 0:
        raise ValueError("b must be a finite number <= 0")
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise ValueError("x must be finite and >= 0")
    return x, b


def pcf_scaled(x, b: float, method: str = "auto") -> ScaledPcf:
    """U, U', Ubar, Ubar' at x >= 0 as mantissa/log-scale pairs."""
    x, b = _check_domain(x, b)
    shape = x.shape
    flat = np.atleast_1d(x).ravel()
    if method == "series":
        res = _series(flat, b)
    elif method == "asymptotic":
        res = _asymptotic(flat, b)
    elif method == "uniform":
        res = _uniform(flat, b)
    elif method in ("auto", "ode"):
        solver = _solver(b)
        far = flat > solver.x_hi
        if method == "ode" or not far.any():
            res = solver.scaled(flat)
        else:
            near = solver.scaled(np.where(far, 0.0, flat))
            asy = _asymptotic(np.where(far, flat, solver.x_hi), b)
            pick = lambda a, c: np.where(far, c, a)  # noqa: E731
            res = ScaledPcf(flat, b, pick(near.u, asy.u), pick(near.u1, asy.u1),
                            pick(near.log_u, asy.log_u), pick(near.ubar, asy.ubar),
                            pick(near.ubar1, asy.ubar1), pick(near.log_ubar, asy.log_ubar))
    else:
        raise ValueError(f"unknown method {method!r}")
    if shape == res.x.shape:
        return res
    r = lambda a: np.asarray(a).reshape(shape)  # noqa: E731
    return ScaledPcf(r(res.x), b, r(res.u), r(res.u1), r(res.log_u), r(res.ubar), r(res.ubar1), r(res.log_ubar))


def crossing_root_rho(b: float) -> float:
    """Largest root of U(x, b) = Ubar(x, b); rho(0) = 0."""
    _, b = _check_domain(0.0, b)
    return _solver(b).rho


def _phase(grid, vals, x, base):
    ref = np.interp(x, grid, vals)
    return base + 2.0 * math.pi * np.round((ref - base) / (2.0 * math.pi))


def pcf_log_aux(x, b: float):
    """(log E, M, N, theta, omega) with M, N divided by sqrt(Gamma(1/2 - b))."""
    x, b = _check_domain(x, b)
    s = pcf_scaled(x, b)
    rho = _solver(b).rho
    solver = _solver(b)
    hl = 0.5 * float(gammaln(0.5 - b))
    lu = s.log_u - hl
    lub = s.log_ubar - hl
    right = x > rho
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        eu = np.exp(lu)
        eb = np.exp(lub)
        # left of rho both scales are moderate
        m_l = np.hypot(s.u * eu, s.ubar * eb)
        n_l = np.hypot(s.u1 * eu, s.ubar1 * eb)
        prod = np.abs(s.u * s.ubar) * np.exp(lu + lub)
        m_r = np.sqrt(2.0 * prod)
        yu = s.u1 / s.u
        yb = s.ubar1 / s.ubar
        n_r = np.sqrt(prod * (yu * yu + yb * yb))
        le_r = 0.5 * (lub - lu + np.log(np.abs(s.ubar / s.u)))
        th_l = np.arctan2(s.u * np.exp(lu - lub), s.ubar)
        om_l = np.arctan2(s.u1 * np.exp(lu - lub), s.ubar1)
        om_r = np.arctan2(yu * s.ubar, s.ubar1)
    le = np.where(right, le_r, 0.0)
    m = np.where(right, m_r, m_l)
    n = np.where(right, n_r, n_l)
    if solver._th_grid.size:
        th = np.where(right, 0.25 * math.pi, _phase(solver._th_grid, solver._th_vals, np.minimum(x, rho), th_l))
    else:
        th = np.full_like(x, 0.25 * math.pi)
    om_base = np.where(right, om_r, om_l)
    far = x > solver.x_hi
    om = np.where(far, om_base, _phase(solver._om_grid, solver._om_vals, np.minimum(x, solver.x_hi), om_base))
    return le, m, n, th, om


def pcf_aux(x, b: float):
    """(E, M, N, theta, omega) at true scale; may overflow to inf far out."""
    le, m, n, th, om = pcf_log_aux(x, b)
    hl = 0.5 * float(gammaln(0.5 - b))
    with np.errstate(over="ignore"):
        e = np.exp(le)
        s = math.exp(hl) if hl < 709 else math.inf
    return e, m * s, n * s, th, om


def pcf_modulus_sq_over_gamma(x, b: float):
    """M(x, b)^2 / Gamma(1/2 - b)."""
    _, m, _, _, _ = pcf_log_aux(x, b)
    return m * m


@dataclass(frozen=True)
class PcfBundle:
    x: object
    b: float
    u: object
    ubar: object
    u1: object
    ubar1: object
    e_weight: object
    m_mod: object
    n_mod: object
    theta_phase: object
    omega_phase: object
    scaled: ScaledPcf = field(repr=False, compare=False, default=None)


def pcf(x, b: float, method: str = "auto") -> PcfBundle:
    """U, Ubar, derivatives and auxiliaries at true scale (inf/0 past double range)."""
    s = pcf_scaled(x, b, method)
    u, u1, ub, ub1 = s.unscaled()
    e, m, n, th, om = pcf_aux(x, b)
    vals = [u, ub, u1, ub1, e, m, n, th, om]
    if np.ndim(x) == 0:
        vals = [float(np.asarray(v).ravel()[0]) for v in vals]
        return PcfBundle(float(x), float(b), *vals, scaled=s)
    return PcfBundle(np.asarray(x, dtype=float), float(b), *vals, scaled=s)
