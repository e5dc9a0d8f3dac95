"""Bohr-Sommerfeld eigenvalues, counting, norming signs, connection
coefficients and the parabolic-cylinder approximate solutions.

The eigenvalue parameters mu_n = A(a_n) solve Phi(a_n) = pi (n + 1/2) hbar,
Phi(a) being the action over the allowed interval (-a, a). Near the pair of
turning points the equation in the Liouville variable zeta is approximated
by U and Ubar at (zeta sqrt(2/hbar), -alpha^2/(2 hbar)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline

from .liouville import ErrorTermEvaluator, action_phi, action_phi_derivative, balancing_l, build_map, variation_V
from .numerics import QuadratureSpec, adaptive_gauss, find_root_bracketed
from .potentials import ExponentialTail, OutOfRange, Potential, RationalTail, SpectralPoint, turning_point
from .specfun import pcf, pcf_scaled

__all__ = [
    "EigenRecord",
    "ApproxSolution",
    "ConnectionResult",
    "NearZeroReport",
    "IntegrationFailure",
    "l1_norm",
    "phi_of_mu",
    "solve_bs_level",
    "bs_eigenvalues",
    "count_eigenvalues",
    "norming_constant",
    "approximate_solution",
    "connection_coefficients",
    "near_zero_window",
]

MU_FLOOR_FRACTION = 0.05


class IntegrationFailure(RuntimeError):
    """The comparison-equation integration stopped early."""


@dataclass(frozen=True)
class EigenRecord:
    n: int
    a_wkb: float
    mu_wkb: float
    alpha_wkb: float
    hbar: float
    residual: float
    norming_sign: int


# actions ------------------------------------------------------------------

@lru_cache(maxsize=64)
def _l1_cached(p: Potential) -> float:
    half, _ = quad(lambda t: float(p.A(t)), 0.0, math.inf, epsabs=1e-14, epsrel=1e-13, limit=400)
    return 2.0 * half


def l1_norm(p: Potential) -> float:
    """||A||_1, the supremum of Phi as a -> inf."""
    return _l1_cached(p)


def phi_of_mu(p: Potential, mu: float) -> float:
    """Phi at the turning point of mu; 0 at A_max and ||A||_1 at mu = 0."""
    mu = float(mu)
    if mu >= p.a_max:
        return 0.0
    if mu <= 0:
        return l1_norm(p)
    return action_phi(p, turning_point(p, mu).a)


def _a_upper(p: Potential, target: float) -> float:
    """Some a with Phi(a) > target (target < ||A||_1)."""
    a = max(1.0, float(p.x_max) * 0.1)
    while action_phi(p, a) <= target:
        a *= 2.0
        if a > 1e12:
            raise OutOfRange(f"action level {target!r} is not reached")
    return a


def solve_bs_level(p: Potential, n: int, hbar: float, lo: float = 0.0, hi: Optional[float] = None,
                   a_guess: Optional[float] = None) -> EigenRecord:
    """Solve Phi(a) = pi (n + 1/2) hbar for a in [lo, hi].

    With ``a_guess`` a safeguarded Newton iteration starts there; otherwise
    Brent's method on the bracket. Both finish with a Newton polish step.
    """
    target = math.pi * (n + 0.5) * hbar
    if hi is None:
        hi = _a_upper(p, target)
    g = lambda a: action_phi(p, a) - target  # noqa: E731
    a = None
    if a_guess is not None:
        a = float(a_guess)
        for _ in range(50):
            d = action_phi_derivative(p, a) if a > 0 else 0.0
            if not d > 0:
                a = None
                break
            nxt = a - g(a) / d
            if not lo <= nxt <= hi:
                nxt = 0.5 * (a + (lo if nxt < lo else hi))
            if abs(nxt - a) <= 1e-15 * (1.0 + a):
                a = nxt
                break
            a = nxt
    if a is None:
        a = find_root_bracketed(g, lo, hi, tol=1e-15)
    r = g(a)
    d = action_phi_derivative(p, a)
    if d > 0:
        cand = a - r / d
        rc = g(cand)
        if abs(rc) < abs(r):
            a, r = cand, rc
    return EigenRecord(n, a, float(p.eval_A(a)), math.sqrt(2.0 * target / math.pi), float(hbar),
                       abs(r), -1 if n % 2 else 1)


def bs_eigenvalues(p: Potential, hbar: float, mu_floor: Optional[float] = None) -> list:
    """Bohr-Sommerfeld records with mu_wkb > mu_floor, sorted by n.

    The default floor is 5% of A_max. Targets pi (n + 1/2) hbar are spaced by
    pi hbar and Phi is increasing, so each level has its own bracket.
    """
    hbar = float(hbar)
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    if mu_floor is None:
        mu_floor = MU_FLOOR_FRACTION * p.a_max
    mu_floor = float(mu_floor)
    if not 0 <= mu_floor < p.a_max:
        raise OutOfRange("need 0 <= mu_floor < A_max")
    phi_cap = phi_of_mu(p, mu_floor)
    a_cap = turning_point(p, mu_floor).a if mu_floor > 0 else None
    out = []
    lo = 0.0
    n = 0
    while math.pi * (n + 0.5) * hbar < phi_cap:
        hi = a_cap if a_cap is not None else _a_upper(p, math.pi * (n + 0.5) * hbar)
        rec = solve_bs_level(p, n, hbar, lo, hi)
        out.append(rec)
        lo = rec.a_wkb
        n += 1
    return out


def count_eigenvalues(p: Potential, mu1: float, mu2: float, hbar: float) -> tuple:
    """(estimate, integer_count) for eigenvalue parameters in (mu1, mu2)."""
    mu1, mu2 = float(mu1), float(mu2)
    if mu1 > mu2:
        raise OutOfRange("need mu1 <= mu2")
    if mu1 < 0 or mu2 > p.a_max:
        raise OutOfRange("window must lie in [0, A_max]")
    if mu1 == mu2:
        return 0.0, 0
    phi1 = phi_of_mu(p, mu1)
    phi2 = phi_of_mu(p, mu2)
    step = math.pi * hbar
    estimate = (phi1 - phi2) / step
    n_min = max(0, math.floor(phi2 / step - 0.5) + 1)
    n_max = math.ceil(phi1 / step - 0.5) - 1
    return estimate, max(0, n_max - n_min + 1)


def norming_constant(rec: EigenRecord) -> tuple:
    """Leading sign (-1)^n of the norming constant and its error scale hbar^(2/3)."""
    return (-1 if rec.n % 2 else 1), rec.hbar ** (2.0 / 3.0)


# approximate solutions --------------------------------------------------------

@lru_cache(maxsize=128)
def _l_cached(b: float) -> float:
    return balancing_l(b)


@lru_cache(maxsize=32)
def _evaluator(p: Potential, a: float) -> ErrorTermEvaluator:
    return ErrorTermEvaluator(build_map(p, a))


def _point_for(p: Potential, point: SpectralPoint) -> SpectralPoint:
    if point.a > 0 and not point.alpha > 0:
        return turning_point(p, point.mu)
    return point


@dataclass(frozen=True)
class ApproxSolution:
    """One of Y1..Y4 with its error envelope.

    ``value_at(zeta)`` returns (approximant, d/dzeta approximant, bound on
    |Y - approximant|). Y1, Y2 live on zeta >= 0 and Y3(zeta) = Y1(-zeta),
    Y4(zeta) = Y2(-zeta) on zeta <= 0.
    """

    which: str
    point: SpectralPoint
    hbar: float
    potential: Potential = field(repr=False)

    @property
    def b(self) -> float:
        return -0.5 * self.point.alpha ** 2 / self.hbar

    def _scale(self) -> float:
        return math.sqrt(2.0 / self.hbar)

    def _factor(self, zeta: float) -> float:
        ev = _evaluator(self.potential, self.point.a)
        lval = _l_cached(self.b)
        if self.which in ("Y1", "Y3"):
            v = variation_V(ev, zeta, math.inf, self.hbar)
        else:
            v = variation_V(ev, 0.0, zeta, self.hbar)
        return math.expm1(0.5 * math.sqrt(math.pi * self.hbar) * lval * v)

    def relative_envelope(self, zeta: float) -> float:
        """The bound divided by its special-function weight (M/E or E M)."""
        z = float(zeta)
        if self.which in ("Y3", "Y4"):
            z = -z
        return self._factor(z)

    def value_at(self, zeta: float):
        z = float(zeta)
        sgn = 1.0
        if self.which in ("Y1", "Y2"):
            if z < 0:
                raise ValueError(f"{self.which} is approximated on zeta >= 0")
        else:
            if z > 0:
                raise ValueError(f"{self.which} is approximated on zeta <= 0")
            z, sgn = -z, -1.0
        c = self._scale()
        bund = pcf(z * c, self.b)
        fac = self._factor(z)
        if self.which in ("Y1", "Y3"):
            val, der = bund.u, bund.u1
            env = bund.m_mod / bund.e_weight * fac
        else:
            val, der = bund.ubar, bund.ubar1
            env = bund.e_weight * bund.m_mod * fac
        return float(val), float(sgn * c * der), float(env)

    def derivative_envelope(self, zeta: float) -> float:
        """Bound on |Y' - approximant'| for Y1/Y3 (sqrt(2/hbar) N/E times the same factor)."""
        if self.which not in ("Y1", "Y3"):
            raise ValueError("derivative bound is provided for the recessive pair")
        z = abs(float(zeta))
        bund = pcf(z * self._scale(), self.b)
        return float(self._scale() * bund.n_mod / bund.e_weight * self._factor(z))


def approximate_solution(p: Potential, point: SpectralPoint, hbar: float, which: str) -> ApproxSolution:
    if which not in ("Y1", "Y2", "Y3", "Y4"):
        raise ValueError("which must be one of Y1, Y2, Y3, Y4")
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    return ApproxSolution(which, _point_for(p, point), float(hbar), p)


# comparison-equation integration ---------------------------------------------

def default_zeta_start(alpha: float, hbar: float) -> float:
    return alpha + 6.0 * math.sqrt(hbar)


def _psi_spline(ev: ErrorTermEvaluator, z_end: float, n: int = 1200) -> CubicSpline:
    z = np.linspace(0.0, z_end, n)
    return CubicSpline(z, ev.psi(z), bc_type=((1, 0.0), "not-a-knot"))


def _far_log_ratio(ev: ErrorTermEvaluator, z0: float, alpha: float, hbar: float) -> tuple:
    """log(Y1/U) at z0 and the local psi/(2 kappa), from the tail of psi.

    With kappa = sqrt(zeta^2 - alpha^2)/hbar the recessive solution of
    Y'' = (kappa^2 + psi) Y normalized like U at infinity satisfies
    log(Y1/U) ~ int_zeta^inf psi/(2 kappa). Seeding with this factor removes
    the O(hbar/zeta0^2) normalization error of starting from U itself.
    The integral is taken in s = z0/zeta on (0, 1].
    """
    def integrand(s):
        s = np.asarray(s, dtype=float)
        z = z0 / s
        kap = np.sqrt((z - alpha) * (z + alpha)) / hbar
        return ev.psi(z) / (2.0 * kap) * z0 / (s * s)

    val, _ = adaptive_gauss(integrand, 0.0, 1.0, QuadratureSpec(1e-13, 1e-10))
    k0 = math.sqrt((z0 - alpha) * (z0 + alpha)) / hbar
    return val, float(ev.psi(z0)) / (2.0 * k0)


def integrate_recessive(p: Potential, point: SpectralPoint, hbar: float, zeta_end: float = 0.0,
                        zeta_start: Optional[float] = None, rtol: float = 1e-10,
                        dense: bool = False):
    """Solve Y'' = ((zeta^2 - alpha^2)/hbar^2 + psi) Y inward from zeta_start.

    The seed is U corrected by the far-field factor of ``_far_log_ratio``.

    Returns (zeta values, Y, Y') at the requested end (or a dense solution
    when ``dense``). Values are in true scale.
    """
    point = _point_for(p, point)
    al = point.alpha
    z0 = default_zeta_start(al, hbar) if zeta_start is None else float(zeta_start)
    if not z0 > zeta_end >= 0:
        raise ValueError("need zeta_start > zeta_end >= 0")
    ev = _evaluator(p, point.a)
    spl = _psi_spline(ev, 1.02 * z0)
    c = math.sqrt(2.0 / hbar)
    b = -0.5 * al * al / hbar
    s = pcf_scaled(z0 * c, b)
    u0, u1, lu = float(s.u), float(s.u1), float(s.log_u)
    corr, slope = _far_log_ratio(ev, z0, al, hbar)
    u0, u1 = u0 * math.exp(corr), (c * u1 - slope * u0) * math.exp(corr)
    inv_h2 = 1.0 / (hbar * hbar)

    def rhs(z, y):
        q = (z * z - al * al) * inv_h2 + spl(z)
        return [y[1], q * y[0]]

    sol = solve_ivp(rhs, (z0, zeta_end), [u0, u1], method="DOP853", rtol=rtol,
                    atol=rtol * 1e-4 * abs(u0), dense_output=dense)
    if not sol.success:
        raise IntegrationFailure(f"comparison equation integration failed: {sol.message}")
    scale = math.exp(lu)
    if dense:
        return lambda z: sol.sol(z) * scale
    return float(sol.y[0, -1] * scale), float(sol.y[1, -1] * scale)


@dataclass(frozen=True)
class ConnectionResult:
    """sigma[i][j] from Y1 = s11 Y3 + s12 Y4, Y2 = s21 Y3 + s22 Y4, with the predicted values."""

    sigma: tuple
    predicted: tuple
    phase: float
    point: SpectralPoint
    hbar: float

    def error(self) -> float:
        return max(abs(self.sigma[i][j] - self.predicted[i][j]) for i in range(2) for j in range(2))


def connection_coefficients(p: Potential, point: SpectralPoint, hbar: float,
                            zeta_start: Optional[float] = None) -> ConnectionResult:
    """Connection matrix between (Y1, Y2) and (Y3, Y4) at zeta = 0.

    Y1 is integrated inward from zeta_start. Y2 needs no integration: its
    error term and derivative vanish at zeta = 0, so Y2(0) = Ubar(0) and
    Y2'(0) = sqrt(2/hbar) Ubar'(0). Evenness of psi gives Y3, Y4 by
    reflection, so all Wronskians are formed at zeta = 0.
    """
    point = _point_for(p, point)
    al = point.alpha
    b = -0.5 * al * al / hbar
    c = math.sqrt(2.0 / hbar)
    y1, d1 = integrate_recessive(p, point, hbar, 0.0, zeta_start)
    b0 = pcf(0.0, b)
    y2, d2 = float(b0.ubar), c * float(b0.ubar1)
    w12 = y1 * d2 - d1 * y2
    w34 = -w12
    s11 = (-y1 * d2 - d1 * y2) / w34
    s12 = (2.0 * y1 * d1) / w34
    s21 = (-2.0 * y2 * d2) / w34
    s22 = (y2 * d1 + d2 * y1) / w34
    phase = 0.5 * math.pi * al * al / hbar
    sn, cs = math.sin(phase), math.cos(phase)
    return ConnectionResult(((s11, s12), (s21, s22)), ((sn, cs), (cs, -sn)), phase, point, float(hbar))


# near-zero regime ---------------------------------------------------------------

@dataclass(frozen=True)
class NearZeroReport:
    potential: str
    b_exp: float
    hbar: float
    mu_window: tuple
    records: list
    rate_exponent: Optional[float]
    rate_log_divisor: bool
    rate_label: str

    def predicted_rate(self) -> Optional[float]:
        """hbar^exponent, divided by log(1/hbar) when the rate carries a log."""
        if self.rate_exponent is None:
            return None
        r = self.hbar ** self.rate_exponent
        if self.rate_log_divisor:
            r /= math.log(1.0 / self.hbar)
        return r


def near_zero_window(p: Potential, b_exp: float, hbar: float) -> NearZeroReport:
    """Bohr-Sommerfeld records on [hbar^b, A_max] with the predicted accuracy rate."""
    b = float(b_exp)
    if not 0 < b < 5.0 / 3.0:
        raise OutOfRange("near-zero exponent must satisfy 0 < b < 5/3")
    if not 0 < hbar < 1:
        raise OutOfRange("near-zero window needs 0 < hbar < 1")
    floor = hbar ** b
    tail = p.tail
    if isinstance(tail, RationalTail):
        expo, logd = 5.0 / 3.0 + b / tail.d, False
        label = f"hbar^(5/3 + b/d) with d={tail.d:g}"
    elif isinstance(tail, ExponentialTail) and tail.delta < 1:
        expo, logd = 5.0 / 3.0, True
        label = "hbar^(5/3) / log(1/hbar)"
    elif isinstance(tail, ExponentialTail):
        expo, logd = 5.0 / 3.0, False
        label = "hbar^(5/3)"
    else:
        expo, logd = None, False
        label = "unspecified"
    recs = bs_eigenvalues(p, hbar, floor) if floor < p.a_max else []
    return NearZeroReport(p.name, b, float(hbar), (floor, p.a_max), recs, expo, logd, label)
