"""Direct numerical ground truth for the Zakharov-Shabat problem.

Eigenvalues come from shooting the first-order system
hbar u' = [[mu, A], [-A, -mu]] u in Pruefer form: with u = r (cos t, sin t)
the angle obeys t' = -(A + mu sin 2t)/hbar and log r' = (mu/hbar) cos 2t.
Carrying the angle and the log-modulus separately is continuous
renormalization, so nothing overflows however large mu L/hbar is.
Scattering at real lambda integrates the complex scalar equation
y'' = (-(A^2 + lambda^2)/hbar^2 + g) y between Jost data
seeded with Liouville-Green phases at both ends.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .potentials import ExponentialTail, OutOfRange, Potential, RationalTail, turning_point

__all__ = [
    "IntegrationFailure",
    "ResolutionWarning",
    "ConditioningWarning",
    "ShootingConfig",
    "default_half_width",
    "mismatch",
    "shoot",
    "spectrum_scan",
    "norming_sign_oracle",
    "jost_scattering_oracle",
    "ORACLE_HBAR_FLOOR",
]

ORACLE_HBAR_FLOOR = 0.02
_LSODA_LOCK = threading.Lock()


class IntegrationFailure(RuntimeError):
    """The ODE integrator did not reach the end of the interval."""


class ResolutionWarning(UserWarning):
    """The mu grid is coarse enough to hide a pair of eigenvalues."""


class ConditioningWarning(UserWarning):
    """The left/right amplitude ratio at the matching point is extreme."""


@dataclass(frozen=True)
class ShootingConfig:
    """Shooting parameters; ``None`` entries are chosen from the potential.

    The half-width defaults to 50 for rational tails and 12 otherwise and is
    widened until A(L) <= 1e-3 mu for the smallest mu in use. The scan step
    defaults to a quarter of the local Bohr-Sommerfeld spacing.
    """

    domain_half_width: Optional[float] = None
    ode_rel_tol: float = 1e-11
    matching_point: float = 0.0
    mu_scan_resolution: Optional[float] = None

    def __post_init__(self):
        if self.domain_half_width is not None and not self.domain_half_width > 0:
            raise ValueError("domain_half_width must be positive")
        if not self.ode_rel_tol > 0:
            raise ValueError("ode_rel_tol must be positive")
        if self.mu_scan_resolution is not None and not self.mu_scan_resolution > 0:
            raise ValueError("mu_scan_resolution must be positive")


def default_half_width(p: Potential, mu_min: float) -> float:
    L = 50.0 if isinstance(p.tail, RationalTail) else 12.0
    L *= max(1.0, p.x_max / (50.0 if isinstance(p.tail, RationalTail) else 10.0))
    target = 1e-3 * mu_min
    while float(p.eval_A(L)) > target:
        L *= 1.25
        if L > 1e7:
            raise OutOfRange(f"potential does not fall below {target:g} before x = 1e7")
    return L


def _half_width(p, cfg, mu_min):
    if cfg.domain_half_width is not None:
        return float(cfg.domain_half_width)
    return default_half_width(p, mu_min)


@dataclass(frozen=True)
class ShotResult:
    """Angles and log-moduli of the left and right decaying solutions at the matching point."""

    mu: float
    theta_left: float
    theta_right: float
    log_r_left: float
    log_r_right: float

    @property
    def mismatch(self) -> float:
        return math.sin(self.theta_right - self.theta_left)


def _pruefer(p, hbar, mu, x0, x1, theta0, rtol):
    def rhs(x, y):
        A = float(p.A(x))
        s2, c2 = math.sin(2.0 * y[0]), math.cos(2.0 * y[0])
        return [-(A + mu * s2) / hbar, mu * c2 / hbar]

    def jac(x, y):
        s2, c2 = math.sin(2.0 * y[0]), math.cos(2.0 * y[0])
        return [[-2.0 * mu * c2 / hbar, 0.0], [-2.0 * mu * s2 / hbar, 0.0]]

    # the Fortran LSODA core holds global state; one integration at a time
    with _LSODA_LOCK:
        sol = solve_ivp(rhs, (x0, x1), [theta0, 0.0], method="LSODA", jac=jac,
                        rtol=rtol, atol=rtol * 1e-2)
    if not sol.success:
        raise IntegrationFailure(f"shooting at mu={mu!r} failed: {sol.message}")
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def shoot(p: Potential, hbar: float, mu: float, cfg: ShootingConfig = ShootingConfig(),
          mu_min: Optional[float] = None) -> ShotResult:
    """Integrate both decaying solutions to the matching point."""
    mu = float(mu)
    if not 0 < mu < p.a_max:
        raise OutOfRange(f"mu={mu!r} outside (0, A_max)")
    L = _half_width(p, cfg, mu if mu_min is None else mu_min)
    m = float(cfg.matching_point)
    if not -L < m < L:
        raise ValueError("matching point must lie inside the domain")
    A_L = float(p.eval_A(L))
    kappa = math.sqrt(max(mu * mu - A_L * A_L, 0.0))
    # left: eigenvector (mu + kappa, -A) of growth rate +kappa; right: (-A, mu + kappa)
    th_l0 = math.atan2(-A_L, mu + kappa)
    th_r0 = math.atan2(mu + kappa, -A_L)
    th_l, lr_l = _pruefer(p, hbar, mu, -L, m, th_l0, cfg.ode_rel_tol)
    th_r, lr_r = _pruefer(p, hbar, mu, L, m, th_r0, cfg.ode_rel_tol)
    return ShotResult(mu, th_l, th_r, lr_l, lr_r)


def mismatch(p: Potential, hbar: float, mu: float, cfg: ShootingConfig = ShootingConfig(),
             mu_min: Optional[float] = None) -> float:
    """det[u_left, u_right] at the matching point for unit-normalized solutions.

    The value is sin(theta_right - theta_left), an Evans function normalized
    so that it stays in [-1, 1]; it vanishes exactly at eigenvalues.
    """
    return shoot(p, hbar, mu, cfg, mu_min).mismatch


def _bs_step(p: Potential, hbar: float, mu: float) -> float:
    """Quarter of the local Bohr-Sommerfeld spacing in mu."""
    from .liouville import action_phi_derivative

    pt = turning_point(p, mu)
    if pt.a <= 0:
        return math.inf
    dphi = action_phi_derivative(p, pt.a)
    slope = abs(float(p.eval_A1(pt.a)))
    if not dphi > 0:
        return math.inf
    return 0.25 * math.pi * hbar * slope / dphi


def _bs_targets_in(p, hbar, mu_lo, mu_hi):
    from .liouville import action_phi

    def phi_of(mu):
        if mu >= p.a_max:
            return 0.0
        return action_phi(p, turning_point(p, mu).a)

    lo, hi = phi_of(mu_hi), phi_of(mu_lo)
    k0 = math.ceil(lo / (math.pi * hbar) - 0.5)
    k1 = math.floor(hi / (math.pi * hbar) - 0.5)
    return max(0, k1 - k0 + 1)


def spectrum_scan(p: Potential, hbar: float, mu_lo: float, mu_hi: float,
                  cfg: ShootingConfig = ShootingConfig(), xtol: float = 1e-13) -> list:
    """All eigenvalue parameters mu in [mu_lo, mu_hi], in decreasing order."""
    mu_lo, mu_hi = float(mu_lo), float(mu_hi)
    if not 0 < mu_lo < mu_hi <= p.a_max:
        raise OutOfRange("need 0 < mu_lo < mu_hi <= A_max")
    if hbar < ORACLE_HBAR_FLOOR:
        raise OutOfRange(f"oracle supports hbar >= {ORACLE_HBAR_FLOOR}")
    L = _half_width(p, cfg, mu_lo)
    cfg = replace(cfg, domain_half_width=L)
    top = min(mu_hi, p.a_max * (1.0 - 1e-12))
    width = top - mu_lo
    grid = [top]
    mu = top
    fixed = cfg.mu_scan_resolution
    while mu > mu_lo:
        step = fixed if fixed is not None else min(_bs_step(p, hbar, mu), width / 8.0)
        mu = max(mu - step, mu_lo)
        grid.append(mu)
    if fixed is not None:
        for a, b in zip(grid[1:], grid[:-1]):
            if _bs_targets_in(p, hbar, a, b) >= 2:
                suggest = min(_bs_step(p, hbar, 0.5 * (a + b)), fixed / 2.0)
                warnings.warn(f"scan step {fixed:g} may hide eigenvalues near mu={a:.6g}; "
                              f"try mu_scan_resolution <= {suggest:.3g}", ResolutionWarning, stacklevel=2)
                break
    f = lambda m: mismatch(p, hbar, m, cfg)  # noqa: E731
    vals = [f(m) for m in grid]
    roots = []
    for (m1, v1), (m0, v0) in zip(zip(grid[:-1], vals[:-1]), zip(grid[1:], vals[1:])):
        if v1 == 0.0:
            roots.append(m1)
        elif v0 * v1 < 0:
            roots.append(brentq(f, m0, m1, xtol=xtol, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    return roots


def norming_sign_oracle(p: Potential, hbar: float, mu_root: float,
                        cfg: ShootingConfig = ShootingConfig()) -> int:
    """Sign s with Y1 = s Y3 at the eigenvalue mu_root.

    The left solution starts along (mu + kappa, -A) and the right one along
    (-A, mu + kappa); in the Schroedinger variable y = (u2 - u1)/sqrt(A + mu)
    these correspond to -Y3 and +Y1 with positive factors, so s is minus the
    sign of u_left / u_right.
    """
    r = shoot(p, hbar, mu_root, cfg)
    c = math.cos(r.theta_left - r.theta_right)
    ratio = math.exp(r.log_r_left - r.log_r_right)
    if not 1e-6 <= ratio <= 1e6:
        warnings.warn(f"left/right amplitude ratio {ratio:.3g} at mu={mu_root!r}",
                      ConditioningWarning, stacklevel=2)
    if abs(r.mismatch) > 1e-3:
        warnings.warn(f"mu={mu_root!r} does not look like an eigenvalue (mismatch {r.mismatch:.3g})",
                      ConditioningWarning, stacklevel=2)
    return -1 if c > 0 else 1


def _g_tilde(A, A1, A2, lam):
    d = A - 1j * lam
    return 0.75 * (A1 / d) ** 2 - 0.5 * A2 / d


def _jost_rhs(p, hbar, lam):
    k2 = (lam / hbar) ** 2

    def rhs(x, y):
        A = float(p.A(x))
        A1 = float(p.A1(x))
        A2 = float(p.A2(x))
        q = -(A * A) / hbar ** 2 - k2 + _g_tilde(A, A1, A2, lam)
        return [y[1], q * y[0]]

    return rhs


def jost_scattering_oracle(p: Potential, hbar: float, lam: float, half_width: Optional[float] = None,
                           rtol: float = 1e-11) -> tuple:
    """(R, T) for waves incident from the right.

    The Jost solutions are asymptotic to exp(+-i lam x/hbar). At x = +-L
    they are seeded with the first-order Liouville-Green form, which removes
    the A^2/hbar^2 truncation error of plain plane waves; the right family
    is then carried to -L and compared with the left family there:
    R = W[Jl-, Jr-]/W[Jr+, Jl-] and T = W[Jr+, Jr-]/W[Jr+, Jl-].
    """
    lam = float(lam)
    if not lam > 0:
        raise OutOfRange("lambda must be positive")
    if hbar < ORACLE_HBAR_FLOOR:
        raise OutOfRange(f"oracle supports hbar >= {ORACLE_HBAR_FLOOR}")
    L = default_half_width(p, lam) if half_width is None else float(half_width)
    k = lam / hbar
    rhs = _jost_rhs(p, hbar, lam)
    A, A1 = float(p.eval_A(L)), float(p.eval_A1(L))
    ft = A * A + lam * lam
    rt = math.sqrt(ft)
    g_at = lambda t: _g_tilde(float(p.A(t)), float(p.A1(t)), float(p.A2(t)), lam)  # noqa: E731
    # local wavenumber sqrt(f/hbar^2 - g) ~ sqrt(f)/hbar - hbar g/(2 sqrt f); its excess over
    # lam/hbar beyond L gives the phase (complex, since g is) of the Jost data at +-L
    lag, _ = quad(lambda t: float(p.A(t)) ** 2 / (math.sqrt(float(p.A(t)) ** 2 + lam * lam) + lam),
                  L, math.inf, epsabs=1e-15, epsrel=1e-12, limit=200)
    g_re, _ = quad(lambda t: g_at(t).real / math.hypot(float(p.A(t)), lam), L, math.inf,
                   epsabs=1e-15, epsrel=1e-10, limit=200)
    g_im, _ = quad(lambda t: g_at(t).imag / math.hypot(float(p.A(t)), lam), L, math.inf,
                   epsabs=1e-15, epsrel=1e-10, limit=200)
    excess = lag / hbar - 0.5 * hbar * complex(g_re, g_im)
    kap = rt / hbar - 0.5 * hbar * g_at(L) / rt
    amp = math.sqrt(lam / rt)
    damp = A * A1 / ft  # f'/(4f) at +L; the sign flips at -L
    ends = []
    for sgn in (1.0, -1.0):
        y0 = amp * np.exp(1j * sgn * (k * L - excess))
        d0 = (1j * sgn * kap - damp) * y0
        sol = solve_ivp(rhs, (L, -L), np.array([y0, d0], dtype=complex),
                        method="DOP853", rtol=rtol, atol=rtol * 1e-3)
        if not sol.success:
            raise IntegrationFailure(f"Jost integration failed at lambda={lam!r}: {sol.message}; "
                                     f"the oracle supports hbar >= {ORACLE_HBAR_FLOOR}")
        ends.append(sol.y[:, -1])
    jp, jm = ends
    el = amp * np.exp(-1j * (-k * L + excess))
    jl = np.array([el, (-1j * kap + damp) * el])

    def wr(u, v):
        return u[0] * v[1] - u[1] * v[0]

    w_pl = wr(jp, jl)
    R = wr(jl, jm) / w_pl
    T = wr(jp, jm) / w_pl
    return complex(R), complex(T)
