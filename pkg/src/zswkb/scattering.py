"""Leading-order reflection and transmission at real lambda.

With f = A^2 + lambda^2 the transmission coefficient is exp(i sigma/hbar)
to leading order, sigma(lambda) = int (sqrt(f) - lambda), and the
reflection coefficient is hbar/2 times a bounded factor. The error-control
variation is int_0^inf |f^(-1/4) (f^(-1/4))'' - g f^(-1/2)| with the complex
g = 3/4 (A'/(A - i lambda))^2 - 1/2 A''/(A - i lambda).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import QuadratureSpec, adaptive_gauss
from .potentials import OutOfRange, Potential

__all__ = [
    "ScatterRecord",
    "sigma_action",
    "error_control_integrand",
    "error_control_variation",
    "wkb_scattering",
    "NEAR_ZERO_B_MAX",
]

NEAR_ZERO_B_MAX = 0.2
_SPEC = QuadratureSpec(1e-14, 1e-12, 60)


def _half_line(fun, X: float, spec: QuadratureSpec) -> float:
    """int_0^inf fun, split at X; the tail is taken in s = X/t on (0, 1]."""
    core, _ = adaptive_gauss(fun, 0.0, X, spec, breakpoints=[min(1.0, 0.5 * X)])

    def tail(s):
        s = np.asarray(s, dtype=float)
        t = X / s
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            v = fun(t) * X / (s * s)
        return np.where(np.isfinite(v), v, 0.0)

    rest, _ = adaptive_gauss(tail, 0.0, 1.0, spec)
    return core + rest


def _sigma_integrand(p: Potential, lam: float):
    def fun(t):
        A = p.eval_A(t)
        # sqrt(A^2 + lam^2) - lam without cancellation
        return A * A / (np.sqrt(A * A + lam * lam) + lam)

    return fun


def sigma_action(p: Potential, lam: float, symmetric: bool = True,
                 spec: QuadratureSpec = _SPEC) -> float:
    """sigma(lambda) = int_R (sqrt(A^2 + lambda^2) - lambda).

    ``symmetric`` uses twice the half line (A is even); otherwise both half
    lines are integrated separately, which serves as a consistency check.
    """
    lam = float(lam)
    if not lam > 0:
        raise OutOfRange("lambda must be positive")
    fun = _sigma_integrand(p, lam)
    X = float(p.x_max)
    if symmetric:
        return float(2.0 * _half_line(fun, X, spec))
    right = _half_line(fun, X, spec)
    left = _half_line(lambda t: fun(-np.asarray(t, dtype=float)), X, spec)
    return float(left + right)


def error_control_integrand(p: Potential, lam: float):
    """t -> |f^(-1/4) (f^(-1/4))'' - g f^(-1/2)|, f = A^2 + lambda^2."""
    lam = float(lam)

    def fun(t):
        A, A1, A2 = p.eval_A(t), p.eval_A1(t), p.eval_A2(t)
        F = A * A + lam * lam
        F1 = 2.0 * A * A1
        F2 = 2.0 * (A1 * A1 + A * A2)
        lg = 5.0 / 16.0 * F1 * F1 / F ** 2.5 - 0.25 * F2 / F ** 1.5
        d = A - 1j * lam
        g = 0.75 * (A1 / d) ** 2 - 0.5 * A2 / d
        return np.abs(lg - g / np.sqrt(F))

    return fun


def error_control_variation(p: Potential, lam: float, spec: QuadratureSpec = _SPEC) -> float:
    lam = float(lam)
    if not lam > 0:
        raise OutOfRange("lambda must be positive")
    fun = error_control_integrand(p, lam)
    # the integrand is concentrated where A ~ lambda, which moves out as lambda -> 0
    X = float(p.x_max)
    return float(_half_line(fun, X, spec))


@dataclass(frozen=True)
class ScatterRecord:
    """Leading-order scattering data; error orders are carried as hbar exponents.

    T = T_wkb (1 + O(hbar^t_error_exponent)) and
    |R| = R_bound O(hbar^(r_order_exponent - 1)), R_bound = hbar/2 * variation.
    """

    lam: float
    hbar: float
    sigma: float
    T_wkb: complex
    R_bound: float
    variation: float
    near_zero_b: Optional[float] = None
    t_error_exponent: float = 1.0
    r_order_exponent: float = 1.0

    @property
    def arg_T(self) -> float:
        return cmath.phase(self.T_wkb)


def wkb_scattering(p: Potential, lam: float, hbar: float, near_zero_b: Optional[float] = None) -> ScatterRecord:
    """Leading-order R, T at lambda; with ``near_zero_b`` the point is lambda = hbar^b."""
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    lam = float(lam)
    expo = 1.0
    if near_zero_b is not None:
        b = float(near_zero_b)
        if not 0 <= b < NEAR_ZERO_B_MAX:
            raise OutOfRange(f"near-zero exponent must satisfy 0 <= b < {NEAR_ZERO_B_MAX}")
        lam = hbar ** b
        expo = 1.0 - 5.0 * b
    sig = float(sigma_action(p, lam))
    var = float(error_control_variation(p, lam))
    T = cmath.exp(1j * math.fmod(sig / hbar, 2.0 * math.pi))
    return ScatterRecord(lam, float(hbar), sig, T, 0.5 * hbar * var, var, near_zero_b, expo, expo)
