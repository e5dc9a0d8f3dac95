"""Bell-shaped potentials, their admissibility checks and turning points."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "RationalTail",
    "ExponentialTail",
    "GenericTail",
    "Potential",
    "SpectralPoint",
    "ValidationReport",
    "Check",
    "InvalidPotential",
    "OutOfRange",
    "CATALOG",
    "get_potential",
    "potential_from_spec",
    "rational_lorentz",
    "sech",
    "gaussian",
    "validate_assumptions",
    "turning_point",
    "finite_difference_audit",
]


class InvalidPotential(ValueError):
    """The potential produced a non-finite value or an unusable description."""


class OutOfRange(ValueError):
    """A spectral parameter or window lies outside the admissible range."""


@dataclass(frozen=True)
class RationalTail:
    """A(x) ~ C |x|^-d for large |x|."""

    d: float
    C: float = 1.0

    def __post_init__(self):
        if not self.d > 1 or not self.C > 0:
            raise InvalidPotential("rational tail needs d > 1 and C > 0")


@dataclass(frozen=True)
class ExponentialTail:
    """A(x) ~ C exp(-|x|^delta) for large |x|."""

    delta: float
    C: float = 1.0

    def __post_init__(self):
        if not self.delta > 0 or not self.C > 0:
            raise InvalidPotential("exponential tail needs delta > 0 and C > 0")


@dataclass(frozen=True)
class GenericTail:
    """Decay known only through the exponent tau."""


Tail = Union[RationalTail, ExponentialTail, GenericTail]


@dataclass(frozen=True)
class Potential:
    """An even, single-hump amplitude profile with analytic derivatives.

    ``diff(x, y)``, when given, returns A(x) - A(y) without cancellation for
    nearby arguments; it keeps f(x, a) = A(a)^2 - A(x)^2 accurate close to
    the turning points.
    """

    name: str
    A: Callable
    A1: Callable
    A2: Callable
    a_max: float
    tau: float
    tail: Tail = field(default_factory=GenericTail)
    x_max: float = 50.0
    diff: Optional[Callable] = None

    def eval_A(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x) + self.A(x)

    def eval_A1(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x) + self.A1(x)

    def eval_A2(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x) + self.A2(x)

    def A_minus(self, x, y):
        """A(x) - A(y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        plain = self.eval_A(x) - self.eval_A(y)
        if self.diff is None:
            return plain
        with np.errstate(all="ignore"):
            d = self.diff(x, y)
        return np.where(np.isfinite(d), d, plain)

    def scaled(self, eps: float) -> "Potential":
        """The potential eps * A."""
        diff = None if self.diff is None else (lambda x, y: eps * self.diff(x, y))
        return Potential(f"{eps!r}*{self.name}", lambda x: eps * self.A(x),
                         lambda x: eps * self.A1(x), lambda x: eps * self.A2(x),
                         eps * self.a_max, self.tau, self.tail, self.x_max, diff)


@dataclass(frozen=True)
class SpectralPoint:
    """Eigenvalue parameter mu, turning point a with A(a) = mu, Liouville radius alpha."""

    mu: float
    a: float
    alpha: float


# catalog kernels ----------------------------------------------------------

def _lorentz_A(x):
    return 1.0 / (1.0 + x * x)


def _lorentz_A1(x):
    return -2.0 * x / (1.0 + x * x) ** 2


def _lorentz_A2(x):
    return (6.0 * x * x - 2.0) / (1.0 + x * x) ** 3


def _lorentz_diff(x, y):
    return (y - x) * (y + x) / ((1.0 + x * x) * (1.0 + y * y))


def _sech_A(x):
    e = np.exp(-2.0 * np.abs(x))
    return 2.0 * np.exp(-np.abs(x)) / (1.0 + e)


def _sech_A1(x):
    return -_sech_A(x) * np.tanh(x)


def _sech_A2(x):
    s = _sech_A(x)
    return s * (1.0 - 2.0 * s * s)


def _sech_diff(x, y):
    return -2.0 * np.sinh(0.5 * (x + y)) * np.sinh(0.5 * (x - y)) * _sech_A(x) * _sech_A(y)


def _gauss_A(x):
    return np.exp(-x * x)


def _gauss_A1(x):
    return -2.0 * x * np.exp(-x * x)


def _gauss_A2(x):
    return (4.0 * x * x - 2.0) * np.exp(-x * x)


def _gauss_diff(x, y):
    return -np.exp(-x * x) * np.expm1((x - y) * (x + y))


_KERNELS = {
    "rational_lorentz": (_lorentz_A, _lorentz_A1, _lorentz_A2, _lorentz_diff),
    "sech": (_sech_A, _sech_A1, _sech_A2, _sech_diff),
    "gaussian": (_gauss_A, _gauss_A1, _gauss_A2, _gauss_diff),
}


def _from_kernel(kernel: str, amplitude: float = 1.0, width: float = 1.0, tail: Optional[Tail] = None,
                 tau: float = 1.0, name: Optional[str] = None) -> Potential:
    if kernel not in _KERNELS:
        raise InvalidPotential(f"unknown kernel {kernel!r}; choose from {sorted(_KERNELS)}")
    if not (amplitude > 0 and width > 0):
        raise InvalidPotential("amplitude and width must be positive")
    K, K1, K2, Kd = _KERNELS[kernel]
    c, w = float(amplitude), float(width)
    default_tail = {
        "rational_lorentz": RationalTail(2.0, c * w * w),
        "sech": ExponentialTail(1.0, 2.0 * c),
        "gaussian": ExponentialTail(2.0, c),
    }[kernel]
    if tail is None:
        tail = default_tail
    x_max = (50.0 if isinstance(tail, RationalTail) else 10.0) * w
    if c == 1.0 and w == 1.0:
        return Potential(name or kernel, K, K1, K2, 1.0, tau, tail, x_max, Kd)
    return Potential(
        name or f"{kernel}(amplitude={c!r},width={w!r})",
        lambda x: c * K(x / w),
        lambda x: c / w * K1(x / w),
        lambda x: c / (w * w) * K2(x / w),
        c, tau, tail, x_max,
        lambda x, y: c * Kd(x / w, y / w),
    )


def rational_lorentz() -> Potential:
    """A(x) = 1/(1+x^2)."""
    return _from_kernel("rational_lorentz")


def sech() -> Potential:
    """A(x) = sech(x)."""
    return _from_kernel("sech")


def gaussian() -> Potential:
    """A(x) = exp(-x^2)."""
    return _from_kernel("gaussian")


CATALOG = {
    "rational_lorentz": rational_lorentz,
    "sech": sech,
    "gaussian": gaussian,
}


def get_potential(name: str) -> Potential:
    try:
        return CATALOG[name]()
    except KeyError:
        raise InvalidPotential(f"unknown potential {name!r}; catalog: {', '.join(sorted(CATALOG))}") from None


def _parse_tail(spec) -> Optional[Tail]:
    if spec is None:
        return None
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = str(spec.get("kind", "")).lower()
    if kind == "rational":
        return RationalTail(float(spec["d"]), float(spec.get("C", 1.0)))
    if kind == "exponential":
        return ExponentialTail(float(spec["delta"]), float(spec.get("C", 1.0)))
    if kind == "generic":
        return GenericTail()
    raise InvalidPotential(f"unknown tail_class {spec!r}")


def potential_from_spec(spec) -> Potential:
    """Build a potential from a name or an inline description.

    The inline form is a mapping::

        {"body": {"kernel": "sech", "params": {"amplitude": 1.5, "width": 2.0}},
         "tail_class": {"kind": "exponential", "delta": 1, "C": 3.0},
         "tau": 1.0}
    """
    if isinstance(spec, str):
        return get_potential(spec)
    if not isinstance(spec, dict) or "body" not in spec:
        raise InvalidPotential("inline potential needs a 'body' entry")
    body = spec["body"]
    try:
        kernel = body["kernel"]
        params = dict(body.get("params", {}))
        tau = float(spec.get("tau", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPotential(f"malformed potential spec: {exc}") from None
    unknown = set(params) - {"amplitude", "width"}
    if unknown:
        raise InvalidPotential(f"unknown kernel parameters {sorted(unknown)}")
    if not tau > 0:
        raise InvalidPotential("tau must be positive")
    return _from_kernel(kernel, params.get("amplitude", 1.0), params.get("width", 1.0),
                        _parse_tail(spec.get("tail_class")), tau, spec.get("name"))


# validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    witness: Optional[float] = None
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    potential: str
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _first(x, mask):
    idx = np.flatnonzero(mask)
    return float(x[idx[0]]) if idx.size else None


def validate_assumptions(p: Potential, x_max: Optional[float] = None, n: int = 2001) -> ValidationReport:
    """Check positivity, evenness, monotone lobes, a strict maximum and tail decay on a grid.

    The grid is symmetric on [-x_max, x_max]; decay is judged on the
    samples with |x| >= x_max / 2, where each of |A| |x|^(1+tau),
    |A'| |x|^(2+tau), |A''| |x|^(3+tau) must not grow (log-log slope <= 0.1).
    Smoothness beyond the supplied derivatives cannot be sampled and is
    taken on trust.
    """
    X = float(p.x_max if x_max is None else x_max)
    if X < 10:
        raise ValueError("validation grid must reach |x| >= 10")
    x = np.linspace(-X, X, n)
    A, A1, A2 = p.eval_A(x), p.eval_A1(x), p.eval_A2(x)
    for arr, lab in ((A, "A"), (A1, "A'"), (A2, "A''")):
        bad = ~np.isfinite(arr)
        if bad.any():
            raise InvalidPotential(f"non-finite {lab} at x={_first(x, bad)!r}")
    checks = []

    neg = A <= 0
    checks.append(Check("positivity", not neg.any(), _first(x, neg)))

    Am = p.eval_A(-x)
    scale = np.maximum(np.abs(A), np.finfo(float).tiny)
    odd = np.abs(Am - A) > 1e-12 * scale
    checks.append(Check("evenness", not odd.any(), _first(x, odd)))

    nz = x != 0
    mono = nz & ~(x * A1 < 0)
    checks.append(Check("monotone_lobes", not mono.any(), _first(x, mono)))

    a20 = float(p.eval_A2(0.0))
    checks.append(Check("strict_maximum", a20 < 0, 0.0 if a20 >= 0 else None, f"A''(0)={a20:.6g}"))

    tail = x >= X / 2
    tx = x[tail]
    for lab, arr, k in (("decay_A", A, 1.0), ("decay_A1", A1, 2.0), ("decay_A2", A2, 3.0)):
        prod = np.abs(arr[tail]) * tx ** (k + p.tau)
        ok_pts = prod > 0
        if ok_pts.sum() >= 2:
            slope = float(np.polyfit(np.log(tx[ok_pts]), np.log(prod[ok_pts]), 1)[0])
        else:
            slope = -math.inf
        passed = slope <= 0.1
        checks.append(Check(lab, passed, None if passed else float(tx[-1]), f"log-log slope {slope:.3g}"))
    return ValidationReport(p.name, tuple(checks))


# turning points -----------------------------------------------------------

def turning_point(p: Potential, mu: float) -> SpectralPoint:
    """Solve A(a) = mu on [0, inf) and attach alpha(a)."""
    mu = float(mu)
    if not mu > 0:
        raise OutOfRange(f"mu must be positive, got {mu!r}")
    if mu > p.a_max * (1 + 1e-15):
        raise OutOfRange(f"mu={mu!r} exceeds A_max={p.a_max!r}")
    if mu >= p.a_max:
        return SpectralPoint(mu, 0.0, 0.0)
    from .liouville import alpha_of_a

    a = _solve_turning(p, mu)
    return SpectralPoint(mu, a, alpha_of_a(p, a))


def _solve_turning(p: Potential, mu: float) -> float:
    lo, hi = 0.0, float(p.x_max)
    while float(p.eval_A(hi)) > mu:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise OutOfRange(f"no turning point found for mu={mu!r}")
    while hi - lo > 1e-13 * (1.0 + lo):
        m = 0.5 * (lo + hi)
        if float(p.eval_A(m)) > mu:
            lo = m
        else:
            hi = m
    a = 0.5 * (lo + hi)
    d1 = float(p.eval_A1(a))
    if d1 != 0:
        step = (float(p.eval_A(a)) - mu) / d1
        if lo <= a - step <= hi:
            a -= step
    return a


def finite_difference_audit(p: Potential, h: float = 1e-5, x_max: float = 10.0, n: int = 401) -> float:
    """Worst discrepancy between analytic and central-difference derivatives.

    A' is compared with differences of A, and A'' with differences of the
    analytic A' (differencing A twice at h = 1e-5 would be dominated by
    rounding). Errors are relative to the largest derivative magnitude on
    the grid, or absolute when that magnitude is zero.
    """
    x = np.linspace(-x_max, x_max, n)
    fd1 = (p.eval_A(x + h) - p.eval_A(x - h)) / (2 * h)
    fd2 = (p.eval_A1(x + h) - p.eval_A1(x - h)) / (2 * h)
    worst = 0.0
    for exact, approx in ((p.eval_A1(x), fd1), (p.eval_A2(x), fd2)):
        scale = float(np.max(np.abs(exact)))
        err = float(np.max(np.abs(exact - approx)))
        worst = max(worst, err / scale if scale > 0 else err)
    return worst
