import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zswkb.potentials import (
    CATALOG,
    ExponentialTail,
    InvalidPotential,
    OutOfRange,
    Potential,
    RationalTail,
    finite_difference_audit,
    get_potential,
    potential_from_spec,
    turning_point,
    validate_assumptions,
)
from zswkb.liouville import f_value


def test_lorentz_passes_all_checks(lorentz):
    rep = validate_assumptions(lorentz)
    assert rep.ok, rep.failed()


def test_gaussian_passes_all_checks(gauss):
    assert validate_assumptions(gauss).ok


def test_sech_passes_all_checks(sech_pot):
    assert validate_assumptions(sech_pot).ok


def test_negative_constant_fails_positivity():
    p = Potential("neg", lambda x: -1.0 + 0 * x, lambda x: 0 * x, lambda x: 0 * x, -1.0, 1.0)
    rep = validate_assumptions(p, x_max=10.0)
    assert not rep["positivity"].passed
    assert rep["positivity"].witness is not None


def test_non_finite_values_rejected():
    p = Potential("nan", lambda x: np.where(x == 0, np.nan, 1.0 / (1 + x * x)),
                  lambda x: 0 * x, lambda x: 0 * x, 1.0, 1.0)
    with pytest.raises(InvalidPotential):
        validate_assumptions(p, x_max=10.0, n=2001)


def test_small_grid_rejected(lorentz):
    with pytest.raises(ValueError):
        validate_assumptions(lorentz, x_max=5.0)


def test_turning_point_half(lorentz):
    pt = turning_point(lorentz, 0.5)
    assert pt.a == pytest.approx(1.0, abs=1e-12)
    assert pt.alpha > 0


def test_turning_point_fifth(lorentz):
    assert turning_point(lorentz, 0.2).a == pytest.approx(2.0, abs=1e-12)


def test_turning_point_critical(lorentz):
    pt = turning_point(lorentz, 1.0)
    assert pt.a == 0.0 and pt.alpha == 0.0


@pytest.mark.parametrize("mu", [0.0, -0.1, 1.5])
def test_turning_point_out_of_range(lorentz, mu):
    with pytest.raises(OutOfRange):
        turning_point(lorentz, mu)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.999))
def test_turning_point_is_right_inverse(mu):
    for name in CATALOG:
        p = get_potential(name)
        a = turning_point(p, mu).a
        assert abs(float(p.eval_A(a)) - mu) <= 1e-12 * p.a_max


def test_turning_point_monotone(lorentz):
    mus = np.linspace(0.05, 0.95, 30)
    a = [turning_point(lorentz, m).a for m in mus]
    assert np.all(np.diff(a) < 0)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_derivative_audit(name):
    assert finite_difference_audit(get_potential(name)) <= 1e-6


def test_constant_potential_audit_is_zero():
    p = Potential("const", lambda x: 1.0 + 0 * x, lambda x: 0 * x, lambda x: 0 * x, 1.0, 1.0)
    x = np.linspace(-10, 10, 401)
    fd = (p.eval_A(x + 1e-5) - p.eval_A(x - 1e-5)) / 2e-5
    assert np.max(np.abs(fd)) == 0.0
    assert finite_difference_audit(p) == 0.0


def test_f_is_even(lorentz):
    x = np.linspace(0, 20, 101)
    assert np.array_equal(f_value(lorentz, x, 1.3), f_value(lorentz, -x, 1.3))


def test_evenness_of_catalog():
    x = np.linspace(-30, 30, 601)
    for name in CATALOG:
        p = get_potential(name)
        assert np.allclose(p.eval_A(x), p.eval_A(-x), rtol=1e-12, atol=0)


def test_unknown_name_lists_catalog():
    with pytest.raises(InvalidPotential, match="rational_lorentz"):
        get_potential("triangle")


def test_inline_spec_scales_kernel():
    p = potential_from_spec({"body": {"kernel": "sech", "params": {"amplitude": 2.0, "width": 3.0}},
                             "tail_class": {"kind": "exponential", "delta": 1, "C": 4.0}, "tau": 1.0})
    assert p.a_max == 2.0
    assert float(p.eval_A(3.0)) == pytest.approx(2.0 / math.cosh(1.0))
    assert isinstance(p.tail, ExponentialTail)
    assert validate_assumptions(p).ok


def test_inline_spec_default_tail():
    p = potential_from_spec({"body": {"kernel": "rational_lorentz"}})
    assert isinstance(p.tail, RationalTail) and p.tail.d == 2.0


@pytest.mark.parametrize("bad", [
    {"body": {"kernel": "nope"}},
    {"body": {"kernel": "sech", "params": {"height": 1}}},
    {"nobody": 1},
    {"body": {"kernel": "sech"}, "tail_class": {"kind": "rational", "d": 0.5}},
])
def test_inline_spec_errors(bad):
    with pytest.raises(InvalidPotential):
        potential_from_spec(bad)
