import math
import warnings

import numpy as np
import pytest

from conftest import oracle_roots
from zswkb.oracle import (
    ORACLE_HBAR_FLOOR,
    ConditioningWarning,
    ResolutionWarning,
    ShootingConfig,
    default_half_width,
    jost_scattering_oracle,
    mismatch,
    norming_sign_oracle,
    shoot,
    spectrum_scan,
)
from zswkb.potentials import OutOfRange


def test_sech_spectrum_exact():
    roots = oracle_roots("sech", 0.2, 0.02)
    exact = [1 - (n + 0.5) * 0.2 for n in range(5)]
    assert len(roots) == 5
    np.testing.assert_allclose(roots, exact, atol=1e-8)


def test_sech_norming_signs_alternate(sech_pot):
    for n, mu in enumerate(oracle_roots("sech", 0.2, 0.02)):
        assert norming_sign_oracle(sech_pot, 0.2, mu) == (-1) ** n


def test_mismatch_changes_sign_across_eigenvalue(sech_pot):
    mu = 0.9
    assert mismatch(sech_pot, 0.2, mu - 1e-3) * mismatch(sech_pot, 0.2, mu + 1e-3) < 0
    assert abs(mismatch(sech_pot, 0.2, mu)) < 1e-8


def test_matching_point_does_not_move_eigenvalues(sech_pot):
    cfg = ShootingConfig(matching_point=0.7)
    r = spectrum_scan(sech_pot, 0.2, 0.6, 1.0, cfg)
    np.testing.assert_allclose(r, [0.9, 0.7], atol=1e-8)


def test_shot_is_finite_for_wide_domain(lorentz):
    r = shoot(lorentz, 0.05, 0.3, ShootingConfig(domain_half_width=400.0))
    assert all(math.isfinite(v) for v in (r.theta_left, r.theta_right, r.log_r_left, r.log_r_right))
    assert r.log_r_left > 100


def test_coarse_resolution_warns(sech_pot):
    with pytest.warns(ResolutionWarning):
        spectrum_scan(sech_pot, 0.2, 0.05, 1.0, ShootingConfig(mu_scan_resolution=0.5))


def test_non_eigenvalue_warns(sech_pot):
    with pytest.warns(ConditioningWarning):
        norming_sign_oracle(sech_pot, 0.2, 0.8)


def test_config_validation():
    with pytest.raises(ValueError):
        ShootingConfig(domain_half_width=-1.0)
    with pytest.raises(ValueError):
        ShootingConfig(ode_rel_tol=0.0)
    with pytest.raises(ValueError):
        ShootingConfig(mu_scan_resolution=0.0)


def test_hbar_floor(lorentz):
    with pytest.raises(OutOfRange):
        spectrum_scan(lorentz, 0.5 * ORACLE_HBAR_FLOOR, 0.3, 1.0)
    with pytest.raises(OutOfRange):
        jost_scattering_oracle(lorentz, 0.5 * ORACLE_HBAR_FLOOR, 1.0)


def test_window_validation(lorentz):
    with pytest.raises(OutOfRange):
        spectrum_scan(lorentz, 0.1, 0.8, 0.5)
    with pytest.raises(OutOfRange):
        shoot(lorentz, 0.1, 1.5)


def test_half_width_rule(lorentz, sech_pot):
    for p, mu in ((lorentz, 0.3), (lorentz, 0.01), (sech_pot, 0.05)):
        L = default_half_width(p, mu)
        assert float(p.eval_A(L)) <= 1e-3 * mu
    assert default_half_width(lorentz, 0.5) == 50.0


@pytest.mark.parametrize("lam", [0.5, 1.0])
def test_sech_reflectionless_and_exact_transmission(sech_pot, lam):
    hbar = 0.2
    R, T = jost_scattering_oracle(sech_pot, hbar, lam)
    mus = [1 - (n + 0.5) * hbar for n in range(5)]
    exact = np.prod([(lam + 1j * m) / (lam - 1j * m) for m in mus])
    assert abs(R) < 1e-6
    assert abs(T - exact) < 1e-8


@pytest.mark.parametrize("hbar,lam", [(0.1, 1.0), (0.05, 1.0), (0.5, 0.2)])
def test_transmission_reflection_identity(lorentz, hbar, lam):
    # |T|^2 - |R|^2 = 1; the last case has |R| ~ 0.37, so the sign of |R|^2 is visible
    R, T = jost_scattering_oracle(lorentz, hbar, lam)
    assert abs(abs(T) ** 2 - abs(R) ** 2 - 1) < 1e-7


def test_jost_independent_of_half_width(lorentz):
    R1, T1 = jost_scattering_oracle(lorentz, 0.1, 1.0)
    R2, T2 = jost_scattering_oracle(lorentz, 0.1, 1.0, half_width=1.5 * default_half_width(lorentz, 1.0))
    assert abs(T1 - T2) < 1e-7


def test_scan_is_deterministic(sech_pot):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = spectrum_scan(sech_pot, 0.25, 0.05, 1.0)
        b = spectrum_scan(sech_pot, 0.25, 0.05, 1.0)
    assert a == b
