"""Semiclassical spectral toolkit for the Zakharov-Shabat operator with bell-shaped potentials."""
from .potentials import (
    CATALOG,
    InvalidPotential,
    OutOfRange,
    Potential,
    SpectralPoint,
    get_potential,
    potential_from_spec,
    rational_lorentz,
    sech,
    gaussian,
    turning_point,
)
from .semiclassics import (
    EigenRecord,
    approximate_solution,
    bs_eigenvalues,
    connection_coefficients,
    count_eigenvalues,
    near_zero_window,
    norming_constant,
)
from .scattering import error_control_variation, sigma_action, wkb_scattering
from .oracle import ShootingConfig, jost_scattering_oracle, mismatch, norming_sign_oracle, spectrum_scan

__version__ = "0.1.0"
