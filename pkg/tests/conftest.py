from functools import lru_cache

import mpmath as mp
import pytest

from zswkb.oracle import spectrum_scan
from zswkb.potentials import gaussian, get_potential, rational_lorentz, sech
from zswkb.semiclassics import bs_eigenvalues


@pytest.fixture(scope="session")
def lorentz():
    return rational_lorentz()


@pytest.fixture(scope="session")
def sech_pot():
    return sech()


@pytest.fixture(scope="session")
def gauss():
    return gaussian()


def pcf_reference(x, b, dps=50):
    """U, U', Ubar, Ubar' from the confluent hypergeometric representation in mpmath."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        b = mp.mpf(b)
        half, q = mp.mpf(1) / 2, mp.mpf(1) / 4

        def comb(t, which):
            z = t * t / 2
            e = mp.exp(-t * t / 4)
            f1 = mp.hyp1f1(q + b / 2, half, z)
            f2 = mp.hyp1f1(3 * q + b / 2, 3 * half, z)
            c = 1 / mp.sqrt(mp.pi)
            g1 = c * 2 ** (-(2 * b + 1) / 4) * mp.gamma(q - b / 2)
            g2 = -c * 2 ** (-(2 * b - 1) / 4) * mp.gamma(3 * q - b / 2)
            if which == "u":
                s1, s2 = mp.sin(mp.pi / 4 - b * mp.pi / 2), mp.sin(3 * mp.pi / 4 - b * mp.pi / 2)
            else:
                s1, s2 = mp.sin(3 * mp.pi / 4 - b * mp.pi / 2), mp.sin(5 * mp.pi / 4 - b * mp.pi / 2)
            return e * (g1 * s1 * f1 + g2 * s2 * t * f2)

        u = comb(x, "u")
        ub = comb(x, "ub")
        u1 = mp.diff(lambda t: comb(t, "u"), x)
        ub1 = mp.diff(lambda t: comb(t, "ub"), x)
        return float(u), float(u1), float(ub), float(ub1)


@lru_cache(maxsize=None)
def oracle_roots(name: str, hbar: float, mu_lo: float) -> tuple:
    """Shooting-method eigenvalue parameters above mu_lo, shared across test modules."""
    p = get_potential(name)
    return tuple(spectrum_scan(p, hbar, mu_lo, p.a_max))


@lru_cache(maxsize=None)
def bs_records(name: str, hbar: float, mu_floor: float) -> tuple:
    return tuple(bs_eigenvalues(get_potential(name), hbar, mu_floor))


def pair_levels(records, roots):
    """Match WKB records with oracle roots level by level (both sorted by decreasing mu)."""
    return list(zip(records, roots))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
