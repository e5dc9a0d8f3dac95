"""Acceptance criteria, one test each.

Every test prints a PASS/FAIL line (also collected into the pytest terminal
summary) and then asserts the same condition, so a failure is never hidden.
Run directly with ``python3 tests/test_acceptance.py`` for the lines alone.
"""
import json
import math
import time

import mpmath as mp
import numpy as np
import pytest

from conftest import bs_records, oracle_roots
from zswkb.cli import main as cli_main
from zswkb.liouville import ErrorTermEvaluator, action_phi, alpha_of_a, build_map
from zswkb.numerics import loglog_slope
from zswkb.oracle import jost_scattering_oracle, norming_sign_oracle
from zswkb.potentials import get_potential, turning_point
from zswkb.scattering import sigma_action, wkb_scattering
from zswkb.semiclassics import (
    approximate_solution,
    bs_eigenvalues,
    connection_coefficients,
    count_eigenvalues,
    default_zeta_start,
    integrate_recessive,
)
from zswkb.specfun import C_STAR, airy, crossing_root_rho, pcf, pcf_scaled

RESULTS = {}


def report(k: int, ok: bool, title: str, detail: str, elapsed: float, budget: float):
    ok = bool(ok) and elapsed < budget
    line = f"ACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{elapsed:.1f} s / {budget:g} s]"
    RESULTS[k] = line
    print(line)
    assert ok, line


def _wrap(t):
    return (t + math.pi) % (2 * math.pi) - math.pi


def test_criterion_01_sech_levels():
    t0 = time.perf_counter()
    recs = bs_eigenvalues(get_potential("sech"), 0.2)
    errs = [abs(r.mu_wkb - (1 - (r.n + 0.5) * 0.2)) for r in recs]
    ok = [r.n for r in recs] == [0, 1, 2, 3, 4] and max(errs) <= 1e-8
    report(1, ok, "sech Bohr-Sommerfeld levels", f"{len(recs)} levels, max error {max(errs):.2e} (<= 1e-8)",
           time.perf_counter() - t0, 5)


def test_criterion_02_bs_rate():
    t0 = time.perf_counter()
    hs = [0.4, 0.2, 0.1, 0.05]
    errs, shapes = [], []
    for h in hs:
        recs = bs_records("rational_lorentz", h, 0.3)
        roots = oracle_roots("rational_lorentz", h, 0.3)
        shapes.append((len(recs), len(roots)))
        errs.append(max(abs(r.mu_wkb - m) for r, m in zip(recs, roots)))
    slope = loglog_slope(hs, errs)
    ok = slope >= 1.5 and all(a == b for a, b in shapes)
    report(2, ok, "Bohr-Sommerfeld error rate",
           f"max errors {', '.join(f'{e:.2e}' for e in errs)}, slope {slope:.3f} (>= 1.5)",
           time.perf_counter() - t0, 120)


def test_criterion_03_counting():
    t0 = time.perf_counter()
    p = get_potential("rational_lorentz")
    rng = np.random.default_rng(2024)
    bad = []
    checked = 0
    for h in (0.2, 0.1):
        roots = np.array(oracle_roots("rational_lorentz", h, 0.1))
        for _ in range(20):
            m1, m2 = np.sort(rng.uniform(0.1, 1.0, 2))
            est, cnt = count_eigenvalues(p, m1, m2, h)
            oc = int(np.count_nonzero((roots > m1) & (roots < m2)))
            checked += 1
            if cnt != oc or abs(cnt - est) > 1:
                bad.append((h, round(float(m1), 6), round(float(m2), 6), cnt, oc, round(est, 3)))
    detail = f"{checked - len(bad)}/{checked} windows agree with the oracle and the estimate"
    if bad:
        detail += f"; mismatches (hbar, mu1, mu2, count, oracle, estimate): {bad}"
    report(3, not bad, "eigenvalue counting", detail, time.perf_counter() - t0, 120)


def test_criterion_04_norming_signs():
    t0 = time.perf_counter()
    p = get_potential("rational_lorentz")
    roots = oracle_roots("rational_lorentz", 0.1, 0.05)
    signs = [norming_sign_oracle(p, 0.1, mu) for mu in roots]
    ok = len(signs) > 0 and signs == [(-1) ** n for n in range(len(signs))]
    report(4, ok, "norming constant signs", f"{len(signs)} eigenvalues, signs {signs}",
           time.perf_counter() - t0, 60)


def _pcf_zero_closed(b):
    """The four x = 0 values from their Gamma-function closed forms."""
    with mp.workdps(30):
        b = mp.mpf(b)
        c = 1 / mp.sqrt(mp.pi)
        g1 = c * 2 ** (-(2 * b + 1) / 4) * mp.gamma(mp.mpf(1) / 4 - b / 2)
        g2 = c * 2 ** (-(2 * b - 1) / 4) * mp.gamma(mp.mpf(3) / 4 - b / 2)
        s = lambda t: mp.sin(mp.pi * t)  # noqa: E731
        return [float(g1 * s(mp.mpf(1) / 4 - b / 2)), float(-g2 * s(mp.mpf(3) / 4 - b / 2)),
                float(g1 * s(mp.mpf(3) / 4 - b / 2)), float(-g2 * s(mp.mpf(5) / 4 - b / 2))]


def test_criterion_05_special_functions():
    t0 = time.perf_counter()
    xa = np.linspace(-30, 30, 200)
    ai = airy(xa)
    w_ai = float(np.max(np.abs((ai.ai * ai.bi1 - ai.ai1 * ai.bi) * math.pi - 1)))
    w_pcf = 0.0
    for b in (0.0, -0.6, -3.7, -12.0):
        x = np.linspace(0.0, 40.0, 50)
        w_pcf = max(w_pcf, float(np.max(np.abs(pcf_scaled(x, b).wronskian_ratio() - 1))))
    z_err = 0.0
    for b in (0.0, -1.3, -10.0):
        got = pcf(0.0, b)
        ref = _pcf_zero_closed(b)
        scale = max(abs(v) for v in ref)
        z_err = max(z_err, max(abs(g - r) / scale for g, r in zip((got.u, got.u1, got.ubar, got.ubar1), ref)))
    nb = 200.0
    two = 2 * math.sqrt(nb) + C_STAR * nb ** (-1 / 6)
    rho_err = abs(crossing_root_rho(-nb) - two) / two
    ok = w_ai <= 1e-8 and w_pcf <= 1e-8 and z_err <= 1e-10 and rho_err <= 0.02
    report(5, ok, "special functions",
           f"Airy Wronskian {w_ai:.1e}, PCF Wronskian {w_pcf:.1e} (200 points each), "
           f"x=0 values {z_err:.1e}, rho(-200) vs two-term form {rho_err:.1e} relative (<= 2e-2)",
           time.perf_counter() - t0, 10)


def _lorentz_psi_regular(x, a, zeta, alpha):
    d = zeta ** 2 - alpha ** 2
    q = (x ** 2 - a ** 2) * (x ** 2 + a ** 2 + 2)
    return (0.25 * (3 * zeta ** 2 + 2 * alpha ** 2) / d ** 2
            - (1 + a ** 2) ** 4 * d * (5 * x ** 6 + 9 * x ** 4 + 3 * x ** 2 + a ** 4 + 2 * a ** 2) / q ** 3
            + (1 + a ** 2) ** 3 * d * (-3 * x ** 4 - 2 * x ** 2 + a ** 2 + 2)
            / ((x ** 2 - a ** 2) * (x ** 2 + a ** 2 + 2) ** 3))


def _lorentz_psi_critical(x, zeta):
    return 0.75 / zeta ** 2 - zeta ** 2 * (3 * x ** 6 + 7 * x ** 4 + 7 * x ** 2 + 3) / (x ** 4 * (x ** 2 + 2) ** 3)


def test_criterion_06_liouville():
    t0 = time.perf_counter()
    p = get_potential("rational_lorentz")
    phi_err = max(abs(0.5 * math.pi * alpha_of_a(p, a) ** 2 - action_phi(p, a)) for a in np.linspace(0.05, 5, 40))
    m = build_map(p, 1.0)
    xs = np.concatenate([np.linspace(-60, 60, 241), [1e3, -1e3, 1.0, -1.0, 0.0]])
    rt_err = max(abs(m.x_of_zeta(m.zeta_of_x(x)) - x) / (1 + abs(x)) for x in xs)
    ev = ErrorTermEvaluator(m)
    ev0 = ErrorTermEvaluator(build_map(p, 0.0))
    psi_err = 0.0
    with mp.workdps(40):
        for x in (0.3, 0.6, 1.5, 2.0, 4.0, 10.0):
            z = m.zeta_of_x(x)
            if ev.in_band(z):
                continue
            ref = float(_lorentz_psi_regular(mp.mpf(x), mp.mpf(1), mp.mpf(z), mp.mpf(m.alpha)))
            psi_err = max(psi_err, abs(float(ev.psi_at_x(np.array([x]))[0]) - ref) / abs(ref))
        for x in (0.5, 1.0, 3.0):
            z = ev0.map.zeta_of_x(x)
            ref = float(_lorentz_psi_critical(mp.mpf(x), mp.mpf(z)))
            psi_err = max(psi_err, abs(float(ev0.psi_at_x(np.array([x]))[0]) - ref) / abs(ref))
    ok = phi_err <= 1e-9 and rt_err <= 1e-8 and psi_err <= 1e-8
    report(6, ok, "Liouville map consistency",
           f"action vs alpha {phi_err:.1e}, round trip {rt_err:.1e}, psi vs closed forms {psi_err:.1e}",
           time.perf_counter() - t0, 30)


def test_criterion_07_envelope():
    t0 = time.perf_counter()
    p = get_potential("rational_lorentz")
    pt = turning_point(p, float(p.eval_A(1.0)))
    hs = np.array([0.2, 0.1, 0.05])
    envs = [approximate_solution(p, pt, h, "Y1").relative_envelope(0.0) for h in hs]
    slope = loglog_slope(hs, envs)
    h = 0.1
    Y = integrate_recessive(p, pt, h, 0.0, dense=True)
    ap = approximate_solution(p, pt, h, "Y1")
    worst = 0.0
    for z in np.linspace(0.0, 0.999 * default_zeta_start(pt.alpha, h), 25):
        v, _, env = ap.value_at(z)
        worst = max(worst, abs(Y(z)[0] - v) / env)
    ok = slope >= 0.6 and worst <= 1.0
    report(7, ok, "error envelope", f"slope {slope:.3f} (>= 0.6), largest |Y - approx|/envelope {worst:.3f} (<= 1)",
           time.perf_counter() - t0, 60)


def test_criterion_08_scattering():
    t0 = time.perf_counter()
    p = get_potential("rational_lorentz")
    defects, refl = [], []
    phase_err = None
    for h in (0.1, 0.05):
        R, T = jost_scattering_oracle(p, h, 1.0)
        defects.append(abs(abs(T) ** 2 - abs(R) ** 2 - 1))
        refl.append(abs(R) / h)
        if h == 0.05:
            phase_err = abs(_wrap(np.angle(T) - wkb_scattering(p, 1.0, h).sigma / h))
    s0 = abs(sigma_action(p, 1e-14) - math.pi)
    ok = max(defects) <= 1e-6 and phase_err <= 0.15 and max(refl) <= 10 and s0 <= 1e-6
    report(8, ok, "scattering",
           f"|T|^2-|R|^2-1 {max(defects):.1e}, phase error {phase_err:.4f} rad, max |R|/hbar {max(refl):.1e}, "
           f"sigma(0+) - pi {s0:.1e}", time.perf_counter() - t0, 60)


def test_criterion_09_connection():
    t0 = time.perf_counter()
    p = get_potential("rational_lorentz")
    pt = turning_point(p, float(p.eval_A(1.0)))
    cs = []
    for h in (0.2, 0.1, 0.05):
        r = connection_coefficients(p, pt, h)
        (s11, s12), _ = r.sigma
        (p11, p12), _ = r.predicted
        cs.append(max(abs(s11 - p11), abs(s12 - p12)) / h ** (2 / 3))
    spread = max(cs) / min(cs)
    report(9, spread <= 3, "connection coefficients",
           f"C per hbar {', '.join(f'{c:.4f}' for c in cs)}, spread {spread:.2f}x (<= 3x)",
           time.perf_counter() - t0, 60)


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    configs = [
        ["spectrum", "--potential", "rational_lorentz", "--hbar", "0.2,0.1", "--oracle"],
        ["count", "--potential", "sech", "--hbar", "0.2,0.1", "--mu1", "0.2", "--mu2", "0.9", "--oracle"],
        ["scattering", "--potential", "rational_lorentz", "--hbar", "0.1", "--lambda", "0.5,1", "--oracle",
         "--format", "json"],
        ["liouville_table", "--potential", "gaussian", "--hbar", "0.1"],
        ["convergence", "--potential", "rational_lorentz", "--hbar", "0.4,0.2"],
        ["specfun_table", "--potential", "sech", "--hbar", "1", "--b", "0,-2.5"],
    ]
    same = []
    for k, argv in enumerate(configs):
        outs = []
        for rep in range(2):
            path = tmp_path / f"run{k}_{rep}"
            assert cli_main(argv + ["--output", str(path)]) == 0
            outs.append(path.read_bytes())
        same.append(outs[0] == outs[1])
        if "json" in argv:
            json.loads(outs[0])
    report(10, all(same), "CLI determinism", f"{sum(same)}/{len(same)} configurations byte-identical",
           time.perf_counter() - t0, 600)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
