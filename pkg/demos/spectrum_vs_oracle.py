"""Bohr-Sommerfeld levels of A = 1/(1+x^2) against the shooting oracle."""
import numpy as np

from zswkb import bs_eigenvalues, get_potential, spectrum_scan
from zswkb.numerics import loglog_slope

p = get_potential("rational_lorentz")
hs, worst = [0.4, 0.2, 0.1, 0.05], []
for h in hs:
    recs = bs_eigenvalues(p, h, 0.3)
    roots = spectrum_scan(p, h, 0.3, p.a_max)
    errs = [abs(r.mu_wkb - m) for r, m in zip(recs, roots)]
    worst.append(max(errs))
    print(f"hbar={h:<5} levels={len(recs):2d} max|mu_wkb - mu_oracle|={worst[-1]:.3e}")
print(f"log-log slope {loglog_slope(np.array(hs), np.array(worst)):.3f} (theory 5/3)")
