"""Connection matrix across the pair of turning points at a = 1."""
from zswkb import connection_coefficients, get_potential, turning_point

p = get_potential("rational_lorentz")
pt = turning_point(p, float(p.eval_A(1.0)))
for h in (0.2, 0.1, 0.05):
    r = connection_coefficients(p, pt, h)
    (s11, s12), _ = r.sigma
    (p11, p12), _ = r.predicted
    print(f"hbar={h:<5} s11={s11:+.6f} (sin {p11:+.6f})  s12={s12:+.6f} (cos {p12:+.6f})  "
          f"max error / hbar^(2/3) = {max(abs(s11 - p11), abs(s12 - p12)) / h ** (2 / 3):.4f}")
