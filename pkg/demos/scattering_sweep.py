"""Leading-order transmission phase against Jost-solution scattering data."""
import cmath

from zswkb import get_potential, jost_scattering_oracle, wkb_scattering

p = get_potential("rational_lorentz")
print("lambda  hbar   sigma      phase error   |R|        |T|^2-|R|^2-1")
for lam in (0.5, 1.0, 2.0):
    for h in (0.1, 0.05):
        rec = wkb_scattering(p, lam, h)
        R, T = jost_scattering_oracle(p, h, lam)
        err = (cmath.phase(T) - rec.sigma / h + cmath.pi) % (2 * cmath.pi) - cmath.pi
        print(f"{lam:<7} {h:<6} {rec.sigma:.6f}  {err:+.2e}     {abs(R):.2e}   {abs(T) ** 2 - abs(R) ** 2 - 1:+.1e}")
