"""Tour of the process catalog: triplets, Laplace exponents, path classes.

Every model is a spectrally negative Levy process (downward jumps only),
described by (gamma, sigma, Pi).  The Laplace exponent psi determines
everything downstream; its largest root Phi(q) of psi = q places the
Laplace-inversion contour and controls scale-function growth.
"""

from levyfluct import (canonical_models, laplace_exponent, path_variation,
                       right_inverse_phi)

catalog = canonical_models()

print("model             variation   psi'(0+) = E[X_1]   Phi(0)    Phi(0.5)")
for name, model in catalog.items():
    phi0 = right_inverse_phi(model, 0.0)
    phi5 = right_inverse_phi(model, 0.5)
    print(f"{name:16s}  {path_variation(model):9s}  {model.mean_slope:+12.4f}"
          f"     {phi0:8.4f}  {phi5:8.4f}")

# psi is convex with psi(0) = 0; the quadrature path reproduces the analytic
# exponent to ~1e-15, which the Cramer-Lundberg closed form makes visible:
cl = catalog["cramer_lundberg"]
print("\nCramer-Lundberg psi(lam) = 1.5 lam - lam/(1 + lam):")
for lam in [0.5, 2.0, 10.0]:
    exact = 1.5 * lam - lam / (1.0 + lam)
    by_quad = laplace_exponent(cl, lam, method="quadrature")
    print(f"  lam={lam:5.1f}: quadrature {by_quad:.12f}   closed form {exact:.12f}")

# the tempered stable model has non-integrable small jumps: unbounded
# variation despite sigma = 0, and infinite expected jump flow near zero
ts = catalog["tempered_stable"]
print(f"\ntempered stable: int_0^1 theta Pi(dtheta) = {ts.measure.mean_small}")
print(f"jump tail mass Pi(0.5, inf) = {float(ts.measure.tail(0.5)):.4f},"
      f" Pi(2, inf) = {float(ts.measure.tail(2.0)):.4f}")
