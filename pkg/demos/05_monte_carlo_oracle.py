"""The simulation oracle: paths, first passage, occupation histograms.

Everything the identities compute can be estimated directly from simulated
paths: that is the package's independent verification route.  Streams are
counter-based (seed, batch), so estimates are bit-reproducible regardless of
the worker count.
"""

import numpy as np

from levyfluct import (ExitProblem, ScaleFunction, SimScheme, canonical_models,
                       estimate_overshoot_functional, estimate_resolvent,
                       extend_penalty, overshoot_functional_general,
                       resolvent_density, simulate_first_passage)

catalog = canonical_models()
a, b, q, x0 = 0.0, 2.0, 0.05, 1.0
scheme = SimScheme(dt=1e-3, eps=1e-3, seed=11)
n_paths = 20_000

print(f"formula vs Monte Carlo, {n_paths} paths (dt={scheme.dt}, eps={scheme.eps}):")
f = lambda y: np.exp(np.asarray(y, dtype=float))
for name, model in catalog.items():
    sf = ScaleFunction(model, q, x_max=3.0)
    p = extend_penalty(f, a, b, "constant_one")
    exact = overshoot_functional_general(p, sf, ExitProblem(a, b, q, x0)).value
    est = estimate_overshoot_functional(model, f, a, b, q, x0, scheme, n_paths)
    dev = (est.mean - exact) / est.stderr
    print(f"  {name:16s} exact {exact:.5f}   mc {est.mean:.5f} +- {est.stderr:.5f}"
          f"   ({dev:+.2f} sigma)")

# exit-sample anatomy: times, sides, overshoot positions, creeping flags
model = catalog["jump_diffusion"]
s = simulate_first_passage(model, a, b, x0, scheme, 10_000, q=q)
down = s.sides == -1
print(f"\njump-diffusion exits: up {np.mean(s.sides == 1):.3f}, "
      f"down {np.mean(down):.3f}, capped {s.capped_fraction:.4f}")
print(f"creeping fraction of down exits: {s.creep[down].mean():.3f}"
      f"   mean overshoot below a: {np.mean(a - s.positions[down & ~s.creep]):.3f}")

# the occupation histogram reproduces the killed resolvent density
res = estimate_resolvent(model, a, b, q, x0, scheme, 20_000, n_bins=20)
sf = ScaleFunction(model, q)
prob = ExitProblem(a, b, q, x0)
print("\nresolvent density, histogram vs formula (20 bins):")
for k in range(0, 20, 5):
    z = res.centers[k]
    exact = resolvent_density(sf, prob, float(z))
    print(f"  z={z:.3f}: mc {res.density[k]:.4f} +- {res.stderr[k]:.4f}"
          f"   formula {exact:.4f}")
