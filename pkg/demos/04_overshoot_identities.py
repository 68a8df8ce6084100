"""The overshoot functionals: one expectation, many equivalent routes.

E_x[e^{-q tau_a^-} f(X at tau_a^-); down before up] can be evaluated with any
admissible extension of f (general form), with the simplified form when an
admissibility condition holds, or through the zero-extension jump-tail form.
All routes agree; choosing the extension well makes formulas collapse.
"""

from levyfluct import (ExitProblem, ScaleFunction, canonical_models,
                       creeping_transform, extend_penalty,
                       overshoot_functional_general, overshoot_functional_simple,
                       overshoot_of_scale_function, overshoot_zero_extension,
                       two_sided_exit_up)

catalog = canonical_models()
a, b, q, x = 0.0, 2.0, 0.05, 1.0
prob = ExitProblem(a, b, q, x)

print("f = 1: three extensions, the zero-extension route, and the Z-form")
for name, model in catalog.items():
    sf = ScaleFunction(model, q, x_max=3.0)
    vals = {}
    for kind in ("zero", "constant_one", "affine_at_a"):
        p = extend_penalty(lambda y: 1.0, a, b, kind)
        vals[kind] = overshoot_functional_general(p, sf, prob).value
    vals["tail-form"] = overshoot_zero_extension(lambda y: 1.0, sf, prob).value
    z_form = float(sf.z(x - a) - sf.w(x - a) * sf.z(b - a) / sf.w(b - a))
    spread = max(vals.values()) - min(vals.values())
    print(f"  {name:16s} Z-form {z_form:.8f}   spread over routes {spread:.1e}")

# conservation at q = 0: down-exit + up-exit probabilities sum to one
print("\nq = 0 conservation (f = 1):")
for name, model in catalog.items():
    sf0 = ScaleFunction(model, 0.0)
    p = extend_penalty(lambda y: 1.0, a, b, "constant_one")
    down = overshoot_functional_simple(p, sf0, ExitProblem(a, b, 0.0, x)).value
    up = two_sided_exit_up(sf0, ExitProblem(a, b, 0.0, x))
    print(f"  {name:16s} down {down:.6f} + up {up:.6f} = {down + up:.10f}")

# creeping: only Gaussian models can hit the level exactly
print("\ncreeping transforms at q = 0.05:")
for name, model in catalog.items():
    sf = ScaleFunction(model, q)
    print(f"  {name:16s} {creeping_transform(sf, prob):.6f}")

# the overshoot-of-a-scale-function identity: the extension W^(q) makes the
# generator term collapse to (q - p) W^(q) - delta W^(q)'.  The level must
# sit above 0 for a nontrivial value: W^(q) vanishes on the negatives, so
# with a = 0 the whole functional is identically zero.
model = catalog["jump_diffusion"]
val = overshoot_of_scale_function(model, delta=0.1, p_kill=0.05, q_inner=0.1,
                                  prob=ExitProblem(0.5, 2.5, 0.05, 1.5))
print("\nE_x[e^(-0.05 nu) W^(0.1)(Y at nu); down first] for Y = X - 0.1 t,"
      f" [a,b] = [0.5, 2.5]: {val:.6f}")
zero = overshoot_of_scale_function(model, delta=0.1, p_kill=0.05, q_inner=0.1,
                                   prob=ExitProblem(a, b, 0.05, x))
print(f"same with a = 0 (penalty vanishes below the level): {zero:.6f}")
