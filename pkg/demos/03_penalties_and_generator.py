"""Penalty extensions, membership reports, and the operator (A - q).

The central degree of freedom: a penalty f on (-inf, a] is continued onto
(a, b] by an extension of your choice.  The membership report records which
regularity conditions hold and whether the simplified identity is available;
the generator evaluation underlies every identity integral.
"""

import math

from levyfluct import (ExtensionRecipe, apply_generator, canonical_models,
                       check_membership, extend_penalty, laplace_exponent)

catalog = canonical_models()
a, b = 0.0, 2.0
f_exp = lambda y: math.exp(y)

print("membership of exp(y) under the three stock extensions:")
for name, model in catalog.items():
    line = [f"{name:16s}"]
    for kind in ("zero", "constant_one", "affine_at_a"):
        p = extend_penalty(f_exp, a, b, kind)
        rep = check_membership(p, model)
        cond = rep.corollary_condition
        line.append(f"{kind}:cond={cond if cond else '-'}")
    print("  " + "  ".join(line))

# sanity anchors for the generator itself:
#   constants:        (A - q) 1 = -q
#   exponentials:     (A - q) e^{l y} = (psi(l) - q) e^{l x}
model = catalog["jump_diffusion"]
p_one = extend_penalty(lambda y: 1.0, a, b, "constant_one")
print(f"\n(A - 0.05) 1 at x = 1:      {apply_generator(p_one, model, 0.05, 1.0):+.2e}"
      "   (expect -0.05)")
l0 = 0.6
recipe = ExtensionRecipe(kind="custom",
                         f_tilde=lambda y: math.exp(l0 * y),
                         f_tilde_deriv=lambda y: l0 * math.exp(l0 * y),
                         f_tilde_second=lambda y: l0 * l0 * math.exp(l0 * y))
p_eig = extend_penalty(lambda y: math.exp(l0 * y), a, b, recipe)
got = apply_generator(p_eig, model, 0.05, 1.0)
want = (laplace_exponent(model, l0) - 0.05) * math.exp(l0)
print(f"eigen-test at l = {l0}:       {got:.10f}  vs  {want:.10f}")

# the scale function is harmonic for (A - q) away from zero
from levyfluct import ScaleFunction

sf = ScaleFunction(model, 0.05, x_max=4.0)
p_w = extend_penalty(sf.w, 0.5, 3.0,
                     ExtensionRecipe(kind="scale_function", scale=sf),
                     f_kinks=(0.0,))
vals = [apply_generator(p_w, model, 0.05, x) for x in (0.8, 1.5, 2.5)]
print("(A - q) W^(q) on (0.5, 3):  " + "  ".join(f"{v:+.1e}" for v in vals))
