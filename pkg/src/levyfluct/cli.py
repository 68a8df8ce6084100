"""Command-line front end.

Subcommands: scale, eval, compare, mc, eval-reflected, eval-refracted.
All take a JSON problem spec (--spec FILE, '-' for stdin) and emit JSON or
CSV on stdout (or --out FILE); diagnostics go to stderr.  Exit codes:
0 success, 2 spec errors, 3 numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import identities as idn
from . import montecarlo as mc
from . import reflected_refracted as rr
from .errors import (ConditionNotMetError, HypothesisViolationError, LevyFluctError,
                     ModelError, NumericalAccuracyError, RootFindingError, SpecError,
                     UnsupportedCaseError)
from .expressions import compile_expression
from .generator import ExtensionRecipe, check_membership, extend_penalty
from .models import model_from_dict
from .scale import ScaleFunction

_SPEC_ERRORS = (SpecError, ModelError, KeyError, TypeError, ValueError,
                json.JSONDecodeError)
_NUMERIC_ERRORS = (NumericalAccuracyError, RootFindingError, ConditionNotMetError,
                   HypothesisViolationError, UnsupportedCaseError)


def _load_spec(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}")


def _emit(payload_json, payload_rows, args):
    if args.format == "json":
        text = json.dumps(payload_json, sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        for row in payload_rows:
            writer.writerow(row)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require(spec, key, where="spec"):
    if key not in spec:
        raise SpecError(f"missing field {key!r}", field=where)
    return spec[key]


def _build_problem(spec):
    model = model_from_dict(_require(spec, "model"))
    a = float(_require(spec, "a"))
    b = float(_require(spec, "b"))
    q = float(_require(spec, "q"))
    x = float(_require(spec, "x"))
    prob = idn.ExitProblem(a, b, q, x)
    sf = ScaleFunction(model, q, x_max=max(10.0, b - a + 1.0, b + 1.0))
    return model, prob, sf


def _penalty_callable(f_spec, sf):
    if isinstance(f_spec, str):
        return compile_expression(f_spec, w=sf.w)
    if isinstance(f_spec, dict) and "table" in f_spec:
        table = f_spec["table"]
        ys = np.asarray(_require(table, "y", "penalty.f.table"), dtype=float)
        vals = np.asarray(_require(table, "values", "penalty.f.table"), dtype=float)
        if ys.ndim != 1 or ys.shape != vals.shape or np.any(np.diff(ys) <= 0):
            raise SpecError("table needs matching increasing y/values arrays",
                            field="penalty.f.table")
        return lambda y: np.interp(y, ys, vals)
    raise SpecError("penalty f must be an expression string or {'table': ...}",
                    field="penalty.f")


def _build_penalty(spec, prob, sf):
    pen_spec = _require(spec, "penalty")
    f = _penalty_callable(_require(pen_spec, "f", "penalty"), sf)
    ext = pen_spec.get("extension", {"kind": "constant_one"})
    kind = _require(ext, "kind", "penalty.extension")
    if kind == "custom":
        expr = _require(ext, "expr", "penalty.extension")
        recipe = ExtensionRecipe(kind="custom",
                                 f_tilde=compile_expression(expr, w=sf.w))
    elif kind == "scale_function":
        recipe = ExtensionRecipe(kind="scale_function", scale=sf)
    elif kind in ("zero", "constant_one", "affine_at_a"):
        recipe = ExtensionRecipe(kind=kind, slope=ext.get("slope"))
    else:
        raise SpecError(f"unknown extension kind {kind!r}", field="penalty.extension")
    return extend_penalty(f, prob.a, prob.b, recipe)


def _mc_settings(spec, args):
    block = dict(spec.get("mc", {}))
    if args.paths is not None:
        block["paths"] = args.paths
    if args.seed is not None:
        block["seed"] = args.seed
    paths = int(block.get("paths", 20_000))
    scheme = mc.SimScheme(
        dt=float(block.get("dt", 1e-3)),
        eps=float(block.get("eps", 1e-3)),
        seed=int(block.get("seed", 0)),
        horizon=block.get("horizon"),
        small_jump_mode=block.get("small_jump_mode", "auto"),
    )
    return scheme, paths


def _gs_payload(val):
    return {
        "value": val.value,
        "terms": val.terms,
        "accuracy": val.accuracy,
        "formula_used": val.formula_used,
        "note": val.condition_note,
    }


def _gs_rows(val):
    return [["value", "boundary_term", "integral_term", "creeping_term",
             "formula_used", "accuracy"],
            [repr(val.value), repr(val.boundary_term), repr(val.integral_term),
             repr(val.creeping_term), val.formula_used, repr(val.accuracy)]]


def _evaluate_route(formula, penalty, sf, prob, spec):
    membership = check_membership(penalty, sf.model)
    if formula == "auto":
        formula = "simple" if membership.simple_form_admissible else "general"
    if formula == "general":
        return idn.overshoot_functional_general(penalty, sf, prob, membership=membership)
    if formula == "simple":
        return idn.overshoot_functional_simple(penalty, sf, prob, membership=membership)
    if formula == "zero_extension":
        f = _penalty_callable(_require(_require(spec, "penalty"), "f", "penalty"), sf)
        return idn.overshoot_zero_extension(f, sf, prob)
    raise SpecError(f"unknown formula {formula!r}", field="formula")


def cmd_eval(args):
    spec = _load_spec(args.spec)
    model, prob, sf = _build_problem(spec)
    penalty = _build_penalty(spec, prob, sf)
    formula = spec.get("formula", "auto")
    val = _evaluate_route(formula, penalty, sf, prob, spec)
    _emit(_gs_payload(val), _gs_rows(val), args)
    return 0


def cmd_scale(args):
    spec = _load_spec(args.spec)
    model = model_from_dict(_require(spec, "model"))
    q = float(_require(spec, "q"))
    grid = _require(spec, "grid")
    xs = np.linspace(float(_require(grid, "start", "grid")),
                     float(_require(grid, "stop", "grid")),
                     int(_require(grid, "n", "grid")))
    if np.any(xs <= 0):
        raise SpecError("grid points must be positive", field="grid")
    sf = ScaleFunction(model, q, x_max=float(xs[-1]) + 1.0)
    rows = [["x", "W", "W_prime", "Z"]]
    payload = []
    for x in xs:
        w, wp, z = float(sf.w(x)), float(sf.w_prime(x)), float(sf.z(x))
        rows.append([repr(float(x)), repr(w), repr(wp), repr(z)])
        payload.append({"x": float(x), "W": w, "W_prime": wp, "Z": z})
    print(f"method={sf.method} phi={sf.phi:.12g} "
          f"tolerance_estimate={sf.tolerance_estimate:.3g}", file=sys.stderr)
    _emit(payload, rows, args)
    return 0


def cmd_mc(args):
    spec = _load_spec(args.spec)
    model, prob, sf = _build_problem(spec)
    pen_spec = _require(spec, "penalty")
    f = _penalty_callable(_require(pen_spec, "f", "penalty"), sf)
    scheme, paths = _mc_settings(spec, args)
    est = mc.estimate_overshoot_functional(model, f, prob.a, prob.b, prob.q,
                                           prob.x, scheme, paths)
    payload = {"mean": est.mean, "stderr": est.stderr, "n_paths": est.n_paths,
               "capped_fraction": est.capped_fraction}
    rows = [["mean", "stderr", "n_paths", "capped_fraction"],
            [repr(est.mean), repr(est.stderr), est.n_paths, repr(est.capped_fraction)]]
    _emit(payload, rows, args)
    return 0


def cmd_compare(args):
    spec = _load_spec(args.spec)
    model, prob, sf = _build_problem(spec)
    pen_spec = _require(spec, "penalty")
    f = _penalty_callable(_require(pen_spec, "f", "penalty"), sf)
    tol = args.tol if args.tol is not None else 1e-6

    routes = {}
    for kind in ("zero", "constant_one", "affine_at_a"):
        penalty = extend_penalty(f, prob.a, prob.b, ExtensionRecipe(kind=kind))
        val = idn.overshoot_functional_general(penalty, sf, prob)
        routes[f"general[{kind}]"] = val.value
    penalty = extend_penalty(f, prob.a, prob.b, ExtensionRecipe(kind="constant_one"))
    membership = check_membership(penalty, model)
    if membership.simple_form_admissible:
        routes["simple"] = idn.overshoot_functional_simple(
            penalty, sf, prob, membership=membership).value
    routes["zero_extension"] = idn.overshoot_zero_extension(f, sf, prob).value
    scheme, paths = _mc_settings(spec, args)
    est = mc.estimate_overshoot_functional(model, f, prob.a, prob.b, prob.q,
                                           prob.x, scheme, paths)
    routes["monte_carlo"] = est.mean

    names = sorted(routes)
    pairs = []
    rows = [["route_a", "route_b", "value_a", "value_b", "deviation", "tolerance", "pass"]]
    all_pass = True
    for i, na in enumerate(names):
        for nb in names[i + 1:]:
            dev = abs(routes[na] - routes[nb])
            gate = tol
            if "monte_carlo" in (na, nb):
                gate = max(tol, 3.0 * est.stderr)
            ok = dev <= gate
            all_pass &= ok
            pairs.append({"route_a": na, "route_b": nb, "value_a": routes[na],
                          "value_b": routes[nb], "deviation": dev,
                          "tolerance": gate, "pass": ok})
            rows.append([na, nb, repr(routes[na]), repr(routes[nb]),
                         repr(dev), repr(gate), ok])
    payload = {"routes": routes, "pairs": pairs, "all_pass": bool(all_pass),
               "mc_stderr": est.stderr}
    _emit(payload, rows, args)
    return 0


def _modified_common(args, refracted):
    spec = _load_spec(args.spec)
    model = model_from_dict(_require(spec, "model"))
    a = float(_require(spec, "a"))
    b = float(_require(spec, "b"))
    q = float(_require(spec, "q"))
    x = float(_require(spec, "x"))
    provider_name = spec.get("provider", "mc")
    if provider_name == "closed_form":
        raise SpecError("the closed_form provider takes user-supplied formula "
                        "callables and is only available programmatically",
                        field="provider")
    if provider_name != "mc":
        raise SpecError(f"unknown provider {provider_name!r}", field="provider")
    scheme, paths = _mc_settings(spec, args)
    provider = rr.MonteCarloProvider(scheme=scheme, n_paths=paths)
    sf = ScaleFunction(model, q, x_max=max(10.0, b + 1.0))
    pen_spec = _require(spec, "penalty")
    f = _penalty_callable(_require(pen_spec, "f", "penalty"), sf)
    ext = pen_spec.get("extension", {"kind": "constant_one"})
    kind = _require(ext, "kind", "penalty.extension")
    if kind == "custom":
        recipe = ExtensionRecipe(kind="custom", f_tilde=compile_expression(
            _require(ext, "expr", "penalty.extension"), w=sf.w))
    elif kind == "scale_function":
        recipe = ExtensionRecipe(kind="scale_function", scale=sf)
    else:
        recipe = ExtensionRecipe(kind=kind, slope=ext.get("slope"))
    penalty = extend_penalty(f, a, b, recipe)
    if refracted:
        rspec = rr.RefractedSpec(model=model, delta=float(_require(spec, "delta")),
                                 c=float(_require(spec, "c")), a=a, b=b, q=q, x=x)
        val = rr.refracted_overshoot(penalty, rspec, provider)
    else:
        rspec = rr.ReflectedSpec(model=model, b=b, a=a, q=q, x=x)
        val = rr.reflected_overshoot(penalty, rspec, provider)
    _emit(_gs_payload(val), _gs_rows(val), args)
    return 0


def cmd_eval_reflected(args):
    return _modified_common(args, refracted=False)


def cmd_eval_refracted(args):
    return _modified_common(args, refracted=True)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="levyfluct",
        description="Overshoot functionals for spectrally negative Levy processes")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "scale": cmd_scale,
        "eval": cmd_eval,
        "compare": cmd_compare,
        "mc": cmd_mc,
        "eval-reflected": cmd_eval_reflected,
        "eval-refracted": cmd_eval_refracted,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="problem spec JSON ('-' = stdin)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--paths", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--out", default=None)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except _SPEC_ERRORS as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except LevyFluctError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
