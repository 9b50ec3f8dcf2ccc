"""Command line front end: ``rmc obstruct``, ``rmc eval`` and ``rmc verify``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import modforms, msymb, recognize, rigidprod
from .kernels import threads
from .padic import QuadExtApprox
from .qlattice import model_by_tag, weighted_degree

SCHEMA = "rmc-result/1"
DEFAULT_PRIME = {"sig21": 3, "sig31-bianchi": 5, "definite3": 5}
EXIT_REJECTED = 2


class ConfigError(ValueError):
    pass


def parse_keyvals(text: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_point(text: str, model: str) -> msymb.SpecialPointData:
    """``disc=8,flip=cm,orient=1`` or ``form=4/-2/-9,flip=rm``."""
    kv = parse_keyvals(text)
    flip = kv.get("flip", "rm").lower()
    if flip not in ("rm", "cm"):
        raise ConfigError("flip must be rm or cm")
    orient = int(kv.get("orient", "1"))
    if "form" in kv:
        form = tuple(int(x) for x in kv["form"].split("/"))
        if len(form) != 3:
            raise ConfigError("form needs three coefficients A/B/C")
        return msymb.SpecialPointData(model, form, flip == "cm", orient)
    if "disc" not in kv:
        raise ConfigError("point needs disc= or form=")
    return msymb.SpecialPointData.from_disc(model, int(kv["disc"]), flip == "cm", orient)


def parse_recognize(text: str | None, point: msymb.SpecialPointData):
    """``field=Qi``, ``field=Qi_sqrtD`` (D from the point) or ``field=Qi_sqrt11``; ``H=1e9``."""
    if not text:
        return None
    kv = parse_keyvals(text)
    fld = kv.get("field", "Qi_sqrtD")
    if fld == "Qi":
        D = 1
    elif fld == "Qi_sqrtD":
        D = recognize.fundamental_discriminant(point.disc)
        D = D // 4 if D % 4 == 0 else D
    elif fld.startswith("Qi_sqrt"):
        D = int(fld[len("Qi_sqrt"):])
    else:
        raise ConfigError(f"unknown field {fld!r}")
    H = float(kv["H"]) if "H" in kv else None
    return D, H, kv.get("mode", "auto")


def _digits_of(x: QuadExtApprox) -> dict:
    return {"val": x.val, "precision": x.N, "re": str(x.a), "om": str(x.b), "omega_square": x.u,
            "kind": x.kind, "zero": x.zero}


def _point_label(pd: msymb.SpecialPointData) -> str:
    A, B, C = pd.form
    return f"form={A}/{B}/{C},flip={'cm' if pd.flip else 'rm'},orient={pd.orientation}"


def _certify(divisor: rigidprod.DivisorSpec, p: int, window: int = 40):
    indices = [int(m) for m, _ in divisor.terms]
    basis = modforms.obstruction_basis(divisor.model, p, max(window, max(indices)))
    system = modforms.obstruction_kernel(basis, indices)
    weights = [c for _, c in divisor.terms]
    return system, system.certify(weights), weights


def cmd_obstruct(args) -> tuple[dict, int]:
    divisor = rigidprod.DivisorSpec.parse(args.divisor, args.model)
    divisor.check_prime(args.p)
    if any(Fraction(m).denominator != 1 for m, _ in divisor.terms):
        raise ConfigError("obstruct needs integral norms")
    system, violations, weights = _certify(divisor, args.p)
    out = {"schema": SCHEMA, "command": "obstruct", "model": args.model, "p": args.p,
           "indices": list(system.indices), "basis": [f.name for f in system.basis],
           "functionals": [[str(x) for x in row] for row in system.matrix],
           "kernel": system.kernel, "weights": weights,
           "certified": not violations,
           "violations": [{"form": name, "value": str(v)} for name, v in violations]}
    if violations:
        out["message"] = system.describe_violation(weights)
    return out, 0 if not violations else EXIT_REJECTED


def _point_record(pd, level, digits, point, gamma, value) -> dict:
    return {"point": _point_label(pd), "disc": pd.disc, "affinoid_level": level,
            "guaranteed_digits": digits, "coordinates": [_digits_of(t) for t in point.taus],
            "automorph": [str(x) for x in gamma.entries()], "value": _digits_of(value)}


def _eval_point(spec, pd, J, cached):
    label = _point_label(pd)
    if label in cached:
        # same record as a fresh evaluation; only the products are skipped
        value = cached[label]
        pt = pd.point(spec.p, spec.N + 8 + 2 * (J or spec.N))
        gamma = msymb.automorph(pd.form, gaussian=pd.model == "sig31-bianchi", power=pd.orientation)
        return _point_record(pd, rigidprod.affinoid_level(pt, spec.model), value.N, pt, gamma, value), value
    try:
        sv = msymb.eval_special(spec, pd, J=J)
    except (rigidprod.NotRegular, rigidprod.NotInXp, rigidprod.ZeroDenominator) as e:
        return {"point": label, "disc": pd.disc,
                "error": {"type": type(e).__name__, "message": str(e)}}, None
    return _point_record(pd, sv.level, sv.digits, sv.point, sv.automorph, sv.value), sv.value


def _recognize_record(value: QuadExtApprox, pd, rec_text, iota_sign):
    parsed = parse_recognize(rec_text, pd)
    if parsed is None:
        return None
    D, H, mode = parsed
    fb = recognize.FieldBasis.make(D, value.p, value.N + max(0, -value.val) + 2, iota_sign)
    try:
        res = recognize.recognize_algebraic(value, fb, digits=value.N, H=H, mode=mode)
    except recognize.NoRelation as e:
        return {"status": "no_relation", "message": str(e)}
    reflex = recognize.fundamental_discriminant(-pd.disc if pd.flip else pd.disc)
    report = res.to_json()
    ns = recognize.norm_and_splitting(res, reflex, "cm" if pd.flip else "rm")
    report.update({"status": "ok", "norm": ns["norm_Q"], "reflex_norm": ns["reflex_norm"],
                   "reflex_disc": reflex, "factors": ns["factors"]})
    return report


def cmd_eval(args) -> tuple[dict, int]:
    divisor = rigidprod.DivisorSpec.parse(args.divisor, args.model)
    divisor.check_prime(args.p)
    system, violations, weights = _certify(divisor, args.p)
    if violations:
        return {"schema": SCHEMA, "command": "eval", "certified": False,
                "message": system.describe_violation(weights)}, EXIT_REJECTED
    spec = rigidprod.PeriodFunctionSpec(divisor, args.p, args.digits)
    points = [parse_point(t, args.model) for t in (args.point or [])]
    if not points:
        raise ConfigError("eval needs at least one --point")

    cached = {}
    if args.cache and os.path.exists(args.cache):
        _, cached = rigidprod.load_cache(args.cache, spec)

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        results = list(pool.map(lambda pd: _eval_point(spec, pd, args.levels, cached), points))

    iota_sign = -1 if args.model == "sig31-bianchi" else 1
    records = []
    fresh = {}
    for pd, (rec, value) in zip(points, results):
        if value is not None:
            rec["recognition"] = _recognize_record(value, pd, args.recognize, iota_sign)
            if rec["point"] not in cached:
                fresh[rec["point"]] = value
        records.append(rec)
    if args.cache and fresh:
        rigidprod.save_cache(args.cache, spec, args.levels or -1, {**cached, **fresh})
    out = {"schema": SCHEMA, "command": "eval", "model": args.model, "p": args.p, "N": args.digits,
           "divisor": [[str(m), c] for m, c in divisor.terms], "certified": True, "records": records}
    return out, 0


# verify ------------------------------------------------------------------------

def _check_weil(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        D = modforms.random_module(rng)
        T, S = modforms.weil_rep(D)
        eye = np.eye(D.size)
        ST = S @ T
        errs = [np.abs(S @ S.conj().T - eye).max(), np.abs(ST @ ST @ ST - S @ S).max()]
        if modforms.milgram_signature(D) % 2 == 0:
            errs.append(np.abs(np.linalg.matrix_power(S, 4) - eye).max())
        worst = max(worst, *errs)
    return {"ok": bool(worst < 1e-10), "max_error": float(worst)}


def _random_unit_tau(rng, p, N):
    return QuadExtApprox.from_parts(int(rng.integers(0, p**N)), int(rng.integers(0, p ** (N - 1))) * p + 1, p, N)


def _check_convergence(seed: int) -> dict:
    spec = rigidprod.PeriodFunctionSpec(rigidprod.DivisorSpec(((3, 1), (6, -1), (7, 1)), "sig31-bianchi"), 5, 4)
    rng = np.random.default_rng(seed)
    pt = rigidprod.PointX.bianchi(_random_unit_tau(rng, 5, 16), _random_unit_tau(rng, 5, 16))
    gaps = []
    for j in (1, 2):
        x = rigidprod.level_product(spec, j, pt)
        gaps.append((x - 1).valuation() if not (x - 1).zero else x.N)
    return {"ok": all(g >= j for g, j in zip(gaps, (1, 2))), "valuations": gaps}


def _check_cocycle(seed: int) -> dict:
    spec = rigidprod.PeriodFunctionSpec(rigidprod.DivisorSpec(((5, 1), (2, -2)), "sig21"), 3, 3)
    rng = np.random.default_rng(seed)
    pt = rigidprod.PointX.sig21(_random_unit_tau(rng, 3, 16))
    r, s, u = msymb.Cusp.of(0), msymb.Cusp.of(Fraction(3, 7)), msymb.Cusp.of(Fraction(-5, 4))
    a = msymb.cocycle_symbol(spec, r, s, pt)
    b = msymb.cocycle_symbol(spec, s, u, pt)
    c = msymb.cocycle_symbol(spec, r, u, pt)
    g = msymb.GammaElement(3, 1, 2, 1)
    d = msymb.cocycle_symbol(spec, g.act_cusp(r), g.act_cusp(s), msymb.act_point(g, pt))
    return {"ok": a * b == c and d == a}


def _check_degrees(seed: int) -> dict:
    model = model_by_tag("sig31-bianchi", 5)
    ratios = []
    for d, j in ((3, 0), (6, 0), (7, 0)):
        n = d * 5 ** (2 * j)
        sigma = sum(t for t in range(1, n + 1) if n % t == 0)
        ratios.append(str(Fraction(weighted_degree(model, d, j), sigma)))
    return {"ok": len(set(ratios)) == 1, "ratios": ratios}


def _check_neighbour(seed: int) -> dict:
    spec = rigidprod.PeriodFunctionSpec(rigidprod.DivisorSpec(((13, 1), (2, -2)), "definite3"), 5, 2)
    W = 20
    iota = rigidprod.gaussian_embedding(5, W).to_int()
    nb = rigidprod.p_neighbour(spec.model, (1, iota, 0), W)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(2):
        pt = rigidprod.PointX.ternary(_random_unit_tau(rng, 5, 12))
        a = rigidprod.definite_invariant_eval(spec, pt)
        b = rigidprod.definite_invariant_eval(spec, pt, local=nb)
        ratios.append(b * a.inverse())
    return {"ok": ratios[0] == ratios[1], "ratio": _digits_of(ratios[0])}


SUITES = {"weil": _check_weil, "convergence": _check_convergence, "cocycle": _check_cocycle,
          "degrees": _check_degrees, "p_neighbour": _check_neighbour}


def cmd_verify(args) -> tuple[dict, int]:
    names = args.suite or list(SUITES)
    report = {}
    for name in names:
        try:
            res = SUITES[name](args.seed)
        except Exception as e:  # a crashing suite is a failing suite
            res = {"ok": False, "error": f"{type(e).__name__}: {e}"}
        report[name] = res
    ok = all(r["ok"] for r in report.values())
    return {"schema": SCHEMA, "command": "verify", "seed": args.seed, "ok": ok, "suites": report}, 0 if ok else 1


# entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--model", default="sig31-bianchi", choices=sorted(DEFAULT_PRIME))
        sp.add_argument("--p", type=int, default=None)
        sp.add_argument("--json", metavar="PATH", help="write the JSON result here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)

    ob = sub.add_parser("obstruct", help="certify divisor weights against the obstruction forms")
    common(ob)
    ob.add_argument("--divisor", required=True, help='weights, e.g. "3:1,6:-1,7:1"')

    ev = sub.add_parser("eval", help="evaluate at special points")
    common(ev)
    ev.add_argument("--divisor", required=True)
    ev.add_argument("--digits", type=int, default=4)
    ev.add_argument("--levels", type=int, default=None, help="truncation level J (default from the affinoid level)")
    ev.add_argument("--point", action="append", help='e.g. "disc=8,flip=cm,orient=1" (repeatable)')
    ev.add_argument("--recognize", default=None, help='e.g. "field=Qi_sqrtD,H=1e9"')
    ev.add_argument("--cache", metavar="PATH")

    ve = sub.add_parser("verify", help="run the invariant suites")
    common(ve)
    ve.add_argument("--suite", action="append", choices=sorted(SUITES))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.p is None:
        args.p = DEFAULT_PRIME[args.model]
    if args.p % 2 == 0:
        print("rmc: p must be odd", file=sys.stderr)
        return 1
    handler = {"obstruct": cmd_obstruct, "eval": cmd_eval, "verify": cmd_verify}[args.command]
    try:
        out, code = handler(args)
    except (ConfigError, ValueError) as e:
        print(f"rmc: {e}", file=sys.stderr)
        return 1
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if code == EXIT_REJECTED and "message" in out:
        print(f"rejected: {out['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
