"""Command-line interface: ``qkz <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from qkz.jacobi import JacobiFourierSeries


def _fmt(x) -> str:
    return str(Fraction(x))


def fourier_to_json(series: JacobiFourierSeries) -> dict:
    """{"n": {"j": "p/q"}} for the numerator rows; a pole is recorded separately."""
    rows = {}
    for (n, j), v in sorted(series.body.to_dict().items()):
        rows.setdefault(str(n), {})[str(j)] = _fmt(v)
    out = {"coeffs": rows, "q_order": series.q_order}
    if series.pole:
        out["pole"] = series.pole
    return out


def fourier_from_json(data: dict) -> JacobiFourierSeries:
    rows = {int(n): {int(j): Fraction(v) for j, v in row.items()} for n, row in data["coeffs"].items()}
    return JacobiFourierSeries.from_rows(rows, int(data["q_order"]), int(data.get("pole", 0)))


def _emit(payload, fmt, out):
    if fmt == "json":
        json.dump(payload, out, indent=None, sort_keys=False)
        out.write("\n")
    elif fmt == "csv":
        w = csv.writer(out)
        for row in _csv_rows(payload):
            w.writerow(row)
    else:
        out.write(_text(payload))


def _csv_rows(payload):
    coeffs = payload.get("coeffs")
    if isinstance(coeffs, dict):
        yield ["q", "s", "coefficient"]
        for n, row in coeffs.items():
            for j, v in row.items():
                yield [n, j, v]
        return
    yield ["key", "value"]
    for k, v in payload.items():
        yield [k, json.dumps(v)]


def _text(payload):
    buf = io.StringIO()
    coeffs = payload.get("coeffs")
    if isinstance(coeffs, dict):
        head = {k: v for k, v in payload.items() if k != "coeffs"}
        buf.write(" ".join(f"{k}={v}" for k, v in head.items()) + "\n")
        for n, row in coeffs.items():
            terms = " + ".join(f"({v})*s^{j}" for j, v in row.items())
            buf.write(f"q^{n}: {terms}\n")
        return buf.getvalue()
    for k, v in payload.items():
        buf.write(f"{k}: {v if isinstance(v, str) else json.dumps(v)}\n")
    return buf.getvalue()


def _threads():
    try:
        return max(1, int(os.environ.get("QKZ_THREADS", "1")))
    except ValueError:
        return 1


# -- subcommands --------------------------------------------------------------------

def cmd_phi(args, out):
    from qkz.phi import phi_ode, phi_partition, phi_residue

    fn = {"ode": phi_ode, "residue": phi_residue, "partition": phi_partition}[args.method]
    s = fn(args.m, args.q_order)
    payload = {"m": args.m}
    payload.update(fourier_to_json(s))
    _emit(payload, args.format, out)
    return 0


def cmd_phimn(args, out):
    from qkz.phi import phi_pair_ode

    s = phi_pair_ode(args.m, args.n, args.q_order)
    payload = {"m": args.m, "n": args.n}
    payload.update(fourier_to_json(s))
    _emit(payload, args.format, out)
    return 0


def cmd_taylor(args, out):
    from qkz.phi import phi_pair_polynomial, phi_polynomial_u

    fam = (phi_polynomial_u if args.kind == "phi" else phi_pair_polynomial)(z_order=args.z_order)
    var = fam.variables
    payload = {"kind": args.kind, "variables": list(var), "coefficients": {}}
    for k in sorted(fam.coefficients):
        payload["coefficients"][str(k)] = {
            "*".join(f"{x}^{e}" for x, e in zip(var, exps)): repr(poly)
            for exps, poly in sorted(fam.coefficients[k].items())
        }
    _emit(payload, args.format, out)
    return 0


def cmd_ring_express(args, out):
    from qkz.qjacobi import express_phi

    expr = express_phi(args.m)
    payload = {"m": args.m, "weight": expr.weight, "index": str(expr.index),
               "monomials": [{"coefficient": c, "powers": p} for c, p in expr.monomials()]}
    _emit(payload, args.format, out)
    return 0


def cmd_kz(args, out):
    from qkz.kz import preset, solve

    sys_ = preset(args.preset, args.q_order + 4)
    res = solve(sys_, args.weight + 1, args.q_order)
    if not res:
        payload = {"preset": args.preset, "weight": args.weight, "obstructed": True,
                   "kappa": str(res.kappa), "reason": res.reason,
                   "residual": None if res.residual is None else str(res.residual)}
    else:
        payload = {"preset": args.preset, "weight": args.weight, "obstructed": False}
        if res.quotient is not None:
            payload["f_k"] = {str(e): _fmt(v) for e, v in sorted(res.quotient.to_dict().items())}
        if res.modular_form is not None:
            payload["modular_form"] = repr(res.modular_form)
    _emit(payload, args.format, out)
    return 0


def cmd_dr(args, out):
    from qkz.dr import dr_from_json

    with open(args.input, encoding="utf-8") as fh:
        data = json.load(fh)
    result = dr_from_json(data)
    _emit(result, "json" if args.format == "text" else args.format, out)
    return 0


def cmd_kkv(args, out):
    from qkz.dr import kkv

    table = kkv(args.h_max, args.z_order)
    payload = {str(h): {str(g): _fmt(v) for g, v in row.items()} for h, row in table.items()}
    _emit(payload, "json" if args.format == "text" else args.format, out)
    return 0


# -- verification suites -------------------------------------------------------------------

def _first_difference(a, b):
    """First (q, s) numerator position where two Fourier series differ."""
    d = a - b
    items = sorted(d.body.to_dict().items())
    return items[0] if items else None


def _identity(name, fn):
    return name, fn


def _suite_theorem1(args):
    from qkz.phi import phi_ode, phi_partition, phi_residue

    out = []
    for m in range(1, args.m_max + 1):
        def check(m=m):
            a = phi_ode(m, args.q_order)
            for label, b in (("residue", phi_residue(m, args.q_order)), ("partition", phi_partition(m, args.q_order))):
                diff = _first_difference(a, b)
                if diff is not None:
                    return False, f"ode vs {label}: coefficient q^{diff[0][0]} s^{diff[0][1]} differs by {diff[1]}"
            return True, ""
        out.append(_identity(f"theorem1 m={m}", check))
    return out


def _suite_anomaly(args):
    from qkz.phi import derived_ode_anomaly_residual

    out = []
    for m in range(1, min(args.m_max, 6) + 1):
        def check(m=m):
            r = derived_ode_anomaly_residual(m, args.q_order)
            d = sorted(r.body.to_dict().items())
            return (not d), (f"coefficient q^{d[0][0][0]} s^{d[0][0][1]} = {d[0][1]}" if d else "")
        out.append(_identity(f"anomaly m={m}", check))
    return out


def _suite_recursion(args):
    from qkz.phi import phi_ode, recursion_rhs

    out = []
    top = min(args.m_max, 4)
    for m in range(1, top + 1):
        for n in range(1, top + 1):
            def check(m=m, n=n):
                diff = _first_difference(recursion_rhs(m, n, args.q_order), phi_ode(m + n, args.q_order))
                return diff is None, ("" if diff is None else f"coefficient q^{diff[0][0]} s^{diff[0][1]} off by {diff[1]}")
            out.append(_identity(f"recursion m={m} n={n}", check))
    return out


def _suite_hae(args):
    from qkz.phi import derived_ode_pair_residual

    out = []
    top = min(args.m_max, 4)
    for m in range(-top, top + 1):
        for n in range(-top, top + 1):
            if m == 0 or n == 0:
                continue
            def check(m=m, n=n):
                r = derived_ode_pair_residual(m, n, args.q_order)
                d = sorted(r.body.to_dict().items())
                return (not d), (f"coefficient q^{d[0][0][0]} s^{d[0][0][1]} = {d[0][1]}" if d else "")
            out.append(_identity(f"hae m={m:+d} n={n:+d}", check))
    return out


def _suite_thm2(args):
    from qkz.phi import anomaly_dA_phi_pair, anomaly_dG2_phi_pair, phi_pair_ode
    from qkz.qjacobi import derive, eval_to_fourier, recognize_in_R

    out = []
    for n in range(1, min(args.m_max, 3) + 1):
        def check(n=n):
            q = max(args.q_order, 8)
            target = phi_pair_ode(n, -n, q) - JacobiFourierSeries.constant(n, q)
            rec = recognize_in_R(target, 0, n, details=True)
            if rec.surplus < 5:
                return False, f"only {rec.surplus} surplus coefficients"
            if eval_to_fourier(derive(rec.expr, "d/dA"), q) != anomaly_dA_phi_pair(n, -n, q):
                return False, "d/dA mismatch"
            if eval_to_fourier(derive(rec.expr, "d/dG2"), q) != anomaly_dG2_phi_pair(n, -n, q):
                return False, "d/dG2 mismatch"
            return True, ""
        out.append(_identity(f"thm2 n={n}", check))
    return out


def _suite_kz(args):
    from qkz.kz import obstruction_identity_check, preset, solve

    def solvability():
        s = preset("eta2", 24)
        bad = [k for k in range(0, 31) if bool(solve(s, k + 1, 20)) != (k % 6 in (0, 4))]
        return not bad, (f"weights {bad}" if bad else "")

    def obstruction():
        s, L = preset("eta2", 20), preset("eta1eta2", 20)
        got = ([obstruction_identity_check(s, l, 15) for l in range(9)],
               [obstruction_identity_check(L, l, 15) for l in range(9)])
        want = ([l == 4 for l in range(9)], [l == 2 for l in range(9)])
        return got == want, "" if got == want else f"got {got}"

    return [_identity("kz solvability eta2", solvability), _identity("kz obstruction identity", obstruction)]


def _suite_inversion(args):
    from qkz.phi import inversion_check

    return [_identity("inversion compose", lambda: (inversion_check(9, 10, 20), "")),
            _identity("inversion lagrange", lambda: (inversion_check(9, 10, 20, method="lagrange"), ""))]


SUITES = {
    "theorem1": _suite_theorem1,
    "anomaly": _suite_anomaly,
    "recursion": _suite_recursion,
    "hae": _suite_hae,
    "thm2": _suite_thm2,
    "kz": _suite_kz,
    "inversion": _suite_inversion,
}


def cmd_verify(args, out):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    checks = []
    for name in names:
        checks.extend(SUITES[name](args))
    checks.sort(key=lambda c: c[0])

    def run(item):
        label, fn = item
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed identity
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        return label, ok, detail

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(run, checks))
    failed = None
    for label, ok, detail in results:
        out.write(f"{'PASS' if ok else 'FAIL'} {label}{(' : ' + detail) if detail else ''}\n")
        if not ok and failed is None:
            failed = (label, detail)
    if failed:
        out.write(f"first failure: {failed[0]} {failed[1]}\n")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkz", description="Exact computations with phi_m, phi_{m,n} and friends.")
    sub = p.add_subparsers(dest="command", required=True)

    def positive(x):
        v = int(x)
        if v < 1:
            raise argparse.ArgumentTypeError("must be a positive integer")
        return v

    def common(sp):
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
        sp.add_argument("--output", help="write to this file instead of stdout")

    sp = sub.add_parser("phi", help="Fourier coefficients of phi_m")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--q-order", type=positive, default=6)
    sp.add_argument("--method", choices=("ode", "residue", "partition"), default="ode")
    common(sp)
    sp.set_defaults(func=cmd_phi)

    sp = sub.add_parser("phimn", help="Fourier coefficients of phi_{m,n}")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--q-order", type=positive, default=6)
    common(sp)
    sp.set_defaults(func=cmd_phimn)

    sp = sub.add_parser("taylor", help="quasi-modular Taylor coefficients of phi_u or phi_{u,v}")
    sp.add_argument("--kind", choices=("phi", "phimn"), required=True)
    sp.add_argument("--z-order", type=positive, default=7)
    common(sp)
    sp.set_defaults(func=cmd_taylor)

    sp = sub.add_parser("ring-express", help="phi_m as a polynomial in Theta, A, G2, wp, wp', G4")
    sp.add_argument("--m", type=positive, required=True)
    common(sp)
    sp.set_defaults(func=cmd_ring_express)

    sp = sub.add_parser("verify", help="run identity suites")
    sp.add_argument("--suite", choices=("all",) + tuple(SUITES), default="all")
    sp.add_argument("--m-max", type=positive, default=4)
    sp.add_argument("--q-order", type=positive, default=8)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("kz", help="solve a Kaneko-Zagier type equation")
    sp.add_argument("--preset", choices=("eta2", "eta1eta2"), required=True)
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--q-order", type=positive, default=12)
    common(sp)
    sp.set_defaults(func=cmd_kz)

    sp = sub.add_parser("dr", help="assemble the double-ramification series from a JSON file")
    sp.add_argument("--input", required=True)
    common(sp)
    sp.set_defaults(func=cmd_dr)

    sp = sub.add_parser("kkv", help="<lambda_g> from 1/(Theta^2 Delta)")
    sp.add_argument("--h-max", type=int, default=3)
    sp.add_argument("--z-order", type=positive, default=10)
    common(sp)
    sp.set_defaults(func=cmd_kkv)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "kz" and args.weight < 0:
        parser.error("--weight must be >= 0")
    if args.command == "kkv" and args.h_max < 0:
        parser.error("--h-max must be >= 0")
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                return args.func(args, fh)
        return args.func(args, sys.stdout)
    except (ValueError, KeyError, OSError) as exc:
        # bad parameters for the requested computation (e.g. too few coefficients)
        print(f"qkz: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
