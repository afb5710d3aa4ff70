"""Command-line front end.

Exit status: 0 on success, 1 when a computation row failed, 2 on invalid
flags or specs.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .algebra import ParseError
from .frobenius import NotFPure, bound_check, fpt_bracket, splitting_colength_groebner, splitting_profile
from .sweep import RingSpec, SpecError, emit_report, run_sweep
from .toric import InvalidCone, ToricCone, parse_rays, toric_fsignature, veronese_cone


class UsageError(Exception):
    pass


def _frac_text(x: Fraction | None) -> str:
    if x is None:
        return "-"
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _frac_json(x: Fraction | None):
    return None if x is None else {"num": x.numerator, "den": x.denominator}


def _table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers, got {text!r}") from None


def _load_spec(args) -> RingSpec:
    """Spec file from --ring/--spec, or one assembled from inline flags."""
    path = getattr(args, "ring", None) or getattr(args, "spec", None)
    if path:
        spec = RingSpec.load(path)
        data = spec.to_dict()
    else:
        if not getattr(args, "vars", None):
            raise UsageError("give a spec file with --ring, or --vars (with optional --relation/--weights)")
        names = [v.strip() for v in args.vars.split(",") if v.strip()]
        data = {"schema": 1, "label": "inline", "vars": names, "e_max": 1, "primes": [3]}
        if args.weights:
            data["weights"] = _int_list(args.weights, "--weights")
        if args.relation:
            data["relation"] = args.relation
    if getattr(args, "primes", None):
        data["primes"] = _int_list(args.primes, "--primes")
    if getattr(args, "e_max", None) is not None:
        data["e_max"] = args.e_max
    if getattr(args, "element", None):
        data["designated_elements"] = {args.element: args.element}
    return RingSpec.from_dict(data)


def _emit(args, text: str, payload) -> None:
    out = json.dumps(payload, indent=2) + "\n" if args.format == "json" else text + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def cmd_fpt(args) -> int:
    spec = _load_spec(args)
    if not spec.designated_elements:
        raise UsageError("no element: pass --element or list designated_elements in the spec")
    rows, payload, failed = [], [], 0
    for name, text in spec.designated_elements:
        for p in spec.primes:
            try:
                b = fpt_bracket(text, spec.ring(p), spec.e_max)
            except NotFPure as exc:
                failed += 1
                rows.append([name, p, "-", "-", "-", "-", "-", f"failed: {exc}"])
                payload.append({"element": name, "p": p, "status": f"failed: {exc}"})
                continue
            lo = hi = None
            for e, nu, mu in b.rows:
                q = p ** e
                lo = Fraction(nu, q) if lo is None else max(lo, Fraction(nu, q))
                hi = Fraction(mu, q) if hi is None else min(hi, Fraction(mu, q))
                rows.append([name, p, e, nu, mu, _frac_text(lo), _frac_text(hi), "ok"])
                payload.append({"element": name, "p": p, "e": e, "nu": nu, "mu": mu,
                                "lower": _frac_json(lo), "upper": _frac_json(hi), "status": "ok"})
    _emit(args, _table(["element", "p", "e", "nu", "mu", "lower", "upper", "status"], rows), payload)
    return 1 if failed else 0


def _profile_cmd(args, columns: str) -> int:
    spec = _load_spec(args)
    rows, payload, failed = [], [], 0
    for p in spec.primes:
        ring = spec.ring(p)
        for e in range(1, spec.e_max + 1):
            try:
                pr = splitting_profile(ring, e, seed=args.seed)
            except Exception as exc:
                failed += 1
                rows.append([p, e, p ** e, "-", "-", f"failed: {exc}"])
                payload.append({"p": p, "e": e, "q": p ** e, "status": f"failed: {exc}"})
                continue
            if columns == "fsig":
                rows.append([p, e, pr.q, pr.colength_Ie, _frac_text(pr.s_e), "ok"])
            else:
                rows.append([p, e, pr.q, "-" if pr.m_e is None else pr.m_e, _frac_text(pr.alpha_e),
                             "yes" if pr.order_is_exact else "no"])
            payload.append({"p": p, "e": e, "q": pr.q, "colength_Ie": pr.colength_Ie,
                            "s_e": _frac_json(pr.s_e), "m_e": pr.m_e, "alpha_e": _frac_json(pr.alpha_e),
                            "order_is_exact": pr.order_is_exact, "status": "ok"})
    if columns == "fsig":
        headers = ["p", "e", "q", "colength_Ie", "s_e", "status"]
    else:
        headers = ["p", "e", "q", "m_e", "alpha_e", "order_exact"]
    _emit(args, _table(headers, rows), payload)
    return 1 if failed else 0


def cmd_fsig(args) -> int:
    return _profile_cmd(args, "fsig")


def cmd_alpha(args) -> int:
    return _profile_cmd(args, "alpha")


def cmd_toric(args) -> int:
    cone = ToricCone(parse_rays(args.rays))
    if args.veronese != 1:
        cone = veronese_cone(cone, args.veronese)
    s = toric_fsignature(cone)
    _emit(args, _frac_text(s), {"rays": [list(r) for r in cone.rays], "signature": _frac_json(s)})
    return 0


def cmd_sweep(args) -> int:
    spec = _load_spec(args)
    report = run_sweep(spec, jobs=args.jobs, seed=args.seed)
    fmt = args.format if args.format in ("csv", "json") else "csv"
    text = emit_report(report, fmt, args.out)
    if not args.out:
        sys.stdout.write(text)
    if report.failed:
        print(f"{report.failed} row(s) failed", file=sys.stderr)
    return 1 if report.failed else 0


def cmd_verify(args) -> int:
    """Containment inequalities plus internal invariants at the requested levels."""
    spec = _load_spec(args)
    primes = list(spec.primes) if args.primes else [spec.primes[0]]
    e_max = args.e_max if args.e_max is not None else 1
    passed = total = 0
    inv_pass = inv_total = 0
    lines, payload = [], []
    for p in primes:
        ring = spec.ring(p)
        for e in range(1, e_max + 1):
            pr = splitting_profile(ring, e, seed=args.seed)
            rep = bound_check(pr, ring)
            ran = sum(c.status != "skipped" for c in rep.checks)
            passed += rep.passed
            total += ran
            invariants = {"s_e in [0,1]": 0 <= pr.s_e <= 1}
            if pr.q ** ring.n <= 15_625:
                invariants["groebner colength"] = splitting_colength_groebner(ring, e) == pr.colength_Ie
            for name, text in spec.designated_elements:
                b = fpt_bracket(text, ring, e)
                mono = all(b.rows[i][1] * ring.p <= b.rows[i + 1][1] for i in range(len(b.rows) - 1))
                invariants[f"nu monotone ({name})"] = mono
                invariants[f"mu = nu + 1 ({name})"] = all(mu == nu + 1 for _, nu, mu in b.rows)
            inv_total += len(invariants)
            inv_pass += sum(invariants.values())
            lines.append(f"p={p} e={e}: " + rep.summary())
            for c in rep.checks:
                lines.append(f"  {c.name}: {c.status} ({c.detail})")
            for k, v in invariants.items():
                lines.append(f"  {k}: {'pass' if v else 'fail'}")
            payload.append({"p": p, "e": e,
                            "checks": [{"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "status": c.status}
                                       for c in rep.checks],
                            "invariants": invariants})
    lines.append(f"containment checks: {passed}/{total} pass")
    lines.append(f"invariants: {inv_pass}/{inv_total} pass")
    _emit(args, "\n".join(lines), {"results": payload, "containment": {"passed": passed, "total": total},
                                   "invariants": {"passed": inv_pass, "total": inv_total}})
    return 0 if passed == total and inv_pass == inv_total else 1


def _add_ring_flags(sp: argparse.ArgumentParser, element: bool = False) -> None:
    sp.add_argument("--ring", "--spec", dest="ring", metavar="PATH", help="ring spec JSON file")
    sp.add_argument("--vars", help="inline ring: comma-separated variable names")
    sp.add_argument("--weights", help="inline ring: comma-separated positive weights")
    sp.add_argument("--relation", help="inline ring: hypersurface relation")
    sp.add_argument("--primes", help="comma-separated primes (overrides the spec)")
    sp.add_argument("--e-max", type=int, dest="e_max", help="Frobenius depth (overrides the spec)")
    if element:
        sp.add_argument("--element", help="element whose threshold is bracketed")
    sp.add_argument("--seed", type=int, help="use the randomized Wiedemann rank with this seed")


def _add_output_flags(sp: argparse.ArgumentParser, formats=("table", "json"), default="table") -> None:
    sp.add_argument("--format", choices=formats, default=default, help=f"output format (default {default})")
    sp.add_argument("--out", metavar="PATH", help="write output to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsplitlab", formatter_class=argparse.RawDescriptionHelpFormatter,
                                     description="F-pure thresholds, F-signatures and F-alpha proxies over prime fields.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("fpt", help="bracket F-pure thresholds of an element")
    _add_ring_flags(sp, element=True)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_fpt)

    sp = sub.add_parser("fsig", help="finite-level F-signature s_e")
    _add_ring_flags(sp)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_fsig)

    sp = sub.add_parser("alpha", help="finite-level F-alpha proxy m_e / p^e")
    _add_ring_flags(sp)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_alpha)

    sp = sub.add_parser("toric", help="exact F-signature of a toric ring")
    sp.add_argument("--rays", required=True, help='ray generators, e.g. "1,0;1,2"')
    sp.add_argument("--veronese", type=int, default=1, help="take the n-th Veronese subring first")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_toric)

    sp = sub.add_parser("sweep", help="run a multi-prime sweep and write a report")
    _add_ring_flags(sp, element=True)
    sp.add_argument("--jobs", type=int, default=1, help="number of worker processes")
    _add_output_flags(sp, formats=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="containment inequalities and invariant checks")
    _add_ring_flags(sp)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_verify)

    lines = ["subcommand flags:"]
    for name, child in sub.choices.items():
        flags = [a.option_strings[-1] if a.option_strings[0] == "-h" else "/".join(a.option_strings)
                 for a in child._actions if a.option_strings]
        lines.append(f"  {name:<8}{' '.join(flags)}")
    lines.append("run 'fsplitlab COMMAND --help' for details")
    parser.epilog = "\n".join(lines)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    if getattr(args, "e_max", None) is not None and args.e_max < 1:
        parser.error("--e-max must be >= 1")
    try:
        return args.func(args)
    except (UsageError, SpecError, ParseError, InvalidCone) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
