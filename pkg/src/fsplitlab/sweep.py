"""Multi-prime sweeps: reduce one integer presentation at many primes.

A ring spec is one JSON document::

    {
      "schema": 1,
      "label": "a1",
      "vars": ["x", "y", "z"],
      "weights": [1, 1, 1],            # optional, default all ones
      "relation": "x*y - z^2",          # optional, absent = polynomial ring
      "designated_elements": {"x": "x"},# optional, name -> polynomial
      "primes": [3, 5, 7, 11],
      "e_max": 2,
      "toric": {"rays": [[1, 0], [1, 2]]},  # optional cross-check
      "row_budget_seconds": 60          # optional, per (p, e) row
    }

Every (p, e) pair is an independent task.  Rows are folded in (p, e)
order, so the report and its CSV do not depend on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .algebra import Ambient, ParseError, Poly, is_prime, parse_poly, weighted_order
from .frobenius import (BoundReport, FrobeniusProfile, NotFPure, RingPresentation, bound_check,
                        nu_e, power_generators, quotient_colength, splitting_profile)
from .toric import InvalidCone, ToricCone, toric_fsignature

SCHEMA_VERSION = 1
CSV_COLUMNS = ["label", "p", "e", "q", "colength_Ie", "s_e_num", "s_e_den", "m_e", "alpha_e_num",
               "alpha_e_den", "nu_f", "mu_f", "fpt_lo_num", "fpt_lo_den", "fpt_hi_num", "fpt_hi_den",
               "status"]
BOUND_CHECK_LIMIT = 15_625  # run the containment checks only while q^n stays below this
_LABEL_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")
_KNOWN_KEYS = {"schema", "label", "vars", "weights", "relation", "designated_elements", "primes",
               "e_max", "toric", "row_budget_seconds"}


class SpecError(ValueError):
    """The ring spec is malformed; raised before any computation."""


@dataclass(frozen=True)
class RingSpec:
    label: str
    vars: tuple[str, ...]
    weights: tuple[int, ...]
    relation: str | None
    designated_elements: tuple[tuple[str, str], ...]
    primes: tuple[int, ...]
    e_max: int
    toric_rays: tuple[tuple[int, ...], ...] | None = None
    row_budget_seconds: float | None = None

    @property
    def ambient(self) -> Ambient:
        return Ambient.of(self.vars, self.weights)

    def relation_poly(self) -> Poly | None:
        return parse_poly(self.relation, self.ambient) if self.relation is not None else None

    def ring(self, p: int) -> RingPresentation:
        return RingPresentation(self.ambient, p, self.relation_poly(), self.label)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "label": self.label,
            "vars": list(self.vars),
            "weights": list(self.weights),
            "relation": self.relation,
            "designated_elements": dict(self.designated_elements),
            "primes": list(self.primes),
            "e_max": self.e_max,
        }
        if self.toric_rays is not None:
            out["toric"] = {"rays": [list(r) for r in self.toric_rays]}
        if self.row_budget_seconds is not None:
            out["row_budget_seconds"] = self.row_budget_seconds
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RingSpec":
        if not isinstance(data, dict):
            raise SpecError("spec must be a JSON object")
        unknown = set(data) - _KNOWN_KEYS
        if unknown:
            raise SpecError(f"unknown spec fields: {', '.join(sorted(unknown))}")
        if data.get("schema") != SCHEMA_VERSION:
            raise SpecError(f"spec field 'schema' must be {SCHEMA_VERSION}")
        label = data.get("label")
        if not isinstance(label, str) or not _LABEL_RE.match(label):
            raise SpecError("label must be a nonempty filesystem-safe identifier")
        names = data.get("vars")
        if not isinstance(names, list) or not names or not all(isinstance(v, str) for v in names):
            raise SpecError("vars must be a nonempty list of names")
        weights = data.get("weights", [1] * len(names))
        if (not isinstance(weights, list) or len(weights) != len(names)
                or not all(isinstance(w, int) and not isinstance(w, bool) and w >= 1 for w in weights)):
            raise SpecError("weights must be one positive integer per variable")
        try:
            amb = Ambient.of(names, weights)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
        relation = data.get("relation")
        g = None
        if relation is not None:
            if not isinstance(relation, str):
                raise SpecError("relation must be a polynomial string")
            try:
                g = parse_poly(relation, amb)
            except ParseError as exc:
                raise SpecError(f"relation: {exc}") from None
            if not g:
                raise SpecError("relation must be nonzero")
            if g.constant_term():
                raise SpecError("relation must vanish at the origin")
        elems = data.get("designated_elements", {})
        if not isinstance(elems, dict):
            raise SpecError("designated_elements must map names to polynomials")
        for name, text in elems.items():
            if not isinstance(text, str):
                raise SpecError(f"designated element {name!r} must be a polynomial string")
            try:
                f = parse_poly(text, amb)
            except ParseError as exc:
                raise SpecError(f"designated element {name!r}: {exc}") from None
            if not f or f.constant_term():
                raise SpecError(f"designated element {name!r} must be a nonzero non-unit")
        primes = data.get("primes")
        if (not isinstance(primes, list) or not primes
                or not all(isinstance(p, int) and not isinstance(p, bool) for p in primes)):
            raise SpecError("primes must be a nonempty list of integers")
        if len(set(primes)) != len(primes):
            raise SpecError("primes must be distinct")
        for p in primes:
            if not (3 <= p < 2**31 and is_prime(p)):
                raise SpecError(f"{p} is not an odd prime below 2^31")
        if g is not None:
            content = 0
            for c in g.terms.values():
                content = math.gcd(content, c)
            divisors = _prime_divisors(content)
            bad = [p for p in primes if any(r >= p for r in divisors)]
            if bad:
                raise SpecError(f"primes {bad} do not exceed the prime divisors of the relation content {content}")
            for p in primes:
                try:
                    RingPresentation(amb, p, g)
                except ValueError as exc:
                    raise SpecError(f"p={p}: {exc}") from None
        e_max = data.get("e_max")
        if not isinstance(e_max, int) or isinstance(e_max, bool) or e_max < 1:
            raise SpecError("e_max must be an integer >= 1")
        rays = None
        if "toric" in data and data["toric"] is not None:
            block = data["toric"]
            if not isinstance(block, dict) or not isinstance(block.get("rays"), list):
                raise SpecError("toric must be an object with a 'rays' list")
            try:
                rays = tuple(tuple(r) for r in ToricCone(block["rays"]).rays)
            except (InvalidCone, TypeError, ValueError) as exc:
                raise SpecError(f"toric: {exc}") from None
        budget = data.get("row_budget_seconds")
        if budget is not None and (not isinstance(budget, (int, float)) or budget <= 0):
            raise SpecError("row_budget_seconds must be positive")
        return cls(label, tuple(names), tuple(weights), relation, tuple(elems.items()),
                   tuple(primes), e_max, rays, budget)

    @classmethod
    def load(cls, path: str | Path) -> "RingSpec":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise SpecError(f"cannot read spec {path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)


def _prime_divisors(n: int) -> list[int]:
    n = abs(n)
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@dataclass
class Row:
    label: str
    p: int
    e: int
    q: int
    profile: FrobeniusProfile | None = None
    nus: dict[str, int] = field(default_factory=dict)
    brackets: dict[str, tuple[Fraction, Fraction]] = field(default_factory=dict)
    bounds: BoundReport | None = None
    status: str = "ok"
    seconds: float = 0.0


class _ForcedFailure(RuntimeError):
    pass


def _run_task(spec: RingSpec, p: int, e: int, seed: int | None, forced: bool) -> Row:
    start = time.monotonic()
    row = Row(spec.label, p, e, p ** e)
    try:
        if forced:
            raise _ForcedFailure("forced failure")
        ring = spec.ring(p)
        row.profile = splitting_profile(ring, e, seed=seed)
        for name, text in spec.designated_elements:
            row.nus[name] = nu_e(text, ring, e)
        if row.profile.q ** ring.n <= BOUND_CHECK_LIMIT and row.profile.colength_Ie > 0:
            row.bounds = bound_check(row.profile, ring)
        if spec.row_budget_seconds is not None and time.monotonic() - start > spec.row_budget_seconds:
            raise TimeoutError(f"row exceeded its budget of {spec.row_budget_seconds} s")
    except NotFPure as exc:
        row.status = f"failed: not F-pure ({exc})"
    except Exception as exc:  # isolate every row
        row.status = f"failed: {type(exc).__name__}: {exc}"
    if row.status != "ok":
        row.profile, row.nus, row.bounds = None, {}, None
    elif row.bounds is not None and not row.bounds.ok:
        row.status = "failed: bound check"
    row.seconds = time.monotonic() - start
    return row


@dataclass
class SweepReport:
    spec: RingSpec
    rows: list[Row]
    per_prime: list[dict]
    aggregate: dict
    toric: dict | None
    version: str = __version__
    extrapolation: None = None

    @property
    def failed(self) -> int:
        return sum(r.status != "ok" for r in self.rows)


def _frac(x: Fraction | None) -> dict | None:
    return None if x is None else {"num": x.numerator, "den": x.denominator}


def _fold(spec: RingSpec, rows: list[Row]) -> SweepReport:
    """Single-threaded assembly of per-prime and aggregate summaries."""
    rows = sorted(rows, key=lambda r: (r.p, r.e))
    names = [name for name, _ in spec.designated_elements]
    per_prime = []
    for p in spec.primes:
        prow = [r for r in rows if r.p == p]
        brackets: dict[str, tuple[Fraction, Fraction] | None] = {}
        for name in names:
            lo = hi = None
            for r in prow:
                if r.status != "ok":
                    continue
                nu = r.nus[name]
                lo = Fraction(nu, r.q) if lo is None else max(lo, Fraction(nu, r.q))
                hi = Fraction(nu + 1, r.q) if hi is None else min(hi, Fraction(nu + 1, r.q))
                r.brackets[name] = (lo, hi)
            brackets[name] = None if lo is None else (lo, hi)
        ok = [r for r in prow if r.status == "ok"]
        last = ok[-1] if ok else None
        per_prime.append({
            "p": p,
            "e": last.e if last else None,
            "s": last.profile.s_e if last else None,
            "s_uncertainty": Fraction(1, last.q) if last else None,
            "alpha": last.profile.alpha_e if last else None,
            "fpt": brackets,
        })
    s_vals = [pp["s"] for pp in per_prime if pp["s"] is not None]
    a_vals = [pp["alpha"] for pp in per_prime if pp["alpha"] is not None]
    inter = {}
    for name in names:
        bs = [pp["fpt"][name] for pp in per_prime if pp["fpt"].get(name) is not None]
        if bs:
            lo, hi = max(b[0] for b in bs), min(b[1] for b in bs)
            inter[name] = {"lower": lo, "upper": hi, "nonempty": lo < hi}
        else:
            inter[name] = None
    aggregate = {
        "s_min": min(s_vals) if s_vals else None,
        "alpha_min": min(a_vals) if a_vals else None,
        "fpt_intersection": inter,
    }
    toric = None
    if spec.toric_rays is not None:
        value = toric_fsignature(ToricCone(spec.toric_rays))
        ok = [r for r in rows if r.status == "ok"]
        within = all(abs(r.profile.s_e - value) <= Fraction(1, r.q) for r in ok)
        toric = {"rays": [list(r) for r in spec.toric_rays], "signature": value, "agrees_within_1_over_q": within}
    return SweepReport(spec, rows, per_prime, aggregate, toric)


def run_sweep(spec: RingSpec, jobs: int = 1, seed: int | None = None,
              fail_rows: Sequence[tuple[int, int]] = ()) -> SweepReport:
    """All (p, e) profiles for ``spec``; failures stay confined to their row.

    ``fail_rows`` forces the listed (p, e) tasks to fail, which tests use
    to check row isolation.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    tasks = [(p, e) for p in sorted(spec.primes) for e in range(1, spec.e_max + 1)]
    forced = set(map(tuple, fail_rows))
    if jobs == 1 or len(tasks) == 1:
        rows = [_run_task(spec, p, e, seed, (p, e) in forced) for p, e in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            futures = [pool.submit(_run_task, spec, p, e, seed, (p, e) in forced) for p, e in tasks]
            rows = [f.result() for f in futures]
    return _fold(spec, rows)


@dataclass(frozen=True)
class MultiplicityEstimate:
    exact: int | None
    fitted: Fraction
    fit_points: tuple[tuple[int, Fraction], ...]  # (n, d! l(R/m^n) / n^d)


def multiplicity_estimate(spec: RingSpec, p: int, n_max: int = 6) -> MultiplicityEstimate:
    """Hilbert-Samuel multiplicity at the origin.

    The exact value is the order of ``g`` (1 for the polynomial ring).
    The fit ``d! l(R/m^n) / n^d`` at ``n = n_max - 2 .. n_max`` is reported
    alongside for inspection.
    """
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    ring = spec.ring(p)
    d = ring.dimension
    exact = 1 if ring.relation_p is None else weighted_order(ring.relation_p)
    points = []
    for n in range(n_max - 2, n_max + 1):
        L = quotient_colength(ring, power_generators(ring.n, n))
        points.append((n, Fraction(math.factorial(d) * L, n ** d)))
    return MultiplicityEstimate(exact, points[-1][1], tuple(points))


# ----------------------------------------------------------------------------
# output

def _csv_row(row: Row, first: str | None) -> list:
    blank = [""] * len(CSV_COLUMNS)
    out = dict(zip(CSV_COLUMNS, blank))
    out.update(label=row.label, p=row.p, e=row.e, q=row.q, status=row.status)
    pr = row.profile
    if pr is not None:
        out.update(colength_Ie=pr.colength_Ie, s_e_num=pr.s_e.numerator, s_e_den=pr.s_e.denominator)
        if pr.m_e is not None:
            out.update(m_e=pr.m_e, alpha_e_num=pr.alpha_e.numerator, alpha_e_den=pr.alpha_e.denominator)
        if first is not None and first in row.nus:
            nu = row.nus[first]
            lo, hi = row.brackets[first]
            out.update(nu_f=nu, mu_f=nu + 1, fpt_lo_num=lo.numerator, fpt_lo_den=lo.denominator,
                       fpt_hi_num=hi.numerator, fpt_hi_den=hi.denominator)
    return [out[c] for c in CSV_COLUMNS]


def report_csv(report: SweepReport) -> str:
    """CSV text; ``nu_f``/``mu_f`` and the bracket follow the first designated element."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    names = [name for name, _ in report.spec.designated_elements]
    first = names[0] if names else None
    for row in report.rows:
        w.writerow(_csv_row(row, first))
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, Fraction):
        return _frac(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def report_dict(report: SweepReport) -> dict:
    rows = []
    for r in report.rows:
        pr = r.profile
        rows.append({
            "label": r.label, "p": r.p, "e": r.e, "q": r.q,
            "profile": None if pr is None else _jsonable(asdict(pr)),
            "nu": dict(r.nus),
            "fpt": {k: {"lower": _frac(lo), "upper": _frac(hi)} for k, (lo, hi) in r.brackets.items()},
            "bound_checks": None if r.bounds is None else [_jsonable(asdict(c)) for c in r.bounds.checks],
            "status": r.status,
            "seconds": round(r.seconds, 6),
        })
    per_prime = []
    for pp in report.per_prime:
        per_prime.append({
            **{k: _jsonable(v) for k, v in pp.items() if k != "fpt"},
            "fpt": {k: None if b is None else {"lower": _frac(b[0]), "upper": _frac(b[1])}
                    for k, b in pp["fpt"].items()},
        })
    return {
        "spec": report.spec.to_dict(),
        "version": report.version,
        "rows": rows,
        "per_prime": per_prime,
        "aggregate": _jsonable(report.aggregate),
        "toric": _jsonable(report.toric),
        "extrapolation": None,
    }


def report_json(report: SweepReport) -> str:
    return json.dumps(report_dict(report), indent=2, sort_keys=False) + "\n"


def emit_report(report: SweepReport, fmt: str, path: str | Path | None = None) -> str:
    """Render the report as ``csv`` or ``json``; write it to ``path`` when given."""
    if fmt == "csv":
        text = report_csv(report)
    elif fmt == "json":
        text = report_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc.strerror}") from exc
    return text
