"""Batch front end: evaluate wave functions, verify relations, run the
acceptance suite, and drive the P_j search.

Exit codes: 0 pass, 1 relation/gate failure, 2 usage error, 3 numerical
non-convergence.  All reports are line-delimited records with a fixed
header naming the columns; identical configuration produces byte-identical
files (deterministic summation and record order, independent of --threads).

Configuration precedence: built-in defaults < ARTIFACT_* environment
variables < key=value config file (--config) < command-line flags.
Unknown config keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

__all__ = [
    "RunConfig",
    "main",
    "cmd_eval",
    "cmd_verify",
    "cmd_suite",
    "cmd_search",
    "run_gate",
    "gate_names",
    "EXIT_OK",
    "EXIT_FAIL",
    "EXIT_USAGE",
    "EXIT_NOCONV",
]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NOCONV = 3

ENV_PREFIX = "ARTIFACT_"

_FMT = "%.17g"


class UsageError(ValueError):
    pass


class NonConvergence(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Resolved run options shared by the subcommands."""

    tol: float | None = None
    degree: int = 8
    grid: str | None = None
    out: str | None = None
    threads: int = 1
    rel_tol: float = 1e-12
    extra: dict = field(default_factory=dict)


def parse_config_file(path: str) -> dict:
    """Plain key=value lines; blank lines and '#' comments ignored."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{ln}: expected key=value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def _option_dests(parser: argparse.ArgumentParser) -> dict:
    """Map config-file/env key -> (dest, type) for a subparser."""
    out = {}
    for action in parser._actions:  # noqa: SLF001 - argparse has no API
        if action.dest in ("help", "config"):
            continue
        if not action.option_strings:
            continue
        key = max(action.option_strings, key=len).lstrip("-")
        out[key.replace("-", "_")] = (action.dest, action.type)
    return out


def _coerce(raw: str, typ):
    if typ is None:
        return raw
    try:
        return typ(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value {raw!r}: {exc}") from exc


def apply_overrides(parser: argparse.ArgumentParser, argv: list) -> None:
    """Set parser defaults from env vars and an optional --config file."""
    dests = _option_dests(parser)
    defaults = {}
    for key, (dest, typ) in sorted(dests.items()):
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            defaults[dest] = _coerce(env, typ)
    cfg_path = None
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config requires a path")
            cfg_path = argv[i + 1]
        elif tok.startswith("--config="):
            cfg_path = tok.split("=", 1)[1]
    if cfg_path is not None:
        for key, raw in sorted(parse_config_file(cfg_path).items()):
            norm = key.replace("-", "_")
            if norm not in dests:
                raise UsageError(
                    f"unknown config key {key!r}; known: "
                    + ", ".join(sorted(dests)))
            dest, typ = dests[norm]
            defaults[dest] = _coerce(raw, typ)
    parser.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------


class Report:
    """Accumulates lines; written atomically at the end (determinism)."""

    def __init__(self):
        self.lines = []

    def add(self, line: str):
        self.lines.append(line)

    def emit(self, out_path: str | None):
        text = "\n".join(self.lines) + "\n"
        if out_path:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad float list {text!r}") from exc


def _parse_grid(text: str) -> tuple:
    """start:stop:count -> tuple of floats (inclusive endpoints)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("--grid expects start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}") from exc
    if count < 1:
        raise UsageError("--grid count must be >= 1")
    if count == 1:
        return (start,)
    step = (stop - start) / (count - 1)
    return tuple(start + i * step for i in range(count))


def _tmap(fn, items, threads: int):
    """Deterministic map: thread pool preserves input order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    from .evaluator import QuadratureSpec, macdonald_K, whittaker_value
    from .params import Weight
    from .whittaker import WhittakerSpec

    lam = _floats(args.lam)
    mu_left = _floats(args.mu_left)
    mu_right = _floats(args.mu_right)
    phi = _floats(args.phi)
    n = 2 if args.family == "sl2" else 3
    rank = n - 1
    if not (len(lam) == len(mu_left) == len(mu_right) == len(phi) == rank):
        raise UsageError(
            f"{args.family} needs {rank} component(s) for "
            "--lambda/--mu-left/--mu-right/--phi")
    q = QuadratureSpec(rel_tol=args.rel_tol)
    spec = WhittakerSpec(n, Weight(lam), mu_left, mu_right)

    if args.family == "sl2":
        branch = {"series": "series_sl2", "integral": "integral_sl2",
                  "macdonald": "macdonald"}[args.method]
    else:
        if args.method != "integral":
            raise UsageError("sl3 supports --method integral only")
        branch = "hat_sl3"

    def one(phis):
        if branch == "macdonald":
            mLmR = mu_left[0] * mu_right[0]
            if mLmR <= 0:
                raise UsageError("macdonald method needs mu_L mu_R > 0")
            z = 2.0 * math.sqrt(mLmR) * math.exp(-phis[0])
            k = macdonald_K(lam[0] + 1, z, q)
            c = 2.0 * mu_right[0] ** (lam[0] + 1) * mLmR ** (
                -(lam[0] + 1) / 2.0) * math.exp((lam[0] + 1) * phis[0])
            vals = (c * k.value, abs(c) * k.est_error, k.converged)
        else:
            r = whittaker_value(branch, spec, phis, None, q)
            vals = (r.value, r.est_error, r.converged)
        return phis, vals

    if args.grid:
        pts = [(p,) + phi[1:] for p in _parse_grid(args.grid)]
    else:
        pts = [phi]
    rows = _tmap(one, pts, args.threads)

    rep = Report()
    rep.add("# EVAL.v1 columns: family method lambda mu_left mu_right "
            "phi value est_error converged")
    bad = False
    for phis, (val, err, ok) in rows:
        bad = bad or not ok
        rep.add(" ".join([
            args.family, args.method,
            ",".join(_FMT % v for v in lam),
            ",".join(_FMT % v for v in mu_left),
            ",".join(_FMT % v for v in mu_right),
            ",".join(_FMT % v for v in phis),
            _FMT % val, _FMT % err, "1" if ok else "0"]))
    rep.emit(args.out)
    if bad:
        raise NonConvergence("quadrature did not converge at some points")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _parse_params(text: str | None) -> dict | None:
    if not text:
        return None
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"--params item {item!r} must be key=value")
        k, _, v = item.partition("=")
        out[k.strip()] = float(v)
    return out


def _parse_phi_grid(text: str | None):
    if not text:
        return None
    return tuple(_floats(chunk) for chunk in text.split(";"))


def cmd_verify(args) -> int:
    from . import relations
    from .evaluator import QuadratureSpec

    ids = relations.relation_ids()
    if args.relation_id not in ids:
        raise UsageError(
            f"unknown relation {args.relation_id!r}; known: "
            + ", ".join(ids))
    rep = Report()
    rep.add("# RESIDUAL.v1 columns: relation params phi lhs rhs abs rel")
    report = relations.verify(
        args.relation_id,
        params=_parse_params(args.params),
        grid=_parse_phi_grid(args.grid),
        tol=args.tol,
        q=QuadratureSpec(rel_tol=args.rel_tol),
        threads=args.threads)
    for line in report.records():
        rep.add(line)
    rep.add("SUMMARY relation=%s max_rel=%s tol=%s status=%s"
            % (report.relation_id, _FMT % report.max_rel,
               _FMT % report.tolerance,
               "PASS" if report.passed else "FAIL"))
    if args.printed:
        diff = relations.printed_diff(args.relation_id)
        if not diff["mismatches"]:
            rep.add("PRINTED relation=%s status=MATCH" % args.relation_id)
        for what, detail in diff["mismatches"]:
            rep.add("PRINTED relation=%s mismatch=%r detail=%r"
                    % (args.relation_id, what, detail))
    rep.emit(args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# suite gates
# ---------------------------------------------------------------------------


def _gate_macdonald(rep: Report, quick: bool) -> bool:
    """Integral branch against the modified-Bessel closed form."""
    from scipy.special import kv

    from .evaluator import eval_integral_sl2
    from .params import Weight
    from .whittaker import WhittakerSpec

    lams = (-0.7, -0.3, 0.25, 0.8, 1.3)
    mus = ((1.0, 1.0), (0.7, 1.3), (1.5, 0.6))
    phis = (-0.8, 0.0, 0.9)
    if quick:
        lams, mus, phis = lams[:2], mus[:2], phis[:2]
    worst = 0.0
    for la in lams:
        for mL, mR in mus:
            for ph in phis:
                spec = WhittakerSpec(2, Weight((la,)), (mL,), (mR,))
                got = eval_integral_sl2(spec, ph).value
                z = 2.0 * math.sqrt(mL * mR) * math.exp(-ph)
                ref = (2.0 * mR ** (la + 1) * (mL * mR) ** (-(la + 1) / 2)
                       * math.exp((la + 1) * ph) * float(kv(la + 1, z)))
                worst = max(worst, abs(got - ref) / abs(ref))
    rep.add("DETAIL macdonald max_rel=%s tol=1e-10" % (_FMT % worst))
    return worst <= 1e-10


def _toda_sl2_residual(branch: str, la, mL, mR, phis) -> float:
    """Eigen-equation residual in the gauge of the given branch.

    The pairing-normalized branch satisfies the equation as printed
    (potential -2 mu_L mu_R); the entire-series branch satisfies it with
    the engine sign convention (+2), and the printed-prefactor integral
    branch carries an extra exp((lam+2) phi) gauge that conjugates the
    first-order and constant terms.
    """
    from .evaluator import eval_derivative
    from .params import Weight
    from .whittaker import WhittakerSpec

    spec = WhittakerSpec(2, Weight((la,)), (mL,), (mR,))
    scal = 0.5 * la * la + la
    worst = 0.0
    for ph in phis:
        w = eval_derivative(branch, spec, (ph,), (0,)).value
        d1 = eval_derivative(branch, spec, (ph,), (1,)).value
        d2 = eval_derivative(branch, spec, (ph,), (2,)).value
        pot = mL * mR * math.exp(-2.0 * ph) * w
        if branch == "series_sl2":
            h = 0.5 * d2 + d1 + 2.0 * pot
        elif branch == "integral_sl2":
            g = la + 2.0
            h = (0.5 * d2 - (la + 1.0) * d1
                 + (0.5 * g * g - g) * w - 2.0 * pot)
        else:
            h = 0.5 * d2 + d1 - 2.0 * pot
        worst = max(worst, abs(h - scal * w) / max(abs(scal * w), 1e-300))
    return worst


def _gate_toda(rep: Report, quick: bool) -> bool:
    from .evaluator import eval_derivative
    from .params import Weight
    from .whittaker import WhittakerSpec

    phis = (-0.6, 0.0, 0.7)
    r_series = _toda_sl2_residual("series_sl2", 0.3, 0.7, 1.3, phis)
    r_int = _toda_sl2_residual("integral_sl2", 0.3, 0.7, 1.3, phis)
    rep.add("DETAIL toda sl2 series=%s tol=1e-8" % (_FMT % r_series))
    rep.add("DETAIL toda sl2 integral=%s tol=1e-6" % (_FMT % r_int))
    ok = r_series <= 1e-8 and r_int <= 1e-6
    if quick:
        return ok

    la1, la2 = 0.3, 0.45
    mL1, mL2, mR1, mR2 = 0.7, 0.9, 1.3, 1.1
    spec = WhittakerSpec(3, Weight((la1, la2)), (mL1, mL2), (mR1, mR2))
    scal = 2 * la1 + 2 * la2 + (2.0 / 3) * (
        la1 * la1 + la2 * la2 + la1 * la2)
    pts = [(p1, p2) for p1 in (-0.4, 0.0, 0.5) for p2 in (-0.3, 0.1, 0.4)]
    worst = 0.0
    for p1, p2 in pts:
        def dv(k1, k2):
            return eval_derivative(
                "hat_sl3", spec, (p1, p2), (k1, k2)).value
        w = dv(0, 0)
        h = ((2.0 / 3) * (dv(2, 0) + dv(0, 2) + dv(1, 1))
             + 2 * (dv(1, 0) + dv(0, 1))
             - 2 * mL1 * mR1 * math.exp(-2 * p1 + p2) * w
             - 2 * mL2 * mR2 * math.exp(p1 - 2 * p2) * w)
        worst = max(worst, abs(h - scal * w) / max(abs(scal * w), 1e-300))
    rep.add("DETAIL toda sl3 hat=%s tol=1e-4" % (_FMT % worst))
    return ok and worst <= 1e-4


def _gate_casimir(rep: Report, quick: bool) -> bool:
    import sympy as sp

    from .algebra import casimir2
    from .params import Weight, lam
    from .relations import hw_scalar, quadratic_toda_matches_closed_form

    l1, l2 = lam(1), lam(2)
    s2 = hw_scalar(casimir2(2), Weight((l1,)))
    ok2 = sp.cancel(s2 - (l1 ** 2 / 2 + l1)) == 0
    s3 = hw_scalar(casimir2(3), Weight((l1, l2)))
    want3 = 2 * l1 + 2 * l2 + sp.Rational(2, 3) * (
        l1 ** 2 + l2 ** 2 + l1 * l2)
    ok3 = sp.cancel(s3 - want3) == 0
    rep.add("DETAIL casimir scalar sl2=%s sl3=%s" % (ok2, ok3))
    okq = all(quadratic_toda_matches_closed_form(n) for n in (2, 3))
    rep.add("DETAIL casimir closed-form operator n=2,3 ok=%s" % okq)
    return ok2 and ok3 and okq


_SL2_MAP_IDS = (
    "SL2_PHI_PLUS", "SL2_PHI_MINUS", "SL2_PHI_PLUS_INV",
    "SL2_PHI_MINUS_INV", "SL2_PHI_PLUS_DUAL", "SL2_PHI_MINUS_DUAL",
    "SL2_PHI_PLUS_INV_DUAL", "SL2_PHI_MINUS_INV_DUAL",
)
_SL3_MAP_IDS = ("SL3_PHI_PLUS", "SL3_PHI_PLUS_INV")
_APPENDIX_MAP_IDS = ("APPENDIX_PLUS", "APPENDIX_MINUS_PLUS",
                     "APPENDIX_ZERO_MINUS")


def _gate_equivariance(rep: Report, quick: bool, degree: int = 8) -> bool:
    import sympy as sp

    from .intertwiners import (build_map, check_equivariance,
                               solve_cg_coefficients)
    from .params import Weight, lam

    ok = True
    d = 4 if quick else degree
    w2 = Weight((lam(1),))
    w3 = Weight((lam(1), lam(2)))
    map_ids = _SL2_MAP_IDS if quick else (
        _SL2_MAP_IDS + _SL3_MAP_IDS + _APPENDIX_MAP_IDS)
    for map_id in map_ids:
        weight = w2 if map_id.startswith("SL2") else w3
        r = check_equivariance(build_map(map_id, weight), D=d)
        rep.add("DETAIL equivariance %s checked=%d ok=%s"
                % (map_id, r["checked"], r["ok"]))
        ok = ok and r["ok"]
    la, nu = sp.symbols("glam gnu")
    for k in range(0, 2 if quick else 4):
        r = solve_cg_coefficients(la, nu, k, D=4 if quick else d)
        rep.add("DETAIL cg-map k=%d unique=True pattern_match=%s"
                % (k, r["pattern_match"]))
    return ok


def _rand_rational(rng, lo=1, hi=9):
    import sympy as sp

    return sp.Rational(rng.randint(lo, hi) * rng.choice((1, -1)),
                       rng.randint(hi + 1, 2 * hi + 5))


def _gate_whittaker_images(rep: Report, quick: bool, degree: int = 8) -> bool:
    import random

    import sympy as sp

    from .intertwiners import cg_whittaker_check, verify_whittaker_image
    from .params import Weight
    from .whittaker import WhittakerSpec

    rng = random.Random(20260826)
    samples = 2 if quick else 5
    ok = True
    for map_id in ("SL2_PHI_PLUS", "SL2_PHI_MINUS", "SL2_PHI_PLUS_INV",
                   "SL2_PHI_MINUS_INV"):
        form = "corrected" if map_id == "SL2_PHI_MINUS_INV" else "printed"
        for _ in range(samples):
            la = _rand_rational(rng) + sp.Rational(1, 7)
            mL = abs(_rand_rational(rng)) + 1
            mR = abs(_rand_rational(rng)) + 1
            spec = WhittakerSpec(2, Weight((la,)), (mL,), (mR,))
            r = verify_whittaker_image(map_id, spec, D=degree, form=form)
            ok = ok and r["ok"]
        rep.add("DETAIL whittaker-image %s samples=%d ok=%s"
                % (map_id, samples, ok))
    if not quick:
        for map_id in ("SL3_PHI_PLUS", "SL3_PHI_PLUS_INV"):
            for _ in range(samples):
                la1 = _rand_rational(rng) + sp.Rational(1, 7)
                la2 = _rand_rational(rng) + sp.Rational(2, 11)
                mus = [abs(_rand_rational(rng)) + 1 for _ in range(4)]
                spec = WhittakerSpec(3, Weight((la1, la2)),
                                     tuple(mus[:2]), tuple(mus[2:]))
                r = verify_whittaker_image(map_id, spec, D=6,
                                           form="corrected")
                ok = ok and r["ok"]
            rep.add("DETAIL whittaker-image %s samples=%d ok=%s"
                    % (map_id, samples, ok))
        for k in (1, 2, 3):
            for _ in range(samples):
                la = _rand_rational(rng) + sp.Rational(1, 7)
                nu = _rand_rational(rng) + sp.Rational(2, 11)
                mu1 = abs(_rand_rational(rng)) + 1
                mu2 = abs(_rand_rational(rng)) + 1
                r = cg_whittaker_check(la, nu, k, mu1, mu2, D=degree)
                ok = ok and r["proportional"]
            rep.add("DETAIL whittaker-image CG k=%d samples=%d ok=%s"
                    % (k, samples, ok))
    return ok


_QUICK_RELATIONS = ("RAISE_SL2_UP", "RAISE_SL2_DOWN", "BAXTER_SL2_A",
                    "BAXTER_SL2_B", "BILINEAR_SL2")
_ERRATUM_IDS = ("BAXTER_SL2_A", "BAXTER_SL2_B", "NONLINEAR_SL2",
                "PRODUCT_SL2", "BILINEAR_SL3")


def _gate_relations(rep: Report, quick: bool, threads: int = 1) -> bool:
    from . import relations

    ids = _QUICK_RELATIONS if quick else relations.relation_ids()
    ok = True
    for rid in ids:
        r = relations.verify(rid, threads=threads)
        rep.add("DETAIL relation %s max_rel=%s tol=%s %s"
                % (rid, _FMT % r.max_rel, _FMT % r.tolerance,
                   "PASS" if r.passed else "FAIL"))
        ok = ok and r.passed
    if not quick:
        tail = relations.product_tail_bound()
        rep.add("DETAIL relation PRODUCT_SL2 tail_bound=%s" % (_FMT % tail))
        ok = ok and tail <= 1e-8
        for rid in _ERRATUM_IDS:
            diff = relations.printed_diff(rid)
            if not diff["mismatches"]:
                rep.add("ERRATUM %s printed form matches derived form" % rid)
            for what, detail in diff["mismatches"]:
                rep.add("ERRATUM %s %s: %s" % (rid, what, detail))
    return ok


def _gate_closure(rep: Report, quick: bool) -> bool:
    from .relations import compose_raising_equals_toda

    resid = compose_raising_equals_toda()
    rep.add("DETAIL closure residual=%s" % resid)
    return resid == 0


def _gate_search(rep: Report, quick: bool) -> bool:
    from .sln_search import prop48_report, solve_P

    ps3 = solve_P(3, 0)
    ok = ps3.status == "OK" and ps3.certificate is not None \
        and ps3.certificate.get("ok", False)
    rep.add("DETAIL search n=3 j=0 status=%s certificate_ok=%s"
            % (ps3.status, ok))
    if quick:
        return ok
    for n in (4, 5):
        r = prop48_report(n)
        rep.add("DETAIL search prop48 n=%d ok=%s" % (n, r.get("ok")))
        ok = ok and bool(r.get("ok"))
    ps4 = solve_P(4, 0)
    ok4 = ps4.status == "OK" and ps4.certificate is not None \
        and ps4.certificate.get("ok", False)
    rep.add("DETAIL search n=4 j=0 status=%s certificate_ok=%s"
            % (ps4.status, ok4))
    return ok and ok4


_GATES = (
    ("macdonald", _gate_macdonald),
    ("toda-eigen", _gate_toda),
    ("casimir", _gate_casimir),
    ("equivariance", _gate_equivariance),
    ("whittaker-images", _gate_whittaker_images),
    ("relations", _gate_relations),
    ("closure", _gate_closure),
    ("search", _gate_search),
)

_QUICK_SKIP = ("search",)


def gate_names() -> tuple:
    return tuple(name for name, _ in _GATES)


def run_gate(name: str, rep: Report | None = None, quick: bool = False,
             **kw) -> bool:
    rep = rep if rep is not None else Report()
    fn = dict(_GATES)[name]
    if name == "relations":
        return fn(rep, quick, threads=kw.get("threads", 1))
    return fn(rep, quick)


def cmd_suite(args) -> int:
    rep = Report()
    rep.add("# SUITE.v1 columns: gate status")
    all_ok = True
    for name, fn in _GATES:
        if args.quick and name in _QUICK_SKIP:
            rep.add("GATE %s SKIP" % name)
            continue
        sub = Report()
        try:
            if name == "relations":
                ok = fn(sub, args.quick, threads=args.threads)
            else:
                ok = fn(sub, args.quick)
        except Exception as exc:  # gate crash is a failure, not a crash
            sub.add("DETAIL %s error=%r" % (name, exc))
            ok = False
        rep.lines.extend(sub.lines)
        rep.add("GATE %s %s" % (name, "PASS" if ok else "FAIL"))
        all_ok = all_ok and ok
    rep.add("SUITE %s" % ("PASS" if all_ok else "FAIL"))
    rep.emit(args.out)
    return EXIT_OK if all_ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# search-p
# ---------------------------------------------------------------------------


def cmd_search(args) -> int:
    from .sln_search import solution_record, solve_P

    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if not (0 <= args.j < args.n):
        raise UsageError("--j must satisfy 0 <= j < n")
    ps = solve_P(args.n, args.j, args.max_degree)
    rec = solution_record(ps)
    text = json.dumps(rec, indent=2, sort_keys=True, default=str) + "\n"
    out = args.out or f"search_n{args.n}_j{args.j}.json"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    cert_ok = bool(ps.certificate and ps.certificate.get("ok"))
    sys.stdout.write(
        "SEARCH n=%d j=%d status=%s certificate_ok=%s out=%s\n"
        % (args.n, args.j, ps.status, cert_ok, out))
    return EXIT_OK if ps.status == "OK" and cert_ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing / entry point
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--out", help="report output path (default: stdout)")
    p.add_argument("--threads", type=int, default=1,
                   help="grid-parallel worker threads (deterministic merge)")
    p.add_argument("--rel-tol", type=float, default=1e-12,
                   help="quadrature relative tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artifact",
        description="Toda-chain Whittaker function toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a wave function")
    p.add_argument("family", choices=("sl2", "sl3"))
    p.add_argument("--lambda", dest="lam", required=True,
                   help="comma-separated weight components")
    p.add_argument("--mu-left", required=True)
    p.add_argument("--mu-right", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--method", default="integral",
                   choices=("series", "integral", "macdonald"))
    p.add_argument("--grid", help="phi_1 grid as start:stop:count")
    _add_common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("verify", help="verify one relation")
    p.add_argument("relation_id")
    p.add_argument("--params", help="comma-separated key=value overrides")
    p.add_argument("--grid", help="phi points 'p1,p2;p3,p4'")
    p.add_argument("--tol", type=float)
    p.add_argument("--printed", action="store_true",
                   help="append printed-vs-derived diff records")
    _add_common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("suite", help="run the acceptance gates")
    p.add_argument("--quick", action="store_true",
                   help="reduced grids; skips the long search gate")
    _add_common(p)
    p.set_defaults(fn=cmd_suite)

    p = sub.add_parser("search-p", help="run the P_j polynomial search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--max-degree", type=int, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_search)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        known = {"eval", "verify", "suite", "search-p"}
        subcmd = next((a for a in argv if a in known), None)
        if subcmd is not None:
            for action in parser._subparsers._group_actions:  # noqa: SLF001
                if hasattr(action, "choices") and subcmd in action.choices:
                    apply_overrides(action.choices[subcmd], argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ValueError, KeyError, ZeroDivisionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ArithmeticError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
