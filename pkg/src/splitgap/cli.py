"""Command-line entry point: ``splitgap <command> [flags]``.

Every command writes JSON lines (one canonical JSON object per line) to
``--output`` (default stdout).  ``--csv PATH`` additionally writes the scalar
fields as an RFC-4180 table.  Exit status is 0 on success, 1 on a
computation failure (with a JSON error object on stderr) and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .cache import cache_from_env, record_key
from .errors import InvalidParams, SplitGapError
from .model import Coupling, ModelParams, canonical_json

log = logging.getLogger("splitgap")

COMMANDS = ("ed", "toy", "rotor", "instanton", "hessian", "fit", "sweep", "verify")
COMPUTE_COMMANDS = ("ed", "toy", "rotor", "instanton", "hessian")
DEFAULT_MAX_POINTS = 1000


class UsageError(Exception):
    pass


# -- computations ------------------------------------------------------------
#
# Each takes a plain dict of inputs (already normalized, so it doubles as the
# cache key material) and returns one output dict.


def _params(inp) -> ModelParams:
    return ModelParams(
        L=inp["L"],
        lam=inp["lambda"],
        alpha=inp["alpha"],
        coupling=inp.get("coupling", Coupling.ALL_TO_ALL.value),
        beta=inp.get("beta", math.inf),
    )


def _compute_ed(inp):
    from .ed import EigensolverConfig, SolverMethod, splitting_ed, thermal_observables

    p = _params({**inp, "beta": math.inf})
    cfg = EigensolverConfig(method=SolverMethod(inp["method"]), tol=inp["tol"], seed=inp["seed"], workers=inp.get("workers", 1))
    out = splitting_ed(p, cfg).to_record()
    out["solver"] = cfg.to_dict()
    if inp.get("beta") not in (None, "inf"):
        th = thermal_observables(p, float(inp["beta"]))
        out.update(beta=th.beta, s_beta=th.s_beta, deltaF_beta=th.deltaF_beta, zz_corr=th.zz_corr)
    if out["delta"] != 0:
        out["log_delta"] = math.log(abs(out["delta"]))
        out["log_delta_err"] = out["err_bound"] / abs(out["delta"])
    return out


def _choice(inp):
    from .toy import OperatorChoice

    name = inp["choice"]
    if name in ("sigma-x", "ex1"):
        return OperatorChoice.sigma_x()
    if name in ("sigma-xx", "ex2"):
        return OperatorChoice.sigma_xx()
    if name in ("mixed", "ex3"):
        if inp.get("gamma") is None:
            raise InvalidParams("--choice mixed needs --gamma p/q")
        return OperatorChoice.mixed(Fraction(inp["gamma"]), rescale=not inp.get("raw", False))
    raise InvalidParams(f"unknown operator choice {name!r}")


def _compute_toy(inp):
    from . import toy

    ch = _choice(inp)
    p = _params(inp)
    route = inp.get("route", "all")
    out = {"model": "toy", "choice": ch.label(), "L": p.L, "lambda": p.lam, "alpha": p.alpha, "route": route}
    log_delta = None
    if route in ("all", "secular"):
        s = toy.solve_splitting_secular(ch, p)
        out.update(
            delta_secular=s.delta,
            eta_plus=s.eta_plus,
            eta_minus=s.eta_minus,
            linearized_delta=s.linearized_delta,
            resolved=s.resolved,
            kramers=s.kramers,
        )
        if s.delta != 0 and s.resolved:
            log_delta = math.log(abs(s.delta))
    if route in ("all", "time"):
        out["delta_timedomain"] = toy.time_domain_delta(ch, p) if p.lam > 0 else 0.0
    if route in ("all", "dense"):
        out["delta_dense"] = toy.dense_oracle_toy(ch, p).delta if p.L <= toy.DENSE_TOY_MAX_L else None
    if route == "linearized" or (route in ("all", "secular") and log_delta is None and ch.x_diagonal and not toy.kramers_protected(ch, p.L)):
        lg, sign = toy.linearized_log_delta(ch, p)
        out["log_delta_linearized"] = lg if math.isfinite(lg) else None
        out["sign"] = sign
        if math.isfinite(lg):
            log_delta = lg
    out["log_delta"] = log_delta
    if p.lam > 0 and ch.kind is not toy.OperatorKind.CUSTOM:
        out["asymptotic"] = toy.asymptotic_log_delta_toy(ch, p)
        if ch.kind is toy.OperatorKind.MIXED:
            out["asymptotic_rescaled"] = toy.asymptotic_log_delta_toy(ch, p, convention="rescaled")
    return out


def _compute_rotor(inp):
    from .rotor import RotorParams, appendix_d_verify, log_delta_asymptotic, log_delta_rotor

    base = ModelParams(L=inp["L"], lam=inp["lambda"], alpha=inp["alpha"], coupling=inp.get("coupling", "power-law"))
    rp = RotorParams(base, inp["g"])
    sc = log_delta_rotor(rp)
    if inp.get("asymptotic"):
        sc.log_delta_asymptotic = log_delta_asymptotic(rp, R=inp["R"], nodes_level=inp["nodes"], method=inp["zeta"])
    out = sc.to_record()
    if inp.get("beta") not in (None, "inf"):
        rep = appendix_d_verify(rp, float(inp["beta"]), int(inp["nmax"]))
        out["appendix_d"] = rep.to_record()
    return out


def _compute_instanton(inp):
    from .chain import analytic_action, kink_rate, minimize_reduced_action

    p = _params({**inp, "beta": math.inf})
    beta = float(inp["beta"])
    prof, act, diag = minimize_reduced_action(p, beta, inp["grid"])
    ref = analytic_action(p, beta)
    return {
        "model": "instanton",
        "L": p.L,
        "lambda": p.lam,
        "alpha": p.alpha,
        "beta": beta,
        "grid": inp["grid"],
        "action": act.total,
        "potential_term": act.potential_term,
        "kinetic_term": act.kinetic_term,
        "action_error_estimate": act.error_estimate,
        "action_closed": ref,
        "rel_diff": (act.total - ref) / ref,
        "tau_star": prof.tau_star,
        "width": prof.width,
        "width_closed": 2.0 / kink_rate(p, beta),
        "iterations": diag.iterations,
        "gradient_norm": diag.gradient_norm,
    }


def _compute_hessian(inp):
    from .chain import hessian_vd_check

    tab = hessian_vd_check(inp["L"], float(inp["beta"]), inp["grid"], lam=inp["lambda"], alpha=inp["alpha"], n_low=inp["nlow"])
    return {"model": "hessian", **tab.to_record()}


COMPUTE = {
    "ed": _compute_ed,
    "toy": _compute_toy,
    "rotor": _compute_rotor,
    "instanton": _compute_instanton,
    "hessian": _compute_hessian,
}

# inputs that enter each command (and therefore its cache key)
INPUT_KEYS = {
    "ed": ("L", "lambda", "alpha", "coupling", "beta", "tol", "seed", "method"),
    "toy": ("L", "lambda", "alpha", "choice", "gamma", "raw", "route"),
    "rotor": ("L", "lambda", "alpha", "coupling", "g", "asymptotic", "beta", "nmax", "R", "nodes", "zeta"),
    "instanton": ("L", "lambda", "alpha", "beta", "grid"),
    "hessian": ("L", "lambda", "alpha", "beta", "grid", "nlow"),
}

DEFAULTS = {
    "ed": {"lambda": 0.0, "alpha": 0.5, "coupling": "all-to-all", "beta": None, "tol": 1e-12, "seed": 0, "method": "lanczos"},
    "toy": {"lambda": 1.0, "alpha": 0.5, "choice": "sigma-x", "gamma": None, "raw": False, "route": "all"},
    "rotor": {"lambda": 0.2, "alpha": 0.5, "coupling": "power-law", "g": 0.05, "asymptotic": False, "beta": None, "nmax": 10_000, "R": 100_000, "nodes": 8, "zeta": "series"},
    "instanton": {"lambda": 1.0, "alpha": 0.5, "beta": 10.0, "grid": 8192},
    "hessian": {"lambda": 1.0, "alpha": 0.5, "beta": 4.0, "grid": 1024, "nlow": 8},
}


def normalize_inputs(cmd: str, values: dict) -> dict:
    """Fill defaults, coerce types and keep only the keys that matter."""
    d = dict(DEFAULTS[cmd])
    d.update({k: v for k, v in values.items() if v is not None and k in INPUT_KEYS[cmd]})
    if "L" not in d:
        raise UsageError("--L is required")
    d["L"] = int(d["L"])
    for k in ("lambda", "alpha", "g", "tol"):
        if k in d and d[k] is not None:
            d[k] = float(d[k])
    for k in ("grid", "nmax", "nlow", "seed", "R", "nodes"):
        if k in d and d[k] is not None:
            d[k] = int(d[k])
    if d.get("beta") is not None:
        b = float(d["beta"])
        d["beta"] = "inf" if math.isinf(b) else b
    if d.get("gamma") is not None:
        d["gamma"] = str(Fraction(str(d["gamma"])))
    return {k: d.get(k) for k in INPUT_KEYS[cmd]}


def run_point(cmd: str, inputs: dict, cache_dir=None, extra: dict | None = None, runtime: dict | None = None) -> dict:
    """Compute (or fetch) one record and wrap it as a run record.

    ``runtime`` holds execution-only settings (thread counts) that are passed
    to the computation but kept out of the cache key.
    """
    key = record_key({"command": cmd, "inputs": inputs, "version": __version__})
    cache = cache_from_env(cache_dir)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            rec = dict(hit.payload)
            rec["cached"] = True
            return _with_extra(rec, extra)
    outputs = COMPUTE[cmd]({**inputs, **(runtime or {})})
    rec = {
        "hash": key,
        "command": cmd,
        "inputs": inputs,
        "outputs": json.loads(canonical_json(outputs)),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
    }
    if cache is not None:
        cache.put(key, rec)
    rec["cached"] = False
    return _with_extra(rec, extra)


def _with_extra(rec, extra):
    if extra:
        rec.update(extra)
    return rec


def _run_point_star(args):
    return run_point(*args)


# -- output ------------------------------------------------------------------


def _flatten(rec: dict) -> dict:
    flat = {}
    for k, v in rec.items():
        if k == "outputs" and isinstance(v, dict):
            for k2, v2 in v.items():
                if not isinstance(v2, (dict, list)):
                    flat[k2] = v2
        elif k == "inputs" and isinstance(v, dict):
            continue
        elif not isinstance(v, (dict, list)):
            flat[k] = v
    return flat


def write_csv(path, records):
    rows = [_flatten(r) for r in records]
    cols = sorted({k for r in rows for k in r})
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\r\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})


class Emitter:
    def __init__(self, path):
        self.fh = sys.stdout if path in (None, "-") else open(path, "w")
        self.records = []

    def emit(self, rec):
        self.records.append(rec)
        self.fh.write(canonical_json(rec) + "\n")
        self.fh.flush()

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()


# -- sweep -------------------------------------------------------------------


def parse_axis(text: str):
    """``NAME=v1,v2,...`` or ``NAME=start:stop:step`` (stop inclusive) or ``NAME=a*2..b`` (doubling)."""
    if "=" not in text:
        raise UsageError(f"axis {text!r} must look like NAME=values")
    name, spec = text.split("=", 1)
    name = name.strip().lstrip("-")
    spec = spec.strip()
    if ".." in spec and "*" in spec:
        head, stop = spec.split("..")
        start, factor = head.split("*")
        vals, v = [], float(start)
        while v <= float(stop) * (1 + 1e-12):
            vals.append(v)
            v *= float(factor)
    elif ":" in spec:
        parts = [float(s) for s in spec.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise UsageError(f"range axis {text!r} must be start:stop:step with step > 0")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = [start + i * step for i in range(n)]
    else:
        vals = [s.strip() for s in spec.split(",") if s.strip()]
    if not vals:
        raise UsageError(f"axis {name} is empty")
    if name == "L":
        vals = [int(float(v)) for v in vals]
    return name, vals


TABLE1_ALPHA = 0.5
TABLE1 = (
    ("chain", "ed", {"lambda": 1.0, "alpha": TABLE1_ALPHA, "coupling": "all-to-all"}, (8, 12, 16, 20)),
    ("rotor", "rotor", {"lambda": 0.2, "alpha": TABLE1_ALPHA, "g": 0.05}, (64, 128, 256, 512, 1024)),
    ("toy-ex1", "toy", {"lambda": 1.0, "alpha": TABLE1_ALPHA, "choice": "sigma-x", "route": "linearized"}, (64, 128, 256, 512, 1024)),
    ("toy-ex2", "toy", {"lambda": 1.0, "alpha": TABLE1_ALPHA, "choice": "sigma-xx", "route": "linearized"}, (64, 128, 256, 512, 1024)),
)


def sweep_points(args) -> list:
    """List of (cmd, inputs, extra) for a sweep invocation."""
    if args.preset == "table1":
        pts = []
        for series, cmd, base, sizes in TABLE1:
            for L in sizes:
                pts.append((cmd, normalize_inputs(cmd, {**base, "L": L}), {"series": series}))
        return pts
    if args.preset:
        raise UsageError(f"unknown preset {args.preset!r}")
    if not args.cmd:
        raise UsageError("sweep needs --cmd or --preset")
    axes = [parse_axis(a) for a in (args.axis or [])]
    base = _flag_values(args)
    names = [n for n, _ in axes]
    pts = []
    for combo in itertools.product(*[v for _, v in axes]):
        vals = {**base, **dict(zip(names, combo))}
        pts.append((args.cmd, normalize_inputs(args.cmd, vals), {"series": args.series} if args.series else None))
    return pts


def run_sweep(args, out: Emitter):
    pts = sweep_points(args)
    cap = args.max_points
    sys.stderr.write(canonical_json({"kind": "sweep-plan", "points": len(pts), "cap": cap}) + "\n")
    if len(pts) > cap:
        raise UsageError(f"sweep has {len(pts)} points, above the cap of {cap} (raise --max-points)")
    jobs = max(1, args.jobs or 1)
    work = [(cmd, inputs, args.cache_dir, extra) for cmd, inputs, extra in pts]
    if jobs == 1:
        results = map(_run_point_star, work)
        for rec in results:
            out.emit(rec)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for rec in ex.map(_run_point_star, work):
                out.emit(rec)


# -- fit ---------------------------------------------------------------------


def _series_of(rec) -> str:
    if rec.get("series"):
        return rec["series"]
    o = rec.get("outputs", rec)
    label = o.get("model", rec.get("command", "data"))
    if o.get("choice"):
        label += ":" + o["choice"]
    return label


def run_fit(args, out: Emitter):
    from .scaling import ScalingDataset, classify_scaling, fit_curve_csv, fit_stretched

    src = sys.stdin if args.input in (None, "-") else open(args.input)
    groups = {}
    alphas = {}
    for lineno, line in enumerate(src, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except ValueError as exc:
            raise UsageError(f"input line {lineno} is not JSON: {exc}") from None
        if rec.get("kind") in ("check", "sweep-plan", "fit", "table"):
            continue
        o = rec.get("outputs", rec)
        if "L" not in o:
            continue
        series = _series_of(rec)
        groups.setdefault(series, []).append(o)
        if o.get("alpha") is not None:
            alphas[series] = float(o["alpha"])
    if not groups:
        raise UsageError("no records with L on input")
    rows = []
    curves = []
    for series, recs in groups.items():
        data = ScalingDataset.from_records(recs, source=series)
        rep = fit_stretched(data, model=args.model)
        cls = classify_scaling(rep, alphas.get(series), rule=args.rule)
        rec = {**rep.to_record(), "series": series, "classification": cls}
        out.emit(rec)
        rows.append(
            {
                "kind": "table",
                "series": series,
                "n_points": rep.n_points,
                "L_min": int(data.L[0]),
                "L_max": int(data.L[-1]),
                "p": rep.p,
                "class": cls["class"],
                "stretched_reference": cls.get("expected_stretched"),
            }
        )
        curves.append((series, fit_curve_csv(data, rep)))
    if args.table:
        for r in rows:
            out.emit(r)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=[k for k in rows[0] if k != "kind"], lineterminator="\r\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: v for k, v in r.items() if k != "kind"})
    if args.curves:
        with open(args.curves, "w", newline="") as fh:
            for i, (series, text) in enumerate(curves):
                lines = text.splitlines(keepends=True)
                if i == 0:
                    fh.write("series," + lines[0])
                for ln in lines[1:]:
                    fh.write(f"{series}," + ln)


# -- argument parsing ----------------------------------------------------------


def _flag_values(args) -> dict:
    keys = {
        "L": "L",
        "lam": "lambda",
        "alpha": "alpha",
        "coupling": "coupling",
        "beta": "beta",
        "g": "g",
        "choice": "choice",
        "gamma": "gamma",
        "raw": "raw",
        "route": "route",
        "tol": "tol",
        "grid": "grid",
        "nmax": "nmax",
        "nlow": "nlow",
        "seed": "seed",
        "method": "method",
        "asymptotic": "asymptotic",
        "R": "R",
        "nodes": "nodes",
        "zeta": "zeta",
    }
    return {dst: getattr(args, src) for src, dst in keys.items() if getattr(args, src, None) not in (None, False)}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--output", "-o", default=None, help="JSON-lines output path (default stdout)")
    p.add_argument("--csv", default=None, help="also write a CSV table here")
    p.add_argument("--cache-dir", default=None, help="result cache directory (default $SPLITGAP_CACHE)")
    p.add_argument("--verbose", "-v", action="store_true")


def _model_flags(p, L_required=False):
    p.add_argument("--L", type=int, required=L_required)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--coupling", choices=[c.value for c in Coupling])
    p.add_argument("--beta", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="splitgap", description="Ground-state splitting laboratory.")
    ap.add_argument("--version", action="version", version=f"splitgap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ed", help="exact diagonalization of the Ising chain")
    _common(p)
    _model_flags(p, L_required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=["lanczos", "dense"])
    p.add_argument("--jobs", type=int, default=1, help="threads for the matrix-vector product")

    p = sub.add_parser("toy", help="projector toy model")
    _common(p)
    _model_flags(p, L_required=True)
    p.add_argument("--choice", choices=["sigma-x", "sigma-xx", "mixed", "ex1", "ex2", "ex3"])
    p.add_argument("--gamma", help="p/q for the mixed operator")
    p.add_argument("--raw", action="store_true", help="do not rescale the mixed operator by 1/(1+|gamma|)")
    p.add_argument("--route", choices=["all", "secular", "time", "dense", "linearized"])

    p = sub.add_parser("rotor", help="rotor-chain semiclassics")
    _common(p)
    _model_flags(p, L_required=True)
    p.add_argument("--g", type=float)
    p.add_argument("--asymptotic", action="store_true", help="also evaluate the large-L formula")
    p.add_argument("--nmax", type=int, help="Matsubara cutoff for the finite-beta determinant (with --beta)")
    p.add_argument("--R", type=int, help="lattice-sum truncation for --zeta truncated")
    p.add_argument("--nodes", type=int, help="finest tanh-sinh level for the x-integral")
    p.add_argument("--zeta", choices=["series", "truncated"], help="evaluation of the periodic lattice sum")

    p = sub.add_parser("instanton", help="minimize the reduced action")
    _common(p)
    _model_flags(p, L_required=True)
    p.add_argument("--grid", type=int)

    p = sub.add_parser("hessian", help="V_d kernel spectrum check")
    _common(p)
    _model_flags(p, L_required=True)
    p.add_argument("--grid", type=int)
    p.add_argument("--nlow", type=int)

    p = sub.add_parser("fit", help="fit stretched exponentials to records on stdin")
    _common(p)
    p.add_argument("--input", "-i", default=None, help="JSON-lines input (default stdin)")
    p.add_argument("--model", choices=["auto", "power", "power+log"], default="auto")
    p.add_argument("--rule", choices=["nearest", "slope"], default="nearest")
    p.add_argument("--table", action="store_true", help="also emit one table row per series")
    p.add_argument("--curves", default=None, help="write plot-ready fit curves as CSV")

    p = sub.add_parser("sweep", help="cartesian parameter sweep")
    _common(p)
    _model_flags(p)
    p.add_argument("--cmd", choices=COMPUTE_COMMANDS)
    p.add_argument("--axis", action="append", help="NAME=v1,v2 | NAME=start:stop:step | NAME=a*2..b")
    p.add_argument("--preset", choices=["table1"])
    p.add_argument("--series", default=None, help="label attached to every record")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS)
    for flag, typ in (("--g", float), ("--gamma", str), ("--tol", float), ("--grid", int), ("--nmax", int), ("--nlow", int), ("--seed", int)):
        p.add_argument(flag, type=typ)
    p.add_argument("--choice", choices=["sigma-x", "sigma-xx", "mixed", "ex1", "ex2", "ex3"])
    p.add_argument("--route", choices=["all", "secular", "time", "dense", "linearized"])
    p.add_argument("--method", choices=["lanczos", "dense"])
    p.add_argument("--raw", action="store_true")
    p.add_argument("--asymptotic", action="store_true")

    p = sub.add_parser("verify", help="run the invariant suite")
    _common(p)
    p.add_argument("--suite", default="all", choices=["all", "ed", "instanton", "kernel", "appendix-d", "rotor", "toy"])
    p.add_argument("--beta", type=float)
    p.add_argument("--nmax", type=int)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out = None
    try:
        out = Emitter(args.output)
        if args.command in COMPUTE_COMMANDS:
            inputs = normalize_inputs(args.command, _flag_values(args))
            runtime = {"workers": args.jobs} if args.command == "ed" else None
            out.emit(run_point(args.command, inputs, args.cache_dir, runtime=runtime))
        elif args.command == "sweep":
            run_sweep(args, out)
        elif args.command == "fit":
            run_fit(args, out)
            return 0
        elif args.command == "verify":
            from .verify import run_suite

            ok = True
            for chk in run_suite(args.suite, beta=args.beta, n_max=args.nmax):
                out.emit(chk.to_record())
                ok &= chk.passed
            if args.csv:
                write_csv(args.csv, out.records)
            return 0 if ok else 1
        if args.csv and args.command != "fit":
            write_csv(args.csv, out.records)
        return 0
    except (UsageError, InvalidParams) as exc:
        sys.stderr.write(canonical_json({"error": type(exc).__name__, "message": str(exc), "status": 2}) + "\n")
        return 2
    except SplitGapError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "status": 1}
        for attr in ("estimate", "diagnostics"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        sys.stderr.write(json.dumps(json.loads(json.dumps(err, default=repr)), sort_keys=True, separators=(",", ":")) + "\n")
        return 1
    finally:
        if out is not None:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
