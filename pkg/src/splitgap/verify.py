"""Invariant suite shared by the ``verify`` subcommand and the test-suite.

Each check returns a :class:`Check` with the measured value and the
threshold it was compared against.  Checks never relax their thresholds:
a failing check is reported as failing.
"""

from __future__ import annotations

import functools
import inspect
import math
import time
from dataclasses import dataclass, field

from .chain import analytic_action, hessian_vd_check, minimize_reduced_action
from .ed import EigensolverConfig, SolverMethod, splitting_ed
from .model import Coupling, ModelParams
from .rotor import RotorParams, appendix_d_verify, log_delta_asymptotic, log_delta_rotor
from .toy import OperatorChoice, asymptotic_log_delta_toy, dense_oracle_toy, solve_splitting_secular

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "kind": "check",
            "name": self.name,
            "passed": bool(self.passed),
            "value": self.value,
            "threshold": self.threshold,
            "seconds": round(self.seconds, 3),
            "detail": self.detail,
        }


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        chk = fn(*args, **kwargs)
        chk.seconds = time.perf_counter() - t0
        return chk

    return wrapper


@_timed
def check_unperturbed_degeneracy(sizes=(4, 8, 12), tol=1e-12) -> Check:
    worst = 0.0
    for L in sizes:
        for c in (Coupling.ALL_TO_ALL, Coupling.POWER_LAW):
            r = splitting_ed(ModelParams(L, lam=0.0, alpha=0.5, coupling=c))
            worst = max(worst, abs(r.delta))
    return Check("ed.unperturbed_degeneracy", worst < tol, worst, tol)


@_timed
def check_lanczos_vs_dense(sizes=(4, 6, 8, 10), lams=(0.0, 0.3, 1.0), alphas=(0.3, 0.7), tol=1e-10) -> Check:
    worst = 0.0
    dense_cfg = EigensolverConfig(method=SolverMethod.DENSE)
    for L in sizes:
        for lam in lams:
            for a in alphas:
                for c in (Coupling.ALL_TO_ALL, Coupling.POWER_LAW):
                    p = ModelParams(L, lam=lam, alpha=a, coupling=c)
                    lz, dn = splitting_ed(p), splitting_ed(p, dense_cfg)
                    worst = max(worst, abs(lz.E_plus - dn.E_plus), abs(lz.E_minus - dn.E_minus))
    return Check("ed.lanczos_vs_dense", worst < tol, worst, tol)


@_timed
def check_instanton_action(L=64, lam=1.0, alpha=0.5, beta=10.0, grid=8192, tol=1e-3) -> Check:
    params = ModelParams(L, lam=lam, alpha=alpha)
    _, act, diag = minimize_reduced_action(params, beta, grid)
    ref = analytic_action(params, beta)
    rel = abs(act.total - ref) / ref
    return Check("instanton.action", rel < tol, rel, tol, detail={"numeric": act.total, "closed": ref, "iterations": diag.iterations})


@_timed
def check_appendix_d(beta=50.0, n_max=10_000, sizes=(2, 4, 8), lams=(0.0, 0.2), alpha=0.5, tol=5e-3) -> Check:
    worst = 0.0
    rows = []
    for L in sizes:
        for lam in lams:
            rp = RotorParams.power_law(L, lam=lam, alpha=alpha, g=1.0)
            rep = appendix_d_verify(rp, beta, n_max)
            worst = max(worst, rep.rel_error)
            rows.append({"L": L, "lambda": lam, "rel_error": rep.rel_error})
    return Check("rotor.appendix_d", worst < tol, worst, tol, detail={"cases": rows})


@_timed
def check_kernel(L=8, beta=4.0, grid=1024, n_low=8, tol=1e-2) -> Check:
    tab = hessian_vd_check(L, beta, grid, n_low=n_low)
    return Check(
        "instanton.vd_kernel",
        tab.max_rel_deviation_low < tol,
        tab.max_rel_deviation_low,
        tol,
        detail={"dense_vs_fft": tab.dense_vs_fft, "quarter_band": tab.max_rel_deviation_quarter},
    )


@_timed
def check_rotor_asymptotics(sizes=(64, 256, 1024), g=0.05, lam=0.2, alpha=0.5, tol=0.02) -> Check:
    rel = []
    for L in sizes:
        rp = RotorParams.power_law(L, lam=lam, alpha=alpha, g=g)
        full = log_delta_rotor(rp).log_delta
        asym = log_delta_asymptotic(rp)
        rel.append(abs(full - asym) / abs(full))
    decreasing = all(b < a for a, b in zip(rel, rel[1:]))
    return Check(
        "rotor.asymptotics",
        rel[-1] < tol and decreasing,
        rel[-1],
        tol,
        detail={"L": list(sizes), "rel_diff": rel, "decreasing": decreasing},
    )


@_timed
def check_toy_routes(sizes=(4, 6, 8, 10), lam=1.0, alpha=0.5, tol=1e-8) -> Check:
    ex1 = OperatorChoice.sigma_x()
    worst = 0.0
    for L in sizes:
        p = ModelParams(L, lam=lam, alpha=alpha)
        s, d = solve_splitting_secular(ex1, p), dense_oracle_toy(ex1, p)
        worst = max(worst, abs(s.delta - d.delta) / abs(d.delta))
    zeros = []
    for L in (5, 7, 9):
        for ch in (ex1, OperatorChoice.sigma_xx()):
            zeros.append(solve_splitting_secular(ch, ModelParams(L, lam=lam, alpha=alpha)).delta)
    for L in (6, 10, 14, 18):
        zeros.append(solve_splitting_secular(OperatorChoice.sigma_xx(), ModelParams(L, lam=lam, alpha=alpha)).delta)
    exact_zero = all(z == 0.0 for z in zeros)
    return Check("toy.route_agreement", worst < tol and exact_zero, worst, tol, detail={"exact_zeros": exact_zero})


@_timed
def check_toy_asymptotics(sizes=(8, 12, 16, 20), lam=1.0, alpha=0.5) -> Check:
    ex1 = OperatorChoice.sigma_x()
    ratios = []
    for L in sizes:
        p = ModelParams(L, lam=lam, alpha=alpha)
        ratios.append(math.log(abs(solve_splitting_secular(ex1, p).delta)) / asymptotic_log_delta_toy(ex1, p))
    toward_one = all(abs(1 - b) < abs(1 - a) for a, b in zip(ratios, ratios[1:]))
    p = ModelParams(16, lam=lam, alpha=alpha)
    r35 = asymptotic_log_delta_toy(OperatorChoice.mixed("1/3"), p) / asymptotic_log_delta_toy(OperatorChoice.mixed("1/5"), p)
    exact = r35 == 3 / 5
    return Check("toy.asymptotics", toward_one and exact, ratios[-1], None, detail={"ratios": ratios, "ratio_3_5": r35})


SUITES = {
    "ed": (check_unperturbed_degeneracy, check_lanczos_vs_dense),
    "instanton": (check_instanton_action,),
    "kernel": (check_kernel,),
    "appendix-d": (check_appendix_d,),
    "rotor": (check_rotor_asymptotics,),
    "toy": (check_toy_routes, check_toy_asymptotics),
}


def run_suite(name: str = "all", **overrides):
    """Run one suite (or all) and return the list of checks.

    ``overrides`` are forwarded to every check that accepts them (for
    example ``beta`` and ``n_max`` for the determinant assembly).
    """
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        if n not in SUITES:
            raise KeyError(n)
        for fn in SUITES[n]:
            sig = inspect.signature(fn)
            kw = {k: v for k, v in overrides.items() if k in sig.parameters and v is not None}
            out.append(fn(**kw))
    return out
