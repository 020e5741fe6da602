"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL ...`` line with the
measured quantities; run with ``pytest -s tests/test_acceptance.py`` to see
them.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np

from splitgap.chain import analytic_action, hessian_vd_check, minimize_reduced_action
from splitgap.ed import EigensolverConfig, SolverMethod, splitting_ed
from splitgap.model import Coupling, ModelParams
from splitgap.rotor import RotorParams, appendix_d_verify, asymptotic_integral, log_delta_asymptotic, log_delta_rotor
from splitgap.scaling import ScalingDataset, fit_stretched, local_slopes
from splitgap.toy import OperatorChoice, asymptotic_log_delta_toy, dense_oracle_toy, solve_splitting_secular

FAMILIES = (Coupling.ALL_TO_ALL, Coupling.POWER_LAW)


def report(n, ok, **values):
    parts = " ".join(f"{k}={v}" for k, v in values.items())
    print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {parts}")
    assert ok, f"criterion {n}: {parts}"


def test_criterion_01_unperturbed_degeneracy():
    t0 = time.perf_counter()
    worst = max(abs(splitting_ed(ModelParams(L, lam=0.0, alpha=0.5, coupling=c)).delta) for L in (4, 8, 12) for c in FAMILIES)
    dt = time.perf_counter() - t0
    report(1, worst < 1e-12 and dt < 1.0, max_abs_delta=f"{worst:.2e}", seconds=f"{dt:.2f}")


def test_criterion_02_lanczos_vs_dense():
    t0 = time.perf_counter()
    dense = EigensolverConfig(method=SolverMethod.DENSE)
    worst = 0.0
    for L in (2, 4, 6, 8, 10):
        for lam in (0.0, 0.3, 1.0):
            for a in (0.3, 0.7):
                for c in FAMILIES:
                    p = ModelParams(L, lam=lam, alpha=a, coupling=c)
                    lz, dn = splitting_ed(p), splitting_ed(p, dense)
                    worst = max(worst, abs(lz.E_plus - dn.E_plus), abs(lz.E_minus - dn.E_minus))
    dt = time.perf_counter() - t0
    report(2, worst < 1e-10 and dt < 30.0, max_abs_diff=f"{worst:.2e}", seconds=f"{dt:.2f}")


def test_criterion_03_chain_stretched_trend():
    t0 = time.perf_counter()
    sizes = (8, 12, 16)
    res = [splitting_ed(ModelParams(L, lam=1.0, alpha=0.5)) for L in sizes]
    dt = time.perf_counter() - t0
    y = [-math.log(r.delta) for r in res]
    data = ScalingDataset(sizes, [-v for v in y], [r.err_bound / r.delta for r in res])
    fit = fit_stretched(data, model="power")
    slopes = local_slopes(data)
    increasing = all(b > a for a, b in zip(y, y[1:]))
    in_band = 0.6 <= fit.p <= 0.95
    approaching = all(abs(b - 0.75) < abs(a - 0.75) for a, b in zip(slopes, slopes[1:]))
    ok = increasing and in_band and approaching and dt < 600
    report(
        3,
        ok,
        minus_log_delta=[round(v, 4) for v in y],
        p=f"{fit.p:.4f}",
        p_in_band=in_band,
        local_slopes=[round(s, 4) for s in slopes],
        slopes_approach=approaching,
        seconds=f"{dt:.1f}",
    )


def test_criterion_04_instanton_action():
    t0 = time.perf_counter()
    p = ModelParams(64, lam=1.0, alpha=0.5)
    _, act, _ = minimize_reduced_action(p, 10.0, 8192)
    dt = time.perf_counter() - t0
    ref = analytic_action(p, 10.0)
    rel = abs(act.total - ref) / ref
    report(4, rel < 1e-3 and dt < 10.0, numeric=f"{act.total:.8f}", closed=f"{ref:.8f}", rel=f"{rel:.2e}", seconds=f"{dt:.2f}")


def test_criterion_05_finite_beta_determinant():
    t0 = time.perf_counter()
    worst = 0.0
    for L in (2, 4, 8):
        for lam in (0.0, 0.2):
            rep = appendix_d_verify(RotorParams.power_law(L, lam=lam, alpha=0.5, g=1.0), 50.0, 10_000)
            worst = max(worst, rep.rel_error)
    dt = time.perf_counter() - t0
    report(5, worst < 5e-3 and dt < 60.0, max_rel=f"{worst:.2e}", seconds=f"{dt:.2f}")


def test_criterion_06_rotor_asymptotics():
    t0 = time.perf_counter()
    integral = asymptotic_integral(0.2, 0.5).value
    rel = []
    for L in (64, 256, 1024):
        rp = RotorParams.power_law(L, lam=0.2, alpha=0.5, g=0.05)
        full = log_delta_rotor(rp).log_delta
        rel.append(abs(full - log_delta_asymptotic(rp, integral=integral)) / abs(full))
    dt = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(rel, rel[1:]))
    ok = rel[-1] < 0.02 and decreasing and dt < 10.0
    report(6, ok, rel_diff=[f"{r:.4f}" for r in rel], at_1024_below_2pct=rel[-1] < 0.02, decreasing=decreasing, seconds=f"{dt:.2f}")


def test_criterion_07_toy_routes():
    t0 = time.perf_counter()
    ex1, ex2 = OperatorChoice.sigma_x(), OperatorChoice.sigma_xx()
    worst = 0.0
    for L in (4, 6, 8, 10):
        p = ModelParams(L, lam=1.0, alpha=0.5)
        s, d = solve_splitting_secular(ex1, p), dense_oracle_toy(ex1, p)
        worst = max(worst, abs(s.delta - d.delta) / abs(d.delta))
    odd = [solve_splitting_secular(ch, ModelParams(L, lam=1.0, alpha=0.5)).delta for L in (5, 7, 9, 11) for ch in (ex1, ex2)]
    ex2_zero = [solve_splitting_secular(ex2, ModelParams(L, lam=1.0, alpha=0.5)).delta for L in (6, 10, 14, 18)]
    dt = time.perf_counter() - t0
    zeros = all(v == 0.0 for v in odd + ex2_zero)
    report(7, worst < 1e-8 and zeros and dt < 30.0, max_rel=f"{worst:.2e}", exact_zeros=zeros, seconds=f"{dt:.2f}")


def test_criterion_08_toy_asymptotics():
    t0 = time.perf_counter()
    ex1 = OperatorChoice.sigma_x()
    ratios = []
    for L in (8, 12, 16, 20):
        p = ModelParams(L, lam=1.0, alpha=0.5)
        ratios.append(math.log(abs(solve_splitting_secular(ex1, p).delta)) / asymptotic_log_delta_toy(ex1, p))
    toward_one = all(abs(1 - b) < abs(1 - a) for a, b in zip(ratios, ratios[1:]))
    p16 = ModelParams(16, lam=1.0, alpha=0.5)
    r35 = asymptotic_log_delta_toy(OperatorChoice.mixed("1/3"), p16) / asymptotic_log_delta_toy(OperatorChoice.mixed("1/5"), p16)
    dt = time.perf_counter() - t0
    report(8, toward_one and r35 == 3 / 5 and dt < 60.0, ratios=[round(r, 4) for r in ratios], ratio_3_5=r35, seconds=f"{dt:.2f}")


def test_criterion_09_kernel():
    t0 = time.perf_counter()
    table = {n: hessian_vd_check(8, 4.0, n).max_rel_deviation_low for n in (256, 512, 1024, 2048)}
    dt = time.perf_counter() - t0
    devs = list(table.values())
    converging = all(b < a for a, b in zip(devs, devs[1:]))
    ok = table[1024] <= 1e-2 and converging and dt < 10.0
    report(9, ok, deviation_by_grid={k: f"{v:.2e}" for k, v in table.items()}, seconds=f"{dt:.2f}")


def test_criterion_10_table_one():
    t0 = time.perf_counter()
    sweep = subprocess.run([sys.executable, "-m", "splitgap.cli", "sweep", "--preset", "table1"], capture_output=True, text=True, check=True)
    fit = subprocess.run([sys.executable, "-m", "splitgap.cli", "fit", "--table"], input=sweep.stdout, capture_output=True, text=True, check=True)
    dt = time.perf_counter() - t0
    rows = {r["series"]: r for r in map(json.loads, fit.stdout.splitlines()) if r["kind"] == "table"}
    expected = {"chain": "stretched", "rotor": "stretched", "toy-ex1": "stretched", "toy-ex2": "exponential"}
    got = {k: rows[k]["class"] for k in expected if k in rows}
    ok = got == expected and dt < 900
    report(10, ok, classes=got, p={k: round(rows[k]["p"], 3) for k in rows}, seconds=f"{dt:.1f}")
