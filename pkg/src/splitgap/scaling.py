"""Stretched-exponential fits of log(delta) against system size.

The model is -log delta = C L^p, optionally with a nuisance term b log L.
Stage 1 is ordinary least squares of log(-log delta) on log L; stage 2
refines (C, p[, b]) by weighted nonlinear least squares started from stage 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateFit, InvalidParams

__all__ = [
    "ScalingDataset",
    "FitReport",
    "fit_stretched",
    "local_slopes",
    "classify_scaling",
    "synthetic_bias",
    "fit_curve_csv",
]


@dataclass
class ScalingDataset:
    """Points (L, log_delta, err), kept sorted by L."""

    L: np.ndarray
    log_delta: np.ndarray
    err: np.ndarray
    source: str = ""

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        y = np.asarray(self.log_delta, dtype=float)
        e = np.zeros_like(y) if self.err is None else np.asarray(self.err, dtype=float)
        if not (L.shape == y.shape == e.shape) or L.ndim != 1:
            raise InvalidParams("L, log_delta and err must be equal-length 1-d sequences")
        if not np.all(np.isfinite(y)):
            raise InvalidParams("log_delta must be finite")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise InvalidParams("err must be finite and non-negative")
        order = np.argsort(L, kind="stable")
        L, y, e = L[order], y[order], e[order]
        if np.any(np.diff(L) <= 0):
            raise InvalidParams("L values must be distinct")
        self.L, self.log_delta, self.err = L, y, e

    @classmethod
    def from_points(cls, points, source: str = ""):
        pts = list(points)
        L = [p[0] for p in pts]
        y = [p[1] for p in pts]
        e = [p[2] if len(p) > 2 else 0.0 for p in pts]
        return cls(L, y, e, source)

    @classmethod
    def from_records(cls, records, source: str | None = None):
        """Build from JSON records carrying L and either log_delta or delta.

        ``err`` is propagated from ``err_bound`` (absolute error on delta)
        when available.
        """
        pts = []
        for r in records:
            if "log_delta" in r and r["log_delta"] is not None:
                y = float(r["log_delta"])
                e = float(r.get("log_delta_err", 0.0) or 0.0)
            else:
                d = abs(float(r["delta"]))
                if d == 0:
                    raise InvalidParams(f"delta = 0 at L={r['L']}; cannot take log")
                y = math.log(d)
                eb = r.get("err_bound")
                e = float(eb) / d if eb else 0.0
            pts.append((int(r["L"]), y, e))
        if source is None:
            source = records[0].get("model", "") if records else ""
        return cls.from_points(pts, source)

    def __len__(self):
        return len(self.L)


@dataclass
class FitReport:
    C: float
    p: float
    b: float | None
    residual_rms: float
    local_slopes: list
    model: str
    stage1: dict = field(default_factory=dict)
    n_points: int = 0
    source: str = ""

    def predict(self, L):
        L = np.asarray(L, dtype=float)
        out = self.C * L**self.p
        if self.b is not None:
            out = out + self.b * np.log(L)
        return -out

    def to_record(self) -> dict:
        return {
            "kind": "fit",
            "source": self.source,
            "model": self.model,
            "C": self.C,
            "p": self.p,
            "b": self.b,
            "residual_rms": self.residual_rms,
            "local_slopes": list(self.local_slopes),
            "n_points": self.n_points,
            "stage1": self.stage1,
        }


def local_slopes(data: ScalingDataset) -> list:
    """Slopes of log(-log delta) against log L between consecutive points."""
    if len(data) < 2:
        raise InvalidParams("need at least 2 points")
    if np.any(data.log_delta >= 0):
        raise InvalidParams("log_delta must be negative")
    x = np.log(data.L)
    y = np.log(-data.log_delta)
    return [float(s) for s in np.diff(y) / np.diff(x)]


def fit_stretched(data: ScalingDataset, model: str = "auto") -> FitReport:
    """Fit -log delta = C L^p (+ b log L).

    Parameters
    ----------
    model : {"auto", "power", "power+log"}
        "auto" adds the log term when at least 4 points are given.

    Raises
    ------
    DegenerateFit
        Fewer than 3 points, or fewer points than parameters.
    """
    n = len(data)
    if n < 3:
        raise DegenerateFit(f"need at least 3 points, got {n}")
    if np.any(data.log_delta >= 0):
        raise InvalidParams("all log_delta must be negative")
    if model == "auto":
        model = "power+log" if n >= 4 else "power"
    if model not in ("power", "power+log"):
        raise InvalidParams(f"unknown model {model!r}")
    with_log = model == "power+log"
    if with_log and n < 4:
        raise DegenerateFit("power+log needs at least 4 points")

    x = np.log(data.L)
    y = np.log(-data.log_delta)
    A = np.column_stack([x, np.ones_like(x)])
    if np.linalg.matrix_rank(A) < 2:
        raise DegenerateFit("collinear design")
    (p1, logc1), *_ = np.linalg.lstsq(A, y, rcond=None)
    stage1 = {"p": float(p1), "C": float(math.exp(logc1))}

    pos = data.err[data.err > 0]
    # unit weights when no errors are known; otherwise 1/err with a floor at
    # the smallest reported error for points that carry none
    if pos.size:
        w = 1.0 / np.where(data.err > 0, data.err, pos.min())
    else:
        w = np.ones(n)
    target = -data.log_delta
    Lf = data.L

    def resid(theta):
        c, p = theta[0], theta[1]
        m = c * Lf**p
        if with_log:
            m = m + theta[2] * np.log(Lf)
        return w * (m - target)

    def jac(theta):
        c, p = theta[0], theta[1]
        cols = [Lf**p, c * Lf**p * np.log(Lf)]
        if with_log:
            cols.append(np.log(Lf))
        return w[:, None] * np.column_stack(cols)

    theta0 = [stage1["C"], stage1["p"]] + ([0.0] if with_log else [])
    sol = least_squares(resid, theta0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    J = jac(sol.x)
    if np.linalg.matrix_rank(J) < J.shape[1]:
        raise DegenerateFit("singular Jacobian at the fitted point")
    c, p = float(sol.x[0]), float(sol.x[1])
    b = float(sol.x[2]) if with_log else None
    raw = sol.fun / w
    rms = float(np.sqrt(np.mean(raw**2)))
    return FitReport(c, p, b, rms, local_slopes(data), model, stage1, n, data.source)


def classify_scaling(report: FitReport, alpha: float | None = None, rule: str = "nearest", threshold: float = 0.95) -> dict:
    """Label the fitted behavior as stretched or pure exponential.

    ``rule="nearest"`` picks whichever of the two candidate exponents,
    (1+alpha)/2 (stretched) or 1 (exponential), is closer to the fitted p;
    it needs ``alpha``.  ``rule="slope"`` compares the last local slope with
    ``threshold``.
    """
    out = {"fit_p": report.p, "rule": rule}
    if rule == "nearest":
        if alpha is None:
            raise InvalidParams("the nearest-class rule needs alpha")
        ref = (1.0 + alpha) / 2.0
        out["expected_stretched"] = ref
        out["exponent"] = report.p
        out["class"] = "exponential" if abs(report.p - 1.0) < abs(report.p - ref) else "stretched"
    elif rule == "slope":
        eff = float(report.local_slopes[-1])
        out["exponent"] = eff
        out["class"] = "exponential" if eff >= threshold else "stretched"
        if alpha is not None:
            out["expected_stretched"] = (1.0 + alpha) / 2.0
    else:
        raise InvalidParams(f"unknown rule {rule!r}")
    return out


def synthetic_bias(L_values, a: float = 2.0, b: float = 1.0, p: float = 0.75, q: float = 0.5) -> dict:
    """Pure-power fit of -log delta = a L^p + b L^q; returns p_fit - p.

    Used to tabulate the bias a subleading power induces on the exponent.
    """
    L = np.asarray(sorted(L_values), dtype=float)
    y = -(a * L**p + b * L**q)
    rep = fit_stretched(ScalingDataset(L, y, np.zeros_like(L)), model="power")
    return {"L_min": float(L[0]), "L_max": float(L[-1]), "p_fit": rep.p, "bias": rep.p - p}


def fit_curve_csv(data: ScalingDataset, report: FitReport) -> str:
    """Plot-ready CSV with columns L, minus_log_delta, fit."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["L", "minus_log_delta", "fit"])
    for L, y, f in zip(data.L, data.log_delta, report.predict(data.L)):
        w.writerow([int(L), repr(float(-y)), repr(float(-f))])
    return buf.getvalue()
