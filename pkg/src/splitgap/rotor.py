"""Semiclassical splitting of the long-range rotor chain.

Closed-form pieces (effective mass, kink, action, fluctuation determinant
ratio and the assembled log delta), the large-L asymptotic formula, and a
finite-beta reconstruction of the determinant ratio from the explicit
eigenvalues of the two Hessians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gamma, zeta

from .errors import FactorOutOfRange, InvalidParams, NonPositiveMass, RootNotBracketed
from .model import Coupling, ModelParams, inverse_masses, power_law_prefactor
from .quadrature import tanh_sinh

__all__ = [
    "RotorParams",
    "RotorSemiclassics",
    "AppendixDReport",
    "effective_mass",
    "mode_masses",
    "rotor_potential",
    "instanton_profile_rotor",
    "rotor_action",
    "rotor_action_quadrature",
    "normalization_c",
    "det_ratio_closed",
    "log_delta_rotor",
    "periodic_zeta",
    "asymptotic_integral",
    "log_delta_asymptotic",
    "leading_term",
    "solve_omega",
    "appendix_d_verify",
]


@dataclass(frozen=True)
class RotorParams:
    """Rotor-chain parameters: the shared block plus the semiclassical g."""

    base: ModelParams
    g: float

    def __post_init__(self):
        if not (self.g > 0 and math.isfinite(self.g)):
            raise InvalidParams(f"g must be positive, got {self.g}")
        if self.base.coupling is Coupling.ALL_TO_ALL:
            raise InvalidParams("the rotor chain takes a power-law or custom coupling")
        inv = inverse_masses(self.base)
        if np.min(inv) <= 0:
            raise NonPositiveMass(f"min_k 1/m_k = {np.min(inv):.6g} <= 0; lambda outside the positive-definite window")

    @classmethod
    def power_law(cls, L: int, lam: float, alpha: float, g: float) -> "RotorParams":
        return cls(ModelParams(L=L, lam=lam, alpha=alpha, coupling=Coupling.POWER_LAW), g)

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d["g"] = float(self.g)
        return d


def mode_masses(params: RotorParams) -> np.ndarray:
    return 1.0 / inverse_masses(params.base)


def effective_mass(params: RotorParams) -> float:
    """m0 = 1 / (1 + 2 lam sum_r f(r)), the uniform-mode mass."""
    return float(mode_masses(params)[0])


def rotor_potential(theta):
    """U(theta) = (|theta| - pi/2)^2 / 2 on [-pi, pi], extended 2 pi periodically."""
    th = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return 0.5 * (np.abs(th) - 0.5 * np.pi) ** 2


def instanton_profile_rotor(params: RotorParams, tau, tau_star: float = 0.0):
    """theta(tau) = (pi/2) sgn(tau - tau*) (1 - exp(-|tau - tau*| / sqrt(m0)))."""
    s = np.asarray(tau, dtype=float) - tau_star
    return 0.5 * np.pi * np.sign(s) * -np.expm1(-np.abs(s) / math.sqrt(effective_mass(params)))


def rotor_action(params: RotorParams) -> float:
    """Instanton action L pi^2 sqrt(m0) / 4."""
    return params.base.L * math.pi**2 * math.sqrt(effective_mass(params)) / 4.0


def rotor_action_quadrature(params: RotorParams) -> float:
    """L int_{-pi/2}^{pi/2} sqrt(2 m0 U(theta)) dtheta by adaptive quadrature."""
    m0 = effective_mass(params)
    val, _ = quad(lambda th: math.sqrt(2.0 * m0 * float(rotor_potential(th))), -0.5 * math.pi, 0.5 * math.pi, points=[0.0], epsabs=0, epsrel=1e-13)
    return params.base.L * val


def normalization_c(params: RotorParams) -> float:
    """c = (L pi / (8 g sqrt(m0)))^(1/2)."""
    return math.sqrt(params.base.L * math.pi / (8.0 * params.g * math.sqrt(effective_mass(params))))


def _q_factors(params: RotorParams) -> np.ndarray:
    m = mode_masses(params)
    L = params.base.L
    k = np.arange(1, L)
    return np.sqrt(m[0] / m[1:]) / np.sqrt(1.0 + 4.0 * np.sin(np.pi * k / L) ** 2)


def _log_det_ratio(params: RotorParams) -> float:
    q = _q_factors(params)
    bad = np.flatnonzero((q <= 0) | (q >= 1))
    if bad.size:
        k = int(bad[0]) + 1
        raise FactorOutOfRange(f"factor argument {q[bad[0]]:.6g} for k={k} is outside (0, 1)")
    return math.log(2.0) - float(np.sum(np.log1p(-q)))


def det_ratio_closed(params: RotorParams) -> float:
    """Delta = 2 prod_{k=1}^{L-1} (1 - sqrt(m0/m_k) / sqrt(1 + 4 sin^2(pi k/L)))^{-1}.

    Raises
    ------
    FactorOutOfRange
        If some factor argument leaves (0, 1).
    """
    return math.exp(_log_det_ratio(params))


@dataclass
class RotorSemiclassics:
    params: RotorParams
    m0: float
    m_k: np.ndarray
    action: float
    c: float
    det_ratio: float
    log_det_ratio: float
    log_delta: float
    log_delta_asymptotic: float | None = None

    def reassembled_delta(self) -> float:
        """4 c Delta^(1/2) exp(-S/g), rebuilt from the stored parts."""
        return 4.0 * self.c * math.sqrt(self.det_ratio) * math.exp(-self.action / self.params.g)

    def to_record(self) -> dict:
        d = {"model": "rotor", **self.params.to_dict()}
        d.update(
            m0=self.m0,
            action=self.action,
            det_ratio=self.det_ratio,
            log_det_ratio=self.log_det_ratio,
            log_delta=self.log_delta,
            log_delta_asymptotic=self.log_delta_asymptotic,
        )
        return d


def log_delta_rotor(params: RotorParams) -> RotorSemiclassics:
    """Full semiclassical log delta.

    log delta = -L pi^2 sqrt(m0)/(4g) + (1/2) log(4 L pi/(g sqrt(m0)))
                - (1/2) sum_{k>=1} log(1 - q_k).
    """
    m = mode_masses(params)
    m0 = float(m[0])
    L, g = params.base.L, params.g
    action = rotor_action(params)
    logdet = _log_det_ratio(params)
    q = _q_factors(params)
    log_delta = -action / g + 0.5 * math.log(4.0 * L * math.pi / (g * math.sqrt(m0))) - 0.5 * float(np.sum(np.log1p(-q)))
    return RotorSemiclassics(
        params=params,
        m0=m0,
        m_k=m,
        action=action,
        c=normalization_c(params),
        det_ratio=math.exp(logdet),
        log_det_ratio=logdet,
        log_delta=log_delta,
    )


# -- large-L asymptotics -----------------------------------------------------


def _zeta_series(x, s, terms=40):
    """sum_{r>=1} cos(2 pi r x)/r^s for 0 < x <= 1/2 from its convergent expansion.

    S = Gamma(1-s) sin(pi s/2) theta^(s-1) + sum_k (-1)^k zeta(s-2k) theta^(2k)/(2k)!,
    theta = 2 pi x, valid for 0 < theta < 2 pi.
    """
    th = 2.0 * np.pi * x
    out = gamma(1.0 - s) * math.sin(0.5 * math.pi * s) * th ** (s - 1.0)
    th2 = th * th
    p = np.ones_like(th)
    for k in range(terms):
        out = out + (-1) ** k * zeta(s - 2.0 * k) * p
        p = p * th2 / ((2 * k + 1) * (2 * k + 2))
    return out


def _tail_integral(th, s, c, terms=60):
    """int_c^inf cos(th t) t^-s dt for z = th c of order 1 or less."""
    z = th * c
    j = np.arange(terms)
    lower = np.sum((-1.0) ** j * np.exp((2 * j + 1 - s) * math.log(z) - np.cumsum(np.r_[0.0, np.log(np.arange(1, 2 * terms - 1))])[2 * j]) / (2 * j + 1 - s))
    return th ** (s - 1.0) * (gamma(1.0 - s) * math.sin(0.5 * math.pi * s) - lower)


def _zeta_truncated(x, s, R):
    """Partial sum to R plus an analytic tail.

    For th (R + 1/2) <= 10 the tail is the midpoint integral from R + 1/2;
    beyond that, two steps of summation by parts.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = np.arange(1, R + 1, dtype=float)
    w = r**-s
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        th = 2.0 * np.pi * xi
        part = float(np.cos(th * r) @ w)
        if th * (R + 0.5) <= 10.0:
            out[i] = part + _tail_integral(th, s, R + 0.5)
            continue
        s2 = math.sin(0.5 * th)
        # sum_{r>R} a_r cos(r th) with a_r = r^-s, by Abel summation twice
        a1 = (R + 1.0) ** -s
        da = (R + 1.0) ** -s - (R + 2.0) ** -s
        tail = -a1 * math.sin((R + 0.5) * th) / (2.0 * s2)
        tail += da * math.cos((R + 1.0) * th) / (4.0 * s2 * s2)
        out[i] = part + tail
    return out


def periodic_zeta(x, alpha: float, method: str = "series", R: int = 100_000):
    """S(x) = sum_{r=1}^inf cos(2 pi r x)/r^alpha for 0 < x < 1, 0 < alpha < 1.

    ``method="series"`` uses the exact convergent expansion about x = 0 (and
    the mirror symmetry S(1-x) = S(x)); ``method="truncated"`` sums R terms
    with an Abel-summation tail, which degrades for x below about 1/R.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise InvalidParams("periodic_zeta needs 0 < x < 1")
    xm = np.minimum(x, 1.0 - x)
    if method == "series":
        return _zeta_series(xm, alpha)
    if method == "truncated":
        return _zeta_truncated(xm, alpha, R).reshape(x.shape)
    raise InvalidParams(f"unknown method {method!r}")


def asymptotic_integral(lam: float, alpha: float, method: str = "series", R: int = 100_000, rtol: float = 1e-10, max_level: int = 8):
    """I = int_0^1 sqrt((1 + 4 lam c_alpha S(x)) / (1 + 4 sin^2(pi x))) dx.

    The integrand is symmetric about 1/2 and behaves like x^((alpha-1)/2)
    near 0; with x = u^(2/(1+alpha)) the half-interval integrand is bounded.
    Returns a :class:`QuadResult`.
    """
    ca = power_law_prefactor(alpha)
    p = 2.0 / (1.0 + alpha)
    umax = 0.5 ** (1.0 / p)

    def integrand(u):
        x = u**p
        num = 1.0 + 4.0 * lam * ca * periodic_zeta(x, alpha, method=method, R=R)
        if np.any(num < 0):
            raise FactorOutOfRange("1 + 4 lam c_alpha S(x) is negative; lambda too large for the asymptotic form")
        return np.sqrt(num / (1.0 + 4.0 * np.sin(np.pi * x) ** 2)) * p * u ** (p - 1.0)

    res = tanh_sinh(integrand, 0.0, umax, rtol=rtol, max_level=max_level)
    res.value *= 2.0
    res.error *= 2.0
    return res


def leading_term(params: RotorParams) -> float:
    """-L^((1+alpha)/2) pi^2 / (4 g sqrt(2 lam))."""
    b = params.base
    return -(b.L ** ((1.0 + b.alpha) / 2.0)) * math.pi**2 / (4.0 * params.g * math.sqrt(2.0 * b.lam))


def log_delta_asymptotic(params: RotorParams, R: int = 100_000, nodes_level: int = 8, method: str = "series", integral=None) -> float:
    """Three-term large-L form of log delta for the periodic power law.

    Parameters
    ----------
    R : int
        Truncation of the lattice sum when ``method="truncated"``.
    nodes_level : int
        Finest tanh-sinh level for the x-integral.
    integral : float, optional
        Precomputed value of :func:`asymptotic_integral` (it depends only on
        lam and alpha).

    Raises
    ------
    QuadratureNotConverged
        If successive quadrature levels disagree beyond tolerance.
    """
    b = params.base
    if b.lam <= 0:
        raise InvalidParams("the asymptotic form needs lambda > 0")
    if not (0 < b.alpha < 1):
        raise InvalidParams("the asymptotic form needs 0 < alpha < 1")
    if b.coupling is not Coupling.POWER_LAW:
        raise InvalidParams("the asymptotic form is derived for the periodic power law")
    if integral is None:
        integral = asymptotic_integral(b.lam, b.alpha, method=method, R=R, max_level=nodes_level).value
    L, a, lam, g = b.L, b.alpha, b.lam, params.g
    s2l = math.sqrt(2.0 * lam)
    return (
        leading_term(params)
        + 0.5 * math.log(4.0 * L ** ((3.0 - a) / 2.0) * math.pi * s2l / g)
        + L ** ((1.0 + a) / 2.0) / (2.0 * s2l) * integral
    )


# -- finite-beta determinant assembly ----------------------------------------


@dataclass
class AppendixDReport:
    beta: float
    n_max: int
    omega_solutions: np.ndarray
    complex_roots: np.ndarray
    complex_roots_limit: np.ndarray
    delta_numeric: float
    delta_numeric_untailed: float
    delta_closed: float
    rel_error: float
    tail_log: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "beta": self.beta,
            "n_max": self.n_max,
            "delta_numeric": self.delta_numeric,
            "delta_numeric_untailed": self.delta_numeric_untailed,
            "delta_closed": self.delta_closed,
            "rel_error": self.rel_error,
            "complex_roots_limit": self.complex_roots_limit,
        }


def _secular(omega, beta, ratio):
    # sin(x) - c cos(x) has the roots of tan(x) = c but no poles
    x = 0.5 * omega * beta
    return np.sin(x) - ratio * omega * np.cos(x)


def solve_omega(m_k, m0: float, beta: float, n_max: int, tol: float = 1e-13, eps_frac: float = 1e-9):
    """Real roots of tan(Omega beta/2) = Omega m_k / sqrt(m0), one per bracket.

    Bracket n is [2 pi n/beta + eps, 2 pi (n+1/2)/beta - eps] with
    eps = eps_frac * 2 pi / beta.  Vectorized bisection over all (k, n).

    Returns
    -------
    roots : ndarray, shape (len(m_k), n_max)
    bad : ndarray of bool, brackets without a sign change
    """
    m_k = np.atleast_1d(np.asarray(m_k, dtype=float))
    ratio = (m_k / math.sqrt(m0))[:, None]
    n = np.arange(1, n_max + 1, dtype=float)[None, :]
    eps = eps_frac * 2.0 * math.pi / beta
    lo = np.broadcast_to(2.0 * math.pi * n / beta + eps, (m_k.size, n_max)).copy()
    hi = np.broadcast_to(2.0 * math.pi * (n + 0.5) / beta - eps, (m_k.size, n_max)).copy()
    flo = _secular(lo, beta, ratio)
    fhi = _secular(hi, beta, ratio)
    bad = np.sign(flo) == np.sign(fhi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _secular(mid, beta, ratio)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        width = hi - lo
        if np.all(width <= np.maximum(tol, 4.0 * np.spacing(hi))):
            break
    return 0.5 * (lo + hi), bad


def _complex_root(mk, m0, beta):
    """y > 0 with tanh(y beta/2) = y m_k/sqrt(m0), i.e. Omega = i y; None if absent."""
    c = mk / math.sqrt(m0)
    if 0.5 * beta <= c:
        return None
    hi = 1.0 / c
    fn = lambda y: math.tanh(0.5 * y * beta) - c * y
    lo = 1e-12 / beta
    if fn(lo) <= 0:
        return None
    return brentq(fn, lo, hi * (1 + 1e-15), xtol=1e-15, rtol=4 * np.finfo(float).eps)


def appendix_d_verify(params: RotorParams, beta: float, n_max: int, tail: bool = True) -> AppendixDReport:
    """Rebuild Delta at finite beta from the Hessian eigenvalues.

    Delta(beta) = (tau_0(pi/beta) + 1)
                  prod_{k>=1} (tau_k(pi/beta) + 1) / (tau_k(i sqrt(m0)/m_k) + 1)
                  prod_{k, n<=n_max} (tau_k(2 pi (n+1/2)/beta) + 1) / (tau_k(Omega_n) + 1)

    with tau_k(u) = u^2 m_k + 4 sin^2(pi k/L), accumulated as a sum of
    log-ratios in ascending k then n.  The n > n_max remainder is estimated
    by the large-n expansion of the roots, which turns the sum into
    (2/pi) int_X^inf m_k x arctan(a/x) / (m_k x^2 + B_k) dx, a = sqrt(m0)/m_k.

    Raises
    ------
    RootNotBracketed
        If some bracket has no sign change; the partial assembly over the
        valid (k, n) is attached.
    """
    if beta < 20:
        raise InvalidParams("beta must be at least 20")
    if n_max < 1000:
        raise InvalidParams("n_max must be at least 1000")
    L = params.base.L
    m = mode_masses(params)
    m0 = float(m[0])
    k = np.arange(L)
    B = 1.0 + 4.0 * np.sin(np.pi * k / L) ** 2

    def tau1(u2, kk):
        return u2 * m[kk] + B[kk]

    roots, bad = solve_omega(m, m0, beta, n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    x_half = 2.0 * np.pi * (n + 0.5) / beta
    num = np.log(tau1(x_half[None, :] ** 2, k[:, None]))
    den = np.log(tau1(roots**2, k[:, None]))
    pair = np.where(bad, 0.0, num - den)

    a = math.sqrt(m0) / m
    u0 = math.pi / beta
    total = math.log(tau1(u0**2, 0))
    for kk in range(1, L):
        total += math.log(tau1(u0**2, kk)) - math.log(B[kk] - m0 / m[kk])
    # ascending k, then n, for a fixed summation order
    for kk in range(L):
        total += math.fsum(pair[kk])

    tails = np.zeros(L)
    if tail:
        X = 2.0 * np.pi * (n_max + 1.0) / beta
        for kk in range(L):
            f = lambda x, kk=kk: m[kk] * x * math.atan(a[kk] / x) / (m[kk] * x * x + B[kk])
            val, _ = quad(f, X, np.inf, epsabs=0, epsrel=1e-10, limit=200)
            tails[kk] = 2.0 / math.pi * val

    closed = det_ratio_closed(params)
    numeric = math.exp(total + float(np.sum(tails)))
    croots = np.array([np.nan if (r := _complex_root(m[kk], m0, beta)) is None else r for kk in range(L)])
    if np.any(bad):
        bk, bn = np.nonzero(bad)
        raise RootNotBracketed(
            f"{bad.sum()} brackets without a sign change",
            diagnostics={"k": bk.tolist(), "n": (bn + 1).tolist()},
            partial=numeric,
        )
    return AppendixDReport(
        beta=float(beta),
        n_max=int(n_max),
        omega_solutions=roots,
        complex_roots=croots,
        complex_roots_limit=a,
        delta_numeric=numeric,
        delta_numeric_untailed=math.exp(total),
        delta_closed=closed,
        rel_error=abs(numeric - closed) / closed,
        tail_log=tails,
    )
