"""Projector toy model H = -L|psi+><psi+| - L|psi-><psi-| + (lam/L^alpha) P^2.

P = sum_j O_j.  In each parity sector the ground energy is -L eta with eta
the positive root of the secular function

    f_pm(eta) = 1 - L <psi_pm| (A + L eta)^{-1} |psi_pm>,  A = (lam/L^alpha) P^2.

For O_j built from sigma^x (single-site and nearest-neighbour products) P is
diagonal in the x-basis and only depends on the number d of down spins and
the number b of periodic domain walls; the cat states put weight 2^{1-L} on
every string of matching d-parity.  Weights are exact integers grouped by the
exact value of P^2, so sectors with identical spectra give identical floats.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh

from .errors import DenseTooLarge, InvalidParams, QuadratureNotConverged, RootNotFound, TooLarge, Unsupported
from .model import ModelParams

__all__ = [
    "OperatorKind",
    "OperatorChoice",
    "SecularFunctions",
    "ToyResult",
    "domain_wall_counts",
    "p_spectrum",
    "secular_functions",
    "secular_eval",
    "solve_splitting_secular",
    "matrix_element_cos",
    "time_domain_delta",
    "time_domain_delta_exact",
    "asymptotic_log_delta_toy",
    "dense_oracle_toy",
    "build_dense_P",
    "linearized_log_delta",
    "cos_element_constant",
    "transfer_eigen_sum",
    "kramers_protected",
    "DENSE_TOY_MAX_L",
    "CUSTOM_MAX_L",
]

DENSE_TOY_MAX_L = 12
CUSTOM_MAX_L = 14

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_I2 = np.eye(2)


class OperatorKind(str, enum.Enum):
    SIGMA_X = "sigma-x"
    SIGMA_XX = "sigma-xx"
    MIXED = "mixed"
    CUSTOM = "custom"


@dataclass(frozen=True)
class OperatorChoice:
    """Which local operator O_j enters P.

    ``gamma`` (a Fraction with odd denominator) is used for MIXED, where the
    operator is divided by 1 + |gamma| when ``rescale`` is true so that its
    norm is at most 1.  CUSTOM takes a Hermitian ``local_op`` acting on
    ``span`` consecutive sites (z-basis, site j the most significant bit),
    translated around the ring.
    """

    kind: OperatorKind
    gamma: Fraction | None = None
    rescale: bool = True
    local_op: tuple | None = None
    span: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", OperatorKind(self.kind))
        if self.kind is OperatorKind.MIXED:
            if self.gamma is None:
                raise InvalidParams("mixed operator needs gamma = p/q")
            g = Fraction(self.gamma).limit_denominator(10**6) if isinstance(self.gamma, float) else Fraction(self.gamma)
            if g.denominator % 2 == 0:
                raise InvalidParams(f"gamma = {g} must have an odd denominator")
            object.__setattr__(self, "gamma", g)
        if self.kind is OperatorKind.CUSTOM:
            if self.local_op is None:
                raise InvalidParams("custom operator needs a local matrix")
            op = np.asarray(self.local_op, dtype=complex)
            if op.shape != (2**self.span, 2**self.span):
                raise InvalidParams(f"local operator must be {2**self.span}x{2**self.span}")
            _validate_local(op, self.span)
            object.__setattr__(self, "local_op", tuple(map(tuple, op.tolist())))

    @classmethod
    def sigma_x(cls):
        return cls(OperatorKind.SIGMA_X)

    @classmethod
    def sigma_xx(cls):
        return cls(OperatorKind.SIGMA_XX)

    @classmethod
    def mixed(cls, gamma, rescale: bool = True):
        return cls(OperatorKind.MIXED, gamma=Fraction(gamma), rescale=rescale)

    @classmethod
    def custom(cls, local_op, span: int):
        return cls(OperatorKind.CUSTOM, local_op=np.asarray(local_op), span=span)

    @property
    def x_diagonal(self) -> bool:
        return self.kind is not OperatorKind.CUSTOM

    def coefficients(self) -> tuple[Fraction, Fraction]:
        """(c1, c2) with P = c1 sum x_j + c2 sum x_j x_{j+1} (x-diagonal kinds)."""
        if self.kind is OperatorKind.SIGMA_X:
            return Fraction(1), Fraction(0)
        if self.kind is OperatorKind.SIGMA_XX:
            return Fraction(0), Fraction(1)
        if self.kind is OperatorKind.MIXED:
            s = 1 + abs(self.gamma) if self.rescale else Fraction(1)
            return 1 / s, self.gamma / s
        raise Unsupported("custom operators are not x-diagonal")

    def local_matrix(self) -> tuple[np.ndarray, int]:
        if self.kind is OperatorKind.SIGMA_X:
            return _SX.astype(complex), 1
        if self.kind is OperatorKind.SIGMA_XX:
            return np.kron(_SX, _SX).astype(complex), 2
        if self.kind is OperatorKind.MIXED:
            c1, c2 = self.coefficients()
            return (float(c1) * np.kron(_SX, _I2) + float(c2) * np.kron(_SX, _SX)).astype(complex), 2
        return np.array(self.local_op, dtype=complex), self.span

    def label(self) -> str:
        if self.kind is OperatorKind.MIXED:
            return f"mixed({self.gamma}{'' if self.rescale else ',raw'})"
        return self.kind.value


def _validate_local(op: np.ndarray, span: int):
    if not np.allclose(op, op.conj().T, atol=1e-12):
        raise InvalidParams("local operator must be Hermitian")
    if np.max(np.abs(np.linalg.eigvalsh(op))) > 1.0 + 1e-12:
        raise InvalidParams("local operator norm exceeds 1")
    sx = np.ones((1, 1))
    for _ in range(span):
        sx = np.kron(sx, _SX)
    if not np.allclose(op @ sx, sx @ op, atol=1e-12):
        raise InvalidParams("local operator does not commute with the Ising symmetry")
    # <psi_pm| O_j |psi_pm> on a ring long enough that O_j cannot connect the
    # two polarized states
    L = max(2 * span, 4)
    P = _embed(op, span, L, 0)
    N = 2**L
    for s in (1.0, -1.0):
        psi = np.zeros(N, dtype=complex)
        psi[0], psi[-1] = 1 / math.sqrt(2), s / math.sqrt(2)
        if abs(psi.conj() @ P @ psi) > 1e-12:
            raise InvalidParams("local operator has a nonzero cat-state expectation")


def _site_perm(L: int, shift: int) -> np.ndarray:
    """Index map of the cyclic translation by ``shift`` sites (site 0 = MSB)."""
    idx = np.arange(2**L)
    full = (1 << L) - 1
    # moving site j to site j + shift is a right rotation of the bit string
    return ((idx >> shift) | (idx << (L - shift))) & full if shift else idx


def _embed(op: np.ndarray, span: int, L: int, j: int) -> np.ndarray:
    M = np.kron(op, np.eye(2 ** (L - span)))
    if j == 0:
        return M
    perm = _site_perm(L, j)
    out = np.empty_like(M)
    out[np.ix_(perm, perm)] = M
    return out


def build_dense_P(choice: OperatorChoice, L: int) -> np.ndarray:
    """P = sum_j O_j as a dense z-basis matrix."""
    op, span = choice.local_matrix()
    if span > L:
        raise InvalidParams("operator span exceeds L")
    P = np.zeros((2**L, 2**L), dtype=complex)
    for j in range(L):
        P += _embed(op, span, L, j)
    if not np.any(P.imag):
        # contiguous copy: a strided .real view would bypass BLAS in P @ P
        return np.ascontiguousarray(P.real)
    return P


# -- x-basis spectrum --------------------------------------------------------


@lru_cache(maxsize=None)
def domain_wall_counts(L: int) -> dict:
    """Exact number of periodic L-bit strings with d set bits and b domain walls.

    N(0, 0) = N(L, 0) = 1 and, for 0 < d < L and b = 2m,
    N(d, 2m) = (L/m) C(d-1, m-1) C(L-d-1, m-1).
    """
    out = {(0, 0): 1, (L, 0): 1}
    for d in range(1, L):
        for m in range(1, min(d, L - d) + 1):
            n = L * math.comb(d - 1, m - 1) * math.comb(L - d - 1, m - 1)
            out[(d, 2 * m)] = n // m
    return out


def _grouped_counts(choice: OperatorChoice, L: int):
    """Exact string counts per sector keyed by |P| * den (an integer)."""
    c1, c2 = choice.coefficients()
    den = math.lcm(c1.denominator, c2.denominator)
    counts = {+1: defaultdict(int), -1: defaultdict(int)}
    if c2 == 0:
        # only the down-count matters
        items = (((d, 0), math.comb(L, d)) for d in range(L + 1))
    else:
        items = domain_wall_counts(L).items()
    for (d, b), n in items:
        key = abs(int((c1 * (L - 2 * d) + c2 * (L - 2 * b)) * den))
        counts[+1 if d % 2 == 0 else -1][key] += n
    return counts, den


def p_spectrum(choice: OperatorChoice, L: int):
    """Distinct P^2 values with exact per-sector cat weights.

    Returns
    -------
    p2 : ndarray
        Distinct values of P^2.
    w_plus, w_minus : ndarray
        <psi_pm| Pi(P^2) |psi_pm>, each the exact count of matching-parity
        strings divided by 2^(L-1).
    signed : ndarray
        2^-L sum over strings of (-1)^d, i.e. the weight in <Down| F(P) |Up>.
    """
    counts, den = _grouped_counts(choice, L)
    keys = sorted(set(counts[1]) | set(counts[-1]))
    scale = 2 ** (L - 1)
    p2 = np.array([(Fraction(k, den) ** 2).__float__() for k in keys])
    w_plus = np.array([counts[1].get(k, 0) / scale for k in keys])
    w_minus = np.array([counts[-1].get(k, 0) / scale for k in keys])
    signed = np.array([(counts[1].get(k, 0) - counts[-1].get(k, 0)) / (2 * scale) for k in keys])
    return p2, w_plus, w_minus, signed


@dataclass
class SecularFunctions:
    """f_pm(eta), their mean f, half-difference g, and eta-derivatives.

    Built from a discrete spectrum: p2 (eigenvalues of P^2) with the cat
    weights in each sector.
    """

    L: int
    a: float
    p2: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray

    def _res(self, eta, w, power=1):
        eta = np.asarray(eta, dtype=float)
        den = self.a * self.p2 + self.L * eta[..., None]
        return np.sum(w / den**power, axis=-1)

    def f_plus(self, eta):
        return 1.0 - self.L * self._res(eta, self.w_plus)

    def f_minus(self, eta):
        return 1.0 - self.L * self._res(eta, self.w_minus)

    def f_sector(self, eta, sector: int):
        return self.f_plus(eta) if sector > 0 else self.f_minus(eta)

    def df_sector(self, eta, sector: int):
        w = self.w_plus if sector > 0 else self.w_minus
        return self.L**2 * self._res(eta, w, power=2)

    def f(self, eta):
        return 0.5 * (self.f_plus(eta) + self.f_minus(eta))

    def g(self, eta):
        # exact weight difference, no cancellation between f_+ and f_-
        return -0.5 * self.L * self._res(eta, self.w_plus - self.w_minus)

    def df(self, eta):
        return 0.5 * (self.df_sector(eta, 1) + self.df_sector(eta, -1))


def _coupling(params: ModelParams) -> float:
    return params.lam / params.L**params.alpha


def _sector_spectrum_dense(choice: OperatorChoice, L: int):
    """Eigen-decomposition of P per parity sector for custom operators."""
    if L > CUSTOM_MAX_L:
        raise DenseTooLarge(f"custom operators use dense P; L={L} > {CUSTOM_MAX_L}")
    P = build_dense_P(choice, L)
    N = 2**L
    idx = np.arange(N)
    reps = idx[idx < (idx ^ (N - 1))]
    out = {}
    for s in (1, -1):
        Ps = P[np.ix_(reps, reps)] + s * P[np.ix_(reps, reps ^ (N - 1))]
        vals, vecs = eigh(Ps)
        # psi_pm is the sector basis vector of the representative 0
        out[s] = (vals**2, np.abs(vecs[0]) ** 2)
    return out


def secular_functions(choice: OperatorChoice, params: ModelParams) -> SecularFunctions:
    L = params.L
    a = _coupling(params)
    if choice.x_diagonal:
        p2, wp, wm, _ = p_spectrum(choice, L)
        return SecularFunctions(L, a, p2, wp, wm)
    spec = _sector_spectrum_dense(choice, L)
    # merge both sectors on one P^2 grid (weights zero where absent)
    p2 = np.concatenate([spec[1][0], spec[-1][0]])
    wp = np.concatenate([spec[1][1], np.zeros_like(spec[-1][1])])
    wm = np.concatenate([np.zeros_like(spec[1][1]), spec[-1][1]])
    return SecularFunctions(L, a, p2, wp, wm)


def secular_eval(choice: OperatorChoice, params: ModelParams, eta: float, sector: int) -> float:
    """f_+(eta) for sector = +1, f_-(eta) for sector = -1."""
    if not eta > 0:
        raise InvalidParams("eta must be positive")
    if sector not in (1, -1):
        raise InvalidParams("sector must be +1 or -1")
    return float(secular_functions(choice, params).f_sector(eta, sector))


class Route(str, enum.Enum):
    SECULAR = "secular"
    TIME_DOMAIN = "time-domain"
    DENSE = "dense"


@dataclass
class ToyResult:
    choice: OperatorChoice
    params: ModelParams
    route: Route
    eta_plus: float
    eta_minus: float
    delta: float
    kramers: bool = False
    linearized_delta: float | None = None
    resolved: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def E_plus(self) -> float:
        return -self.params.L * self.eta_plus

    @property
    def E_minus(self) -> float:
        return -self.params.L * self.eta_minus

    def to_record(self) -> dict:
        p = self.params.to_dict()
        return {
            "model": "toy",
            "choice": self.choice.label(),
            "route": self.route.value,
            "L": p["L"],
            "lambda": p["lambda"],
            "alpha": p["alpha"],
            "eta_plus": self.eta_plus,
            "eta_minus": self.eta_minus,
            "E_plus": self.E_plus,
            "E_minus": self.E_minus,
            "delta": self.delta,
            "kramers": self.kramers,
            "linearized_delta": self.linearized_delta,
            "resolved": self.resolved,
        }


def _root(fn, dfn, lo=1e-6, hi=10.0, xtol=1e-14):
    """Bisection to xtol on an increasing function, then safeguarded Newton."""
    flo, fhi = fn(lo), fn(hi)
    for _ in range(60):
        if flo < 0:
            break
        lo *= 1e-2
        flo = fn(lo)
    for _ in range(60):
        if fhi > 0:
            break
        hi *= 4.0
        fhi = fn(hi)
    if not (flo < 0 < fhi):
        raise RootNotFound(f"no sign change of the secular function on [{lo:.3g}, {hi:.3g}]")
    while hi - lo > xtol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(3):
        fx = fn(x)
        if fx == 0:
            break
        step = fx / dfn(x)
        xn = x - step
        if not (lo - xtol <= xn <= hi + xtol) or step == 0:
            break
        x = xn
    return x


def kramers_protected(choice: OperatorChoice, L: int) -> bool:
    """True when odd L forces delta = 0.

    Theta = prod_j (i sigma^y_j) K squares to (-1)^L and preserves the cat
    projectors; H depends on P only through P^2, so Theta is a symmetry when
    Theta P Theta^-1 = +P or -P.  sigma^x (odd) and sigma^x sigma^x (even)
    qualify; the mixed operator does not, since Theta flips sigma^x but not
    the bond term.
    """
    if L % 2 == 0:
        return False
    op, span = choice.local_matrix()
    y = np.ones((1, 1))
    for _ in range(span):
        y = np.kron(y, np.array([[0.0, 1.0], [-1.0, 0.0]]))
    img = y @ np.conj(op) @ y.T
    return bool(np.allclose(img, op, atol=1e-12) or np.allclose(img, -op, atol=1e-12))


def solve_splitting_secular(choice: OperatorChoice, params: ModelParams) -> ToyResult:
    """Roots eta_pm of the secular functions and delta = L (eta_+ - eta_-).

    Also reports the linearized estimate -2 L g(eta*)/f'(eta*), with eta* the
    root of the symmetric combination f.  Kramers-protected odd L returns
    delta = 0 exactly.
    """
    L = params.L
    kramers = kramers_protected(choice, L)
    sf = secular_functions(choice, params)
    if params.lam == 0:
        return ToyResult(choice, params, Route.SECULAR, 1.0, 1.0, 0.0, kramers=kramers, linearized_delta=0.0)
    eta_p = _root(lambda e: float(sf.f_plus(e)), lambda e: float(sf.df_sector(e, 1)))
    eta_m = _root(lambda e: float(sf.f_minus(e)), lambda e: float(sf.df_sector(e, -1)))
    eta_s = _root(lambda e: float(sf.f(e)), lambda e: float(sf.df(e)))
    lin = -2.0 * L * float(sf.g(eta_s)) / float(sf.df(eta_s))
    if kramers:
        eta_m, lin = eta_p, 0.0
    delta = L * (eta_p - eta_m)
    resolved = delta == 0.0 or abs(eta_p - eta_m) > 1e3 * np.finfo(float).eps * max(eta_p, eta_m)
    return ToyResult(
        choice, params, Route.SECULAR, eta_p, eta_m, delta, kramers=kramers, linearized_delta=lin, resolved=resolved, extra={"eta_star": eta_s}
    )


def linearized_log_delta(choice: OperatorChoice, params: ModelParams, rtol: float = 1e-13) -> tuple[float, int]:
    """log|delta| and sign from -2 L g(eta*)/f'(eta*) in extended precision.

    g is a sum of exact integer weight differences with alternating signs;
    its value is of order delta while individual terms are of order one, so
    the sum is carried out with mpmath at increasing working precision until
    two precisions agree to ``rtol``.  The linearization error is O(g^2)
    relative, which makes this the route of choice once delta/L drops below
    the double-precision resolution of eta.
    """
    import mpmath

    if not choice.x_diagonal:
        raise Unsupported("extended-precision route needs an x-diagonal operator")
    L = params.L
    if kramers_protected(choice, L) or params.lam == 0:
        return -math.inf, 0
    sf = secular_functions(choice, params)
    eta = _root(lambda e: float(sf.f(e)), lambda e: float(sf.df(e)))
    dfs = float(sf.df(eta))
    counts, den = _grouped_counts(choice, L)
    diff = {k: counts[1].get(k, 0) - counts[-1].get(k, 0) for k in set(counts[1]) | set(counts[-1])}
    diff = {k: v for k, v in diff.items() if v}
    if not diff:
        return -math.inf, 0
    a = _coupling(params)
    dps = 30
    prev = None
    while dps < 100_000:
        with mpmath.workdps(dps):
            e = mpmath.mpf(eta)
            s = mpmath.fsum(mpmath.mpf(v) / (a * mpmath.mpf(k * k) / den**2 + L * e) for k, v in diff.items())
            val = L * L * s / mpmath.mpf(2) ** (L - 1) / dfs
            if val != 0 and prev is not None and abs(val - prev) <= rtol * abs(val):
                return float(mpmath.log(abs(val))), int(mpmath.sign(val))
            prev = val
        dps *= 2
    raise RootNotFound("extended-precision sum did not stabilize")


def cos_element_constant(choice: OperatorChoice, L: int, t_max: float = math.pi, n: int = 20001) -> float:
    """sup_t |<Down|cos Pt|Up>| / (sqrt(L) t) on a grid over (0, t_max].

    This is the constant entering the bound |g(eta)| <= c sqrt(lam)
    L^(-alpha/2) eta^(-3/2), obtained by inserting the bound on the matrix
    element into the time-domain form of g.
    """
    t = np.linspace(t_max / n, t_max, n)
    return float(np.max(np.abs(matrix_element_cos(choice, L, t)) / (math.sqrt(L) * t)))


# -- matrix element and time-domain route ------------------------------------


def _transfer_trace(gamma: float, t, L: int):
    """Tr T^L for the 2x2 transfer matrix of sigma^x + gamma sigma^x sigma^x."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    e = np.exp
    T = np.empty(t.shape + (2, 2), dtype=complex)
    T[..., 0, 0] = e(1j * t) * e(1j * gamma * t)
    T[..., 0, 1] = 1j * e(-1j * gamma * t)
    T[..., 1, 0] = 1j * e(-1j * gamma * t)
    T[..., 1, 1] = -e(-1j * t) * e(1j * gamma * t)
    return np.trace(np.linalg.matrix_power(T, L), axis1=-2, axis2=-1)


def transfer_eigen_sum(gamma: float, t, L: int):
    """lambda_+^L + lambda_-^L from the closed-form eigenvalues.

    lambda_pm = i e^{i gamma t} [sin t +- (e^{-4 i gamma t} - cos^2 t)^{1/2}].
    The sum is symmetric in the two roots, so the square-root branch does not
    matter.
    """
    t = np.asarray(t, dtype=float)
    root = np.sqrt(np.exp(-4j * gamma * t) - np.cos(t) ** 2 + 0j)
    pref = 1j * np.exp(1j * gamma * t)
    lp = pref * (np.sin(t) + root)
    lm = pref * (np.sin(t) - root)
    return lp**L + lm**L


def matrix_element_cos(choice: OperatorChoice, L: int, t):
    """<Down| cos(P t) |Up> from the closed forms (dense for custom operators)."""
    t = np.asarray(t, dtype=float)
    if choice.kind is OperatorKind.SIGMA_X:
        return (1j**L).real * np.sin(t) ** L
    if choice.kind is OperatorKind.SIGMA_XX:
        if L % 2:
            return np.zeros_like(t)
        return 2.0 * (1j ** (L // 2)).real * (np.cos(t) * np.sin(t)) ** (L // 2)
    if choice.kind is OperatorKind.MIXED:
        g = float(choice.gamma)
        s = 1.0 + abs(g) if choice.rescale else 1.0
        return np.real(_transfer_trace(g, t / s, L)).reshape(t.shape) / 2.0**L
    if L > CUSTOM_MAX_L:
        raise DenseTooLarge(f"custom matrix element needs dense P; L={L} > {CUSTOM_MAX_L}")
    P = build_dense_P(choice, L)
    vals, vecs = np.linalg.eigh(P)
    amp = np.conj(vecs[-1]) * vecs[0]
    return np.real(np.cos(np.multiply.outer(t, vals)) @ amp)


def time_domain_delta(choice: OperatorChoice, params: ModelParams, rtol: float = 1e-10, envelope: float = 1e-18) -> float:
    """delta = 2 sqrt(L^{3+alpha}/lam) int_0^inf e^{-omega t} <Down|cos Pt|Up> dt.

    omega = sqrt(L^{1+alpha}/lam).  Leading-order formula (eta* ~ 1,
    f' ~ 1).  The integral is cut at T with e^{-omega T} < envelope and
    done piecewise on intervals of length pi/4 by adaptive quadrature.

    Raises
    ------
    QuadratureNotConverged
        If the summed error estimate exceeds ``rtol`` relative to the sum of
        absolute piece values.
    """
    L, lam, alpha = params.L, params.lam, params.alpha
    if lam <= 0:
        raise InvalidParams("the time-domain formula needs lambda > 0")
    if kramers_protected(choice, L):
        return 0.0
    omega = math.sqrt(L ** (1.0 + alpha) / lam)
    T = -math.log(envelope) / omega
    edges = np.append(np.arange(0.0, T, 0.25 * math.pi), T)
    f = lambda t: math.exp(-omega * t) * float(matrix_element_cos(choice, L, t))
    pieces, errs = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = quad(f, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
        pieces.append(v)
        errs.append(e)
    total = math.fsum(pieces)
    scale = math.fsum(abs(v) for v in pieces)
    err = math.fsum(errs)
    if scale > 0 and err > rtol * scale * 10:
        raise QuadratureNotConverged(f"time-domain integral error {err:.3g}", estimate=total, error=err)
    return 2.0 * math.sqrt(L ** (3.0 + alpha) / lam) * total


def _signed_sum(choice: OperatorChoice, L: int, term, rtol: float = 1e-13):
    """sum_k (n_+(k) - n_-(k)) term(P^2_k) / 2^(L-1) in adaptive extended precision.

    The integer count differences alternate in sign and the sum is far
    smaller than its terms, so the working precision is doubled until two
    passes agree to ``rtol``.  ``term`` receives an mpmath number.
    """
    import mpmath

    counts, den = _grouped_counts(choice, L)
    diff = {k: counts[1].get(k, 0) - counts[-1].get(k, 0) for k in set(counts[1]) | set(counts[-1])}
    diff = {k: v for k, v in diff.items() if v}
    if not diff:
        return mpmath.mpf(0)
    dps, prev = 30, None
    while dps < 100_000:
        with mpmath.workdps(dps):
            val = mpmath.fsum(mpmath.mpf(v) * term(mpmath.mpf(k * k) / den**2) for k, v in diff.items()) / mpmath.mpf(2) ** (L - 1)
            if prev is not None and (val == prev == 0 or abs(val - prev) <= rtol * abs(val)):
                return +val
            prev = val
        dps *= 2
    raise RootNotFound("extended-precision sum did not stabilize")


def time_domain_delta_exact(choice: OperatorChoice, params: ModelParams) -> float:
    """The same leading-order formula with the Laplace transform done exactly.

    int_0^inf e^{-omega t} cos(p t) dt = omega / (omega^2 + p^2), summed over
    the x-basis spectrum with the signed cat weights in extended precision,
    so the result stays accurate far below the double-precision scale of the
    individual terms.
    """
    if not choice.x_diagonal:
        raise Unsupported("exact Laplace route needs an x-diagonal operator")
    L, lam, alpha = params.L, params.lam, params.alpha
    if lam <= 0:
        raise InvalidParams("the time-domain formula needs lambda > 0")
    if kramers_protected(choice, L):
        return 0.0
    omega = math.sqrt(L ** (1.0 + alpha) / lam)
    # the signed weights carry 1/2 relative to the per-sector weights
    s = _signed_sum(choice, L, lambda p2: omega / (omega**2 + p2))
    return float(math.sqrt(L ** (3.0 + alpha) / lam) * s)


def asymptotic_log_delta_toy(choice: OperatorChoice, params: ModelParams, convention: str = "unrescaled") -> float:
    """Leading large-L log|delta| for the three worked operator choices.

    sigma-x: -L^((1+alpha)/2) pi / (2 sqrt(lam)); sigma-xx: -L log(2)/2;
    mixed with gamma = p/q: -L^((1+alpha)/2) q pi / (2 sqrt(lam)) for the
    unrescaled operator (``convention="unrescaled"``).  ``convention="rescaled"``
    applies the 1/(1+|gamma|) normalization, i.e. lam -> lam/(1+|gamma|)^2.
    """
    L, lam, alpha = params.L, params.lam, params.alpha
    if choice.kind is OperatorKind.CUSTOM:
        raise Unsupported("no closed asymptotics for custom operators")
    if choice.kind is OperatorKind.SIGMA_XX:
        return -L * math.log(2.0) / 2.0
    if lam <= 0:
        raise InvalidParams("asymptotics need lambda > 0")
    base = -(L ** ((1.0 + alpha) / 2.0)) * math.pi / (2.0 * math.sqrt(lam))
    if choice.kind is OperatorKind.SIGMA_X:
        return base
    q = choice.gamma.denominator
    if convention == "unrescaled":
        return q * base
    if convention == "rescaled":
        return q * base * (1.0 + abs(float(choice.gamma)))
    raise InvalidParams(f"unknown convention {convention!r}")


# -- dense oracle ------------------------------------------------------------


def dense_oracle_toy(choice: OperatorChoice, params: ModelParams) -> ToyResult:
    """Build H densely in the z-basis and diagonalize each parity sector."""
    L = params.L
    if L > DENSE_TOY_MAX_L:
        raise TooLarge(f"dense toy Hamiltonian limited to L <= {DENSE_TOY_MAX_L}")
    P = build_dense_P(choice, L)
    N = 2**L
    H = _coupling(params) * (P @ P)
    H = np.array(H, dtype=complex if np.iscomplexobj(H) else float)
    idx = np.arange(N)
    reps = idx[idx < (idx ^ (N - 1))]
    energies = {}
    for s in (1, -1):
        Hs = H[np.ix_(reps, reps)] + s * H[np.ix_(reps, reps ^ (N - 1))]
        # the projector -L|psi_s><psi_s| touches only the representative 0
        Hs[0, 0] -= L
        energies[s] = float(eigh(Hs, eigvals_only=True, subset_by_index=[0, 0])[0])
    eta_p, eta_m = -energies[1] / L, -energies[-1] / L
    return ToyResult(choice, params, Route.DENSE, eta_p, eta_m, energies[-1] - energies[1], kramers=kramers_protected(choice, L))
