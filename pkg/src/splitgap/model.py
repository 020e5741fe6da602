"""Model parameters and the coupling-function families.

All three models share the same parameter block: a periodic chain of ``L``
sites, an interaction strength ``lam`` and a coupling function ``f(r)`` that is
either all-to-all (``1/(4 L**alpha)``), a periodic power law, or an explicit
user table.  Everything here is a pure value type.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParams, NonPositiveMass

__all__ = [
    "Coupling",
    "ModelParams",
    "power_law_prefactor",
    "coupling_table",
    "coupling_sum",
    "inverse_masses",
    "fourier_mass",
    "check_positive_definite",
    "lambda_window",
    "canonical_json",
    "to_config_text",
    "parse_config_text",
]


class Coupling(str, enum.Enum):
    ALL_TO_ALL = "all-to-all"
    POWER_LAW = "power-law"
    CUSTOM = "custom"


def _parse_beta(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in {"inf", "infinite", "infinity"}:
            return math.inf
        value = float(value)
    return float(value)


@dataclass(frozen=True)
class ModelParams:
    """Shared parameter block.

    ``table`` is only used (and then required) for ``Coupling.CUSTOM``; it is
    validated eagerly so downstream code can rely on the symmetry and norm
    invariants.
    """

    L: int
    lam: float = 0.0
    alpha: float = 0.5
    coupling: Coupling = Coupling.ALL_TO_ALL
    beta: float = math.inf
    table: tuple[float, ...] | None = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        object.__setattr__(self, "beta", _parse_beta(self.beta))
        if int(self.L) != self.L or self.L < 2:
            raise InvalidParams(f"L must be an integer >= 2, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if not math.isfinite(self.lam) or self.lam < 0:
            raise InvalidParams(f"lambda must be finite and >= 0 (lambda < 0 is the unstable regime), got {self.lam}")
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidParams(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta > 0:
            raise InvalidParams(f"beta must be positive, got {self.beta}")
        if self.coupling is Coupling.CUSTOM:
            if self.table is None:
                raise InvalidParams("custom coupling requires an explicit table f(0..L-1)")
            tab = tuple(float(v) for v in self.table)
            if len(tab) != self.L:
                raise InvalidParams(f"custom table has {len(tab)} entries, expected L={self.L}")
            arr = np.asarray(tab)
            if not np.all(np.isfinite(arr)) or np.any(np.abs(arr) > 1.0):
                raise InvalidParams("custom table violates |f(r)| <= 1")
            if np.any(arr[1:] != arr[1:][::-1]):
                raise InvalidParams("custom table violates f(r) = f(L-r)")
            object.__setattr__(self, "table", tab)
        elif self.table is not None:
            raise InvalidParams("an explicit table is only accepted with coupling='custom'")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = {
            "L": self.L,
            "lambda": float(self.lam),
            "alpha": float(self.alpha),
            "coupling": self.coupling.value,
            "beta": "inf" if math.isinf(self.beta) else float(self.beta),
        }
        if self.table is not None:
            d["table"] = list(self.table)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        table = d.get("table")
        return cls(
            L=int(d["L"]),
            lam=float(d.get("lambda", d.get("lam", 0.0))),
            alpha=float(d.get("alpha", 0.5)),
            coupling=Coupling(d.get("coupling", Coupling.ALL_TO_ALL.value)),
            beta=_parse_beta(d.get("beta", "inf")),
            table=tuple(table) if table is not None else None,
        )


def power_law_prefactor(alpha: float) -> float:
    """c_alpha = (1 - alpha) / 2**alpha, chosen so that sum_r f(r) ~ L**(1-alpha)."""
    return (1.0 - alpha) / 2.0**alpha


def periodic_distance(L: int) -> np.ndarray:
    r = np.arange(L)
    return np.minimum(r, L - r)


def coupling_table(params: ModelParams) -> np.ndarray:
    """Return f(0), ..., f(L-1) for the configured coupling family."""
    L = params.L
    if params.coupling is Coupling.ALL_TO_ALL:
        return np.full(L, 1.0 / (4.0 * L**params.alpha))
    if params.coupling is Coupling.POWER_LAW:
        d = periodic_distance(L).astype(float)
        f = np.zeros(L)
        f[1:] = power_law_prefactor(params.alpha) / d[1:] ** params.alpha
        return f
    return np.array(params.table, dtype=float)


def coupling_sum(params: ModelParams) -> float:
    return float(math.fsum(coupling_table(params)))


def inverse_masses(params: ModelParams) -> np.ndarray:
    """All 1/m_k = 1 + 2 lam sum_r cos(2 pi k r / L) f(r), k = 0..L-1.

    The table is real and symmetric, so its DFT is real; the FFT is used and
    the (round-off sized) imaginary part discarded.
    """
    f = coupling_table(params)
    return 1.0 + 2.0 * params.lam * np.fft.fft(f).real


def fourier_mass(params: ModelParams, k: int) -> float:
    """Mode mass m_k; raises NonPositiveMass outside the positive-definite window."""
    L = params.L
    if not 0 <= k < L:
        raise InvalidParams(f"mode index k must lie in 0..{L - 1}, got {k}")
    inv = inverse_masses(params)[k]
    if inv <= 0:
        raise NonPositiveMass(f"1/m_{k} = {inv:.6g} <= 0 for lambda={params.lam}")
    return float(1.0 / inv)


def check_positive_definite(params: ModelParams) -> bool:
    return bool(np.min(inverse_masses(params)) > 0)


def lambda_window(params: ModelParams) -> float:
    """Largest lambda0 such that the inverse mass matrix is positive definite on [0, lambda0).

    Returns ``inf`` when every Fourier component of f is non-negative.
    """
    F = np.fft.fft(coupling_table(params)).real
    fmin = float(np.min(F))
    if fmin >= 0:
        return math.inf
    return -1.0 / (2.0 * fmin)


# -- serialization -----------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, ModelParams):
        return _jsonable(obj.to_dict())
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, non-finite floats as strings."""
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


_CONFIG_KEYS = ("model", "L", "lambda", "alpha", "coupling", "beta")


def to_config_text(params: ModelParams, model: str = "chain", **extras) -> str:
    """Flat ``key = value`` text; custom tables are written comma-separated."""
    d = params.to_dict()
    lines = [f"model = {model}"]
    for key in _CONFIG_KEYS[1:]:
        lines.append(f"{key} = {d[key]}")
    if "table" in d:
        lines.append("table = " + ",".join(repr(float(v)) for v in d["table"]))
    for key in sorted(extras):
        lines.append(f"{key} = {extras[key]}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> tuple[str, ModelParams, dict]:
    """Inverse of :func:`to_config_text`; returns (model, params, extras)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParams(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    if "L" not in raw:
        raise InvalidParams("config is missing L")
    d = {
        "L": int(raw.pop("L")),
        "lambda": float(raw.pop("lambda", 0.0)),
        "alpha": float(raw.pop("alpha", 0.5)),
        "coupling": raw.pop("coupling", Coupling.ALL_TO_ALL.value),
        "beta": raw.pop("beta", "inf"),
    }
    if "table" in raw:
        d["table"] = [float(v) for v in raw.pop("table").split(",")]
    model = raw.pop("model", "chain")
    return model, ModelParams.from_dict(d), raw
