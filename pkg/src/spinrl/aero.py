"""Polynomial aerodynamic coefficient model.

Each of the six coefficients is a sum of monomial terms over a restricted set of
flight variables. The allowed variables per coefficient follow the functional
dependencies of the equations of motion, e.g. ``Cm`` may only read ``alpha``,
``q`` and ``de``. Terms that read a body rate can use either the raw rate in
rad/s or the nondimensional rate (``p*b/(2V)`` etc.), selected per term by the
``nondim`` flag.

The file format is JSON::

    {
      "meta": {...},                       # optional, free-form
      "CL": [{"vars": {"alpha": 1}, "coef": 6.28, "nondim": true}, ...],
      ...
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import ConfigError, DomainError, NumericalError

COEFFICIENTS = ("CD", "CL", "CY", "Cl", "Cm", "Cn")
VARIABLES = ("alpha", "beta", "p", "q", "r", "de", "da", "dr")
RATE_VARIABLES = ("p", "q", "r")

_LONGITUDINAL = frozenset({"alpha", "q", "de"})
_LATERAL = frozenset(VARIABLES) - {"q"}

ALLOWED_ARGUMENTS: dict[str, frozenset[str]] = {
    "CD": _LONGITUDINAL,
    "CL": _LONGITUDINAL,
    "Cm": _LONGITUDINAL,
    "CY": _LATERAL,
    "Cl": _LATERAL,
    "Cn": _LATERAL,
}

# Slot layout of the flat value vector used by the evaluator.
_SLOT = {name: i for i, name in enumerate(VARIABLES)}
_HAT_SLOT = {"p": 8, "q": 9, "r": 10}

SANITY_BOUND = 100.0


@dataclass(frozen=True)
class Term:
    vars: tuple[tuple[str, int], ...]
    coef: float
    nondim: bool = True

    def to_json(self) -> dict[str, Any]:
        return {"vars": dict(self.vars), "coef": self.coef, "nondim": self.nondim}

    def scaled(self, k: float) -> "Term":
        return Term(self.vars, self.coef * k, self.nondim)


@dataclass(frozen=True)
class CoefficientSet:
    CD: float
    CL: float
    CY: float
    Cl: float
    Cm: float
    Cn: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.CD, self.CL, self.CY, self.Cl, self.Cm, self.Cn)


@dataclass(frozen=True)
class NondimensionalRates:
    p_hat: float
    q_hat: float
    r_hat: float


def nondimensional_rates(p: float, q: float, r: float, V: float, span: float, chord: float) -> NondimensionalRates:
    half = 0.5 / V
    return NondimensionalRates(p * span * half, q * chord * half, r * span * half)


@dataclass(frozen=True, eq=False)
class AeroModelConfig:
    """Validated, immutable aerodynamic model.

    Equality compares the term lists and metadata, so a model survives a
    save/load round trip unchanged.
    """

    terms: Mapping[str, tuple[Term, ...]]
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        compiled = []
        for name in COEFFICIENTS:
            rows = []
            for term in self.terms.get(name, ()):
                factors = []
                for var, exp in term.vars:
                    slot = _HAT_SLOT[var] if (term.nondim and var in _HAT_SLOT) else _SLOT[var]
                    factors.append((slot, exp))
                rows.append((term.coef, tuple(factors)))
            compiled.append(tuple(rows))
        object.__setattr__(self, "_compiled", tuple(compiled))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AeroModelConfig):
            return NotImplemented
        return (
            all(tuple(self.terms.get(c, ())) == tuple(other.terms.get(c, ())) for c in COEFFICIENTS)
            and dict(self.meta) == dict(other.meta)
        )

    def scaled(self, k: float) -> "AeroModelConfig":
        return AeroModelConfig(
            {c: tuple(t.scaled(k) for t in self.terms.get(c, ())) for c in COEFFICIENTS}, dict(self.meta)
        )

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.meta:
            out["meta"] = dict(self.meta)
        for c in COEFFICIENTS:
            out[c] = [t.to_json() for t in self.terms.get(c, ())]
        return out

    def evaluate(
        self,
        alpha: float,
        beta: float,
        p: float,
        q: float,
        r: float,
        V: float,
        delta_e: float,
        delta_a: float,
        delta_r: float,
        span: float,
        chord: float,
    ) -> tuple[float, float, float, float, float, float]:
        """Hot-path evaluator returning ``(CD, CL, CY, Cl, Cm, Cn)`` as a tuple."""
        half = 0.5 / V
        values = (
            alpha, beta, p, q, r, delta_e, delta_a, delta_r,
            p * span * half, q * chord * half, r * span * half,
        )
        out = []
        for rows in self._compiled:  # type: ignore[attr-defined]
            acc = 0.0
            for coef, factors in rows:
                term = coef
                for slot, exp in factors:
                    term *= values[slot] ** exp
                acc += term
            out.append(acc)
        return tuple(out)  # type: ignore[return-value]


def zero_model() -> AeroModelConfig:
    return AeroModelConfig({c: () for c in COEFFICIENTS})


def evaluate(
    aero: AeroModelConfig,
    alpha: float,
    beta: float,
    p: float,
    q: float,
    r: float,
    V: float,
    delta_e: float,
    delta_a: float,
    delta_r: float,
    params: Any,
) -> CoefficientSet:
    """Evaluate all six coefficients at one flight condition.

    ``params`` only needs ``span_ft`` and ``chord_ft`` attributes (an
    :class:`~spinrl.dynamics.AircraftParams` works). Rate terms flagged as
    nondimensional use ``p*b/(2V)``, ``q*c/(2V)``, ``r*b/(2V)``.
    """
    if not V > 0.0:
        raise DomainError(f"airspeed must be positive for coefficient evaluation, got {V!r}")
    values = aero.evaluate(alpha, beta, p, q, r, V, delta_e, delta_a, delta_r, params.span_ft, params.chord_ft)
    for name, v in zip(COEFFICIENTS, values):
        if not math.isfinite(v):
            raise NumericalError(f"{name} evaluated to {v}")
    return CoefficientSet(*values)


def _parse_term(coef_name: str, index: int, raw: Any) -> Term:
    where = f"{coef_name}[{index}]"
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{where}: term must be an object, got {type(raw).__name__}")
    unknown_keys = set(raw) - {"vars", "coef", "nondim"}
    if unknown_keys:
        raise ConfigError(f"{where}: unknown term keys {sorted(unknown_keys)}")
    if "coef" not in raw:
        raise ConfigError(f"{where}: missing 'coef'")
    coef = raw["coef"]
    if isinstance(coef, bool) or not isinstance(coef, (int, float)):
        raise ConfigError(f"{where}: coef must be a number, got {coef!r}")
    coef = float(coef)
    if not math.isfinite(coef):
        raise ConfigError(f"{where}: coef is not finite ({coef})")
    nondim = raw.get("nondim", True)
    if not isinstance(nondim, bool):
        raise ConfigError(f"{where}: nondim must be a boolean, got {nondim!r}")
    variables = raw.get("vars", {})
    if not isinstance(variables, Mapping):
        raise ConfigError(f"{where}: vars must be an object mapping name -> exponent")
    parsed = []
    for var, exp in variables.items():
        if var not in _SLOT:
            raise ConfigError(f"{where}: unknown variable {var!r}; expected one of {list(VARIABLES)}")
        if var not in ALLOWED_ARGUMENTS[coef_name]:
            raise ConfigError(
                f"{where}: {coef_name} does not depend on {var!r}; allowed {sorted(ALLOWED_ARGUMENTS[coef_name])}"
            )
        if isinstance(exp, bool) or not isinstance(exp, int) or exp < 1:
            raise ConfigError(f"{where}: exponent of {var!r} must be a positive integer, got {exp!r}")
        parsed.append((var, exp))
    return Term(tuple(parsed), coef, nondim)


def from_json(data: Any) -> AeroModelConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("aero config must be a JSON object")
    unknown = set(data) - set(COEFFICIENTS) - {"meta"}
    if unknown:
        raise ConfigError(f"unknown aero config keys {sorted(unknown)}; expected {list(COEFFICIENTS)}")
    meta = data.get("meta", {})
    if not isinstance(meta, Mapping):
        raise ConfigError("aero config 'meta' must be an object")
    terms = {}
    for name in COEFFICIENTS:
        raw_terms = data.get(name, [])
        if not isinstance(raw_terms, list):
            raise ConfigError(f"{name}: expected a list of terms")
        terms[name] = tuple(_parse_term(name, i, t) for i, t in enumerate(raw_terms))
    return AeroModelConfig(terms, dict(meta))


def load_aero_config(text: str) -> AeroModelConfig:
    """Parse and validate aero config JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"aero config is not valid JSON: {exc}") from exc
    return from_json(data)


def dump_aero_config(model: AeroModelConfig) -> str:
    return json.dumps(model.to_json(), indent=2) + "\n"


def load_aero_file(path: str) -> AeroModelConfig:
    with open(path, encoding="utf-8") as fh:
        return load_aero_config(fh.read())
