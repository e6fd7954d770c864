"""Central potential models with analytic tail metadata.

Every model is an immutable dataclass.  Construction validates that
``r V(r)`` is integrable on ``(0, inf)``, so downstream code never has to
re-check admissibility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, DomainError, IndeterminateError

INTEGRABILITY_POWERS = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class SquareBarrier:
    height: float
    radius: float

    def __post_init__(self):
        if not self.height >= 0.0:
            raise DomainError(f"barrier height must be >= 0, got {self.height}")
        _positive("radius", self.radius)

    def _eval(self, r):
        return np.where(r < self.radius, self.height, 0.0)

    def breakpoints(self):
        return (self.radius,)

    @property
    def support(self):
        return self.radius

    def range_scale(self):
        return self.radius


@dataclass(frozen=True)
class SquareWell:
    depth: float
    radius: float

    def __post_init__(self):
        _positive("depth", self.depth)
        _positive("radius", self.radius)

    def _eval(self, r):
        return np.where(r < self.radius, -self.depth, 0.0)

    def breakpoints(self):
        return (self.radius,)

    @property
    def support(self):
        return self.radius

    def range_scale(self):
        return self.radius


@dataclass(frozen=True)
class PowerTail:
    """``V(r) = amplitude * (core + r) ** -s``; bounded at the origin."""

    amplitude: float
    core: float
    s: float

    def __post_init__(self):
        _positive("core", self.core)
        if not self.s > 2.0:
            raise DomainError(f"power tail needs s > 2 for r V(r) in L1, got s={self.s}")

    def _eval(self, r):
        return self.amplitude * (self.core + r) ** (-self.s)

    def breakpoints(self):
        return ()

    @property
    def support(self):
        return None if self.amplitude != 0.0 else 0.0

    def range_scale(self):
        return self.core


@dataclass(frozen=True)
class ExponentialTail:
    amplitude: float
    rate: float

    def __post_init__(self):
        _positive("rate", self.rate)

    def _eval(self, r):
        return self.amplitude * np.exp(-self.rate * r)

    def breakpoints(self):
        return ()

    @property
    def support(self):
        return None if self.amplitude != 0.0 else 0.0

    def range_scale(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class Tabulated:
    """Linearly interpolated samples.

    Beyond the last node the potential follows ``values[-1] * (r/r_N)**-tail``
    when ``tail_exponent`` is given and is zero otherwise.  Below the first
    node it is held at ``values[0]``.
    """

    nodes: tuple
    values: tuple
    tail_exponent: Optional[float] = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or nodes.shape != vals.shape:
            raise DomainError("tabulated potential needs matching 1-D nodes/values with >= 2 entries")
        if np.any(np.diff(nodes) <= 0.0) or nodes[0] < 0.0:
            raise DomainError("tabulated nodes must be non-negative and strictly ascending")
        if not np.all(np.isfinite(vals)):
            raise DomainError("tabulated values must be finite")
        if self.tail_exponent is not None and not self.tail_exponent > 2.0:
            raise DomainError("tabulated tail_exponent must exceed 2 for r V(r) in L1")
        object.__setattr__(self, "nodes", tuple(float(x) for x in nodes))
        object.__setattr__(self, "values", tuple(float(x) for x in vals))

    def _eval(self, r):
        nodes = np.asarray(self.nodes)
        vals = np.asarray(self.values)
        out = np.interp(r, nodes, vals)
        beyond = r > nodes[-1]
        if self.tail_exponent is None:
            return np.where(beyond, 0.0, out)
        with np.errstate(divide="ignore"):
            tail = vals[-1] * (np.maximum(r, nodes[-1]) / nodes[-1]) ** (-self.tail_exponent)
        return np.where(beyond, tail, out)

    def breakpoints(self):
        return tuple(x for x in self.nodes if x > 0.0)

    @property
    def support(self):
        if self.tail_exponent is None or self.values[-1] == 0.0:
            return self.nodes[-1]
        return None

    def range_scale(self):
        return self.nodes[-1]


@dataclass(frozen=True)
class TruncatedAt:
    inner: "PotentialSpec"
    cutoff_radius: float

    def __post_init__(self):
        _positive("cutoff_radius", self.cutoff_radius)

    def _eval(self, r):
        return np.where(r <= self.cutoff_radius, self.inner._eval(r), 0.0)

    def breakpoints(self):
        return tuple(b for b in self.inner.breakpoints() if b < self.cutoff_radius) + (self.cutoff_radius,)

    @property
    def support(self):
        inner = self.inner.support
        return self.cutoff_radius if inner is None else min(inner, self.cutoff_radius)

    def range_scale(self):
        return min(self.inner.range_scale(), self.cutoff_radius)


PotentialSpec = Union[SquareBarrier, SquareWell, PowerTail, ExponentialTail, Tabulated, TruncatedAt]


def builtin_catalog() -> dict:
    """Named reference potentials used by the validation suites."""
    r = np.linspace(0.0, 3.0, 31)
    return {
        "barrier": SquareBarrier(4.0, 1.0),
        "hard_sphere": SquareBarrier(1e8, 1.0),
        "well_shallow": SquareWell(5.0, 1.0),
        "well_deep": SquareWell(30.0, 1.0),
        "power_tail_5": PowerTail(1.0, 1.0, 5.0),
        "power_tail_6": PowerTail(1.0, 1.0, 6.0),
        "exponential": ExponentialTail(1.0, 1.0),
        "tabulated": Tabulated(tuple(r), tuple(2.0 * np.exp(-r * r) * (r < 3.0)), None),
    }


def _positive(name, value):
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value}")


def free() -> SquareBarrier:
    """The zero potential."""
    return SquareBarrier(0.0, 1.0)


def evaluate(spec: PotentialSpec, r):
    """V(r) for scalar or array ``r >= 0``."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise DomainError("potential evaluated at negative radius")
    out = spec._eval(arr)
    return float(out) if np.ndim(out) == 0 else out


def sign_constant_beyond(spec: PotentialSpec) -> float:
    """A radius beyond which V keeps one sign (zero counts as either)."""
    if isinstance(spec, (SquareBarrier, SquareWell, PowerTail, ExponentialTail)):
        return 0.0
    if isinstance(spec, TruncatedAt):
        return min(sign_constant_beyond(spec.inner), spec.cutoff_radius)
    vals = np.asarray(spec.values)
    signs = np.sign(vals)
    last = 0.0
    for i in range(1, len(vals)):
        if signs[i] * signs[i - 1] < 0:
            last = spec.nodes[i]
    return last


def is_nonnegative(spec: PotentialSpec) -> bool:
    if isinstance(spec, SquareBarrier):
        return True
    if isinstance(spec, SquareWell):
        return False
    if isinstance(spec, (PowerTail, ExponentialTail)):
        return spec.amplitude >= 0.0
    if isinstance(spec, TruncatedAt):
        return is_nonnegative(spec.inner)
    return min(spec.values) >= 0.0


def min_value(spec: PotentialSpec) -> float:
    """Infimum of V over ``[0, inf)`` (0 when V >= 0 decays to zero)."""
    if isinstance(spec, SquareBarrier):
        return 0.0
    if isinstance(spec, SquareWell):
        return -spec.depth
    if isinstance(spec, PowerTail):
        return min(0.0, spec.amplitude * spec.core ** (-spec.s))
    if isinstance(spec, ExponentialTail):
        return min(0.0, spec.amplitude)
    if isinstance(spec, TruncatedAt):
        return min_value(spec.inner)
    return min(0.0, min(spec.values))


def integrability_class(spec: PotentialSpec, p: int) -> bool:
    """Whether ``r**p V(r)`` is in L1(0, inf), decided from tail metadata."""
    if p not in INTEGRABILITY_POWERS:
        raise DomainError(f"integrability power must be one of {INTEGRABILITY_POWERS}, got {p}")
    if isinstance(spec, PowerTail):
        return spec.amplitude == 0.0 or spec.s > p + 1
    if isinstance(spec, (SquareBarrier, SquareWell, ExponentialTail, TruncatedAt)):
        return True
    if spec.tail_exponent is None:
        if spec.values[-1] == 0.0:
            return True
        raise IndeterminateError(
            "tabulated potential ends at a nonzero value without tail metadata; "
            "use a truncation scan instead"
        )
    return spec.values[-1] == 0.0 or spec.tail_exponent > p + 1


def predict_finiteness(spec: PotentialSpec, ell: int) -> dict:
    """Analytic finiteness of the scattering length and effective range."""
    if ell < 0:
        raise DomainError("ell must be non-negative")
    return {
        "a_finite": _integrable_any(spec, 2 * ell + 2),
        "r_finite": _integrable_any(spec, 2 * ell + 4),
    }


def _integrable_any(spec, p):
    # predict_finiteness may ask for powers above 6 when ell >= 2
    if p in INTEGRABILITY_POWERS:
        return integrability_class(spec, p)
    if isinstance(spec, PowerTail):
        return spec.amplitude == 0.0 or spec.s > p + 1
    if isinstance(spec, Tabulated):
        integrability_class(spec, 1)  # raises when indeterminate
        return spec.values[-1] == 0.0 or spec.tail_exponent is None or spec.tail_exponent > p + 1
    return True


def decay_exponent(spec: PotentialSpec) -> Optional[float]:
    """Power-law decay exponent of the tail, ``inf`` for faster-than-power."""
    if isinstance(spec, PowerTail):
        return spec.s if spec.amplitude != 0.0 else math.inf
    if isinstance(spec, Tabulated):
        if spec.support is not None:
            return math.inf
        return spec.tail_exponent
    return math.inf


def tail_moment(spec: PotentialSpec, p: float, R: float, absolute: bool = False) -> float:
    """``int_R^inf t**p V(t) dt`` (or of ``|V|``), by adaptive quadrature."""
    if R < 0.0:
        raise DomainError("tail start must be non-negative")
    upper = spec.support
    if upper is not None and R >= upper:
        return 0.0

    closed = _closed_form_moment(spec, p, R)
    if closed is not None:
        return abs(closed) if absolute else closed

    def f(t):
        v = spec._eval(np.asarray(t, dtype=float))
        return float(t ** p * (abs(v) if absolute else v))

    pts = [b for b in spec.breakpoints() if b > R and (upper is None or b < upper)]
    total = 0.0
    edges = [R] + pts
    if upper is not None:
        edges.append(upper)
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0]
        return total
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    total += integrate.quad(f, edges[-1], np.inf, epsabs=0.0, epsrel=1e-12, limit=400)[0]
    return total


def _closed_form_moment(spec, p, R):
    """Exact tail moment for power tails and exponential tails (None otherwise)."""
    if isinstance(spec, PowerTail):
        c, s = spec.core, spec.s
        if s <= p + 1:
            return math.copysign(math.inf, spec.amplitude) if spec.amplitude else 0.0
        if float(p).is_integer() and p >= 0:
            n = int(p)
            u = c + R
            total = sum(math.comb(n, j) * (-c) ** (n - j) * u ** (j - s + 1) / (s - j - 1)
                        for j in range(n + 1))
            return spec.amplitude * total
        # int_T^inf t^p (c+t)^-s dt = T^{p+1-s}/(s-p-1) 2F1(s, s-p-1; s-p; -c/T), |c/T| <= 1/2
        T = max(R, 2.0 * c)
        total = T ** (p + 1 - s) / (s - p - 1) * float(special.hyp2f1(s, s - p - 1, s - p, -c / T))
        if T > R:
            if p < 0 and R == 0.0:
                return math.copysign(math.inf, spec.amplitude) if p <= -1 else None
            total += integrate.quad(lambda t: t ** p * (c + t) ** -s, R, T, epsabs=0.0, epsrel=1e-13)[0]
        return spec.amplitude * total
    if isinstance(spec, ExponentialTail) and p > -1.0:
        b = spec.rate
        return spec.amplitude * math.gamma(p + 1.0) * float(special.gammaincc(p + 1.0, b * R)) / b ** (p + 1.0)
    return None


def required_radius(spec: PotentialSpec, weight_power: float = 1.0, tol: float = 1e-10,
                    start: Optional[float] = None, limit: float = 1e30) -> float:
    """Smallest doubling radius R with ``int_R^inf r**p |V| dr < tol``."""
    if spec.support is not None:
        return spec.support
    R = start if start is not None else max(spec.range_scale(), sign_constant_beyond(spec), 1.0)
    while tail_moment(spec, weight_power, R, absolute=True) >= tol:
        R *= 2.0
        if R > limit:
            raise DomainError(f"tail too slow: no radius below {limit:g} meets tolerance {tol:g}")
    return R


# ------------------------------------------------------------- serialisation

_TAGS = {
    "square_barrier": SquareBarrier,
    "square_well": SquareWell,
    "power_tail": PowerTail,
    "exponential_tail": ExponentialTail,
    "tabulated": Tabulated,
    "truncated": TruncatedAt,
}


def to_dict(spec: PotentialSpec) -> dict:
    if isinstance(spec, SquareBarrier):
        return {"type": "square_barrier", "height": spec.height, "radius": spec.radius}
    if isinstance(spec, SquareWell):
        return {"type": "square_well", "depth": spec.depth, "radius": spec.radius}
    if isinstance(spec, PowerTail):
        return {"type": "power_tail", "amplitude": spec.amplitude, "core": spec.core, "s": spec.s}
    if isinstance(spec, ExponentialTail):
        return {"type": "exponential_tail", "amplitude": spec.amplitude, "rate": spec.rate}
    if isinstance(spec, Tabulated):
        return {"type": "tabulated", "nodes": list(spec.nodes), "values": list(spec.values),
                "tail_exponent": spec.tail_exponent}
    return {"type": "truncated", "inner": to_dict(spec.inner), "cutoff_radius": spec.cutoff_radius}


def from_dict(data: Any, where: str = "potential") -> PotentialSpec:
    """Build a spec from a tagged record such as ``{type: power_tail, s: 3.5, ...}``."""
    if not isinstance(data, dict):
        raise ConfigError(where, "expected a mapping with a 'type' key")
    kind = data.get("type")
    if kind not in _TAGS:
        raise ConfigError(f"{where}.type", f"unknown potential type {kind!r}; expected one of {sorted(_TAGS)}")
    fields = {k: v for k, v in data.items() if k != "type"}
    try:
        if kind == "truncated":
            return TruncatedAt(from_dict(fields.get("inner"), f"{where}.inner"), float(fields["cutoff_radius"]))
        if kind == "tabulated":
            return Tabulated(tuple(fields["nodes"]), tuple(fields["values"]), fields.get("tail_exponent"))
        required = {
            "square_barrier": ("height", "radius"),
            "square_well": ("depth", "radius"),
            "power_tail": ("amplitude", "core", "s"),
            "exponential_tail": ("amplitude", "rate"),
        }[kind]
        unknown = set(fields) - set(required)
        if unknown:
            raise ConfigError(f"{where}.{sorted(unknown)[0]}", "unexpected field")
        return _TAGS[kind](*(float(fields[name]) for name in required))
    except KeyError as exc:
        raise ConfigError(f"{where}.{exc.args[0]}", "missing field") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise ConfigError(where, str(exc)) from None
        raise ConfigError(where, f"invalid value ({exc})") from None
