"""Phase shifts and low-energy scattering parameters.

Conventions: ``phi ~ A (u_l(kr) cos d + v_l(kr) sin d)`` outside the
potential, so a repulsive potential has ``d < 0`` and the s-wave scattering
length satisfies ``d ~ -k a``.  The effective-range expansion is
``k^{2l+1} cot d = -1/a + r k^2 / 2 + ...``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import numpy as np

from ._accel import thread_count
from .errors import (ConsistencyError, DomainError, NumericError, PreconditionError,
                     ResonanceError)
from .grid import RadialGrid, make_grid
from .potential import (PotentialSpec, is_nonnegative, predict_finiteness, required_radius,
                        tail_moment)
from .radial import (bound_states, growing_coefficients, solve_regular, solve_zero_bounded,
                     _check_ell)
from .special import double_factorial, riccati_bessel

METHOD_TAGS = {"integral": "integral_formula", "matching": "asymptotic_matching"}


class ConsistencyWarning(UserWarning):
    """Two routes to the same quantity differ by more than the soft tolerance."""


class ZeroScatteringLengthError(NumericError, ZeroDivisionError):
    pass


@dataclass(frozen=True)
class Divergent:
    """Marker for an infinite observable, with the truncation scan as evidence."""

    quantity: str
    scan: Any = None
    reason: str = ""

    @property
    def growth_exponent(self):
        return None if self.scan is None else self.scan.growth_exponent

    def __str__(self):
        return "divergent"


Value = Union[float, Divergent]


def is_divergent(x) -> bool:
    return isinstance(x, Divergent)


@dataclass(frozen=True)
class PhaseShiftCurve:
    ell: int
    k_values: np.ndarray
    delta: np.ndarray
    method: str

    def __post_init__(self):
        k = np.asarray(self.k_values, dtype=float)
        if k.ndim != 1 or np.any(k <= 0.0) or np.any(np.diff(k) <= 0.0):
            raise DomainError("k_values must be positive and strictly ascending")
        object.__setattr__(self, "k_values", k)
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))

    def max_jump(self) -> float:
        return float(np.max(np.abs(np.diff(self.delta)))) if self.delta.size > 1 else 0.0


@dataclass(frozen=True)
class EffectiveRangeResult:
    ell: int
    a: Value
    b: Value
    r_eff: Value
    method: str
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LevinsonResult:
    n: int
    delta_at_kmin: float
    residual: float
    node_count: int
    k_min: float
    resonance_metric: float
    near_resonance: bool
    curve: Optional[PhaseShiftCurve] = None


# ----------------------------------------------------------------- helpers


def _require_k(k):
    if not (k > 0.0 and math.isfinite(k)):
        raise DomainError(f"k must be positive and finite, got {k}")


def _require_nonnegative(pot, what):
    if not is_nonnegative(pot):
        raise PreconditionError(f"{what} requires V(r) >= 0 everywhere; "
                                "use phase_shift_matching / low_k_expansion for attractive potentials")


def _cross_terms(ell, k, r, phi, dphi):
    """``N = u' phi - u phi'`` and ``D = v' phi - v phi'`` with r-derivatives."""
    rb = riccati_bessel(ell, k * np.asarray(r, dtype=float))
    N = k * rb.u_prime * phi - rb.u * dphi
    D = k * rb.v_prime * phi - rb.v * dphi
    return N, D


def _principal(delta):
    delta = math.fmod(delta, math.pi)
    if delta > math.pi / 2:
        delta -= math.pi
    elif delta <= -math.pi / 2:
        delta += math.pi
    return delta


def tail_phase(pot: PotentialSpec, k: float, ell: int, R: float, delta_R: float,
               tol: float = 1e-13) -> float:
    """First-order phase accumulated beyond ``R``.

    ``-(1/k) int_R^inf V(t) (u(kt) cos d_R + v(kt) sin d_R)^2 dt``; the
    oscillating part is integrated on a Gauss mesh up to a radius where the
    remaining ``int |V|`` is below ``tol * k`` and the rest uses the
    cycle average 1/2.
    """
    support = pot.support
    if support is not None and R >= support:
        return 0.0
    far = required_radius(pot, weight_power=0.0, tol=tol * k, start=max(R, 1.0))
    if support is not None:
        far = min(far, support)
    far = max(far, R)
    step = min(0.25 / k, 0.1 * max(R, 1e-3))
    n = int(min(max(math.ceil((far - R) / step), 1), 400_000))
    edges = np.linspace(R, R + n * step if support is None else far, n + 1)
    from .grid import GAUSS5_NODES, GAUSS5_WEIGHTS
    h = np.diff(edges)
    t = edges[:-1, None] + h[:, None] * GAUSS5_NODES[None, :]
    rb = riccati_bessel(ell, k * t)
    c, s = math.cos(delta_R), math.sin(delta_R)
    f = pot._eval(t) * (rb.u * c + rb.v * s) ** 2
    total = float(np.sum(h * (f @ GAUSS5_WEIGHTS)))
    end = edges[-1]
    if support is None or end < support:
        total += 0.5 * tail_moment(pot, 0.0, end)
    return -total / k


# ------------------------------------------------------------- phase shifts


def phase_shift_integral(pot: PotentialSpec, k: float, ell: int = 0,
                         grid: Optional[RadialGrid] = None) -> float:
    """``d_l(k) = -k int V phi^2 / [(u' phi - u phi')^2 + (v' phi - v phi')^2] dr``."""
    _require_k(k)
    ell = _check_ell(ell)
    _require_nonnegative(pot, "the integral phase-shift formula")
    if grid is None:
        grid = make_grid(pot, k_max=k)
    sol = solve_regular(pot, k, ell, grid)
    gp = grid.gauss_points
    N, D = _cross_terms(ell, k, gp, sol.dense_phi, sol.dense_phi_prime)
    V = grid.potential_samples(pot)["stage"]
    integrand = -k * V * sol.dense_phi ** 2 / (N * N + D * D)
    body = grid.integrate(integrand)
    return body + tail_phase(pot, k, ell, grid.nodes[-1], body)


def _matching_at(sol, index):
    r = sol.grid.nodes[index]
    N, D = _cross_terms(sol.ell, sol.k, r, sol.phi[index], sol.phi_prime[index])
    return float(N), float(D), float(r)


def phase_shift_matching(pot: PotentialSpec, k: float, ell: int = 0,
                         grid: Optional[RadialGrid] = None, max_shifts: int = 3) -> float:
    """Principal-branch phase shift from ``tan d = -(u' phi - u phi')/(v' phi - v phi')``."""
    _require_k(k)
    ell = _check_ell(ell)
    if grid is None:
        grid = make_grid(pot, k_max=k)
    if pot.support is not None and pot.support <= grid.nodes[-1] \
            and not np.any(grid.potential_samples(pot)["stage"]):
        return 0.0  # free motion: exact zero rather than rounding noise
    sol = solve_regular(pot, k, ell, grid)
    last = grid.size - 1
    stride = max(1, last // 64)
    for shift in range(max_shifts + 1):
        idx = last - shift * stride
        N, D, R = _matching_at(sol, idx)
        scale = abs(N) + abs(D)
        if scale > 0.0 and abs(D) > 1e-14 * scale:
            delta_R = _principal(math.atan2(-N, D))
            # phase accumulated between the shifted node and R_max is folded into the tail
            return delta_R + tail_phase(pot, k, ell, R, delta_R)
    raise NumericError("matching denominator vanished at every retry radius")


def _resolve_branches(delta):
    """Walk from the largest k downward, keeping neighbours within pi/2."""
    out = np.array(delta, dtype=float)
    for i in range(out.size - 2, -1, -1):
        out[i] += math.pi * round((out[i + 1] - out[i]) / math.pi)
    return out


def phase_shift_curve(pot: PotentialSpec, ell: int, k_values: Sequence[float],
                      method: str = "matching", grid: Optional[RadialGrid] = None,
                      workers: Optional[int] = None) -> PhaseShiftCurve:
    """Phase shifts over a momentum grid, computed concurrently, branch-resolved."""
    if method not in METHOD_TAGS:
        raise DomainError(f"method must be 'integral' or 'matching', got {method!r}")
    k = np.asarray(k_values, dtype=float)
    if k.ndim != 1 or k.size == 0 or np.any(k <= 0.0) or np.any(np.diff(k) <= 0.0):
        raise DomainError("k_values must be positive and strictly ascending")
    if method == "integral":
        _require_nonnegative(pot, "the integral phase-shift formula")
    if grid is None:
        grid = make_grid(pot, k_max=float(k[-1]))
    fn = phase_shift_integral if method == "integral" else phase_shift_matching
    n = workers if workers is not None else thread_count()
    if n > 1 and k.size > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            vals = list(ex.map(lambda kk: fn(pot, float(kk), ell, grid), k))
    else:
        vals = [fn(pot, float(kk), ell, grid) for kk in k]
    delta = np.array(vals)
    if method == "matching":
        delta = _resolve_branches(delta)
    return PhaseShiftCurve(ell, k, delta, METHOD_TAGS[method])


# ---------------------------------------------------------- zero energy


def _zero_energy_pieces(pot, grid):
    sol = solve_regular(pot, 0.0, 0, grid)
    V = grid.potential_samples(pot)["stage"]
    psi = sol.dense_phi / sol.dense_phi_prime
    R = grid.nodes[-1]
    psi_R = sol.phi[-1] / sol.phi_prime[-1]
    return sol, V, psi, R, psi_R


def _poly_tail(pot, coeffs, R):
    """``int_R^inf V(t) sum_j coeffs[j] t^j dt``."""
    if pot.support is not None and R >= pot.support:
        return 0.0
    return float(sum(c * tail_moment(pot, float(j), R) for j, c in enumerate(coeffs) if c != 0.0))


def scattering_length_forms(pot: PotentialSpec, grid: Optional[RadialGrid] = None) -> dict:
    """Both zero-energy routes to ``a``: the ``V phi^2/phi'^2`` integral and ``R - phi/phi'``."""
    if grid is None:
        grid = make_grid(pot)
    sol, V, psi, R, psi_R = _zero_energy_pieces(pot, grid)
    a_R = R - psi_R
    body = grid.integrate(V * psi * psi)
    P = np.polynomial.Polynomial
    tail = _poly_tail(pot, (P([-a_R, 1.0]) ** 2).coef, R)
    return {"integral": body + tail, "limit": a_R + tail, "tail": tail, "R": R}


def scattering_length(pot: PotentialSpec, grid: Optional[RadialGrid] = None,
                      with_scan: bool = True) -> Value:
    """s-wave scattering length from the ``V phi0^2 / phi0'^2`` integral.

    The limit form ``R - phi0/phi0'`` is computed alongside: a relative
    difference above 1e-6 emits :class:`ConsistencyWarning`, above 1e-3
    raises :class:`ConsistencyError`.
    """
    _require_nonnegative(pot, "the direct scattering-length integral")
    if not predict_finiteness(pot, 0)["a_finite"]:
        scan = None
        if with_scan:
            from .scans import truncation_scan
            scan = truncation_scan(pot, "a", 0)
        return Divergent("a", scan, "int r^2 |V| diverges")
    forms = scattering_length_forms(pot, grid)
    a, a_lim = forms["integral"], forms["limit"]
    diff = abs(a - a_lim)
    size = max(abs(a), abs(a_lim), 1e-12 * pot.range_scale())
    if diff > 1e-3 * size:
        raise ConsistencyError(f"scattering-length routes disagree: {a!r} vs {a_lim!r}")
    if diff > 1e-6 * size:
        warnings.warn(f"scattering-length routes differ by {diff / size:.2e} relative",
                      ConsistencyWarning, stacklevel=2)
    return a


def b_coefficient(pot: PotentialSpec, grid: Optional[RadialGrid] = None,
                  with_scan: bool = True) -> Value:
    """Cubic coefficient of ``d_0(k) = n pi - k a + b k^3``.

    ``b = -int V (2 psi J - psi^4)`` with ``psi = phi0/phi0'`` and
    ``J = int_0^r phi0^2 / phi0'^2``, plus a first-order tail.  The sign
    follows from expanding the integral phase formula to order ``k^3``
    (weak coupling gives ``b = +int V r^4 / 3``).
    """
    _require_nonnegative(pot, "the direct b integral")
    finite = predict_finiteness(pot, 0)
    if not finite["a_finite"]:
        raise PreconditionError("b is undefined when the scattering length is infinite")
    if not finite["r_finite"]:
        scan = None
        if with_scan:
            from .scans import truncation_scan
            scan = truncation_scan(pot, "r_eff", 0)
        return Divergent("b", scan, "int r^4 |V| diverges")
    if grid is None:
        grid = make_grid(pot)
    sol, V, psi, R, psi_R = _zero_energy_pieces(pot, grid)
    I_nodes, I_dense = grid.cumulative_scaled(sol.dense_phi ** 2, 2.0 * sol.dense_log_scale,
                                              2.0 * sol.log_scale)
    J = I_dense * np.exp(2.0 * (sol.log_scale[:-1, None] - sol.dense_log_scale)) / sol.dense_phi_prime ** 2
    body = grid.integrate(V * (2.0 * psi * J - psi ** 4))
    J_R = I_nodes[-1] / sol.phi_prime[-1] ** 2
    a_R = R - psi_R
    P = np.polynomial.Polynomial
    lin = P([-a_R, 1.0])
    poly = -(lin ** 4) / 3.0 + 2.0 * (J_R - psi_R ** 3 / 3.0) * lin
    return -(body + _poly_tail(pot, poly.coef, R))


def effective_range(a: Value, b: Value) -> Value:
    """``r = 2a/3 - 2b/a^2``."""
    if is_divergent(a):
        raise PreconditionError("effective range is undefined when the scattering length is infinite")
    if is_divergent(b):
        return Divergent("r_eff", b.scan, b.reason)
    if a == 0.0:
        raise ZeroScatteringLengthError("a = 0: effective range undefined; fit the k^2 slope instead")
    return 2.0 * a / 3.0 - 2.0 * b / (a * a)


def zero_energy_expansion(pot: PotentialSpec, ell: int, grid: Optional[RadialGrid] = None) -> dict:
    """``a_l``, ``r_l`` and the ``k^{2l+3}`` coefficient of ``tan d_l`` from zero-energy integrals.

    Outside the potential ``phi = c_f f + c_g g`` with free solutions
    ``f ~ r^{l+1}`` and ``g ~ r^{-l}``.  Because ``(W[phi, g])' = V phi g``,
    both coefficients are integrals over the potential,

        c_f = [(2l+1)/(2l+1)!! + int V phi g] / (2l+1),
        c_g = -int V f phi / (2l+1),

    expanded to order ``k^2`` with ``phi = phi0 + k^2 phi1`` and
    ``phi1 = [chi0 int phi0^2 - phi0 int phi0 chi0] / W``.  The integrals run
    to ``R_max``; the neglected remainder ``int_R^inf r^{2l+4} |V|`` is
    reported.
    """
    ell = _check_ell(ell)
    if grid is None:
        grid = make_grid(pot)
    phi0 = solve_regular(pot, 0.0, ell, grid)
    chi0 = solve_zero_bounded(pot, ell, grid, check_tail=False)
    if phi0.rescaled or chi0.rescaled:
        raise PreconditionError("zero-energy expansion needs solutions without log rescaling")
    p, c = phi0.dense_phi, chi0.dense_phi
    W = float(np.median(phi0.phi_prime * chi0.phi - phi0.phi * chi0.phi_prime))
    _, I1 = grid.cumulative(p * p)
    _, I2 = grid.cumulative(p * c)
    p1 = (c * I1 - p * I2) / W
    r = grid.gauss_points
    V = grid.potential_samples(pot)["stage"]
    L = ell
    d2 = 2 * L + 1
    f0 = r ** (L + 1)
    f1 = -r ** (L + 3) / (2 * (2 * L + 3))
    g0 = r ** -L
    g1 = r ** (2 - L) / (2 * (2 * L - 1))
    nf = double_factorial(2 * L + 1)
    cf0 = (d2 / nf + grid.integrate(V * p * g0)) / d2
    cf1 = grid.integrate(V * (p1 * g0 + p * g1)) / d2
    cg0 = -grid.integrate(V * f0 * p) / d2
    cg1 = -grid.integrate(V * (f1 * p + f0 * p1)) / d2
    N = nf * double_factorial(2 * L - 1)
    if cf0 == 0.0:
        raise ResonanceError("zero-energy resonance: the regular solution has no growing component")
    a = -cg0 / (N * cf0)
    r_eff = 2.0 * N * (cf1 * cg0 - cf0 * cg1) / (cg0 * cg0) if cg0 != 0.0 else math.inf
    # tan d = -a k^{2l+1} + c2 k^{2l+3}
    c2 = (cg1 * cf0 - cg0 * cf1) / (N * cf0 * cf0)
    b = c2 + (a ** 3 / 3.0 if L == 0 else 0.0)
    R = grid.nodes[-1]
    remainder = tail_moment(pot, 2.0 * L + 4.0, R, absolute=True)
    return {"a": a, "r_eff": r_eff, "b": b, "tan_k3_coefficient": c2, "R": R,
            "slope_at_infinity": cf0 * nf, "tail_remainder": remainder}


# ------------------------------------------------------------ low-k fit


def default_k_grid(pot: PotentialSpec, points: int = 40) -> np.ndarray:
    scale = pot.range_scale()
    return np.geomspace(3e-4, 0.1, points) / scale


def tail_terms(pot: PotentialSpec, ell: int) -> list:
    """Non-analytic low-k terms induced by a power-law tail ``r^-s``.

    Returns ``(exponent, with_log)`` pairs: ``k^m`` with ``m = s - 3 - 2l``
    (``k^m ln k`` when ``m`` is even) and ``k^{m+1} ln k`` when ``m + 1`` is
    an even integer up to 4.  Empty for compact or exponential tails.
    """
    from .potential import decay_exponent
    s = decay_exponent(pot)
    if s is None or not math.isfinite(s):
        return []
    m = s - 3.0 - 2.0 * ell
    out = []
    if 2.0 < m < 4.0 or (m == 4.0):
        out.append((m, float(m).is_integer() and int(m) % 2 == 0))
        nxt = m + 1.0
        if nxt.is_integer() and int(nxt) % 2 == 0 and nxt <= 4.0:
            out.append((nxt, True))
    return out


def _column(k, exponent, with_log):
    col = k ** exponent
    return col * np.log(k) if with_log else col


def fit_effective_range(k_values, delta, ell: int = 0, window_eps: float = 1e-3,
                        min_points: int = 4, extra_terms=()) -> dict:
    """Weighted fit of ``k^{2l+1} cot d`` against ``{1, k^2}`` on a bias-controlled window.

    A pilot fit with one further term (``k^4``, or ``k^6`` when ``k^4``
    already appears) sets the window so that term stays below
    ``window_eps`` times the ``k^2`` term.  ``extra_terms`` lists
    ``(exponent, with_log)`` nuisance columns fitted alongside (see
    :func:`tail_terms`).
    """
    k = np.asarray(k_values, dtype=float)
    d = np.asarray(delta, dtype=float)
    s = np.sin(d)
    keep = np.abs(s) > 1e-9
    extra = list(extra_terms)
    need = max(min_points, 2 + len(extra) + 1)
    if np.count_nonzero(keep) < need:
        raise NumericError(f"fewer than {need} momenta with cot(delta) finite")
    k, d, s = k[keep], d[keep], s[keep]
    p = 2 * ell + 1
    y = k ** p * np.cos(d) / s
    sigma = k ** p * (1e-13 + 1e-11 * np.abs(d)) / s ** 2
    wts = 1.0 / sigma

    def design(kk):
        cols = [np.ones_like(kk), kk ** 2] + [_column(kk, e, lg) for e, lg in extra]
        return np.stack(cols, axis=1)

    next_power = 6.0 if any(e == 4.0 and not lg for e, lg in extra) else 4.0
    window = np.inf
    pilot = None
    if k.size >= len(extra) + 3:
        Ap = np.concatenate((design(k), (k ** next_power)[:, None]), axis=1)
        pilot, *_ = np.linalg.lstsq(Ap * wts[:, None], y * wts, rcond=None)
        c_next = pilot[-1]
        if c_next != 0.0 and pilot[1] != 0.0:
            window = (window_eps * abs(pilot[1] / c_next)) ** (1.0 / (next_power - 2.0))
    sel = k <= window
    if np.count_nonzero(sel) < need:
        sel = np.zeros_like(sel)
        sel[:need] = True
    A = design(k[sel])
    Aw = A * wts[sel, None]
    coef, *_ = np.linalg.lstsq(Aw, y[sel] * wts[sel], rcond=None)
    resid = y[sel] - A @ coef
    kw = k[sel][-1]
    contamination = (abs(pilot[-1]) * kw ** (next_power - 2.0) / abs(pilot[1])
                     if pilot is not None and pilot[1] != 0.0 else float("nan"))
    intercept, slope = coef[0], coef[1]
    return {
        "intercept": float(intercept),
        "slope": float(slope),
        "a": float(-1.0 / intercept) if intercept != 0.0 else math.inf,
        "r_eff": float(2.0 * slope),
        "k_window": float(kw),
        "points_used": int(np.count_nonzero(sel)),
        "max_residual": float(np.max(np.abs(resid))),
        "condition_number": float(np.linalg.cond(Aw)),
        "k4_contamination": float(contamination),
        "tail_terms": [[float(e), bool(lg)] for e, lg in extra],
        "tail_coefficients": [float(c) for c in coef[2:]],
    }


def low_k_expansion(pot: PotentialSpec, ell: int = 0, k_grid=None,
                    grid: Optional[RadialGrid] = None, method: Optional[str] = None,
                    window_eps: float = 1e-3) -> EffectiveRangeResult:
    """Effective-range parameters from a fit of computed phase shifts."""
    ell = _check_ell(ell)
    k = default_k_grid(pot) if k_grid is None else np.asarray(k_grid, dtype=float)
    if method is None:
        method = "integral" if is_nonnegative(pot) else "matching"
    curve = phase_shift_curve(pot, ell, k, method=method, grid=grid)
    n = 0
    if not is_nonnegative(pot):
        n = len(bound_states(pot, ell))
    delta = curve.delta - n * math.pi
    fit = fit_effective_range(curve.k_values, delta, ell, window_eps=window_eps,
                              extra_terms=tail_terms(pot, ell))
    a, r = fit["a"], fit["r_eff"]
    b = (a ** 3 / 3.0 - a * a * r / 2.0) if ell == 0 else -a * a * r / 2.0
    diag = dict(fit)
    diag.update({"bound_states": n, "phase_method": curve.method})
    return EffectiveRangeResult(ell, a, b, r, "low_k_fit", diag)


def direct_effective_range(pot: PotentialSpec, ell: int = 0,
                           grid: Optional[RadialGrid] = None) -> EffectiveRangeResult:
    """Zero-energy route: the ``a`` and ``b`` integrals for l = 0 with V >= 0, the ``phi1`` matching otherwise."""
    ell = _check_ell(ell)
    if ell == 0 and is_nonnegative(pot):
        a = scattering_length(pot, grid)
        if is_divergent(a):
            return EffectiveRangeResult(0, a, Divergent("b", a.scan), Divergent("r_eff", a.scan),
                                        "direct_integral", {"route": "integral"})
        b = b_coefficient(pot, grid)
        diag = {"route": "integral"}
        if a == 0.0:
            r: Value = float("nan")
            diag["r_eff_note"] = "a=0: undefined"
        else:
            r = effective_range(a, b)
        return EffectiveRangeResult(0, a, b, r, "direct_integral", diag)
    pred = predict_finiteness(pot, ell)
    if not pred["a_finite"]:
        from .scans import truncation_scan
        scan = truncation_scan(pot, "a", ell)
        return EffectiveRangeResult(ell, Divergent("a", scan), Divergent("b", scan),
                                    Divergent("r_eff", scan), "direct_integral", {"route": "phi1"})
    res = zero_energy_expansion(pot, ell, grid)
    r: Value = res["r_eff"]
    b: Value = res["b"]
    if not pred["r_finite"]:
        from .scans import truncation_scan
        scan = truncation_scan(pot, "r_eff", ell)
        r = Divergent("r_eff", scan)
        b = Divergent("b", scan)
    return EffectiveRangeResult(ell, res["a"], b, r, "direct_integral",
                                {"route": "phi1", "tail_remainder": res["tail_remainder"]})


# ------------------------------------------------------------ bound states


def resonance_metric(pot: PotentialSpec, ell: int, grid: Optional[RadialGrid] = None) -> float:
    """Weight of the growing ``r^{l+1}`` part of the zero-energy solution at ``R_max``.

    Near 0 means a zero-energy resonance (l = 0) or bound state (l >= 1).
    """
    if grid is None:
        grid = make_grid(pot)
    sol = solve_regular(pot, 0.0, ell, grid)
    c, d = growing_coefficients(sol, pot)
    R = grid.nodes[-1]
    grow = abs(c) * R ** (ell + 1)
    return grow / (grow + abs(d) * R ** -ell)


def levinson(pot: PotentialSpec, ell: int = 0, grid: Optional[RadialGrid] = None,
             k_min: Optional[float] = None, points: int = 240,
             resonance_tol: float = 1e-8) -> LevinsonResult:
    """Compare ``d(k_min)`` with ``n pi`` where n is the number of bound states."""
    ell = _check_ell(ell)
    scale = pot.range_scale()
    if k_min is None:
        k_min = 1e-3 / scale
    _require_k(k_min)
    k_max = 50.0 / scale
    metric = resonance_metric(pot, ell)
    if metric < resonance_tol:
        raise ResonanceError(f"zero-energy resonance detected (growing weight {metric:.2e})")
    spectrum = bound_states(pot, ell)
    n = len(spectrum)
    ks = np.geomspace(k_min, k_max, points)
    curve = phase_shift_curve(pot, ell, ks, method="matching", grid=grid)
    d0 = float(curve.delta[0])
    return LevinsonResult(n, d0, abs(d0 - n * math.pi), spectrum.node_count, float(k_min),
                          metric, metric < 1e-3, curve)


def subtracted_phase(curve: PhaseShiftCurve, gammas: Sequence[float]) -> PhaseShiftCurve:
    """``d(k) - 2 sum_j arctan(gamma_j / k)``."""
    g = np.asarray(list(gammas), dtype=float)
    if np.any(g <= 0.0):
        raise DomainError("binding momenta must be positive")
    shift = 2.0 * np.sum(np.arctan(g[:, None] / curve.k_values[None, :]), axis=0) if g.size else 0.0
    return PhaseShiftCurve(curve.ell, curve.k_values, curve.delta - shift, curve.method)


def barred_coefficients(a: float, b: float, gammas: Sequence[float]) -> dict:
    """``a - 2 sum 1/gamma_j`` and ``b - 2 sum 1/gamma_j^3``."""
    g = np.asarray(list(gammas), dtype=float)
    if np.any(~(g > 0.0)):
        raise DomainError("binding momenta must be positive (gamma -> 0 makes a infinite)")
    if is_divergent(a) or is_divergent(b) or not (math.isfinite(a) and math.isfinite(b)):
        raise PreconditionError("barred coefficients need finite a and b")
    return {"a_bar": float(a - 2.0 * np.sum(1.0 / g)), "b_bar": float(b - 2.0 * np.sum(g ** -3.0))}
