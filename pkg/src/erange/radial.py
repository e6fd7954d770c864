"""Radial Schrödinger equation at real and zero energy.

All solvers advance ``y'' = (V + l(l+1)/r^2 - E) y`` with the Magnus kernels
and also report the solution at the three Gauss points of every interval
(``dense_*``), which is where every downstream integral is evaluated.

Large solutions are kept as mantissa and natural-log scale: the true value
is ``phi * exp(log_scale)``.  Ratios such as ``phi / phi'`` never need the
scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import ConsistencyError, DomainError, IterationError, PreconditionError
from .grid import GAUSS5_NODES, GAUSS5_PARTIAL, GAUSS5_WEIGHTS, RadialGrid, make_grid
from .potential import PotentialSpec, min_value, tail_moment
from .special import decaying_riccati, double_factorial

NORMALIZATIONS = ("regular_origin", "bounded_infinity", "growing_infinity")
TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RadialSolution:
    """Sampled solution with its derivative.

    ``phi``/``phi_prime`` live on ``grid.nodes``; ``dense_*`` arrays have
    shape ``(n_intervals, 3)`` and live on ``grid.gauss_points``.
    """

    grid: RadialGrid
    k: float
    ell: int
    phi: np.ndarray
    phi_prime: np.ndarray
    normalization: str
    log_scale: np.ndarray
    dense_phi: np.ndarray
    dense_phi_prime: np.ndarray
    dense_log_scale: np.ndarray
    energy: Optional[float] = None

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def rescaled(self) -> bool:
        return bool(np.any(self.log_scale != 0.0))

    def values(self):
        """True (unscaled) ``(phi, phi')`` at the nodes; may overflow to inf."""
        with np.errstate(over="ignore"):
            f = np.exp(self.log_scale)
        return self.phi * f, self.phi_prime * f

    def dense_values(self):
        with np.errstate(over="ignore"):
            f = np.exp(self.dense_log_scale)
        return self.dense_phi * f, self.dense_phi_prime * f

    def scaled_by(self, log_factor: float, normalization: str) -> "RadialSolution":
        """Multiply by ``exp(log_factor)`` without touching the mantissas."""
        return replace(self, log_scale=self.log_scale + log_factor,
                       dense_log_scale=self.dense_log_scale + log_factor,
                       normalization=normalization)


@dataclass(frozen=True)
class WronskianResult:
    value: float
    max_deviation: float
    nodewise: np.ndarray


@dataclass(frozen=True)
class BoundStateSpectrum:
    gammas: tuple
    node_count: int
    matching_radius: float = float("nan")

    def __len__(self):
        return len(self.gammas)


# ------------------------------------------------------------------ helpers


def _check_ell(ell):
    if int(ell) != ell or ell < 0:
        raise DomainError(f"ell must be a non-negative integer, got {ell}")
    return int(ell)


def _stage_u(pot, grid, ell, energy):
    samples = grid.potential_samples(pot)
    cent = ell * (ell + 1)
    U = samples["stage"] + cent / grid.gauss_points ** 2 - energy
    Us = samples["sub"] + cent / grid.sub_gauss_points ** 2 - energy
    return U, Us


def _propagators(pot, grid, ell, energy):
    U, _ = _stage_u(pot, grid, ell, energy)
    return kernels.magnus_propagators(np.ascontiguousarray(grid.h), np.ascontiguousarray(U))


def _dense(pot, grid, ell, energy, y, L):
    """Solution at the Gauss points, propagated from each interval's left node."""
    _, Us = _stage_u(pot, grid, ell, energy)
    sub_h = (grid.h[:, None] * kernels.GAUSS_NODES[None, :]).ravel()
    E, q = kernels.magnus_propagators(np.ascontiguousarray(sub_h), np.ascontiguousarray(Us.reshape(-1, 3)))
    n = grid.size - 1
    E = E.reshape(n, 3, 2, 2)
    q = q.reshape(n, 3)
    y_left = np.broadcast_to(y[:-1, None, :], (n, 3, 2))
    L_left = np.broadcast_to(L[:-1, None], (n, 3))
    return kernels.apply_propagators(E, q, y_left, L_left)


def _solve(pot, grid, ell, energy, y0, backward, normalization, k):
    E, q = _propagators(pot, grid, ell, energy)
    y, L = kernels.sweep(E, q, np.asarray(y0, dtype=float), backward)
    if not np.all(np.isfinite(y)):
        raise PreconditionError("propagation produced non-finite values; refine the grid")
    yd, Ld = _dense(pot, grid, ell, energy, y, L)
    return RadialSolution(grid, float(k), ell, y[:, 0].copy(), y[:, 1].copy(), normalization,
                          L, yd[..., 0], yd[..., 1], Ld, energy=float(energy))


def regular_start(pot, ell, energy, r):
    """Two-term series ``r^{l+1}/(2l+1)!! (1 + c r^2)`` and its derivative."""
    v0 = float(pot._eval(np.array([r]))[0])
    c = (v0 - energy) / (4 * ell + 6)
    norm = double_factorial(2 * ell + 1)
    phi = r ** (ell + 1) / norm * (1.0 + c * r * r)
    dphi = r ** ell / norm * ((ell + 1) + (ell + 3) * c * r * r)
    return phi, dphi


# ---------------------------------------------------------------- solvers


def solve_regular(pot: PotentialSpec, k: float, ell: int, grid: Optional[RadialGrid] = None,
                  energy: Optional[float] = None) -> RadialSolution:
    """Regular solution with ``phi ~ r^{l+1}/(2l+1)!!`` at the origin.

    ``energy`` overrides ``k**2`` (negative energies are used by the
    bound-state search).
    """
    ell = _check_ell(ell)
    if k < 0.0:
        raise DomainError("k must be non-negative")
    if grid is None:
        grid = make_grid(pot, k_max=k)
    E = k * k if energy is None else float(energy)
    y0 = regular_start(pot, ell, E, grid.nodes[0])
    return _solve(pot, grid, ell, E, y0, False, "regular_origin", k)


def _tail_check(pot, R):
    rest = tail_moment(pot, 1.0, R, absolute=True)
    if rest >= TAIL_TOL:
        from .potential import required_radius
        need = required_radius(pot, weight_power=1.0, tol=TAIL_TOL)
        raise PreconditionError(
            f"R_max = {R:g} leaves int_R^inf r|V| = {rest:.3g} >= {TAIL_TOL:g}; use R_max >= {need:g}")


def born_tail(pot, ell, R):
    """First Born correction to the zero-energy solutions beyond ``R``.

    Returns ``(m1, m2) = (int_R^inf t V, int_R^inf t^{-2l} V)``.
    """
    return tail_moment(pot, 1.0, R), tail_moment(pot, -2.0 * ell, R)


def solve_zero_bounded(pot: PotentialSpec, ell: int, grid: Optional[RadialGrid] = None,
                       check_tail: bool = True) -> RadialSolution:
    """Zero-energy solution with ``r^l chi -> 1`` at infinity, integrated inward."""
    ell = _check_ell(ell)
    if grid is None:
        grid = make_grid(pot)
    R = grid.nodes[-1]
    if check_tail:
        _tail_check(pot, R)
    m1, m2 = born_tail(pot, ell, R)
    d = 2 * ell + 1
    chi = R ** -ell - (R ** (ell + 1) * m2 - R ** -ell * m1) / d
    dchi = -ell * R ** (-ell - 1) - ((ell + 1) * R ** ell * m2 + ell * R ** (-ell - 1) * m1) / d
    return _solve(pot, grid, ell, 0.0, (chi, dchi), True, "bounded_infinity", 0.0)


def growing_coefficients(sol: RadialSolution, pot: PotentialSpec, index: int = -1):
    """Coefficients ``(c, d)`` of ``c r^{l+1} + d r^{-l}`` continuing ``sol`` beyond a node.

    ``c`` includes the first Born correction from the tail beyond that node.
    Both are in units of ``exp(sol.log_scale[index])``.
    """
    if sol.k != 0.0:
        raise DomainError("growing coefficients are defined at zero energy")
    ell = sol.ell
    R = sol.grid.nodes[index]
    f, fp = sol.phi[index], sol.phi_prime[index]
    d2 = 2 * ell + 1
    c_R = (fp * R ** -ell + ell * f * R ** (-ell - 1)) / d2
    d_R = (f * (ell + 1) * R ** ell - fp * R ** (ell + 1)) / d2
    m1, m2 = born_tail(pot, ell, R)
    return c_R + (c_R * m1 + d_R * m2) / d2, d_R


def hille_normalize(sol: RadialSolution, pot: PotentialSpec) -> RadialSolution:
    """Rescale a zero-energy regular solution so that ``phi ~ r^{l+1}`` at infinity.

    With this normalisation the Wronskian with the bounded solution equals
    ``2l + 1``.
    """
    c, d = growing_coefficients(sol, pot)
    R = sol.grid.nodes[-1]
    size = abs(c) * R ** (sol.ell + 1) + abs(d) * R ** -sol.ell
    if not math.isfinite(c) or abs(c) * R ** (sol.ell + 1) < 1e-12 * size:
        raise PreconditionError("regular solution does not grow like r^{l+1}; "
                                "zero-energy bound state or resonance")
    out = sol.scaled_by(-math.log(abs(c)) - sol.log_scale[-1], "growing_infinity")
    if c < 0.0:
        out = replace(out, phi=-out.phi, phi_prime=-out.phi_prime,
                      dense_phi=-out.dense_phi, dense_phi_prime=-out.dense_phi_prime)
    return out


def solve_zero_regular_volterra(pot: PotentialSpec, ell: int, grid: Optional[RadialGrid] = None,
                                tol: float = 1e-12, max_iter: int = 200) -> RadialSolution:
    """Zero-energy regular solution by Picard iteration of the Volterra equation.

    ``phi = seed + int_0^r G(r, t) V(t) phi(t) dt`` with
    ``G = (r^{l+1} t^{-l} - r^{-l} t^{l+1}) / (2l+1)``, discretised on five
    Gauss points per interval.  Dense output is interpolated to the three
    propagation Gauss points.
    """
    ell = _check_ell(ell)
    if grid is None:
        grid = make_grid(pot)
    nodes = grid.nodes
    h = grid.h
    pts = grid.gauss5_points
    V = pot._eval(pts)
    norm = double_factorial(2 * ell + 1)
    d2 = 2 * ell + 1
    seed = pts ** (ell + 1) / norm
    up_w = pts ** -ell            # t^{-l}
    dn_w = pts ** (ell + 1)       # t^{l+1}

    def integrals(f):
        total = h * (f @ GAUSS5_WEIGHTS)
        at_nodes = np.concatenate(([0.0], np.cumsum(total)))
        return at_nodes, at_nodes[:-1, None] + h[:, None] * (f @ GAUSS5_PARTIAL.T)

    phi = seed
    for it in range(1, max_iter + 1):
        g = V * phi
        with np.errstate(over="ignore", invalid="ignore"):
            P_n, P = integrals(up_w * g)
            Q_n, Q = integrals(dn_w * g)
            new = seed + (pts ** (ell + 1) * P - pts ** -ell * Q) / d2
        if not np.all(np.isfinite(new)):
            raise IterationError("Volterra iteration overflowed; use the ODE path")
        change = np.max(np.abs(new - phi) / (np.abs(new) + seed))
        phi = new
        if change < tol:
            break
    else:
        raise IterationError(f"Volterra iteration did not converge in {max_iter} steps "
                             f"(last change {change:.3g})")
    phi_n = nodes ** (ell + 1) / norm + (nodes ** (ell + 1) * P_n - nodes ** -ell * Q_n) / d2
    dphi_n = ((ell + 1) * nodes ** ell / norm
              + ((ell + 1) * nodes ** ell * P_n + ell * nodes ** (-ell - 1) * Q_n) / d2)
    # values at the three propagation Gauss points via the same kernel
    g = V * phi
    gp = grid.gauss_points
    tau = kernels.GAUSS_NODES
    part = _partial_to(GAUSS5_NODES, tau)
    P3 = P_n[:-1, None] + h[:, None] * ((up_w * g) @ part.T)
    Q3 = Q_n[:-1, None] + h[:, None] * ((dn_w * g) @ part.T)
    dense = gp ** (ell + 1) / norm + (gp ** (ell + 1) * P3 - gp ** -ell * Q3) / d2
    ddense = ((ell + 1) * gp ** ell / norm
              + ((ell + 1) * gp ** ell * P3 + ell * gp ** (-ell - 1) * Q3) / d2)
    zeros = np.zeros_like(phi_n)
    return RadialSolution(grid, 0.0, ell, phi_n, dphi_n, "regular_origin", zeros,
                          dense, ddense, np.zeros_like(dense), energy=0.0)


def _partial_to(nodes01, targets):
    """M[j, m] = int_0^{targets_j} l_m(t) dt for the Lagrange basis on ``nodes01``."""
    m = len(nodes01)
    M = np.empty((len(targets), m))
    for j in range(m):
        basis = np.zeros(m)
        basis[j] = 1.0
        coef = np.polynomial.polynomial.polyfit(nodes01, basis, m - 1)
        anti = np.polynomial.polynomial.polyint(coef)
        M[:, j] = np.polynomial.polynomial.polyval(targets, anti)
    return M


# ------------------------------------------------------------- diagnostics


def _same_setup(a: RadialSolution, b: RadialSolution):
    if a.grid is not b.grid and not (a.grid.size == b.grid.size and np.array_equal(a.grid.nodes, b.grid.nodes)):
        raise DomainError("solutions live on different grids")
    if a.ell != b.ell or a.k != b.k:
        raise DomainError("solutions have different ell or k")


def wronskian(sol_a: RadialSolution, sol_b: RadialSolution) -> WronskianResult:
    """Node-wise ``a' b - a b'``; ``value`` is the grid median."""
    _same_setup(sol_a, sol_b)
    with np.errstate(over="ignore"):
        w = (sol_a.phi_prime * sol_b.phi - sol_a.phi * sol_b.phi_prime) * np.exp(sol_a.log_scale + sol_b.log_scale)
    med = float(np.median(w))
    return WronskianResult(med, float(np.max(np.abs(w - med))), w)


def count_nodes(sol: RadialSolution, pot: Optional[PotentialSpec] = None) -> int:
    """Strict sign changes of a zero-energy regular solution.

    Node and Gauss-point samples are merged, so each interval is checked at
    five points; the wave-limited grid keeps at most one root between
    neighbouring samples.  A final node beyond
    ``R_max`` is counted when the outer continuation
    ``c r^{l+1} + d r^{-l}`` still changes sign (exact for compact support).
    """
    _, f = sol.grid.sorted_samples(sol.phi, sol.dense_phi)
    s = np.sign(f)
    s = s[s != 0]
    count = int(np.count_nonzero(s[1:] != s[:-1]))
    if sol.k == 0.0 and sol.energy in (None, 0.0):
        ell = sol.ell
        R = sol.grid.nodes[-1]
        if pot is not None:
            c, d = growing_coefficients(sol, pot)
        else:
            f_, fp_ = sol.phi[-1], sol.phi_prime[-1]
            d2 = 2 * ell + 1
            c = (fp_ * R ** -ell + ell * f_ * R ** (-ell - 1)) / d2
            d = (f_ * (ell + 1) * R ** ell - fp_ * R ** (ell + 1)) / d2
        if c != 0.0 and -d / c > R ** (2 * ell + 1):
            count += 1
    return count


def identity_residual(pot: PotentialSpec, k: float, grid: RadialGrid, ell: int = 0) -> float:
    """Normalised residual of ``phi phi0' - phi0 phi' = k^2 int_0^r phi phi0``."""
    phi = solve_regular(pot, k, ell, grid)
    phi0 = solve_regular(pot, 0.0, ell, grid)
    if phi.rescaled or phi0.rescaled:
        raise PreconditionError("identity check needs unscaled solutions")
    prod = phi.dense_phi * phi0.dense_phi
    I, _ = grid.cumulative(prod)
    Iabs, _ = grid.cumulative(np.abs(prod))
    lhs = phi.phi * phi0.phi_prime - phi0.phi * phi.phi_prime
    # the k^2 r^{2l+3} start-up term from r_min is far below rounding
    res = np.abs(lhs - k * k * I) / (1.0 + k * k * Iabs)
    return float(np.max(res))


def asymptotic_slope(pot: PotentialSpec, grid: Optional[RadialGrid] = None) -> dict:
    """Large-r slope of the s-wave ``phi0`` by three routes.

    ``slope`` is ``phi0'(R_max)`` plus the first-order tail, ``one_plus_int_V_phi``
    is ``1 + int V phi0`` (the derivative of the Volterra equation), and
    ``int_rV_phi`` is ``int r V phi0``, which equals ``slope * a`` rather than
    the slope itself.
    """
    if grid is None:
        grid = make_grid(pot)
    sol = solve_regular(pot, 0.0, 0, grid)
    if sol.rescaled:
        raise PreconditionError("asymptotic slope needs an unscaled solution")
    V = grid.potential_samples(pot)["stage"]
    R = grid.nodes[-1]
    f, fp = sol.phi[-1], sol.phi_prime[-1]
    m0, m1 = tail_moment(pot, 0.0, R), tail_moment(pot, 1.0, R)
    # beyond R: phi0 ~ fp (t - R) + f
    tail_V_phi = fp * (m1 - R * m0) + f * m0
    tail_rV_phi = fp * (tail_moment(pot, 2.0, R) - R * m1) + f * m1
    return {
        "slope": fp + tail_V_phi,
        "one_plus_int_V_phi": 1.0 + grid.integrate(V * sol.dense_phi) + tail_V_phi,
        "int_rV_phi": grid.integrate(V * grid.gauss_points * sol.dense_phi) + tail_rV_phi,
        "R": R,
    }


# ------------------------------------------------------------- bound states


def _mismatch(pot, grid, ell, gamma, im):
    """Normalised Wronskian between the outward regular and inward decaying solutions."""
    energy = -gamma * gamma
    E, q = _propagators(pot, grid, ell, energy)
    y0 = np.asarray(regular_start(pot, ell, energy, grid.nodes[0]), dtype=float)
    out, _ = kernels.sweep(E[:im], q[:im], y0, False)
    R = grid.nodes[-1]
    w, wp, _ = decaying_riccati(ell, gamma * R)
    yin0 = np.array([float(w), gamma * float(wp)])
    inn, _ = kernels.sweep(E[im:], q[im:], yin0, True)
    a = out[-1]
    b = inn[0]
    scale = math.sqrt(gamma * gamma + max(-min_value(pot), 0.0)) or 1.0
    na = math.hypot(a[0], a[1] / scale)
    nb = math.hypot(b[0], b[1] / scale)
    return (a[1] * b[0] - a[0] * b[1]) / (scale * na * nb)


def bound_states(pot: PotentialSpec, ell: int, grid: Optional[RadialGrid] = None,
                 samples: int = 96) -> BoundStateSpectrum:
    """All binding momenta ``gamma_j`` (descending), checked against the node count."""
    ell = _check_ell(ell)
    vmin = min_value(pot)
    depth = max(-vmin, 0.0)
    if grid is None:
        grid = make_grid(pot, k_max=math.sqrt(depth))
    zero = solve_regular(pot, 0.0, ell, grid)
    n_nodes = count_nodes(zero, pot)
    if depth == 0.0:
        if n_nodes:
            raise ConsistencyError(f"{n_nodes} nodes found for a potential without attractive part")
        return BoundStateSpectrum((), 0)
    support = pot.support
    r_match = support if support is not None else pot.range_scale()
    im = int(np.clip(np.searchsorted(grid.nodes, r_match), 1, grid.size - 1))
    gmax = math.sqrt(depth)
    for attempt in range(4):
        m = samples * 2 ** attempt
        # uniform in energy plus a geometric cluster toward threshold
        energies = np.linspace(0.0, depth, m + 1)[1:]
        gam = np.unique(np.concatenate((np.sqrt(energies), np.geomspace(1e-6 * gmax, gmax, m))))
        gam = gam[gam < gmax * (1 - 1e-12)]
        vals = np.array([_mismatch(pot, grid, ell, g, im) for g in gam])
        brackets = np.nonzero(np.sign(vals[1:]) * np.sign(vals[:-1]) < 0)[0]
        roots = []
        for i in brackets:
            ga, gb = gam[i], gam[i + 1]
            root = brentq(lambda g: _mismatch(pot, grid, ell, g, im), ga, gb,
                          xtol=1e-15 * gb, rtol=4 * np.finfo(float).eps, maxiter=200)
            roots.append(root)
        if len(roots) == n_nodes:
            return BoundStateSpectrum(tuple(sorted(roots, reverse=True)), n_nodes, float(grid.nodes[im]))
    raise ConsistencyError(f"bound-state search found {len(roots)} states but the zero-energy "
                           f"solution has {n_nodes} nodes; refine the grid")
