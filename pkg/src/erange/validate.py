"""Self-validation: the invariant checks behind ``erange validate``.

Each check returns a :class:`CheckResult`; ``run_all`` executes them in a
fixed order.  A check that hits an expected limitation (for example the
Volterra iteration on a near-impenetrable barrier) reports SKIP with the
reason instead of FAIL.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .errors import ErangeError, IterationError
from .grid import make_grid
from .observables import (barred_coefficients, effective_range, fit_effective_range,
                          default_k_grid, levinson, low_k_expansion, phase_shift_curve,
                          phase_shift_integral, phase_shift_matching, scattering_length,
                          scattering_length_forms, b_coefficient, subtracted_phase,
                          zero_energy_expansion)
from .potential import (PowerTail, SquareBarrier, SquareWell, builtin_catalog, from_dict,
                        is_nonnegative, predict_finiteness, tail_moment, to_dict)
from .radial import (asymptotic_slope, bound_states, count_nodes, hille_normalize,
                     identity_residual, solve_regular, solve_zero_bounded,
                     solve_zero_regular_volterra, wronskian)
from .scans import DEFAULT_R_VALUES, theorem_matrix
from .special import riccati_bessel, riccati_bessel_downward, riccati_bessel_upward


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    status: str  # PASS, FAIL or SKIP
    detail: str


def _result(module, name, ok, detail):
    return CheckResult(module, name, "PASS" if ok else "FAIL", detail)


# ----------------------------------------------------------------- potential


def check_serialisation():
    bad = [n for n, p in builtin_catalog().items() if from_dict(to_dict(p)) != p]
    return _result("potential", "to_dict/from_dict round trip", not bad,
                   f"mismatched: {bad}" if bad else "all built-ins")


def check_finiteness_thresholds():
    wrong = []
    for ell in (0, 1, 2):
        for s in (2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 9.0):
            pred = predict_finiteness(PowerTail(1.0, 1.0, s), ell)
            if pred["a_finite"] != (s > 2 * ell + 3) or pred["r_finite"] != (s > 2 * ell + 5):
                wrong.append((ell, s))
    return _result("potential", "finiteness thresholds 2l+3, 2l+5", not wrong, f"wrong cells: {wrong}")


def check_tail_radius():
    worst = 0.0
    for name, pot in builtin_catalog().items():
        R = make_grid(pot).nodes[-1]
        worst = max(worst, tail_moment(pot, 1.0, R, absolute=True))
    return _result("potential", "default R_max meets tail tolerance", worst < 1e-10,
                   f"max int_R r|V| = {worst:.2e}")


# ------------------------------------------------------------------- special


def check_riccati_wronskian():
    x = np.geomspace(1e-3, 200.0, 400)
    worst = 0.0
    for ell in range(6):
        rb = riccati_bessel(ell, x)
        w = rb.u_prime * rb.v - rb.u * rb.v_prime
        worst = max(worst, float(np.max(np.abs(w - 1.0))))
    return _result("special", "u' v - u v' = 1", worst < 1e-10, f"max error {worst:.2e}")


def check_recurrence_directions():
    x = np.linspace(20.0, 60.0, 50)
    up = riccati_bessel_upward(8, x)
    down = riccati_bessel_downward(8, x)
    err = float(np.max(np.abs(up.u - down)))
    return _result("special", "upward and downward recurrences agree (x > l)", err < 1e-12,
                   f"max |du| {err:.2e}")


# -------------------------------------------------------------------- radial


def check_wronskian_suite():
    worst, where = 0.0, ""
    for name, pot in builtin_catalog().items():
        grid = make_grid(pot)
        for ell in (0, 1, 2):
            phi = hille_normalize(solve_regular(pot, 0.0, ell, grid), pot)
            chi = solve_zero_bounded(pot, ell, grid)
            w = wronskian(phi, chi)
            err = float(np.max(np.abs(w.nodewise - (2 * ell + 1))))
            if err > worst:
                worst, where = err, f"{name}, l={ell}"
    return _result("radial", "Wronskian phi0' chi0 - phi0 chi0' = 2l+1", worst < 1e-7,
                   f"max deviation {worst:.2e} ({where})")


def check_volterra_vs_ode():
    worst, skipped = 0.0, []
    for name, pot in builtin_catalog().items():
        grid = make_grid(pot)
        ode = solve_regular(pot, 0.0, 0, grid)
        try:
            vol = solve_zero_regular_volterra(pot, 0, grid)
        except IterationError:
            skipped.append(name)
            continue
        a = ode.phi * np.exp(ode.log_scale)
        b = vol.phi * np.exp(vol.log_scale)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300 + np.abs(b)))))
    detail = f"max relative difference {worst:.2e}"
    if skipped:
        detail += f"; Volterra not convergent for {skipped} (ODE path used)"
    return _result("radial", "Volterra and ODE solutions agree", worst < 1e-8, detail)


def check_monotone_slope():
    bad = []
    for name, pot in builtin_catalog().items():
        if not is_nonnegative(pot):
            continue
        sol = solve_regular(pot, 0.0, 0, make_grid(pot))
        dp = sol.phi_prime * np.exp(sol.log_scale)
        if np.any(np.diff(dp) < -1e-12 * np.abs(dp[1:])):
            bad.append(name)
    return _result("radial", "phi0' non-decreasing for V >= 0", not bad, f"violations: {bad}")


def check_slope_limit():
    pot = PowerTail(1.0, 1.0, 4.0)
    vals = [asymptotic_slope(pot, make_grid(pot, r_max=R))["slope"] for R in (50.0, 100.0, 200.0, 400.0)]
    inc = np.abs(np.diff(vals))
    ok = bool(np.all(inc[1:] < inc[:-1]) or inc[-1] < 1e-12)
    return _result("radial", "phi0'(R_max) converges as R_max doubles", ok,
                   f"increments {', '.join(f'{x:.1e}' for x in inc)}")


def check_identity():
    worst = 0.0
    for pot in (SquareBarrier(4.0, 1.0), PowerTail(1.0, 1.0, 6.0)):
        for k in (0.1, 1.0):
            grid = make_grid(pot, k_max=k, r_max=40.0)
            worst = max(worst, identity_residual(pot, k, grid))
    return _result("radial", "phi phi0' - phi0 phi' = k^2 int phi phi0", worst < 1e-8,
                   f"max normalised residual {worst:.2e}")


def check_nodal_theorem():
    bad = []
    for depth in (1.0, 2.0, 4.0, 10.0, 30.0, 60.0):
        pot = SquareWell(depth, 1.0)
        spec = bound_states(pot, 0)
        nodes = count_nodes(solve_regular(pot, 0.0, 0, make_grid(pot)), pot)
        if nodes != len(spec):
            bad.append((depth, nodes, len(spec)))
    return _result("radial", "node count equals bound-state count", not bad, f"mismatches: {bad}")


# --------------------------------------------------------------- observables


def check_method_equivalence():
    worst = 0.0
    k = np.geomspace(0.01, 10.0, 8)
    for pot in (SquareBarrier(4.0, 1.0), PowerTail(1.0, 1.0, 6.0)):
        for ell in (0, 1, 2):
            d1 = phase_shift_curve(pot, ell, k, "integral").delta
            d2 = phase_shift_curve(pot, ell, k, "matching").delta
            worst = max(worst, float(np.max(np.abs(d1 - d2))))
    return _result("observables", "integral and matching phase shifts agree", worst < 1e-7,
                   f"max |difference| {worst:.2e}")


def check_sign_law():
    bad = []
    for name, pot in builtin_catalog().items():
        if not is_nonnegative(pot):
            continue
        for k in (0.05, 0.5, 2.0):
            if phase_shift_integral(pot, k, 0) > 0.0:
                bad.append((name, k))
    return _result("observables", "repulsive potentials give delta0 <= 0", not bad, f"violations: {bad}")


def check_scattering_length_forms():
    worst = 0.0
    for name, pot in builtin_catalog().items():
        if not is_nonnegative(pot) or not predict_finiteness(pot, 0)["a_finite"]:
            continue
        f = scattering_length_forms(pot)
        worst = max(worst, abs(f["integral"] - f["limit"]) / max(abs(f["integral"]), 1e-300))
    return _result("observables", "integral and limit forms of a0 agree", worst < 1e-6,
                   f"max relative difference {worst:.2e}")


def check_effective_range_closure():
    pot = PowerTail(1.0, 1.0, 6.0)
    r_direct = effective_range(scattering_length(pot), b_coefficient(pot))
    r_fit = low_k_expansion(pot, 0).r_eff
    rel = abs(r_direct - r_fit) / abs(r_direct)
    return _result("observables", "r0 from (a, b) matches the low-k fit", rel < 1e-3,
                   f"relative difference {rel:.2e}")


def check_levinson():
    details, ok = [], True
    for depth, n in ((5.0, 1), (30.0, 2)):
        res = levinson(SquareWell(depth, 1.0), 0)
        good = res.n == n and res.node_count == n and abs(res.delta_at_kmin - n * math.pi) < 0.05
        ok = ok and good
        details.append(f"depth {depth:g}: n={res.n}, residual {res.residual:.1e}")
    return _result("observables", "delta0(0) = n pi", ok, "; ".join(details))


def check_subtracted_closure():
    pot = SquareWell(5.0, 1.0)
    gammas = bound_states(pot, 0).gammas
    a = zero_energy_expansion(pot, 0)["a"]
    k = default_k_grid(pot)
    sub = subtracted_phase(phase_shift_curve(pot, 0, k, "matching"), gammas)
    a_bar = fit_effective_range(k, sub.delta, 0)["a"]
    expect = barred_coefficients(a, 0.0, gammas)["a_bar"]
    rel = abs(a_bar - expect) / abs(expect)
    return _result("observables", "fit of subtracted phase gives a - 2/gamma", rel < 1e-2,
                   f"relative difference {rel:.2e}")


def check_high_energy_limit():
    bad = []
    for name, pot in builtin_catalog().items():
        k = 50.0 / pot.range_scale()
        d = phase_shift_matching(pot, k, 0)
        d = (d + math.pi / 2) % math.pi - math.pi / 2
        if not abs(d) < 0.02:
            bad.append(f"{name} {d:+.3f}")
    return _result("observables", "|delta0(k_max)| < 0.02 at k_max = 50/range", not bad,
                   f"above threshold: {bad}" if bad else "all built-ins")


# --------------------------------------------------------------------- scans


def check_theorem_matrix():
    mat = theorem_matrix((0, 1), (2.5, 3.5, 4.5, 6.0, 10.0))
    failed = [(c.ell, c.s) for c in mat.cells if not c.passed]
    return _result("scans", "theorem matrix matches predictions", not failed, f"failing cells: {failed}")


def check_verdict_stability():
    base = theorem_matrix((0, 1), (2.5, 3.5, 4.5, 6.0, 10.0))
    longer = theorem_matrix((0, 1), (2.5, 3.5, 4.5, 6.0, 10.0),
                            R_values=[2.0 * r for r in DEFAULT_R_VALUES])
    flips = [(a.ell, a.s) for a, b in zip(base.cells, longer.cells)
             if not a.near_threshold and (a.observed_a, a.observed_r) != (b.observed_a, b.observed_r)]
    return _result("scans", "verdicts stable when R_max doubles", not flips, f"flipped: {flips}")


CHECKS: List[Callable[[], CheckResult]] = [
    check_serialisation, check_finiteness_thresholds, check_tail_radius,
    check_riccati_wronskian, check_recurrence_directions,
    check_wronskian_suite, check_volterra_vs_ode, check_monotone_slope, check_slope_limit,
    check_identity, check_nodal_theorem,
    check_method_equivalence, check_sign_law, check_scattering_length_forms,
    check_effective_range_closure, check_levinson, check_subtracted_closure,
    check_high_energy_limit,
    check_theorem_matrix, check_verdict_stability,
]


def run_all() -> List[CheckResult]:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except ErangeError as exc:
            out.append(CheckResult(check.__module__.rsplit(".", 1)[-1], check.__name__, "FAIL",
                                   f"{type(exc).__name__}: {exc}"))
    return out
