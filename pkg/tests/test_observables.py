from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from erange.errors import DomainError, PreconditionError, ResonanceError
from erange.grid import make_grid
from erange.observables import (ConsistencyWarning, Divergent, ZeroScatteringLengthError,
                                b_coefficient, barred_coefficients, default_k_grid,
                                direct_effective_range, effective_range, fit_effective_range,
                                levinson, low_k_expansion, phase_shift_curve, phase_shift_integral,
                                phase_shift_matching, scattering_length, scattering_length_forms,
                                subtracted_phase, tail_terms, zero_energy_expansion)
from erange.potential import ExponentialTail, PowerTail, SquareBarrier, SquareWell, TruncatedAt
from erange.radial import bound_states

BARRIER = SquareBarrier(4.0, 1.0)


def wrap(d):
    return (d + math.pi / 2) % math.pi - math.pi / 2


@pytest.mark.parametrize("ell", [0, 1, 2])
@pytest.mark.parametrize("k", [0.05, 0.7, 1.9, 2.1, 6.0])
def test_barrier_phase_shift_against_closed_form(ell, k):
    ref = float(oracles.barrier_delta(k, ell))
    assert phase_shift_matching(BARRIER, k, ell) == pytest.approx(ref, abs=1e-9)
    assert phase_shift_integral(BARRIER, k, ell) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("k", [0.3, 1.0, 3.0])
def test_well_phase_shift_against_closed_form(k):
    ref = float(oracles.barrier_delta(k, 0, V0=-5))
    assert wrap(phase_shift_matching(SquareWell(5.0, 1.0), k, 0) - ref) == pytest.approx(0.0, abs=1e-9)


def test_integral_formula_rejects_attractive_potential():
    with pytest.raises(PreconditionError, match="V\\(r\\) >= 0"):
        phase_shift_integral(SquareWell(5.0, 1.0), 1.0)


@pytest.mark.parametrize("k", [0.01, 0.5, 3.0])
def test_hard_sphere_phase(k):
    assert wrap(phase_shift_matching(SquareBarrier(1e8, 1.0), k, 0) + k) == pytest.approx(0.0, abs=2e-4 * max(k, 1))


@given(st.floats(0.05, 20.0), st.floats(0.2, 2.0), st.floats(0.02, 5.0))
def test_repulsion_gives_negative_phase(V0, R, k):
    assert phase_shift_integral(SquareBarrier(V0, R), k, 0) < 0.0


def test_free_potential_has_zero_phase():
    free = SquareBarrier(0.0, 1.0)
    assert phase_shift_matching(free, 1.0, 2) == pytest.approx(0.0, abs=1e-12)
    assert phase_shift_integral(free, 1.0, 0) == 0.0


def test_barrier_scattering_length():
    a = scattering_length(BARRIER)
    forms = scattering_length_forms(BARRIER)
    ref = float(oracles.barrier_a0())
    assert a == pytest.approx(ref, rel=1e-10)
    assert forms["limit"] == pytest.approx(ref, rel=1e-10)


def test_power_tail_scattering_length_against_independent_integrator():
    assert scattering_length(PowerTail(1.0, 1.0, 6.0)) == pytest.approx(
        oracles.FROZEN["power_tail_6_a0"], abs=2e-10)


def test_scattering_length_of_slow_tail_is_divergent():
    a = scattering_length(PowerTail(1.0, 1.0, 2.5))
    assert isinstance(a, Divergent)
    assert a.growth_exponent == pytest.approx(0.5, abs=0.1)
    with pytest.raises(PreconditionError):
        b_coefficient(PowerTail(1.0, 1.0, 2.5))
    with pytest.raises(PreconditionError):
        effective_range(a, 0.0)


def test_effective_range_of_r4_tail_is_divergent_with_exponent_one():
    res = direct_effective_range(PowerTail(1.0, 1.0, 4.0), 0)
    assert isinstance(res.r_eff, Divergent)
    assert res.r_eff.growth_exponent == pytest.approx(1.0, abs=0.1)


def test_zero_scattering_length():
    with pytest.raises(ZeroScatteringLengthError):
        effective_range(0.0, 0.1)
    with pytest.raises(ZeroDivisionError):
        effective_range(0.0, 0.1)


def test_barrier_effective_range_against_closed_form():
    ref = float(oracles.barrier_effective_range())
    r = effective_range(scattering_length(BARRIER), b_coefficient(BARRIER))
    assert r == pytest.approx(ref, rel=1e-8)
    assert low_k_expansion(BARRIER, 0).r_eff == pytest.approx(ref, rel=1e-3)


@given(st.floats(1e-4, 1e-2), st.floats(0.5, 2.0))
def test_b_matches_weak_coupling_limit(V0, R):
    # first order: b = int V r^4 / 3 = V0 R^5 / 15
    b = b_coefficient(SquareBarrier(V0, R))
    assert b == pytest.approx(V0 * R ** 5 / 15, rel=3 * V0 * R * R)


def test_b_sign_matches_small_k_phase():
    a = scattering_length(BARRIER)
    b = b_coefficient(BARRIER)
    k = 1e-2
    d = phase_shift_matching(BARRIER, k, 0)
    # d = -k a + b k^3 + O(k^5)
    assert (d + k * a) / k ** 3 == pytest.approx(b, rel=1e-3)


def test_consistency_warning_is_not_raised_for_barrier():
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConsistencyWarning)
        scattering_length(BARRIER)


@pytest.mark.parametrize("pot", [BARRIER, ExponentialTail(1.0, 1.0), SquareWell(5.0, 1.0)])
def test_p_wave_expansion_matches_fit(pot):
    z = zero_energy_expansion(pot, 1)
    fit = low_k_expansion(pot, 1)
    # the {1, k^2} window admits a k^4 bias of order 1e-6 in the intercept
    assert fit.a == pytest.approx(z["a"], rel=2e-5)
    assert fit.r_eff == pytest.approx(z["r_eff"], rel=2e-3)


def test_s_wave_expansion_routes_agree():
    z = zero_energy_expansion(BARRIER, 0)
    assert z["a"] == pytest.approx(scattering_length(BARRIER), rel=1e-10)
    assert z["b"] == pytest.approx(b_coefficient(BARRIER), rel=1e-8)


def test_fit_recovers_synthetic_expansion():
    k = np.geomspace(1e-3, 0.1, 40)
    a, r = 1.3, 0.8
    delta = np.arctan(k / (-1 / a + r * k * k / 2))
    fit = fit_effective_range(k, delta, 0)
    assert fit["a"] == pytest.approx(a, rel=1e-9)
    assert fit["r_eff"] == pytest.approx(r, rel=1e-6)


def test_tail_terms():
    assert tail_terms(PowerTail(1, 1, 6.0), 0) == [(3.0, False), (4.0, True)]
    assert tail_terms(PowerTail(1, 1, 7.0), 0) == [(4.0, True)]
    assert tail_terms(PowerTail(1, 1, 10.0), 0) == []
    assert tail_terms(BARRIER, 0) == []


@pytest.mark.parametrize("depth,n", [(5.0, 1), (30.0, 2)])
def test_levinson(depth, n):
    res = levinson(SquareWell(depth, 1.0), 0)
    assert res.n == n == res.node_count
    assert res.delta_at_kmin == pytest.approx(n * math.pi, abs=0.05)
    assert np.all(np.abs(np.diff(res.curve.delta)) < math.pi / 2)


def test_levinson_refuses_zero_energy_resonance():
    with pytest.raises(ResonanceError):
        levinson(SquareWell((math.pi / 2) ** 2, 1.0), 0)


def test_levinson_on_barrier():
    res = levinson(BARRIER, 0)
    assert res.n == 0 and abs(res.delta_at_kmin) < 1e-2


def test_subtracted_phase_closure():
    pot = SquareWell(5.0, 1.0)
    gammas = bound_states(pot, 0).gammas
    k = default_k_grid(pot)
    sub = subtracted_phase(phase_shift_curve(pot, 0, k), gammas)
    a_bar = fit_effective_range(k, sub.delta, 0)["a"]
    a = float(oracles.well_a0())
    assert a_bar == pytest.approx(a - 2 / gammas[0], rel=1e-2)


def test_barred_coefficients_need_positive_gammas():
    with pytest.raises(DomainError):
        barred_coefficients(1.0, 0.1, [0.0])
    assert barred_coefficients(1.0, 0.5, [2.0]) == {"a_bar": 0.0, "b_bar": 0.25}


def test_curve_is_deterministic_across_worker_counts():
    k = np.geomspace(0.01, 5, 25)
    one = phase_shift_curve(SquareWell(30.0, 1.0), 0, k, workers=1).delta
    many = phase_shift_curve(SquareWell(30.0, 1.0), 0, k, workers=4).delta
    assert np.array_equal(one, many)


def test_curve_rejects_bad_grid():
    with pytest.raises(DomainError):
        phase_shift_curve(BARRIER, 0, [1.0, 0.5])
    with pytest.raises(DomainError):
        phase_shift_curve(BARRIER, 0, [1.0], method="numerov")


def test_truncation_leaves_compact_potential_unchanged():
    cut = TruncatedAt(BARRIER, 5.0)
    assert scattering_length(cut) == pytest.approx(scattering_length(BARRIER), rel=1e-12)


@pytest.mark.parametrize("R_max", [20.0, 40.0])
def test_phase_shift_insensitive_to_rmax(R_max):
    pot = PowerTail(1.0, 1.0, 6.0)
    k = 0.5
    ref = phase_shift_matching(pot, k, 0)
    assert phase_shift_matching(pot, k, 0, make_grid(pot, k_max=k, r_max=R_max)) == pytest.approx(ref, abs=1e-9)
