"""Independent reference values.

Nothing here imports ``erange``.  Closed forms use mpmath at 40 digits; the
power-tail values come from scipy's DOP853 integrator run on its own.
Running this file prints the expensive values, which are frozen in
``FROZEN`` below and used by the tests.

    python3 tests/oracles.py
"""
from __future__ import annotations

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

mp.mp.dps = 40


def barrier_a0(V0=4, R=1):
    """s-wave scattering length of a square barrier: R - tanh(qR)/q."""
    q = mp.sqrt(V0)
    return R - mp.tanh(q * R) / q


def barrier_delta(k, ell, V0=4, R=1):
    """Square-barrier (or well, V0 < 0) phase shift from matching at r = R.

    Inside, the regular solution is ``x j_l(x)`` with complex momentum
    ``kappa = sqrt(k^2 - V0)``; outside it is ``u cos d + v sin d`` with
    ``u = kr j_l(kr)`` and ``v = -kr y_l(kr)``.
    """
    k, V0, R = mp.mpf(k), mp.mpf(V0), mp.mpf(R)
    kap = mp.sqrt(mp.mpc(k * k - V0))
    inner = lambda r: r * mp.besselj(ell + mp.mpf(1) / 2, kap * r) * mp.sqrt(mp.pi / (2 * kap * r))  # noqa: E731
    L = mp.diff(inner, R) / inner(R)
    L = mp.re(L)
    u = lambda r: k * r * mp.sqrt(mp.pi / (2 * k * r)) * mp.besselj(ell + mp.mpf(1) / 2, k * r)  # noqa: E731
    v = lambda r: -k * r * mp.sqrt(mp.pi / (2 * k * r)) * mp.bessely(ell + mp.mpf(1) / 2, k * r)  # noqa: E731
    uR, vR = u(R), v(R)
    du, dv = mp.diff(u, R), mp.diff(v, R)
    # L (u c + v s) = u' c + v' s  ->  tan d = (u' - L u)/(L v - v')
    return mp.atan((du - L * uR) / (L * vR - dv))


def barrier_effective_range(V0=4, R=1):
    """r0 from d/dE of k cot d at E -> 0, with k cot d in closed form."""
    V0, R = mp.mpf(V0), mp.mpf(R)

    def kcot(E):
        k = mp.sqrt(E)
        q = mp.sqrt(V0 - E)
        d = -k * R + mp.atan(k * mp.tanh(q * R) / q)
        return k * mp.cot(d)

    mp.mp.dps = 60
    val = 2 * mp.diff(kcot, mp.mpf("1e-30"))
    mp.mp.dps = 40
    return val


def well_gamma(V0=5, R=1):
    """Binding momenta of an s-wave square well: q cot(qR) = -gamma, q^2 + gamma^2 = V0."""
    V0 = mp.mpf(V0)
    roots = []
    f = lambda g: mp.sqrt(V0 - g * g) * mp.cot(mp.sqrt(V0 - g * g) * R) + g  # noqa: E731
    grid = [mp.sqrt(V0) * j / 4000 for j in range(1, 4000)]
    for a, b in zip(grid[:-1], grid[1:]):
        fa, fb = f(a), f(b)
        if fa * fb < 0 and abs(fa) < 50 and abs(fb) < 50:
            roots.append(mp.findroot(f, (a, b), solver="anderson"))
    return sorted(roots, reverse=True)


def well_a0(V0=5, R=1):
    q = mp.sqrt(V0)
    return R - mp.tan(q * R) / q


def power_tail_a0(A=1.0, core=1.0, s=6.0, R=2.0e4):
    """``R - phi/phi'`` for phi'' = V phi at zero energy, integrated with DOP853.

    The variable is t = log(core + r); the tail error is ``O(R^{3-s})``, about
    1e-13 at the default R for s = 6.
    """
    def rhs(t, y):
        x = np.exp(t)
        # y = (phi, dphi/dr); d/dt = x d/dr
        return [x * y[1], x * A * x ** (-s) * y[0]]

    sol = solve_ivp(rhs, (np.log(core), np.log(core + R)), [0.0, 1.0], method="DOP853",
                    rtol=1e-13, atol=1e-20)
    phi, dphi = sol.y[:, -1]
    return (np.exp(sol.t[-1]) - core) - phi / dphi


FROZEN = {
    # python3 tests/oracles.py
    "power_tail_6_a0": 0.03248679169,  # DOP853, R = 2e4; checked at R = 4e4 below
}


if __name__ == "__main__":
    print("barrier a0      ", barrier_a0())
    print("barrier r0      ", barrier_effective_range())
    print("well gammas     ", well_gamma())
    print("well(30) gammas ", well_gamma(30))
    print("well a0         ", well_a0())
    print("power_tail_6 a0 ", power_tail_a0(), power_tail_a0(R=4e4))
    for ell in (0, 1, 2):
        print("barrier delta l=%d k=1" % ell, barrier_delta(1.0, ell))
