"""Riccati-Bessel functions u_l(x) = x j_l(x) and v_l(x) = -x y_l(x).

The normalisation ``u_0 = sin``, ``v_0 = cos`` gives ``u' v - u v' = 1`` for
every l, and makes the l = 0 phase-shift denominator collapse to
``phi'^2 + k^2 phi^2``.

Regimes for u_l: power series for x < 1, Miller downward recurrence for
1 <= x < l, upward recurrence otherwise.  v_l is always recurred upward.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import DomainError

ELL_MAX = 10
_MILLER_EXTRA = 30
_SERIES_TERMS = 30


@dataclass(frozen=True)
class RiccatiBesselValues:
    u: np.ndarray
    u_prime: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray


def double_factorial(n: int) -> int:
    """n!! with the convention (-1)!! = 0!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _check(ell, x, ell_max):
    if ell < 0 or ell > ell_max:
        raise DomainError(f"ell must lie in [0, {ell_max}], got {ell}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)):
        raise DomainError("Riccati-Bessel functions need x > 0 (v_l is singular at the origin)")
    return x


def _u_series(n, x):
    # x^{n+1}/(2n+1)!! * sum_m (-x^2/2)^m / (m! prod_{j=1..m} (2n+2j+1))
    term = np.ones_like(x)
    total = np.ones_like(x)
    half = -0.5 * x * x
    for m in range(1, _SERIES_TERMS):
        term = term * half / (m * (2 * n + 2 * m + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return x ** (n + 1) / double_factorial(2 * n + 1) * total


def _u_miller(ell, x):
    """u_{-1..ell} by downward recurrence, normalised to sin/cos."""
    # start well above both l and x; below x the recurrence is not dominated by u
    xm = float(np.max(x)) if x.size else 0.0
    top = max(ell, int(xm + 10.0 * xm ** (1.0 / 3.0))) + _MILLER_EXTRA
    out = np.zeros((ell + 2,) + x.shape)
    nxt = np.zeros_like(x)
    cur = np.full_like(x, 1e-30)
    for n in range(top, -1, -1):
        # cur holds u_n, nxt holds u_{n+1}
        if n <= ell:
            out[n + 1] = cur
        prev = (2 * n + 1) / x * cur - nxt
        nxt, cur = cur, prev
        big = np.abs(cur) > 1e200
        if np.any(big):
            scale = np.where(big, 1e-200, 1.0)
            cur = cur * scale
            nxt = nxt * scale
            out = out * scale
    out[0] = cur  # u_{-1}
    s, c = np.sin(x), np.cos(x)
    use_sin = np.abs(s) >= np.abs(c)
    norm = np.where(use_sin, s / np.where(use_sin, out[1], 1.0), c / np.where(use_sin, 1.0, out[0]))
    return out * norm


def _ladders(ell, x):
    """Arrays indexed 0..ell+1 holding u_{n-1}, v_{n-1} for n-1 = -1..ell."""
    u = np.empty((ell + 2,) + x.shape)
    v = np.empty((ell + 2,) + x.shape)
    s, c = np.sin(x), np.cos(x)
    u[0], u[1] = c, s
    v[0], v[1] = -s, c
    for n in range(1, ell + 1):
        v[n + 1] = (2 * n - 1) / x * v[n] - v[n - 1]
        u[n + 1] = (2 * n - 1) / x * u[n] - u[n - 1]
    if ell == 0:
        return u, v
    small = x < 1.0
    mid = (x >= 1.0) & (x < ell)
    if np.any(small):
        xs = x[small]
        for n in range(1, ell + 1):
            u[n + 1][small] = _u_series(n, xs)
    if np.any(mid):
        u[:, mid] = _u_miller(ell, x[mid])
    return u, v


def riccati_bessel(ell: int, x, ell_max: int = ELL_MAX) -> RiccatiBesselValues:
    """u_l, u_l', v_l, v_l' at ``x`` (scalar or array), derivatives in x."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(_check(ell, x, ell_max))
    u, v = _ladders(ell, xa)
    ul, ulm = u[ell + 1], u[ell]
    vl, vlm = v[ell + 1], v[ell]
    up = ulm - ell * ul / xa
    vp = vlm - ell * vl / xa
    if scalar:
        return RiccatiBesselValues(float(ul[0]), float(up[0]), float(vl[0]), float(vp[0]))
    return RiccatiBesselValues(ul, up, vl, vp)


def riccati_bessel_upward(ell: int, x, ell_max: int = ELL_MAX) -> RiccatiBesselValues:
    """Same functions by plain upward recurrence (reference for the direction tests)."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(_check(ell, x, ell_max))
    s, c = np.sin(xa), np.cos(xa)
    um, u0, vm, v0 = c, s, -s, c
    for n in range(1, ell + 1):
        um, u0 = u0, (2 * n - 1) / xa * u0 - um
        vm, v0 = v0, (2 * n - 1) / xa * v0 - vm
    vals = RiccatiBesselValues(u0, um - ell * u0 / xa, v0, vm - ell * v0 / xa)
    if scalar:
        return RiccatiBesselValues(*(float(a[0]) for a in (vals.u, vals.u_prime, vals.v, vals.v_prime)))
    return vals


def riccati_bessel_downward(ell: int, x, ell_max: int = ELL_MAX) -> np.ndarray:
    """u_l by Miller downward recurrence for every x (reference)."""
    xa = np.atleast_1d(_check(ell, x, ell_max))
    return _u_miller(ell, xa)[ell + 1]


def decaying_riccati(ell: int, x):
    """Decaying solution of w'' = (1 + l(l+1)/x^2) w, split as ``w = w_red * exp(-x)``.

    ``w ~ exp(-x)`` as x -> inf.  Returns ``(w_red, w_red_prime_total, -x)``
    where the second entry is ``w'(x) * exp(x)``.
    """
    x = np.asarray(x, dtype=float)
    poly = np.zeros_like(x)
    dpoly = np.zeros_like(x)
    for j in range(ell + 1):
        coef = factorial(ell + j) / (factorial(j) * factorial(ell - j) * 2.0 ** j)
        poly = poly + coef * x ** (-j)
        if j:
            dpoly = dpoly - j * coef * x ** (-j - 1)
    return poly, dpoly - poly, -x


def free_small_x(ell: int, x):
    """Leading small-x laws: u ~ x^{l+1}/(2l+1)!!, v ~ (2l-1)!! x^{-l}."""
    x = np.asarray(x, dtype=float)
    return x ** (ell + 1) / double_factorial(2 * ell + 1), double_factorial(2 * ell - 1) * x ** (-ell)


__all__ = [
    "ELL_MAX",
    "RiccatiBesselValues",
    "double_factorial",
    "riccati_bessel",
    "riccati_bessel_upward",
    "riccati_bessel_downward",
    "decaying_riccati",
    "free_small_x",
]
